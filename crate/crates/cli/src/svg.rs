use std::fmt::Write as _;

use crate::error::{CliError, CliResult};
use crate::table::CsvTable;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Debug, Clone, Copy, PartialEq)]
struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Axis {
    /// Range padded out to multiples of a 1/2/5 step with about five ticks.
    fn nice(min: f64, max: f64) -> Self {
        let (min, max) = if max > min {
            (min, max)
        } else {
            let pad = if min == 0.0 { 1.0 } else { 0.5 * min.abs() };
            (min - pad, max + pad)
        };
        let raw = (max - min) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let norm = raw / mag;
        let step = mag
            * if norm <= 1.0 {
                1.0
            } else if norm <= 2.0 {
                2.0
            } else if norm <= 5.0 {
                5.0
            } else {
                10.0
            };
        Axis {
            lo: (min / step).floor() * step,
            hi: (max / step).ceil() * step,
            step,
        }
    }

    fn ticks(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step).round() as usize;
        (0..=n).map(|k| self.lo + k as f64 * self.step).collect()
    }

    fn label(&self, v: f64) -> String {
        let v = if v.abs() < 1e-9 * self.step { 0.0 } else { v };
        let big = self.lo.abs().max(self.hi.abs());
        if big >= 1e6 || self.step < 1e-4 {
            format!("{v:.2e}")
        } else {
            let decimals = (-self.step.log10().floor()).max(0.0) as usize;
            format!("{v:.decimals$}")
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line chart of `y_cols` against column 0 on a fixed 800×600 viewport.
pub fn render(table: &CsvTable, y_cols: &[usize], title: &str) -> CliResult<String> {
    if table.is_empty() {
        return Err(CliError::Validation("nothing to plot: table has no rows".into()));
    }
    if y_cols.is_empty() {
        return Err(CliError::Validation("nothing to plot: no data columns".into()));
    }
    let x = table.column(0);
    let series: Vec<(String, Vec<Option<f64>>)> = y_cols
        .iter()
        .map(|&c| (table.header[c].clone(), table.column(c)))
        .collect();
    let finite = |v: &Option<f64>| v.filter(|x| x.is_finite());
    let xs: Vec<f64> = x.iter().filter_map(finite).collect();
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|(_, col)| col.iter().zip(&x).filter(|(_, xv)| finite(xv).is_some()))
        .filter_map(|(y, _)| finite(y))
        .collect();
    if xs.is_empty() || ys.is_empty() {
        return Err(CliError::Validation("nothing to plot: no finite values".into()));
    }
    let fold = |v: &[f64]| {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    };
    let (x_min, x_max) = fold(&xs);
    let (y_min, y_max) = fold(&ys);
    let xa = Axis::nice(x_min, x_max);
    let ya = Axis::nice(y_min, y_max);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |v: f64| LEFT + (v - xa.lo) / (xa.hi - xa.lo) * pw;
    let py = |v: f64| TOP + ph - (v - ya.lo) / (ya.hi - ya.lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="800" height="600" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="400" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        escape(title)
    );
    for t in xa.ticks() {
        let xp = px(t);
        let _ = writeln!(
            s,
            r##"<line x1="{xp:.2}" y1="{:.2}" x2="{xp:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            TOP,
            TOP + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{xp:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            xa.label(t)
        );
    }
    for t in ya.ticks() {
        let yp = py(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{yp:.2}" x2="{:.2}" y2="{yp:.2}" stroke="#dddddd"/>"##,
            LEFT,
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            yp + 4.0,
            ya.label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&table.header[0])
    );

    for (k, (name, col)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for (xv, yv) in x.iter().zip(col) {
            match (finite(xv), finite(yv)) {
                (Some(a), Some(b)) => segments.last_mut().expect("non-empty").push((px(a), py(b))),
                _ => {
                    if !segments.last().expect("non-empty").is_empty() {
                        segments.push(Vec::new());
                    }
                }
            }
        }
        for seg in segments.iter().filter(|seg| !seg.is_empty()) {
            let points: Vec<String> = seg.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                points.join(" ")
            );
        }
        let ly = TOP + 16.0 + 18.0 * k as f64;
        let lx = LEFT + pw - 150.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nice_axes() {
        let a = Axis::nice(0.0, 0.97);
        assert_eq!((a.lo, a.hi, a.step), (0.0, 1.0, 0.2));
        let a = Axis::nice(-3.0, 41.0);
        assert_eq!((a.lo, a.hi, a.step), (-10.0, 50.0, 10.0));
        let a = Axis::nice(2.0, 2.0);
        assert!(a.lo < 2.0 && a.hi > 2.0);
        assert_eq!(Axis::nice(0.0, 1.0).ticks().len(), 6);
    }

    #[test]
    fn deterministic_and_escaped() {
        let mut t = CsvTable::new(["t", "a<b"]);
        for k in 0..10 {
            let x = k as f64 / 9.0;
            t.push_numbers(&[x, x * x]).unwrap();
        }
        let one = render(&t, &[1], "x & y").unwrap();
        assert_eq!(one, render(&t, &[1], "x & y").unwrap());
        assert!(one.contains("a&lt;b") && one.contains("x &amp; y"));
        assert!(one.contains(r#"viewBox="0 0 800 600""#));
    }

    #[test]
    fn empty_table_rejected() {
        let t = CsvTable::new(["t", "C"]);
        assert!(render(&t, &[1], "").is_err());
    }
}
