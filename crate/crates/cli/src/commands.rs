use std::f64::consts::PI;
use std::path::Path;

use krylov_gauss::evolve::{
    closed_form, linspace, propagate, propagate_with, spread_complexity, PropagateOptions,
};
use krylov_gauss::gaussian::{
    self, dirac_mode, dirac_summed, dirac_theta, family_fock_bound, fermion_geometric, fermion_pair,
    geometric_complexity, relative_boson, single_mode_covariance, tfd_bounds, BosonCovariance,
    QuadratureOrdering, Statistics,
};
use krylov_gauss::hilbert::{
    build_hamiltonian, FockSpace, StateVector, DEFAULT_SINGLE_MODE_DIM, DEFAULT_TWO_MODE_DIM,
};
use krylov_gauss::lanczos::{lanczos_iterate, TridiagonalData};
use krylov_gauss::moments::{lanczos_from_moments, moments_from_jet, survival_jet, MomentLanczos};
use krylov_gauss::scalar::{BigFloat, Rational, Scalar};
use krylov_gauss::verify::{self, VerifyOptions, CRITERIA};
use krylov_gauss::{Error as CoreError, StateFamily};
use rayon::prelude::*;

use crate::config::{FamilyArg, FormatArg, Precision, RunConfig, NUMERIC_KEYS};
use crate::error::{CliError, CliResult};
use crate::svg;
use crate::table::{Cell, CsvTable};

const COEFF_TOL: f64 = 1e-8;
const CURVE_TOL: f64 = 1e-6;
/// Values of `C` below this are compared absolutely.
const CURVE_FLOOR: f64 = 1e-3;
/// Largest automatic Fock truncation per mode.
const MAX_AUTO_DIM: usize = 4096;
const MAX_AUTO_TWO_MODE_DIM: usize = 512;
const DIRAC_GRID: usize = 256;

fn curve_err(got: f64, expected: f64) -> f64 {
    (got - expected).abs() / expected.abs().max(CURVE_FLOOR)
}

fn time_grid(cfg: &RunConfig) -> Vec<f64> {
    linspace(0.0, cfg.t_max, cfg.t_steps)
}

/// Lanczos route on a truncated Fock space. Without `--dim` the truncation
/// doubles until the propagated chain keeps its tail below tolerance.
fn lanczos_route(
    family: &StateFamily,
    grid: &[f64],
    dim: Option<usize>,
) -> CliResult<(TridiagonalData, krylov_gauss::evolve::AmplitudeSeries)> {
    let two_mode = matches!(family, StateFamily::TwoMode { .. });
    let mut d = dim.unwrap_or(if two_mode { DEFAULT_TWO_MODE_DIM } else { DEFAULT_SINGLE_MODE_DIM });
    let max_auto = if two_mode { MAX_AUTO_TWO_MODE_DIM } else { MAX_AUTO_DIM };
    loop {
        let space = if two_mode { FockSpace::two_mode(d)? } else { FockSpace::single_mode(d)? };
        let h = build_hamiltonian(family, space)?;
        let mut tri = lanczos_iterate(&h, &StateVector::vacuum(space), d, None)?.tri;
        // Breakdown inside a truncated space is an artefact of the cutoff.
        tri.terminated = false;
        match propagate(&tri, grid, tri.len()) {
            Ok(amps) => return Ok((tri, amps)),
            Err(CoreError::TruncationInsufficient { .. })
                if dim.is_none() && 2 * d <= max_auto =>
            {
                d *= 2
            }
            Err(e) => return Err(e.into()),
        }
    }
}

fn jacobi_from_moments<S: Scalar>(family: &StateFamily, count: usize, one: &S) -> CliResult<MomentLanczos<S>> {
    let mu = moments_from_jet(&survival_jet(family, 2 * count, one)?);
    Ok(lanczos_from_moments(&mu, count)?)
}

fn moment_route(cfg: &RunConfig, family: &StateFamily) -> CliResult<(TridiagonalData, Vec<f64>)> {
    let count = cfg.order / 2;
    let (tri, b) = match cfg.precision {
        Precision::Exact => {
            let jac = jacobi_from_moments(family, count, &Rational::integer(1))?;
            (jac.to_tridiagonal()?, jac.b())
        }
        Precision::Float(bits) => {
            let jac = jacobi_from_moments(family, count, &BigFloat::from_i64(1, bits)?)?;
            (jac.to_tridiagonal()?, jac.b())
        }
    };
    Ok((tri, b))
}

/// `t, C, C_F, tail_mass` from the Lanczos route, cross-checked against the
/// moment route and the closed form.
pub fn complexity(cfg: &RunConfig) -> CliResult<CsvTable> {
    let family = cfg.state_family()?;
    if !matches!(
        family,
        StateFamily::Coherent { .. } | StateFamily::Squeezed { .. } | StateFamily::TwoMode { .. }
    ) {
        return Err(CliError::Validation(format!(
            "complexity supports coherent, squeezed and two-mode (got {})",
            family.name()
        )));
    }
    let grid = time_grid(cfg);
    let (tri, amps) = lanczos_route(&family, &grid, cfg.dim)?;
    let curve = spread_complexity(&amps);

    let (moment_tri, moment_b) = moment_route(cfg, &family)?;
    let b_lanczos = |n: usize| {
        if n < tri.len() {
            tri.b[n]
        } else {
            tri.b_tail.unwrap_or(0.0)
        }
    };
    for n in 0..moment_tri.len().min(tri.len()) {
        let scale = b_lanczos(n + 1).max(1.0);
        let da = (tri.a[n] - moment_tri.a[n]).abs() / scale;
        let db = (moment_b[n + 1] - b_lanczos(n + 1)).abs() / b_lanczos(n + 1).abs().max(f64::MIN_POSITIVE);
        if da > COEFF_TOL || db > COEFF_TOL {
            return Err(CliError::RouteMismatch(format!(
                "level {n}: Lanczos (a, b) = ({:e}, {:e}), moments (a, b) = ({:e}, {:e}), tol {COEFF_TOL:e}",
                tri.a[n],
                b_lanczos(n + 1),
                moment_tri.a[n],
                moment_b[n + 1]
            )));
        }
    }
    let moment_amps = propagate_with(
        &moment_tri,
        &grid,
        moment_tri.len(),
        PropagateOptions {
            strict: false,
            ..Default::default()
        },
    )?;
    let moment_curve = spread_complexity(&moment_amps);
    let reference = closed_form(&family, &grid)?.curve;
    for (j, &t) in grid.iter().enumerate() {
        let c = curve.c[j];
        if moment_amps.accepted[j] && curve_err(moment_curve.c[j], c) > CURVE_TOL {
            return Err(CliError::RouteMismatch(format!(
                "t = {t}: Lanczos C = {c:e}, moments C = {:e}, tol {CURVE_TOL:e}",
                moment_curve.c[j]
            )));
        }
        if curve_err(c, reference.c[j]) > CURVE_TOL {
            return Err(CliError::RouteMismatch(format!(
                "t = {t}: Lanczos C = {c:e}, closed form {:e}, tol {CURVE_TOL:e}",
                reference.c[j]
            )));
        }
    }

    let mut table = CsvTable::new(["t", "C", "C_F", "tail_mass"]);
    for (j, &t) in grid.iter().enumerate() {
        table.push_numbers(&[t, curve.c[j], family_fock_bound(&family, t)?, amps.tail_mass[j]])?;
    }
    Ok(table)
}

fn axis(max: f64, steps: usize, name: &str) -> CliResult<Vec<f64>> {
    if !(max > 0.0 && max.is_finite()) {
        return Err(CliError::Validation(format!("sweep range for `{name}` must be positive (got {max})")));
    }
    Ok(linspace(0.0, max, steps))
}

fn single_mode_row(r: f64, theta: f64, phi: f64) -> CliResult<Vec<f64>> {
    let v = single_mode_covariance(r, theta, phi)?;
    let vacuum = BosonCovariance::vacuum(1, QuadratureOrdering::Qqpp);
    let rel = relative_boson(&v, &vacuum)?;
    let bound = gaussian::fock_bound(&rel.delta, Statistics::Boson)?;
    let mut eig: Vec<f64> = rel.eigenvalues().iter().map(|z| z.re).collect();
    eig.sort_by(f64::total_cmp);
    Ok(vec![r, bound, eig[0], eig[eig.len() - 1]])
}

/// Bound sweep along the primary axis of a covariance family:
/// `r` (single mode), `α` (TFD), `θ` (fermion pair) or `|p|` (Dirac).
pub fn bound(cfg: &RunConfig) -> CliResult<CsvTable> {
    let n = cfg.t_steps;
    match cfg.require_family()? {
        FamilyArg::SingleMode => {
            let (theta, phi) = (cfg.theta.unwrap_or(0.0), cfg.phi.unwrap_or(0.0));
            let mut table = CsvTable::new(["r", "C_F", "lambda_min", "lambda_max"]);
            for r in axis(cfg.r.unwrap_or(1.0), n, "r")? {
                table.push_numbers(&single_mode_row(r, theta, phi)?)?;
            }
            Ok(table)
        }
        FamilyArg::Tfd => {
            let base = cfg.tfd_params()?;
            let mut table = CsvTable::new([
                "alpha",
                "C_plus",
                "C_minus",
                "C_max",
                "C_sigma",
                "formation_plus",
                "formation_minus",
                "formation_sigma",
                "CG_plus",
                "CG_minus",
                "CG_total",
                "CG_formation",
            ]);
            for alpha in axis(cfg.alpha.unwrap_or(3.0), n, "alpha")? {
                let params = krylov_gauss::TfdParams { alpha, ..base };
                let b = tfd_bounds(&params)?;
                let g = geometric_complexity(params.lambda, alpha)?;
                table.push_numbers(&[
                    alpha, b.c_plus, b.c_minus, b.c_max, b.c_sigma, b.dc_plus, b.dc_minus, b.dc_sigma,
                    g.cg_plus, g.cg_minus, g.cg_total, g.formation,
                ])?;
            }
            Ok(table)
        }
        FamilyArg::FermionPair => {
            let phi = cfg.phi.unwrap_or(0.0);
            let mut table = CsvTable::new(["theta", "C_per_fermion", "C_summed", "C_geometric"]);
            for theta in axis(cfg.theta.unwrap_or(PI), n, "theta")? {
                let report = fermion_pair(theta, phi)?;
                let geometric = if theta <= PI {
                    Cell::Num(fermion_geometric(theta)?)
                } else {
                    Cell::Empty
                };
                table.push(vec![
                    theta.into(),
                    report.bound_per_fermion.into(),
                    report.bound_summed.into(),
                    geometric,
                ])?;
            }
            Ok(table)
        }
        FamilyArg::Dirac => {
            let base = cfg.dirac_params();
            let kind = cfg.dirac_kind();
            let p_max = cfg.p.unwrap_or(10.0);
            if !(p_max > 0.0 && p_max.is_finite()) {
                return Err(CliError::Validation(format!("sweep range for `p` must be positive (got {p_max})")));
            }
            let mut table = CsvTable::new(["p", "C", "theta", "C_summed"]);
            for k in 1..=n {
                let p = p_max * k as f64 / n as f64;
                let params = krylov_gauss::DiracModeParams {
                    p_mag: p,
                    cutoff: p,
                    ..base
                };
                table.push_numbers(&[
                    p,
                    dirac_mode(&params, kind)?,
                    dirac_theta(&params, kind)?,
                    dirac_summed(&params, kind, DIRAC_GRID)?,
                ])?;
            }
            Ok(table)
        }
        other => Err(CliError::Validation(format!(
            "bound supports single-mode, tfd, fermion-pair and dirac (got {})",
            family_label(other)
        ))),
    }
}

pub fn family_label(family: FamilyArg) -> &'static str {
    match family {
        FamilyArg::Coherent => "coherent",
        FamilyArg::Squeezed => "squeezed",
        FamilyArg::DisplacedSqueezed => "displaced-squeezed",
        FamilyArg::TwoMode => "two-mode",
        FamilyArg::SingleMode => "single-mode",
        FamilyArg::Tfd => "tfd",
        FamilyArg::FermionPair => "fermion-pair",
        FamilyArg::Dirac => "dirac",
    }
}

fn moment_rows<S: Scalar>(
    family: &StateFamily,
    order: usize,
    one: &S,
    exact: bool,
) -> CliResult<CsvTable> {
    let mu = moments_from_jet(&survival_jet(family, order, one)?);
    let jac = lanczos_from_moments(&mu, order / 2)?;
    let cell = |x: &S| if exact { Cell::Text(x.render()) } else { Cell::Num(x.to_f64()) };
    let mut table = CsvTable::new(["n", "mu_n", "a_n", "b_n", "b_n_squared"]);
    for (n, m) in mu.mu.iter().enumerate() {
        let mu_cell = if m.is_real() {
            cell(&m.re)
        } else if exact {
            Cell::Text(m.render())
        } else {
            Cell::Text(format!("{}i", m.im.to_f64()))
        };
        let a = jac.a.get(n).map_or(Cell::Empty, cell);
        let (b, b2) = match jac.b_squared.get(n) {
            Some(b2) => (Cell::Num(b2.to_f64().sqrt()), cell(b2)),
            None => (Cell::Empty, Cell::Empty),
        };
        table.push(vec![Cell::Text(n.to_string()), mu_cell, a, b, b2])?;
    }
    Ok(table)
}

/// Moments `μₙ` through `--order` and the Jacobi coefficients they determine.
pub fn moments(cfg: &RunConfig) -> CliResult<CsvTable> {
    let family = cfg.state_family()?;
    match cfg.precision {
        Precision::Exact => moment_rows(&family, cfg.order, &Rational::integer(1), true),
        Precision::Float(bits) => moment_rows(&family, cfg.order, &BigFloat::from_i64(1, bits)?, false),
    }
}

fn base_table(cfg: &RunConfig) -> CliResult<CsvTable> {
    match cfg.require_family()? {
        FamilyArg::Coherent | FamilyArg::Squeezed | FamilyArg::TwoMode => complexity(cfg),
        FamilyArg::DisplacedSqueezed => probabilities(cfg),
        _ => bound(cfg),
    }
}

/// Parses `name=v1,v2,...`.
pub fn parse_vary(arg: &str) -> CliResult<(String, Vec<f64>)> {
    let (name, values) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("--vary expects NAME=V1,V2,... (got `{arg}`)")))?;
    let name = name.trim().to_ascii_lowercase().replace('_', "-");
    let name = if name == "m" { "mass".to_string() } else { name };
    if !NUMERIC_KEYS.contains(&name.as_str()) {
        return Err(CliError::Validation(format!("cannot vary `{name}`")));
    }
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("invalid value `{v}` in --vary")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if values.is_empty() {
        return Err(CliError::Validation("--vary needs at least one value".into()));
    }
    Ok((name, values))
}

/// One base table per value of the varied parameter, joined column-wise on
/// the shared first column.
pub fn sweep(cfg: &RunConfig, vary: &str) -> CliResult<CsvTable> {
    let (name, values) = parse_vary(vary)?;
    let tables = values
        .par_iter()
        .map(|&v| base_table(&cfg.with(&name, v)?))
        .collect::<CliResult<Vec<_>>>()?;
    let first = &tables[0];
    let mut header = vec![first.header[0].clone()];
    for &v in &values {
        for col in &first.header[1..] {
            header.push(format!("{col}[{name}={v}]"));
        }
    }
    let mut wide = CsvTable::new(header);
    for (i, row) in first.rows.iter().enumerate() {
        let mut out = vec![row[0].clone()];
        for t in &tables {
            if t.rows[i][0] != row[0] {
                return Err(CliError::Validation(format!(
                    "sweep over `{name}` changes the `{}` axis",
                    first.header[0]
                )));
            }
            out.extend(t.rows[i][1..].iter().cloned());
        }
        wide.push(out)?;
    }
    Ok(wide)
}

/// `|ψ₀|²`, `|ψ₁|²`, `|ψ₂|²`, the three-level partial complexity and its
/// bound for the displaced squeezed family.
pub fn probabilities(cfg: &RunConfig) -> CliResult<CsvTable> {
    let family = cfg.state_family()?;
    if !matches!(family, StateFamily::DisplacedSqueezed { .. }) {
        return Err(CliError::Validation("probabilities need the displaced-squeezed family".into()));
    }
    let grid = time_grid(cfg);
    let cf = closed_form(&family, &grid)?;
    let probs = cf
        .probabilities
        .ok_or_else(|| CliError::Numeric("closed form returned no probabilities".into()))?;
    let bound = cf.curve.bound.unwrap_or_default();
    let mut table = CsvTable::new(["t", "p0", "p1", "p2", "C_K3", "bound"]);
    for (j, &t) in grid.iter().enumerate() {
        table.push_numbers(&[
            t,
            probs.psi0_sq[j],
            probs.psi1_sq[j],
            probs.psi2_sq[j],
            cf.curve.c[j],
            bound[j],
        ])?;
    }
    Ok(table)
}

/// Table for `plot`: an existing CSV or an inline computation.
pub fn plot_table(cfg: &RunConfig, input: Option<&Path>) -> CliResult<CsvTable> {
    match input {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            CsvTable::from_csv(&text)
        }
        None => base_table(cfg),
    }
}

/// Indices of the columns to draw; all numeric columns after the first by
/// default.
pub fn select_columns(table: &CsvTable, columns: Option<&str>) -> CliResult<Vec<usize>> {
    match columns {
        Some(list) => list
            .split(',')
            .map(|name| {
                let name = name.trim();
                table
                    .column_index(name)
                    .filter(|&i| i > 0)
                    .ok_or_else(|| CliError::Validation(format!("no data column `{name}`")))
            })
            .collect(),
        None => Ok((1..table.header.len())
            .filter(|&c| table.column(c).iter().any(Option::is_some))
            .collect()),
    }
}

pub fn render(table: &CsvTable, format: FormatArg, columns: Option<&str>, title: &str) -> CliResult<String> {
    match format {
        FormatArg::Csv => {
            if table.is_empty() {
                return Err(CliError::Validation("table has no rows".into()));
            }
            table.to_csv()
        }
        FormatArg::Svg => {
            table.validate()?;
            svg::render(table, &select_columns(table, columns)?, title)
        }
    }
}

/// Writes to `--output` when given, otherwise to stdout.
pub fn emit(text: &str, output: Option<&Path>) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

/// Runs the selected acceptance criteria; returns the report and whether
/// every criterion that ran passed.
pub fn verify(ids: &[usize], fast: bool, inject_fault: bool) -> CliResult<(String, bool)> {
    let options = VerifyOptions {
        fast,
        perturb_b2: inject_fault.then_some(0.01),
    };
    let ids: Vec<usize> = if ids.is_empty() { (1..=CRITERIA).collect() } else { ids.to_vec() };
    let mut report = String::new();
    let mut all_pass = true;
    for id in ids {
        if verify::criterion_name(id).is_none() {
            return Err(CliError::Validation(format!("no criterion {id} (1..={CRITERIA})")));
        }
        if fast && (id == 3 || id == 4) {
            report.push_str(&format!(
                "criterion {id:>2} SKIP {} (exact arithmetic, skipped by --fast)\n",
                verify::criterion_name(id).unwrap_or_default()
            ));
            continue;
        }
        let r = verify::run_criterion(id, &options)?;
        all_pass &= r.pass;
        report.push_str(&format!("{r}\n"));
    }
    report.push_str(if all_pass { "verify: all criteria passed\n" } else { "verify: FAILED\n" });
    Ok((report, all_pass))
}
