use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krylov-gauss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 output")
}

/// Parses a numeric CSV into its header and rows.
fn parse(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s}"))
}

fn assert_single_line_error(out: &Output, code: i32, prefix: &str) {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", stderr(out));
    let err = stderr(out);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with(prefix), "{err}");
}

#[test]
fn coherent_curve_matches_alpha_squared_t_squared() {
    let out = run(&["complexity", "--family", "coherent", "--alpha", "100", "--tmax", "0.02", "--steps", "200"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(!text.contains('\r') && text.ends_with('\n'));
    let (header, rows) = parse(&text);
    assert_eq!(header, ["t", "C", "C_F", "tail_mass"]);
    assert_eq!(rows.len(), 200);
    for row in &rows {
        let (t, c, cf) = (num(&row[0]), num(&row[1]), num(&row[2]));
        let expected = 1e4 * t * t;
        assert!((c - expected).abs() <= 1e-6 * expected.max(1e-3), "t={t}: {c} vs {expected}");
        assert!(c <= cf + 1e-9);
    }
}

#[test]
fn two_mode_curve_saturates_fock_bound() {
    let out = run(&["complexity", "--family", "two-mode", "--r", "1", "--tmax", "1.5", "--steps", "31"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (_, rows) = parse(&stdout(&out));
    for row in &rows {
        let t = num(&row[0]);
        let expected = t.sinh().powi(2);
        assert!((num(&row[1]) - expected).abs() <= 1e-6 * expected.max(1e-3));
        assert!((num(&row[2]) - expected).abs() <= 1e-9 * expected.max(1.0));
    }
}

#[test]
fn squeezed_curve_is_half_the_fock_bound() {
    let out = run(&["complexity", "--family", "squeezed", "--eta", "1", "--tmax", "1", "--steps", "11"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (_, rows) = parse(&stdout(&out));
    for row in rows.iter().skip(1) {
        let t = num(&row[0]);
        let fock = t.sinh().powi(2);
        assert!((num(&row[1]) - 0.5 * fock).abs() <= 1e-6 * fock);
        assert!((num(&row[2]) - fock).abs() <= 1e-9 * fock.max(1.0));
    }
}

#[test]
fn fixed_truncation_too_small_reports_time() {
    let out = run(&["complexity", "--family", "squeezed", "--eta", "3", "--tmax", "1", "--dim", "64"]);
    assert_single_line_error(&out, 2, "KG-NUMERIC: truncation insufficient at t = ");
}

#[test]
fn invalid_arguments_are_validation_errors() {
    assert_single_line_error(&run(&["complexity", "--family", "coherent", "--steps", "1"]), 1, "KG-VALIDATION");
    assert_single_line_error(&run(&["complexity", "--family", "coherent", "--tmax", "0"]), 1, "KG-VALIDATION");
    assert_single_line_error(&run(&["complexity", "--family", "coherent", "--colour", "red"]), 1, "KG-VALIDATION");
    assert_single_line_error(&run(&["complexity"]), 1, "KG-VALIDATION");
    assert_single_line_error(&run(&["complexity", "--family", "tfd"]), 1, "KG-VALIDATION");
    assert_single_line_error(&run(&["moments", "--family", "coherent", "--precision", "float:64"]), 1, "KG-VALIDATION");
    assert_single_line_error(&run(&["frobnicate"]), 1, "KG-VALIDATION");
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("complexity"));
}

#[test]
fn two_mode_exact_moments() {
    let out = run(&["moments", "--family", "two-mode", "--r", "1", "--precision", "exact", "--order", "8"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = parse(&stdout(&out));
    assert_eq!(header, ["n", "mu_n", "a_n", "b_n", "b_n_squared"]);
    assert_eq!(rows[6][1], "-61");
    assert_eq!(rows[3][4], "9");
    assert_eq!(rows[2][1], "-1");
    assert_eq!(rows[4][1], "5");
}

#[test]
fn squeezed_exact_moment_eight() {
    let out = run(&["moments", "--family", "squeezed", "--eta", "1", "--order", "8"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (_, rows) = parse(&stdout(&out));
    // 87568 / 2⁸ in lowest terms.
    assert_eq!(rows[8][1], "5473/16");
}

#[test]
fn coherent_diagonal_coefficients_vanish() {
    for precision in ["exact", "float:128"] {
        let out = run(&["moments", "--family", "coherent", "--alpha", "1", "--order", "12", "--precision", precision]);
        assert!(out.status.success(), "{}", stderr(&out));
        let (_, rows) = parse(&stdout(&out));
        let a: Vec<&str> = rows.iter().map(|r| r[2].as_str()).filter(|s| !s.is_empty()).collect();
        assert_eq!(a.len(), 6);
        assert!(a.iter().all(|s| num(s) == 0.0), "{a:?}");
    }
}

#[test]
fn hankel_failure_is_numeric_error() {
    let out = run(&["moments", "--family", "displaced-squeezed", "--alpha", "1", "--eta", "1", "--order", "6"]);
    assert_single_line_error(&out, 2, "KG-NUMERIC");
}

#[test]
fn fermion_sweep_peaks_at_half_pi() {
    let out = run(&["bound", "--family", "fermion-pair", "--steps", "101", "--phi", "0.7"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = parse(&stdout(&out));
    assert_eq!(header[1], "C_per_fermion");
    let mut best = (0.0, f64::NEG_INFINITY);
    for row in &rows {
        let (theta, c) = (num(&row[0]), num(&row[1]));
        assert!((c - theta.sin().powi(2)).abs() <= 1e-12);
        if c > best.1 {
            best = (theta, c);
        }
    }
    assert!((best.0 - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!((best.1 - 1.0).abs() < 1e-12);
}

#[test]
fn tfd_bound_at_alpha_three() {
    let out = run(&["bound", "--family", "tfd", "--alpha", "3", "--lambda", "1", "--lambda-r", "1", "--steps", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = parse(&stdout(&out));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let last = rows.last().unwrap();
    let s2 = 3f64.sinh().powi(2);
    assert!((num(&last[col("C_max")]) - s2).abs() <= 1e-12 * s2);
    assert!((num(&last[col("C_sigma")]) - 2.0 * s2).abs() <= 1e-12 * s2);
    assert_eq!(num(&last[col("CG_total")]), 6.0);
}

#[test]
fn dirac_sweep_over_masses_approaches_half() {
    let out = run(&["sweep", "--family", "dirac", "--vary", "mass=0.5,1,2", "--p", "1000", "--steps", "50"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = parse(&stdout(&out));
    assert_eq!(header[0], "p");
    let cols: Vec<usize> = ["C[mass=0.5]", "C[mass=1]", "C[mass=2]"]
        .iter()
        .map(|n| header.iter().position(|h| h == n).unwrap())
        .collect();
    let last = rows.last().unwrap();
    for &c in &cols {
        assert!((num(&last[c]) - 0.5).abs() < 1e-3);
    }
    // Lighter fields approach ½ sooner.
    let first = &rows[0];
    assert!(num(&first[cols[0]]) > num(&first[cols[1]]));
    assert!(num(&first[cols[1]]) > num(&first[cols[2]]));
}

#[test]
fn single_mode_bound_matches_sinh_squared() {
    let out = run(&["bound", "--family", "single-mode", "--r", "1.5", "--theta", "0.3", "--phi", "1.1", "--steps", "16"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = parse(&stdout(&out));
    assert_eq!(header, ["r", "C_F", "lambda_min", "lambda_max"]);
    for row in &rows {
        let r = num(&row[0]);
        assert!((num(&row[1]) - r.sinh().powi(2)).abs() <= 1e-10 * (1.0 + r.sinh().powi(2)));
        assert!((num(&row[3]) - (2.0 * r).exp()).abs() <= 1e-10 * (2.0 * r).exp());
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |p: &Path| {
        vec![
            "plot".to_string(),
            "--family".into(),
            "displaced-squeezed".into(),
            "--alpha".into(),
            "100".into(),
            "--eta".into(),
            "3".into(),
            "--tmax".into(),
            "0.05".into(),
            "--output".into(),
            p.display().to_string(),
        ]
    };
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    for p in [&a, &b] {
        let a: Vec<String> = args(p);
        let out = run(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let svg = std::fs::read(&a).unwrap();
    assert_eq!(svg, std::fs::read(&b).unwrap());
    let text = String::from_utf8(svg).unwrap();
    for name in ["p0", "p1", "p2", "C_K3", "bound"] {
        assert!(text.contains(&format!(">{name}</text>")), "legend lacks {name}");
    }
    let csv = ["sweep", "--family", "fermion-pair", "--vary", "phi=0,1,2", "--steps", "9"];
    assert_eq!(run(&csv).stdout, run(&csv).stdout);
}

#[test]
fn csv_round_trips_through_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let svg = dir.path().join("c.svg");
    let out = run(&[
        "complexity", "--family", "coherent", "--alpha", "1", "--tmax", "2", "--steps", "21", "--output",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let (_, rows) = parse(&text);
    for row in &rows {
        let c: f64 = num(&row[1]);
        // Seventeen significant digits reproduce the value exactly.
        assert_eq!(format!("{c:.16e}"), row[1]);
    }
    let out = run(&["plot", "--input", csv.to_str().unwrap(), "--columns", "C,C_F", "--output", svg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let plot = std::fs::read_to_string(&svg).unwrap();
    assert!(plot.starts_with("<svg") && plot.contains(">C_F</text>") && !plot.contains(">tail_mass</text>"));
    let out = run(&["plot", "--input", csv.to_str().unwrap(), "--columns", "nope"]);
    assert_single_line_error(&out, 1, "KG-VALIDATION");
}

#[test]
fn empty_csv_plot_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "t,C\n").unwrap();
    let svg = dir.path().join("out.svg");
    let out = run(&["plot", "--input", csv.to_str().unwrap(), "--output", svg.to_str().unwrap()]);
    assert_single_line_error(&out, 1, "KG-VALIDATION");
    assert!(!svg.exists());
}

#[test]
fn io_failures_exit_three() {
    let out = run(&["bound", "--family", "fermion-pair", "--output", "/nonexistent-dir/x.csv"]);
    assert_single_line_error(&out, 3, "KG-IO");
    let out = run(&["plot", "--input", "/nonexistent-dir/x.csv"]);
    assert_single_line_error(&out, 3, "KG-IO");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# coherent run\nfamily = coherent\nalpha = 2\ntmax = 1\nsteps = 5\n").unwrap();
    let from_file = run(&["complexity", "--config", cfg.to_str().unwrap()]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    let (_, rows) = parse(&stdout(&from_file));
    assert_eq!(rows.len(), 5);
    assert!((num(&rows[4][1]) - 4.0).abs() < 1e-6);
    let overridden = run(&["complexity", "--config", cfg.to_str().unwrap(), "--alpha", "3"]);
    let (_, rows) = parse(&stdout(&overridden));
    assert!((num(&rows[4][1]) - 9.0).abs() < 1e-6);
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_single_line_error(&run(&["complexity", "--config", cfg.to_str().unwrap()]), 1, "KG-VALIDATION");
}

#[test]
fn verify_single_criterion_passes() {
    let out = run(&["verify", "--criterion", "12", "--criterion", "10"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("criterion 12 PASS") && text.contains("criterion 10 PASS"));
}

#[test]
fn verify_fault_injection_fails_route_agreement() {
    let clean = run(&["verify", "--criterion", "5"]);
    assert!(clean.status.success(), "{}", stdout(&clean));
    let faulty = run(&["verify", "--criterion", "5", "--inject-fault"]);
    assert_eq!(faulty.status.code(), Some(2));
    let text = stdout(&faulty);
    assert!(text.contains("criterion  5 FAIL"), "{text}");
    assert!(text.contains("max coefficient rel diff"), "{text}");
}

#[test]
fn verify_fast_lists_every_criterion_quickly() {
    let start = std::time::Instant::now();
    let out = run(&["verify", "--fast"]);
    let text = stdout(&out);
    for id in 1..=12 {
        assert!(text.contains(&format!("criterion {id:>2} ")), "missing {id}: {text}");
    }
    assert!(text.contains("criterion  3 SKIP") && text.contains("criterion  4 SKIP"));
    // Criteria 2 and 7 are known to fail, so the run reports failure.
    assert_eq!(out.status.code(), Some(2));
    assert!(start.elapsed().as_secs_f64() < 10.0);
}
