//! One PASS/FAIL line per acceptance criterion. Exits 0 unless
//! `ACCEPTANCE_STRICT` is set, in which case any failure exits 1.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use boxcert::algebra::Scenario;
use boxcert::checks::{algebra_suite, oracle_suite, sandwich_suite, CheckRow};
use boxcert::moments::LevelSpec;
use boxcert::sdp::sweep::{bell_values, sweep};
use boxcert::sdp::{bell_extremum, BellFunctional, Flags, SolverOptions, Target, Template};
use boxcert::swap::{chsh_reference, chsh_swap, cglmp_reference, cglmp_swap};

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, passed: bool, detail: String) {
        if !passed {
            self.failed += 1;
        }
        println!(
            "{} criterion {id:>2}: {name}: {detail}",
            if passed { "PASS" } else { "FAIL" }
        );
    }
}

fn chsh_fidelity(isotropic: bool) -> Template {
    let sc = Scenario::chsh();
    let target = Target::Fidelity {
        swap: chsh_swap(),
        reference: chsh_reference(),
    };
    let flags = Flags {
        isotropic,
        ..Flags::defaults_for(&sc)
    };
    Template::new(&sc, &target, BellFunctional::chsh(&sc).unwrap(), flags, None).unwrap()
}

fn solve(t: &Template, b: f64, opts: &SolverOptions) -> (f64, String, f64) {
    let start = Instant::now();
    match t.solve_at(b, opts) {
        Ok(s) => (s.value, s.status.to_string(), start.elapsed().as_secs_f64()),
        Err(e) => (f64::NAN, e.to_string(), start.elapsed().as_secs_f64()),
    }
}

fn rows_pass(rows: &[CheckRow]) -> (bool, String) {
    let failed: Vec<&CheckRow> = rows.iter().filter(|r| !r.passed).collect();
    let detail = if failed.is_empty() {
        format!("{} checks passed", rows.len())
    } else {
        failed
            .iter()
            .map(|r| format!("{} ({})", r.name, r.detail))
            .collect::<Vec<_>>()
            .join("; ")
    };
    (failed.is_empty(), detail)
}

fn main() {
    let opts = SolverOptions::default();
    let mut report = Report { failed: 0 };
    let tsirelson = 2.0 * SQRT_2;
    let generic = chsh_fidelity(false);
    let isotropic = chsh_fidelity(true);

    let (f, status, secs) = solve(&generic, tsirelson, &opts);
    report.line(
        1,
        "CHSH endpoint",
        f >= 0.999 && secs <= 60.0,
        format!("F(2√2) = {f:.7} [{status}] in {secs:.1} s (need ≥ 0.999, ≤ 60 s)"),
    );

    let (f, status, _) = solve(&generic, 2.57, &opts);
    let (fi, _, _) = solve(&isotropic, 2.57, &opts);
    report.line(
        2,
        "CHSH anchor at 2.57",
        f >= 0.70 && (f - 0.70).abs() <= 0.02,
        format!("generic F = {f:.7} [{status}], isotropic F = {fi:.7} (need ≥ 0.70 and within 0.02 of 0.70)"),
    );

    let (f, status, _) = solve(&generic, 2.827, &opts);
    report.line(
        3,
        "CHSH anchor at 2.827",
        f >= 0.998 - 0.002,
        format!("F = {f:.7} [{status}] (need ≥ 0.998 with 0.002 slack)"),
    );

    let values = bell_values(2.0, tsirelson, 25).unwrap();
    let g = sweep(&generic, &values, &opts, 1).unwrap();
    let i = sweep(&isotropic, &values, &opts, 1).unwrap();
    let solved = g.points.iter().chain(&i.points).all(|p| p.status.is_solved());
    let monotone = g.points.windows(2).all(|w| w[1].bound >= w[0].bound - 1e-6);
    let dominated = g.points.iter().zip(&i.points).all(|(a, b)| b.bound >= a.bound - 1e-6);
    report.line(
        4,
        "curve shapes",
        solved && monotone && dominated,
        format!(
            "25 points, all solved {solved}, generic nondecreasing {monotone}, isotropic ≥ generic {dominated}, generic from {:.4} to {:.4}",
            g.points[0].bound,
            g.points[24].bound
        ),
    );

    let sc = Scenario::chsh();
    let bell = BellFunctional::chsh(&sc).unwrap();
    let (v, status) = bell_extremum(&sc, &bell, &LevelSpec::LocalProduct(1), &opts)
        .map(|(v, s)| (v, s.to_string()))
        .unwrap_or_else(|e| (f64::NAN, e.to_string()));
    report.line(
        5,
        "Tsirelson bound",
        (v - tsirelson).abs() <= 1e-6,
        format!("max CHSH = {v:.9} [{status}], |Δ| = {:.1e}", (v - tsirelson).abs()),
    );

    let sc = Scenario::cglmp();
    let cglmp_bell = BellFunctional::cglmp(&sc).unwrap();
    let target = Target::Fidelity {
        swap: cglmp_swap(),
        reference: cglmp_reference(),
    };
    let start = Instant::now();
    let (f, status) = match Template::new(&sc, &target, cglmp_bell.clone(), Flags::defaults_for(&sc), None)
        .and_then(|t| t.solve_at(cglmp_bell.quantum_extremum, &opts))
    {
        Ok(s) => (s.value, s.status.to_string()),
        Err(e) => (f64::NAN, e.to_string()),
    };
    let secs = start.elapsed().as_secs_f64();
    report.line(
        6,
        "CGLMP endpoint",
        f >= 0.995 && secs <= 1800.0,
        format!(
            "F((12-√33)/9) = {f:.7} [{status}] in {secs:.1} s (need ≥ 0.995, ≤ 30 min)"
        ),
    );

    let sc = Scenario::chsh();
    let flags = Flags {
        rho_psd: false,
        localizing: false,
        isotropic: true,
    };
    let (tau, status, _) = Template::new(&sc, &Target::Tau, bell.clone(), flags, None)
        .map(|t| solve(&t, tsirelson, &opts))
        .unwrap_or_else(|e| (f64::NAN, e.to_string(), 0.0));
    report.line(
        7,
        "τ endpoint",
        tau >= 0.99,
        format!("τ(2√2) = {tau:.7} [{status}] (need ≥ 0.99)"),
    );

    let (ok, detail) = rows_pass(&sandwich_suite(&chsh_swap(), &opts).unwrap());
    report.line(8, "sandwich suite", ok, detail);

    let mut rows = algebra_suite(1000, 2024).unwrap();
    let oracle = oracle_suite().unwrap();
    rows.extend(oracle.iter().filter(|r| r.name.starts_with("Γ")).cloned());
    let (ok, detail) = rows_pass(&rows);
    report.line(9, "algebra and oracle soundness", ok, detail);

    let rows: Vec<CheckRow> = oracle
        .into_iter()
        .filter(|r| r.name.starts_with("translation"))
        .collect();
    let (ok, detail) = rows_pass(&rows);
    report.line(10, "translation operator", ok && rows.len() == 2, detail);

    println!("{} of 10 criteria failed", report.failed);
    if report.failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
