//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 1-9 run on the reference couplings. The `X` lines repeat the
//! solver-dependent criteria in the existence regime (`configs/existence.toml`),
//! where a nontrivial ball is known to exist.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qball::commands::COMPARE_TOLERANCE;
use qball::io::profile_csv;
use qball::RunConfig;
use qball_core::analysis::{analyze, sweep_row, PropertyReport, SweepResult};
use qball_core::gauge::{solve_gauge, GaugeSolveOptions, OuterBoundary};
use qball_core::minimizer::{minimize, minimize_from, reduced_action, reduced_gradient};
use qball_core::shooting::shoot;
use qball_core::{Error, ModelParams, RadialGrid, Solution};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

/// Grid size for the cross-solver check on the existence regime.
const FINE_NODES: usize = 48_000;

struct Suite {
    failed: usize,
}

impl Suite {
    fn record(&mut self, id: &str, title: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} {id:>3}  {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn config(name: &str) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    RunConfig::load(&path).expect("example config loads")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn err_text<T>(r: &Result<T, Error>) -> String {
    r.as_ref().err().map_or_else(String::new, |e| e.to_string())
}

/// Max-norm relative error of the uniform-source gauge solve.
fn sinh_error(n: usize) -> f64 {
    let p = ModelParams::new(1.0, 1.0, 1.0, 1.0, 0.3);
    let grid = RadialGrid::new(10.0, n).unwrap();
    let g = solve_gauge(&vec![1.0; n], &grid, &p, &GaugeSolveOptions::dirichlet()).unwrap();
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for (&r, &v) in grid.nodes().iter().zip(&g) {
        let exact = 0.3 * 10.0 * r.sinh() / (r * 10f64.sinh());
        err = err.max((v - exact).abs());
        scale = scale.max(exact.abs());
    }
    err / scale
}

fn criterion_1(s: &mut Suite) {
    let t = Instant::now();
    let coarse = sinh_error(4000);
    let elapsed = t.elapsed();
    let ratio = coarse / sinh_error(8000);
    s.record(
        "1",
        "gauge solver against sinh profile",
        coarse <= 1e-6 && (3.5..=4.5).contains(&ratio) && elapsed < Duration::from_secs(1),
        format!(
            "max rel error {coarse:.3e}, refinement ratio {ratio:.3}, {}",
            secs(elapsed)
        ),
    );
}

fn bumps(rng: &mut StdRng, grid: &RadialGrid) -> Vec<f64> {
    let terms: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..0.4) * grid.r_max(),
                rng.gen_range(0.5..3.0),
            )
        })
        .collect();
    let mut v = grid.sample(|r| terms.iter().map(|&(a, c, w)| a * (-((r - c) / w).powi(2)).exp()).sum());
    *v.last_mut().unwrap() = 0.0;
    v
}

fn criterion_2(s: &mut Suite, p: &ModelParams, grid: &RadialGrid) {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let f: Vec<f64> = bumps(&mut rng, grid).iter().map(|v| 1.2 * v.abs()).collect();
        let d = bumps(&mut rng, grid);
        let at = |sgn: f64| {
            let x: Vec<f64> = f.iter().zip(&d).map(|(a, b)| a + sgn * 1e-5 * b).collect();
            reduced_action(&x, grid, p, OuterBoundary::Robin).unwrap().0
        };
        let fd = (at(1.0) - at(-1.0)) / 2e-5;
        let grad = reduced_gradient(&f, grid, p).unwrap();
        let inner: f64 = grad
            .iter()
            .zip(&d)
            .zip(grid.weights())
            .map(|((g, d), w)| g * d * w)
            .sum();
        worst = worst.max((fd - inner).abs() / fd.abs());
    }
    let elapsed = t.elapsed();
    s.record(
        "2",
        "reduced gradient against central differences",
        worst <= 1e-4 && elapsed < Duration::from_secs(10),
        format!("worst rel error {worst:.3e} over 20 profiles, {}", secs(elapsed)),
    );
}

struct Pair {
    minimizer: Result<Solution, Error>,
    shooting: Result<Solution, Error>,
    elapsed: Duration,
}

fn solve_pair(cfg: &RunConfig) -> Pair {
    let grid = cfg.radial_grid().unwrap();
    let t = Instant::now();
    let minimizer = minimize(&cfg.model, &grid, &cfg.minimize);
    let shooting = shoot(&cfg.model, &grid, &cfg.shoot);
    Pair {
        minimizer,
        shooting,
        elapsed: t.elapsed(),
    }
}

fn cross_oracle(s: &mut Suite, id: &str, pair: &Pair) {
    let title = "minimizer and shooting agree";
    let (m, sh) = match (&pair.minimizer, &pair.shooting) {
        (Ok(m), Ok(sh)) => (m, sh),
        _ => {
            s.record(
                id,
                title,
                false,
                format!(
                    "minimizer: {}; shooting: {}",
                    err_text(&pair.minimizer).if_empty("ok"),
                    err_text(&pair.shooting).if_empty("ok")
                ),
            );
            return;
        }
    };
    let (a, b) = (&m.report, &sh.report);
    let diffs = [
        rel(a.f_origin, b.f_origin),
        rel(a.g_origin, b.g_origin),
        rel(a.e_total, b.e_total),
        rel(a.q, b.q),
    ];
    let worst = diffs.iter().cloned().fold(0.0, f64::max);
    let res_m = a.residual_f.max(a.residual_g);
    let res_s = b.residual_f.max(b.residual_g);
    s.record(
        id,
        title,
        worst <= COMPARE_TOLERANCE && res_m <= 1e-6 && res_s <= 1e-6 && pair.elapsed < Duration::from_secs(60),
        format!(
            "rel diff f(0) {:.1e} g(0) {:.1e} E {:.1e} Q {:.1e}; residuals minimizer {res_m:.1e}, shooting {res_s:.1e}; {}",
            diffs[0],
            diffs[1],
            diffs[2],
            diffs[3],
            secs(pair.elapsed)
        ),
    );
}

trait IfEmpty {
    fn if_empty(self, alt: &str) -> String;
}

impl IfEmpty for String {
    fn if_empty(self, alt: &str) -> String {
        if self.is_empty() {
            alt.into()
        } else {
            self
        }
    }
}

fn nontrivial(s: &mut Suite, id: &str, pair: &Pair) {
    let (ok, detail) = match &pair.minimizer {
        Ok(m) => (
            m.report.converged && m.report.nontrivial && m.report.i < 0.0,
            format!("I = {:.6e}, converged {}", m.report.i, m.report.converged),
        ),
        Err(e) => (false, e.to_string()),
    };
    s.record(id, "converged solution has I < 0", ok, detail);
}

fn zero_start(s: &mut Suite, id: &str, cfg: &RunConfig) {
    let grid = cfg.radial_grid().unwrap();
    let r = minimize_from(&cfg.model, &grid, &vec![0.0; grid.len()], &cfg.minimize);
    let ok = matches!(&r, Err(Error::TrivialCollapse(sol)) if !sol.report.nontrivial);
    s.record(
        id,
        "zero start reports trivial collapse",
        ok,
        err_text(&r).if_empty("returned a solution"),
    );
}

fn reports(cfg: &RunConfig, pair: &Pair) -> Option<(PropertyReport, PropertyReport)> {
    let m = pair.minimizer.as_ref().ok()?;
    let sh = pair.shooting.as_ref().ok()?;
    Some((
        analyze(&m.profile, &cfg.model, &cfg.analysis),
        analyze(&sh.profile, &cfg.model, &cfg.analysis),
    ))
}

fn clause_suite(s: &mut Suite, id: &str, cfg: &RunConfig, pair: &Pair) {
    let title = "property clauses on both solutions";
    let Some((a, b)) = reports(cfg, pair) else {
        s.record(id, title, false, "needs both solutions (see criterion 3)".into());
        return;
    };
    let fmt = |r: &PropertyReport| {
        let p = r.pattern();
        let sigma = r.decay.as_ref().map_or(f64::NAN, |d| d.sigma_coulomb);
        let flat = r.tail.as_ref().map_or(f64::NAN, |t| t.deviation);
        format!(
            "bounds {} monotone {} origin {} decay {} ({sigma:.4}) tail {} ({flat:.1e})",
            p.bounds, p.monotone, p.origin, p.decay, p.tail
        )
    };
    let pa = a.pattern();
    let core = pa.bounds && pa.monotone && pa.origin && pa.decay && pa.tail;
    s.record(
        id,
        title,
        core && pa == b.pattern(),
        format!(
            "sigma {:.4}; minimizer [{}]; shooting [{}]",
            cfg.model.sigma(),
            fmt(&a),
            fmt(&b)
        ),
    );
}

fn charge_tail(s: &mut Suite, id: &str, cfg: &RunConfig, pair: &Pair) {
    let title = "gauge tail coefficient matches charge integral";
    let Some((a, _)) = reports(cfg, pair) else {
        s.record(
            id,
            title,
            false,
            "needs the cross-validated solution (see criterion 3)".into(),
        );
        return;
    };
    match &a.tail {
        Some(t) => {
            let m = pair.minimizer.as_ref().unwrap();
            let via_q = cfg.model.e * m.report.q / (4.0 * PI);
            s.record(
                id,
                title,
                t.charge_ok,
                format!(
                    "beta {:.6e}, e^2 int g f^2 r^2 dr {:.6e} (e Q / 4 pi {via_q:.6e}), deviation {:.2e}",
                    t.beta, t.charge_beta, t.charge_deviation
                ),
            );
        }
        None => s.record(id, title, false, a.notes.join("; ")),
    }
}

fn coercivity(s: &mut Suite, cfg: &RunConfig, pair: &Pair) {
    let title = "coercivity bound at every accepted iterate";
    let c = cfg.model.coercivity_constant();
    let sol = match &pair.minimizer {
        Ok(sol) => Some(sol),
        Err(e) => e.partial(),
    };
    let Some(sol) = sol else {
        s.record("7", title, false, err_text(&pair.minimizer));
        return;
    };
    let checked = sol.report.history.iter().filter(|r| r.lower_bound.is_some()).count();
    let ok = c.as_ref().is_ok_and(|c| (c - 0.7225).abs() < 1e-12)
        && checked == sol.report.history.len()
        && checked > 0
        && sol.report.coercivity_violations == 0;
    s.record(
        "7",
        title,
        ok,
        format!(
            "c = {:.4}, {} iterates over {} attempts, {} violations",
            c.unwrap_or(f64::NAN),
            checked,
            sol.report.attempts,
            sol.report.coercivity_violations
        ),
    );
}

fn sweep(s: &mut Suite, id: &str, cfg: &RunConfig, limit: f64) {
    let title = "charge sweep trend";
    let t = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let policy = cfg.grid.into();
    let rows = pool.install(|| {
        cfg.sweep
            .g_inf
            .par_iter()
            .map(|&g| sweep_row(&cfg.model, g, &policy, &cfg.minimize))
            .collect::<Vec<_>>()
    });
    let result = SweepResult::from_rows(&cfg.model, rows);
    let trend = result.trend();
    let elapsed = t.elapsed();
    let qs: Vec<String> = result
        .rows
        .iter()
        .map(|r| {
            if r.usable() {
                format!("{:.3}:{:.4e}", r.g_inf, r.q)
            } else {
                format!("{:.3}:failed", r.g_inf)
            }
        })
        .collect();
    s.record(
        id,
        title,
        trend.holds(limit) && elapsed < Duration::from_secs(300),
        format!(
            "Q [{}]; ratio {:.4} (< {limit}), last two decreasing {}; {}",
            qs.join(", "),
            trend.terminal_ratio,
            trend.last_two_decreasing,
            secs(elapsed)
        ),
    );
}

fn determinism(s: &mut Suite, id: &str, cfg: &RunConfig, first: &Pair) {
    let second = solve_pair(cfg);
    let csv = |r: &Result<Solution, Error>| -> Option<String> {
        match r {
            Ok(sol) => Some(profile_csv(&sol.profile)),
            Err(e) => e.partial().map(|sol| profile_csv(&sol.profile)),
        }
    };
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, a, b) in [
        ("minimizer", &first.minimizer, &second.minimizer),
        ("shooting", &first.shooting, &second.shooting),
    ] {
        let (ca, cb) = (csv(a), csv(b));
        ok &= ca == cb && err_text(a) == err_text(b);
        notes.push(match ca {
            Some(text) => format!(
                "{name} CSV {} bytes {}",
                text.len(),
                if Some(&text) == cb.as_ref() {
                    "identical"
                } else {
                    "differ"
                }
            ),
            None => format!("{name} produced no profile on either run"),
        });
    }
    s.record(id, "repeated solves give byte-identical CSVs", ok, notes.join("; "));
}

fn main() -> ExitCode {
    let mut suite = Suite { failed: 0 };
    let base = config("baseline.toml");
    let base_grid = base.radial_grid().unwrap();

    criterion_1(&mut suite);
    criterion_2(&mut suite, &base.model, &base_grid);
    let pair = solve_pair(&base);
    cross_oracle(&mut suite, "3", &pair);
    nontrivial(&mut suite, "4a", &pair);
    zero_start(&mut suite, "4b", &base);
    clause_suite(&mut suite, "5", &base, &pair);
    charge_tail(&mut suite, "6", &base, &pair);
    coercivity(&mut suite, &base, &pair);
    sweep(&mut suite, "8", &base, 0.5);
    determinism(&mut suite, "9", &base, &pair);

    let ex = config("existence.toml");
    let ex_pair = solve_pair(&ex);
    let mut fine = ex.clone();
    fine.grid.n = FINE_NODES;
    cross_oracle(&mut suite, "X3", &solve_pair(&fine));
    nontrivial(&mut suite, "X4a", &ex_pair);
    zero_start(&mut suite, "X4b", &ex);
    clause_suite(&mut suite, "X5", &ex, &ex_pair);
    charge_tail(&mut suite, "X6", &ex, &ex_pair);
    sweep(&mut suite, "X8", &ex, 0.5);
    determinism(&mut suite, "X9", &ex, &ex_pair);

    println!("{} criteria failed", suite.failed);
    if suite.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
