//! Minimiser against the shooting oracle where a nontrivial ball exists.

use qball_core::analysis::{analyze, AnalysisOptions};
use qball_core::minimizer::{minimize, MinimizeOptions};
use qball_core::shooting::{shoot, ShootOptions};
use qball_core::{Admissibility, ModelParams, RadialGrid, Solution};

fn params() -> ModelParams {
    ModelParams::new(0.07, 1.0, 2.0, 1.0, 0.8).with_admissibility(Admissibility::PotentialOnly)
}

fn grid(p: &ModelParams) -> RadialGrid {
    RadialGrid::for_decay(p.sigma(), 25.0, 4000).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn solve_both() -> (Solution, Solution) {
    let p = params();
    let g = grid(&p);
    let m = minimize(&p, &g, &MinimizeOptions::default()).unwrap();
    let s = shoot(&p, &g, &ShootOptions::default()).unwrap();
    (m, s)
}

#[test]
fn solvers_agree() {
    let (m, s) = solve_both();
    let (a, b) = (&m.report, &s.report);
    for (name, x, y) in [
        ("f(0)", a.f_origin, b.f_origin),
        ("g(0)", a.g_origin, b.g_origin),
        ("E", a.e_total, b.e_total),
        ("Q", a.q, b.q),
        ("I", a.i, b.i),
    ] {
        assert!(rel(x, y) <= 1e-3, "{name}: {x} vs {y}");
    }
    assert!(a.converged && a.nontrivial && a.i < 0.0);
    assert!(
        a.residual_f <= 1e-6 && a.residual_g <= 1e-6,
        "{} {}",
        a.residual_f,
        a.residual_g
    );
}

#[test]
fn shooting_values_are_stable() {
    // Shooting oracle at n = 4000, rmax_sigma = 25.
    let (_, s) = solve_both();
    let r = &s.report;
    assert!(rel(r.f_origin, 1.732_454_7) < 1e-5, "{}", r.f_origin);
    assert!(rel(r.g_origin, 0.498_268_8) < 1e-5, "{}", r.g_origin);
    assert!(rel(r.q, 323.3129) < 1e-4, "{}", r.q);
}

#[test]
fn clause_reports_match_across_solvers() {
    let p = params();
    let (m, s) = solve_both();
    let opts = AnalysisOptions::default();
    let a = analyze(&m.profile, &p, &opts);
    let b = analyze(&s.profile, &p, &opts);
    assert!(a.all_ok(), "{a:#?}");
    assert_eq!(a.pattern(), b.pattern());
    let (ta, tb) = (a.tail.unwrap(), b.tail.unwrap());
    assert!(rel(ta.beta, tb.beta) < 1e-4);
    let beta_from_charge = p.e * m.report.q / (4.0 * std::f64::consts::PI);
    assert!(rel(ta.beta, beta_from_charge) < 0.02);
}

#[test]
fn repeated_solves_are_identical() {
    let p = params();
    let g = grid(&p);
    let a = minimize(&p, &g, &MinimizeOptions::default()).unwrap();
    let b = minimize(&p, &g, &MinimizeOptions::default()).unwrap();
    assert_eq!(a.profile, b.profile);
    let a = shoot(&p, &g, &ShootOptions::default()).unwrap();
    let b = shoot(&p, &g, &ShootOptions::default()).unwrap();
    assert_eq!(a.profile, b.profile);
}
