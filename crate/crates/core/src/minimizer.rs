//! Descent on the reduced action `I~(f) = I(f, g_f)`.
//!
//! Each trial `f` is paired with its gauge field from [`crate::gauge`], so
//! every iterate lies on the constraint set. Because `g_f` is stationary
//! for `J_f`, the gradient of `I~` is the partial `f`-gradient of `K - J`
//! at fixed `g = g_f`.
//!
//! Directions are Newton steps on the coupled `(f, g)` system when they
//! point downhill, and Sobolev-preconditioned gradients otherwise. Steps
//! are accepted by Armijo backtracking, with an approximate Wolfe test
//! taking over once `I~` can no longer resolve the decrease.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::functionals::{
    compute_j, compute_k, potential_force, potential_stiffness, IterationRecord, Method, Profile, Solution,
    SolveReport, StepKind,
};
use crate::gauge::{self, OuterBoundary};
use crate::grid::RadialGrid;
use crate::linalg::{solve_block_tridiagonal, solve_tridiagonal, Block};
use crate::math::{abs, exp, max, sqrt};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct StepControl {
    pub initial_step: f64,
    /// Step shrink factor, in `(0, 1)`.
    pub backtracking: f64,
    /// Armijo constant.
    pub sufficient_decrease: f64,
    pub max_backtracks: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            backtracking: 0.5,
            sufficient_decrease: 1e-4,
            max_backtracks: 40,
        }
    }
}

/// Plateau amplitude and radius of the starting profile.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Trial {
    pub h0: f64,
    pub radius: f64,
}

impl Trial {
    /// `h0 = sqrt(3 h1 / (2 h2))`, `R = r_max / 5`.
    pub fn default_for(p: &ModelParams, grid: &RadialGrid) -> Self {
        Self {
            h0: p.plateau_amplitude(),
            radius: 0.2 * grid.r_max(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct MinimizeOptions {
    pub max_iterations: usize,
    /// Threshold on the `L^2(r^2 dr)` norm of the reduced gradient.
    pub gradient_tolerance: f64,
    pub step_control: StepControl,
    /// `None` picks [`Trial::default_for`].
    pub trial: Option<Trial>,
    pub boundary: OuterBoundary,
    /// Try coupled Newton directions before the preconditioned gradient.
    pub newton: bool,
    /// Double the plateau radius and restart when descent ends at `I >= 0`.
    pub retry: bool,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            step_control: StepControl::default(),
            trial: None,
            boundary: OuterBoundary::Robin,
            newton: true,
            retry: true,
        }
    }
}

impl MinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        let s = &self.step_control;
        let bad = |what: &str| Err(Error::Options(format!("minimizer: {what}")));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.gradient_tolerance > 0.0) {
            return bad("gradient_tolerance must be positive");
        }
        if !(s.initial_step > 0.0) || !s.initial_step.is_finite() {
            return bad("initial_step must be positive");
        }
        if !(s.backtracking > 0.0 && s.backtracking < 1.0) {
            return bad("backtracking factor must lie in (0, 1)");
        }
        if !(s.sufficient_decrease > 0.0 && s.sufficient_decrease < 1.0) {
            return bad("sufficient_decrease must lie in (0, 1)");
        }
        if s.max_backtracks == 0 {
            return bad("max_backtracks must be positive");
        }
        if let Some(t) = self.trial {
            if !(t.h0 > 0.0) || !t.h0.is_finite() {
                return bad("trial amplitude must be positive");
            }
        }
        Ok(())
    }
}

/// `h0 r` on `(0, 1]`, `h0` on `(1, R]`, `h0 exp(R - r)` beyond.
pub fn trial_profile(h0: f64, radius: f64, grid: &RadialGrid) -> Result<Vec<f64>> {
    if !(h0 > 0.0) || !h0.is_finite() {
        return Err(Error::Options(format!("trial amplitude must be positive, got {h0}")));
    }
    if !(radius > 1.0) || radius >= grid.r_max() {
        return Err(Error::Options(format!(
            "trial radius must lie in (1, {}), got {radius}",
            grid.r_max()
        )));
    }
    Ok(grid.sample(|r| {
        if r <= 1.0 {
            h0 * r
        } else if r <= radius {
            h0
        } else {
            h0 * exp(radius - r)
        }
    }))
}

/// Current iterate with its gauge field, reduced action and nodal gradient.
#[derive(Clone)]
struct Point {
    f: Vec<f64>,
    g: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
}

fn evaluate(f: Vec<f64>, grid: &RadialGrid, p: &ModelParams, boundary: OuterBoundary) -> Result<Point> {
    let g = gauge::solve_unchecked(&f, grid, p, boundary)?;
    let value = compute_k(&f, grid, p)? - compute_j(&f, &g, grid, p)?;
    let grad = nodal_gradient(&f, &g, grid, p);
    Ok(Point { f, g, value, grad })
}

/// `d I~ / d f_i`; the clamped outer node has zero gradient.
fn nodal_gradient(f: &[f64], g: &[f64], grid: &RadialGrid, p: &ModelParams) -> Vec<f64> {
    let n = grid.len();
    let w = grid.weights();
    let mut out = alloc::vec![0.0; n];
    for i in 0..n - 1 {
        let mut s = -grid.edge(i) * (f[i + 1] - f[i]);
        if i > 0 {
            s += grid.edge(i - 1) * (f[i] - f[i - 1]);
        }
        out[i] = s + w[i] * (potential_force(p, f[i]) - g[i] * g[i] * f[i]);
    }
    out
}

fn gradient_norm(grad: &[f64], grid: &RadialGrid) -> f64 {
    let w = grid.weights();
    sqrt(grad.iter().zip(w).map(|(d, w)| d * d / w).sum())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_f(f: &[f64], grid: &RadialGrid) -> Result<()> {
    if f.len() != grid.len() {
        return Err(Error::Grid(format!(
            "f has {} samples, grid has {}",
            f.len(),
            grid.len()
        )));
    }
    if f.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidNumber { field: "f" });
    }
    Ok(())
}

/// Strong-form variational derivative of `I~` at `f`:
/// `-(r^2 f')'/r^2 + (m^2 - g_f^2) f - (h1/2) f^3 + (h2/4) f^5`.
pub fn reduced_gradient(f: &[f64], grid: &RadialGrid, p: &ModelParams) -> Result<Vec<f64>> {
    reduced_gradient_with(f, grid, p, OuterBoundary::Robin)
}

pub fn reduced_gradient_with(
    f: &[f64],
    grid: &RadialGrid,
    p: &ModelParams,
    boundary: OuterBoundary,
) -> Result<Vec<f64>> {
    p.ensure_valid()?;
    check_f(f, grid)?;
    let g = gauge::solve_unchecked(f, grid, p, boundary)?;
    let grad = nodal_gradient(f, &g, grid, p);
    Ok(grad.iter().zip(grid.weights()).map(|(d, w)| d / w).collect())
}

/// `I~(f)` together with `g_f`.
pub fn reduced_action(
    f: &[f64],
    grid: &RadialGrid,
    p: &ModelParams,
    boundary: OuterBoundary,
) -> Result<(f64, Vec<f64>)> {
    p.ensure_valid()?;
    check_f(f, grid)?;
    let g = gauge::solve_unchecked(f, grid, p, boundary)?;
    let value = compute_k(f, grid, p)? - compute_j(f, &g, grid, p)?;
    Ok((value, g))
}

/// Newton step on `(f, g)` from the block system
/// `[[H, D], [D, -M]] (df, dg) = (-grad, 0)`.
fn newton_direction(x: &Point, grid: &RadialGrid, p: &ModelParams, boundary: OuterBoundary) -> Option<Vec<f64>> {
    let n = grid.len();
    let w = grid.weights();
    let inv_e2 = 1.0 / (p.e * p.e);
    let zero: Block = [[0.0; 2]; 2];
    let mut lower = alloc::vec![zero; n];
    let mut diag = alloc::vec![zero; n];
    let mut upper = alloc::vec![zero; n];
    let mut rhs = alloc::vec![[0.0; 2]; n];
    for i in 0..n {
        let c_in = if i > 0 { grid.edge(i - 1) } else { 0.0 };
        let c_out = if i + 1 < n { grid.edge(i) } else { 0.0 };
        let (f, g) = (x.f[i], x.g[i]);
        let h = c_in + c_out + w[i] * (potential_stiffness(p, f) - g * g);
        let d = -2.0 * w[i] * g * f;
        let m = (c_in + c_out) * inv_e2 + w[i] * f * f;
        diag[i] = [[h, d], [d, -m]];
        lower[i] = [[-c_in, 0.0], [0.0, c_in * inv_e2]];
        upper[i] = [[-c_out, 0.0], [0.0, c_out * inv_e2]];
        rhs[i] = [-x.grad[i], 0.0];
    }
    let last = n - 1;
    diag[last][0] = [1.0, 0.0];
    diag[last][1][0] = 0.0;
    lower[last][0] = [0.0, 0.0];
    upper[last - 1][0][0] = 0.0;
    rhs[last][0] = 0.0;
    match boundary {
        OuterBoundary::Robin => diag[last][1][1] -= grid.r_max() * inv_e2,
        OuterBoundary::Dirichlet => {
            diag[last][1] = [0.0, 1.0];
            lower[last][1] = [0.0, 0.0];
            upper[last - 1][1][1] = 0.0;
        }
    }
    let sol = solve_block_tridiagonal(&lower, &diag, &upper, &rhs).ok()?;
    let d: Vec<f64> = sol.iter().map(|v| v[0]).collect();
    if d.iter().all(|v| v.is_finite()) {
        Some(d)
    } else {
        None
    }
}

/// `(L + s W) d = -grad` with `s = m^2 - g_inf^2`.
fn sobolev_direction(x: &Point, grid: &RadialGrid, p: &ModelParams) -> Result<Vec<f64>> {
    let n = grid.len();
    let w = grid.weights();
    let shift = max(p.m * p.m - p.g_inf * p.g_inf, 1e-6);
    let mut lower = alloc::vec![0.0; n];
    let mut diag = alloc::vec![0.0; n];
    let mut upper = alloc::vec![0.0; n];
    let mut rhs = alloc::vec![0.0; n];
    for i in 0..n - 1 {
        let c_in = if i > 0 { grid.edge(i - 1) } else { 0.0 };
        let c_out = grid.edge(i);
        lower[i] = -c_in;
        upper[i] = if i + 1 < n - 1 { -c_out } else { 0.0 };
        diag[i] = c_in + c_out + shift * w[i];
        rhs[i] = -x.grad[i];
    }
    diag[n - 1] = 1.0;
    solve_tridiagonal(&lower, &diag, &upper, &rhs)
}

/// Reduced-action tolerance for the approximate Wolfe test.
const ROUNDOFF_SLACK: f64 = 1e-10;

fn line_search(
    x: &Point,
    d: &[f64],
    grid: &RadialGrid,
    p: &ModelParams,
    opts: &MinimizeOptions,
) -> Result<Option<(Point, f64)>> {
    let s = &opts.step_control;
    let n = grid.len();
    let slope0 = dot(&x.grad, d);
    if !(slope0 < 0.0) {
        return Ok(None);
    }
    let largest = d.iter().fold(0.0, |a: f64, v| max(a, abs(*v)));
    let mut alpha = s.initial_step;
    let cap = p.amplitude_bound();
    if alpha * largest > cap {
        alpha = cap / largest;
    }
    for _ in 0..s.max_backtracks {
        let mut f: Vec<f64> = x.f.iter().zip(d).map(|(a, b)| abs(a + alpha * b)).collect();
        f[n - 1] = 0.0;
        let trial = evaluate(f, grid, p, opts.boundary)?;
        if trial.value.is_finite() {
            if trial.value <= x.value + s.sufficient_decrease * alpha * slope0 {
                return Ok(Some((trial, alpha)));
            }
            let slope = dot(&trial.grad, d);
            if trial.value <= x.value + ROUNDOFF_SLACK * abs(x.value) && slope >= 0.9 * slope0 && slope <= -0.8 * slope0
            {
                return Ok(Some((trial, alpha)));
            }
        }
        alpha *= s.backtracking;
    }
    Ok(None)
}

#[derive(PartialEq)]
enum Outcome {
    Converged,
    IterationLimit,
    Stalled,
}

struct Attempt {
    point: Point,
    iterations: usize,
    history: Vec<IterationRecord>,
    coercivity_violations: usize,
    outcome: Outcome,
}

fn record(
    x: &Point,
    grid: &RadialGrid,
    p: &ModelParams,
    iteration: usize,
    attempt: usize,
    step: f64,
    kind: StepKind,
) -> (IterationRecord, bool) {
    let lower_bound = p
        .coercivity_constant()
        .ok()
        .and_then(|_| crate::functionals::coercivity_lower_bound(&x.f, grid, p).ok());
    let violated = match lower_bound {
        Some(b) => x.value < b - 1e-10 * (1.0 + abs(b)),
        None => false,
    };
    let constraint_violation = gauge::gauge_residual(&x.f, &x.g, grid, p).unwrap_or(f64::NAN);
    (
        IterationRecord {
            iteration,
            attempt,
            reduced_action: x.value,
            gradient_norm: gradient_norm(&x.grad, grid),
            lower_bound,
            constraint_violation,
            step,
            kind,
        },
        violated,
    )
}

fn descend(
    start: Vec<f64>,
    grid: &RadialGrid,
    p: &ModelParams,
    opts: &MinimizeOptions,
    attempt: usize,
) -> Result<Attempt> {
    let mut x = evaluate(start, grid, p, opts.boundary)?;
    let mut history = Vec::new();
    let (rec, bad) = record(&x, grid, p, 0, attempt, 0.0, StepKind::Start);
    history.push(rec);
    let mut violations = bad as usize;
    let mut iterations = 0;
    let outcome = loop {
        if gradient_norm(&x.grad, grid) <= opts.gradient_tolerance {
            break Outcome::Converged;
        }
        if iterations == opts.max_iterations {
            break Outcome::IterationLimit;
        }
        let mut accepted = None;
        if opts.newton {
            if let Some(d) = newton_direction(&x, grid, p, opts.boundary) {
                if let Some((pt, a)) = line_search(&x, &d, grid, p, opts)? {
                    accepted = Some((pt, a, StepKind::Newton));
                }
            }
        }
        if accepted.is_none() {
            let d = sobolev_direction(&x, grid, p)?;
            if let Some((pt, a)) = line_search(&x, &d, grid, p, opts)? {
                accepted = Some((pt, a, StepKind::Gradient));
            }
        }
        let Some((pt, alpha, kind)) = accepted else {
            break Outcome::Stalled;
        };
        iterations += 1;
        x = pt;
        let (rec, bad) = record(&x, grid, p, iterations, attempt, alpha, kind);
        history.push(rec);
        violations += bad as usize;
    };
    Ok(Attempt {
        point: x,
        iterations,
        history,
        coercivity_violations: violations,
        outcome,
    })
}

/// Runs one descent; `Ok((solution, converged))` unless the line search stalls.
fn run_attempt(
    start: Vec<f64>,
    grid: &RadialGrid,
    p: &ModelParams,
    opts: &MinimizeOptions,
    attempt: usize,
) -> Result<(Solution, bool)> {
    let a = descend(start, grid, p, opts, attempt)?;
    let profile = Profile::new(grid.clone(), a.point.f, a.point.g)?;
    let mut report = SolveReport::for_profile(&profile, p, Method::Minimizer)?;
    report.iterations = a.iterations;
    report.attempts = attempt;
    report.history = a.history;
    report.coercivity_violations = a.coercivity_violations;
    report.converged = a.outcome == Outcome::Converged;
    let sol = Solution { profile, report };
    match a.outcome {
        Outcome::Stalled => Err(Error::Stalled(Box::new(sol))),
        Outcome::Converged => Ok((sol, true)),
        Outcome::IterationLimit => Ok((sol, false)),
    }
}

/// Minimise from an explicit starting profile, without restarts.
///
/// Ends in [`Error::TrivialCollapse`] when descent converges with `I >= 0`.
pub fn minimize_from(p: &ModelParams, grid: &RadialGrid, start: &[f64], opts: &MinimizeOptions) -> Result<Solution> {
    p.ensure_valid()?;
    opts.validate()?;
    check_f(start, grid)?;
    let mut f: Vec<f64> = start.iter().map(|v| abs(*v)).collect();
    let last = f.len() - 1;
    f[last] = 0.0;
    let (sol, converged) = run_attempt(f, grid, p, opts, 1)?;
    if converged && !sol.report.nontrivial {
        return Err(Error::TrivialCollapse(Box::new(sol)));
    }
    Ok(sol)
}

/// Minimise from the plateau trial profile, doubling its radius (up to
/// `r_max / 2`) while descent keeps ending at the trivial pair.
pub fn minimize(p: &ModelParams, grid: &RadialGrid, opts: &MinimizeOptions) -> Result<Solution> {
    p.ensure_valid()?;
    opts.validate()?;
    let trial = opts.trial.unwrap_or_else(|| Trial::default_for(p, grid));
    let mut radius = trial.radius;
    let mut attempt = 0;
    let mut history = Vec::new();
    let mut violations = 0;
    loop {
        attempt += 1;
        let mut f = trial_profile(trial.h0, radius, grid)?;
        let last = f.len() - 1;
        f[last] = 0.0;
        let (mut sol, converged) = run_attempt(f, grid, p, opts, attempt)?;
        // Report the whole run, not just the last attempt.
        violations += sol.report.coercivity_violations;
        history.append(&mut sol.report.history);
        sol.report.coercivity_violations = violations;
        sol.report.history = core::mem::take(&mut history);
        if sol.report.nontrivial {
            return Ok(sol);
        }
        let next = 2.0 * radius;
        if !opts.retry || next > 0.5 * grid.r_max() {
            return if converged {
                Err(Error::TrivialCollapse(Box::new(sol)))
            } else {
                Ok(sol)
            };
        }
        history = core::mem::take(&mut sol.report.history);
        radius = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> ModelParams {
        ModelParams::new(1.0, 1.0, 1.0, 1.0, 0.3)
    }

    #[test]
    fn trial_profile_shape() {
        let grid = RadialGrid::new(20.0, 2000).unwrap();
        let f = trial_profile(1.0, 5.0, &grid).unwrap();
        let at = |r: f64| f[grid.index_at(r)];
        assert!(abs(at(7.0) - exp(-2.0)) < 1e-12);
        assert!(abs(at(1.0) - 1.0) < 1e-12);
        assert!(abs(at(5.0) - 1.0) < 1e-12);
        assert!(abs(at(5.01) - exp(-0.01)) < 1e-12);
        assert!(matches!(trial_profile(1.0, 20.0, &grid), Err(Error::Options(_))));
        assert!(matches!(trial_profile(1.0, 0.5, &grid), Err(Error::Options(_))));
        assert!(matches!(trial_profile(-1.0, 5.0, &grid), Err(Error::Options(_))));
    }

    #[test]
    fn gradient_vanishes_at_zero() {
        let p = baseline();
        let grid = RadialGrid::new(10.0, 500).unwrap();
        let g = reduced_gradient(&alloc::vec![0.0; 500], &grid, &p).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn newton_direction_matches_reduced_hessian() {
        // finite-difference the gradient along the Newton direction
        let p = baseline();
        let grid = RadialGrid::new(12.0, 300).unwrap();
        let mut f = grid.sample(|r| 1.1 * exp(-r * r / 6.0));
        f[299] = 0.0;
        let x = evaluate(f.clone(), &grid, &p, OuterBoundary::Robin).unwrap();
        let d = newton_direction(&x, &grid, &p, OuterBoundary::Robin).unwrap();
        let t = 1e-6;
        let shifted = |s: f64| {
            let ff: Vec<f64> = f.iter().zip(&d).map(|(a, b)| a + s * b).collect();
            evaluate(ff, &grid, &p, OuterBoundary::Robin).unwrap().grad
        };
        let (gp, gm) = (shifted(t), shifted(-t));
        for i in 0..299 {
            let hd = (gp[i] - gm[i]) / (2.0 * t);
            assert!(abs(hd + x.grad[i]) < 1e-5 * (1.0 + abs(x.grad[i])), "{i}");
        }
    }

    #[test]
    fn zero_start_is_trivial_collapse() {
        let p = baseline();
        let grid = RadialGrid::new(10.0, 400).unwrap();
        let err = minimize_from(&p, &grid, &alloc::vec![0.0; 400], &MinimizeOptions::default()).unwrap_err();
        let Error::TrivialCollapse(sol) = err else {
            panic!("expected collapse")
        };
        assert!(!sol.report.nontrivial);
        assert_eq!(sol.report.iterations, 0);
        assert!(sol.profile.f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn options_are_checked() {
        let p = baseline();
        let grid = RadialGrid::new(10.0, 400).unwrap();
        let mut o = MinimizeOptions::default();
        o.step_control.backtracking = 1.0;
        assert!(matches!(minimize(&p, &grid, &o), Err(Error::Options(_))));
        let o = MinimizeOptions {
            gradient_tolerance: 0.0,
            ..Default::default()
        };
        assert!(matches!(minimize(&p, &grid, &o), Err(Error::Options(_))));
    }
}
