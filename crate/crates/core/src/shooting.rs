//! Shooting oracle: outward RK4 integration from the regular series at the
//! origin, matched to the exterior asymptotics.
//!
//! Nothing here touches the gauge solve or the minimiser, so agreement
//! between the two paths is a real cross-check.
//!
//! For fixed `g(0)` the scalar amplitude `f(0)` is found by bisection
//! between trajectories that turn back (too little amplitude) and ones that
//! cross zero or run away (too much). The outer unknown `g(0)` is then
//! fixed by the Coulomb condition `g + r g' = g_inf` at the match radius.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::functionals::{Method, Profile, Solution, SolveReport};
use crate::gauge::{self, OuterBoundary};
use crate::grid::RadialGrid;
use crate::linalg::solve_tridiagonal;
use crate::math::{abs, exp, max, min, sqrt};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ShootOptions {
    /// Match radius in decay lengths, `sigma r_m`.
    pub match_sigma: f64,
    /// Target for the gauge matching residual.
    pub residual_tolerance: f64,
    /// Largest accepted gauge matching residual.
    pub acceptance_tolerance: f64,
    pub max_newton_iterations: usize,
    pub max_halvings: usize,
    pub max_restarts: usize,
    /// Sample count of the fallback scan over `g(0)`.
    pub scan_points: usize,
    /// Starting `g(0)`; `None` uses `g_inf / 2`.
    pub g0_guess: Option<f64>,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            match_sigma: 15.0,
            residual_tolerance: 1e-10,
            acceptance_tolerance: 1e-8,
            max_newton_iterations: 30,
            max_halvings: 8,
            max_restarts: 4,
            scan_points: 48,
            g0_guess: None,
        }
    }
}

impl ShootOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Options(format!("shooting: {what}")));
        if !(self.match_sigma > 0.0) || !self.match_sigma.is_finite() {
            return bad("match_sigma must be positive");
        }
        if !(self.residual_tolerance > 0.0) || !(self.acceptance_tolerance >= self.residual_tolerance) {
            return bad("tolerances must be positive and ordered");
        }
        if self.max_newton_iterations == 0 || self.scan_points < 2 {
            return bad("iteration limits must be positive");
        }
        Ok(())
    }
}

/// What ended (or classified) an outward integration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ShotEvent {
    /// `f` changed sign.
    Crossed { radius: f64 },
    /// `f'` became positive again after `f` had started to fall.
    TurnedBack { radius: f64 },
    /// `|f|` passed the blow-up guard.
    Diverged { radius: f64 },
}

/// An outward trajectory on grid nodes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShootState {
    pub f0: f64,
    pub g0: f64,
    pub radii: Vec<f64>,
    pub f: Vec<f64>,
    pub f_prime: Vec<f64>,
    pub g: Vec<f64>,
    pub g_prime: Vec<f64>,
    pub event: Option<ShotEvent>,
    /// `f' + (sigma + 1/r) f` and `g + r g' - g_inf` at the last node reached.
    pub residuals: [f64; 2],
}

/// Second-order series `(f, f', g, g')` at radius `r`.
pub fn series_start(f0: f64, g0: f64, r: f64, p: &ModelParams) -> [f64; 4] {
    let a = ((p.m * p.m - g0 * g0) * f0 - 0.5 * p.h1 * f0 * f0 * f0 + 0.25 * p.h2 * f0 * f0 * f0 * f0 * f0) / 6.0;
    let b = p.e * p.e * g0 * f0 * f0 / 6.0;
    [f0 + a * r * r, 2.0 * a * r, g0 + b * r * r, 2.0 * b * r]
}

#[inline]
fn rhs(r: f64, y: &[f64; 4], p: &ModelParams) -> [f64; 4] {
    let [f, fp, g, gp] = *y;
    let f2 = f * f;
    let fpp = -2.0 * fp / r + (p.m * p.m - g * g) * f - 0.5 * p.h1 * f2 * f + 0.25 * p.h2 * f2 * f2 * f;
    let gpp = -2.0 * gp / r + p.e * p.e * g * f2;
    [fp, fpp, gp, gpp]
}

fn rk4_step(r: f64, h: f64, y: &[f64; 4], p: &ModelParams) -> [f64; 4] {
    let add = |a: &[f64; 4], k: &[f64; 4], s: f64| [a[0] + s * k[0], a[1] + s * k[1], a[2] + s * k[2], a[3] + s * k[3]];
    let k1 = rhs(r, y, p);
    let k2 = rhs(r + 0.5 * h, &add(y, &k1, 0.5 * h), p);
    let k3 = rhs(r + 0.5 * h, &add(y, &k2, 0.5 * h), p);
    let k4 = rhs(r + h, &add(y, &k3, h), p);
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn blow_up_guard(p: &ModelParams) -> f64 {
    10.0 * p.amplitude_bound()
}

/// Integrate through node `last`. With `classify`, stop at the first
/// crossing or turn-back as well as at the guard.
fn integrate(f0: f64, g0: f64, grid: &RadialGrid, p: &ModelParams, last: usize, classify: bool) -> Result<ShootState> {
    let h = grid.spacing();
    let nodes = grid.nodes();
    let guard = blow_up_guard(p);
    let cap = last + 1;
    let mut st = ShootState {
        f0,
        g0,
        radii: Vec::with_capacity(cap),
        f: Vec::with_capacity(cap),
        f_prime: Vec::with_capacity(cap),
        g: Vec::with_capacity(cap),
        g_prime: Vec::with_capacity(cap),
        event: None,
        residuals: [0.0; 2],
    };
    let mut y = series_start(f0, g0, nodes[0], p);
    let mut fell = false;
    for k in 0..=last {
        let r = nodes[k];
        if k > 0 {
            y = rk4_step(nodes[k - 1], h, &y, p);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { radius: r });
        }
        st.radii.push(r);
        st.f.push(y[0]);
        st.f_prime.push(y[1]);
        st.g.push(y[2]);
        st.g_prime.push(y[3]);
        if abs(y[0]) > guard {
            st.event = Some(ShotEvent::Diverged { radius: r });
            break;
        }
        if classify {
            if y[0] < 0.0 {
                st.event = Some(ShotEvent::Crossed { radius: r });
                break;
            }
            if y[1] < 0.0 {
                fell = true;
            } else if fell && y[1] > 0.0 {
                st.event = Some(ShotEvent::TurnedBack { radius: r });
                break;
            }
        }
    }
    let j = st.f.len() - 1;
    let r = st.radii[j];
    st.residuals = [
        st.f_prime[j] + (p.sigma() + 1.0 / r) * st.f[j],
        st.g[j] + r * st.g_prime[j] - p.g_inf,
    ];
    Ok(st)
}

/// RK4 over the whole grid with step equal to the grid spacing, starting
/// from the series at the first node. Stops early (with
/// [`ShotEvent::Diverged`]) once `|f|` exceeds ten times the amplitude
/// bound.
pub fn integrate_outward(f0: f64, g0: f64, grid: &RadialGrid, p: &ModelParams) -> Result<ShootState> {
    integrate(f0, g0, grid, p, grid.len() - 1, false)
}

/// Node index of the match radius `match_sigma / sigma`, kept inside the grid.
pub fn match_index(p: &ModelParams, grid: &RadialGrid, opts: &ShootOptions) -> usize {
    let r_m = min(opts.match_sigma / p.sigma(), 0.9 * grid.r_max());
    grid.index_at(r_m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    Under,
    Over,
}

fn classify(st: &ShootState) -> Shot {
    match st.event {
        Some(ShotEvent::Crossed { .. }) | Some(ShotEvent::Diverged { .. }) => Shot::Over,
        Some(ShotEvent::TurnedBack { .. }) => Shot::Under,
        None => {
            if st.residuals[0] > 0.0 {
                Shot::Under
            } else {
                Shot::Over
            }
        }
    }
}

/// Number of amplitudes sampled when bracketing `f(0)`.
const AMPLITUDE_SCAN: usize = 40;

/// Relative separation of the two bracketing trajectories that ends the
/// trusted part of a shot.
const SEPARATION: f64 = 1e-6;

/// Bracketed scalar match at fixed `g(0)`.
struct ScalarMatch {
    state: ShootState,
    /// Last node before the bracketing pair separates.
    reliable: usize,
}

/// Bisect `f(0)` across the largest amplitude at which the shot turns from
/// undershooting to overshooting. `None` when no undershoot exists.
fn match_scalar(g0: f64, grid: &RadialGrid, p: &ModelParams, k_m: usize) -> Result<Option<ScalarMatch>> {
    let top = p.amplitude_bound();
    let class_at = |f0: f64| -> Result<Shot> { Ok(classify(&integrate(f0, g0, grid, p, k_m, true)?)) };
    let mut bracket = None;
    let mut upper = Shot::Over;
    for i in (1..AMPLITUDE_SCAN).rev() {
        let f0 = top * i as f64 / AMPLITUDE_SCAN as f64;
        let c = class_at(f0)?;
        if c == Shot::Under && upper == Shot::Over {
            bracket = Some((f0, top * (i + 1) as f64 / AMPLITUDE_SCAN as f64));
            break;
        }
        upper = c;
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Ok(None);
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match class_at(mid)? {
            Shot::Under => lo = mid,
            Shot::Over => hi = mid,
        }
    }
    let under = integrate(lo, g0, grid, p, k_m, true)?;
    let over = integrate(hi, g0, grid, p, k_m, true)?;
    let common = min(under.f.len() as f64, over.f.len() as f64) as usize;
    let mut reliable = common - 1;
    for k in 0..common {
        if abs(under.f[k] - over.f[k]) > SEPARATION * abs(under.f[k]) {
            reliable = k.saturating_sub(1);
            break;
        }
    }
    Ok(Some(ScalarMatch { state: under, reliable }))
}

/// `g + r g' - g_inf` at node `k`, including the leading contribution of
/// the remaining scalar source beyond `r`.
fn gauge_mismatch(st: &ShootState, k: usize, p: &ModelParams) -> f64 {
    let r = st.radii[k];
    let kappa = sqrt(p.m * p.m - st.g[k] * st.g[k]);
    let source = p.e * p.e * st.g[k] * st.f[k] * st.f[k] * r / (2.0 * kappa) * (1.0 - 1.0 / (2.0 * kappa * r));
    st.g[k] + r * st.g_prime[k] + source - p.g_inf
}

/// Cut a shot at node `k` and refresh its matching residuals there.
fn truncate(mut st: ShootState, k: usize, p: &ModelParams) -> ShootState {
    st.radii.truncate(k + 1);
    st.f.truncate(k + 1);
    st.f_prime.truncate(k + 1);
    st.g.truncate(k + 1);
    st.g_prime.truncate(k + 1);
    st.event = None;
    let r = st.radii[k];
    st.residuals = [
        st.f_prime[k] + (p.sigma() + 1.0 / r) * st.f[k],
        gauge_mismatch(&st, k, p),
    ];
    st
}

enum Eval {
    Undefined,
    /// The trusted part of the shot ends before the current match node.
    Shrink(usize),
    Value(f64, ShootState),
}

struct Matcher<'a> {
    grid: &'a RadialGrid,
    p: &'a ModelParams,
    /// Integration limit.
    k_end: usize,
    /// Node where the residuals are evaluated.
    k_match: usize,
    evaluations: usize,
}

impl Matcher<'_> {
    fn residual(&mut self, g0: f64) -> Result<Eval> {
        if !(g0 > 0.0 && g0 < self.p.g_inf) {
            return Ok(Eval::Undefined);
        }
        self.evaluations += 1;
        let Some(m) = match_scalar(g0, self.grid, self.p, self.k_end)? else {
            return Ok(Eval::Undefined);
        };
        if !(m.state.f[m.reliable] <= LOCALIZATION * m.state.f0) {
            return Ok(Eval::Undefined);
        }
        if m.reliable < self.k_match {
            return Ok(Eval::Shrink(m.reliable));
        }
        let st = truncate(m.state, self.k_match, self.p);
        Ok(Eval::Value(st.residuals[1], st))
    }

    /// Damped Newton on `g(0)`. `Err(k)` asks for a smaller match node.
    fn newton(
        &mut self,
        start: f64,
        opts: &ShootOptions,
    ) -> Result<core::result::Result<Option<(ShootState, usize)>, usize>> {
        let (mut r, mut st) = match self.residual(start)? {
            Eval::Value(r, st) => (r, st),
            Eval::Shrink(k) => return Ok(Err(k)),
            Eval::Undefined => return Ok(Ok(None)),
        };
        let mut g0 = start;
        let delta = 1e-6 * self.p.g_inf;
        for it in 0..opts.max_newton_iterations {
            if abs(r) <= opts.residual_tolerance {
                return Ok(Ok(Some((st, it))));
            }
            let probe = if g0 + delta < self.p.g_inf { delta } else { -delta };
            let r2 = match self.residual(g0 + probe)? {
                Eval::Value(r2, _) => r2,
                Eval::Shrink(k) => return Ok(Err(k)),
                Eval::Undefined => return Ok(Ok(None)),
            };
            let slope = (r2 - r) / probe;
            if slope == 0.0 || !slope.is_finite() {
                return Ok(Ok(None));
            }
            let step = -r / slope;
            let mut lambda = 1.0;
            let mut improved = None;
            for _ in 0..=opts.max_halvings {
                let trial = g0 + lambda * step;
                match self.residual(trial)? {
                    Eval::Value(rt, stt) if abs(rt) < abs(r) => {
                        improved = Some((trial, rt, stt));
                        break;
                    }
                    Eval::Shrink(k) => return Ok(Err(k)),
                    _ => {}
                }
                lambda *= 0.5;
            }
            let Some((g_new, r_new, st_new)) = improved else {
                return Ok(Ok(None));
            };
            g0 = g_new;
            r = r_new;
            st = st_new;
        }
        Ok(Ok(
            (abs(r) <= opts.residual_tolerance).then_some((st, opts.max_newton_iterations))
        ))
    }

    /// Sign-change scan over `g(0)` followed by bisection.
    fn scan(&mut self, opts: &ShootOptions) -> Result<core::result::Result<Option<ShootState>, usize>> {
        let n = opts.scan_points;
        let mut prev: Option<(f64, f64)> = None;
        for i in 1..n {
            let g0 = self.p.g_inf * i as f64 / n as f64;
            let r = match self.residual(g0)? {
                Eval::Value(r, _) => r,
                Eval::Shrink(k) => return Ok(Err(k)),
                Eval::Undefined => {
                    prev = None;
                    continue;
                }
            };
            if let Some((ga, ra)) = prev {
                if ra * r <= 0.0 {
                    return self.bisect(ga, ra, g0, opts);
                }
            }
            prev = Some((g0, r));
        }
        Ok(Ok(None))
    }

    fn bisect(
        &mut self,
        mut a: f64,
        mut ra: f64,
        mut b: f64,
        opts: &ShootOptions,
    ) -> Result<core::result::Result<Option<ShootState>, usize>> {
        let mut best: Option<ShootState> = None;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let (rm, st) = match self.residual(mid)? {
                Eval::Value(rm, st) => (rm, st),
                Eval::Shrink(k) => return Ok(Err(k)),
                Eval::Undefined => return Ok(Ok(best)),
            };
            let done = abs(rm) <= opts.residual_tolerance || mid <= a || mid >= b;
            best = Some(st);
            if done {
                break;
            }
            if ra * rm <= 0.0 {
                b = mid;
            } else {
                a = mid;
                ra = rm;
            }
        }
        Ok(Ok(best))
    }
}

/// Paste the exterior asymptotics onto a matched trajectory and sample it
/// on the full grid.
/// Picard sweeps of the coupled tail solve.
const TAIL_SWEEPS: usize = 4;
/// Distance, in decay lengths, from the match node back to the tail junction.
const TAIL_PULL: f64 = 2.0;
/// Largest `f / f(0)` at the tail junction.
const TAIL_AMPLITUDE: f64 = 0.01;

/// Completes a matched shot on the whole grid. Beyond the match node the
/// profiles solve the discrete radial equations, pinned to the integrated
/// values at `r_m`, with `f(r_max) = 0` and the Coulomb Robin condition
/// on `g`.
fn assemble_profile(st: &ShootState, grid: &RadialGrid, p: &ModelParams) -> Result<Profile> {
    let n = grid.len();
    // Pin the tail inside the match node, where the growing mode picked up
    // by the integration is smaller, but only where f is already small.
    let pull = (TAIL_PULL / (p.sigma() * grid.spacing())) as usize;
    let end = st.f.len() - 1;
    let mut k_m = end.saturating_sub(pull);
    while k_m < end && st.f[k_m] > TAIL_AMPLITUDE * st.f0 {
        k_m += 1;
    }
    let st = &truncate(st.clone(), k_m, p);
    let r_m = st.radii[k_m];
    let sigma = p.sigma();
    let beta = r_m * (p.g_inf - st.g[k_m]);
    let mut f = st.f.clone();
    let mut g = st.g.clone();
    for &r in &grid.nodes()[k_m + 1..n] {
        f.push(st.f[k_m] * (r_m / r) * exp(-sigma * (r - r_m)));
        g.push(p.g_inf - beta / r);
    }
    let w = grid.weights();
    for _ in 0..TAIL_SWEEPS {
        let mut lower = alloc::vec![0.0; n];
        let mut diag = alloc::vec![1.0; n];
        let mut upper = alloc::vec![0.0; n];
        let mut rhs = f.clone();
        rhs[n - 1] = 0.0;
        for i in k_m + 1..n - 1 {
            let (c_in, c_out) = (grid.edge(i - 1), grid.edge(i));
            let fi = f[i] * f[i];
            let stiffness = p.m * p.m - g[i] * g[i] - 0.5 * p.h1 * fi + 0.25 * p.h2 * fi * fi;
            lower[i] = -c_in;
            upper[i] = -c_out;
            diag[i] = c_in + c_out + w[i] * stiffness;
            rhs[i] = 0.0;
        }
        f = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;

        let mut sys = gauge::assemble(&f, grid, p, OuterBoundary::Robin);
        for i in 0..=k_m {
            sys.lower[i] = 0.0;
            sys.upper[i] = 0.0;
            sys.diag[i] = 1.0;
            sys.rhs[i] = st.g[i];
        }
        g = solve_tridiagonal(&sys.lower, &sys.diag, &sys.upper, &sys.rhs)?;
    }
    let df = grid.differentiate(&f)?;
    let dg = grid.differentiate(&g)?;
    let mut fp = st.f_prime.clone();
    let mut gp = st.g_prime.clone();
    fp.extend_from_slice(&df[k_m + 1..]);
    gp.extend_from_slice(&dg[k_m + 1..]);
    Profile::from_parts(grid.clone(), f, g, fp, gp)
}

/// Largest number of times the match node is pulled inwards.
const MAX_SHRINKS: usize = 24;

/// Largest accepted `f(r_m) / f(0)`.
const LOCALIZATION: f64 = 0.05;

/// Matched solution of the radial system.
///
/// The match radius starts at `match_sigma / sigma`. When the two
/// trajectories bracketing `f(0)` separate before it (thin-wall profiles
/// amplify roundoff in `f(0)` exponentially), matching moves inwards to the
/// last node where they still agree, a quarter decay length back.
pub fn shoot(p: &ModelParams, grid: &RadialGrid, opts: &ShootOptions) -> Result<Solution> {
    p.ensure_valid()?;
    opts.validate()?;
    let k_m = match_index(p, grid, opts);
    if k_m < 2 || k_m + 1 >= grid.len() {
        return Err(Error::Options(format!(
            "match radius {} is outside the grid interior",
            grid.nodes()[k_m]
        )));
    }
    let backoff = (0.25 / (p.sigma() * grid.spacing())) as usize + 1;
    let mut m = Matcher {
        grid,
        p,
        k_end: k_m,
        k_match: k_m,
        evaluations: 0,
    };

    let first = opts.g0_guess.unwrap_or(0.5 * p.g_inf);
    let perturbations = [0.0, -0.2, 0.2, -0.35, 0.35, -0.45, 0.45];
    let mut newton_iterations = 0;
    let mut attempts = 0;
    let mut shrinks = 0;
    let mut shrink = |m: &mut Matcher, k: usize| -> Result<()> {
        shrinks += 1;
        if shrinks > MAX_SHRINKS || k < backoff + 2 {
            return Err(Error::NoMatch(
                "bracketing trajectories separate near the origin".into(),
            ));
        }
        m.k_match = k - backoff;
        Ok(())
    };

    let found = 'search: loop {
        for dp in perturbations.iter().take(opts.max_restarts + 1) {
            attempts += 1;
            let guess = min(max(first + dp * p.g_inf, 1e-3 * p.g_inf), (1.0 - 1e-3) * p.g_inf);
            match m.newton(guess, opts)? {
                Ok(Some((st, its))) => {
                    newton_iterations += its;
                    break 'search Some(st);
                }
                Ok(None) => {}
                Err(k) => {
                    shrink(&mut m, k)?;
                    continue 'search;
                }
            }
        }
        attempts += 1;
        match m.scan(opts)? {
            Ok(st) => break 'search st,
            Err(k) => shrink(&mut m, k)?,
        }
    };
    let st = found.ok_or_else(|| {
        Error::NoMatch(format!(
            "no g(0) in (0, {}) brackets a localized scalar profile ({} trajectories)",
            p.g_inf, m.evaluations
        ))
    })?;

    if !(abs(st.residuals[1]) <= opts.acceptance_tolerance) {
        return Err(Error::NoMatch(format!(
            "gauge matching residual {:.3e} above {:.1e}",
            st.residuals[1], opts.acceptance_tolerance
        )));
    }
    let f_m = st.f[st.f.len() - 1];
    if !(f_m <= LOCALIZATION * st.f0) {
        return Err(Error::NoMatch(format!(
            "scalar profile not localized: f(r_m) = {f_m:.3e}, f(0) = {:.3e}",
            st.f0
        )));
    }

    let profile = assemble_profile(&st, grid, p)?;
    let mut report = SolveReport::for_profile(&profile, p, Method::Shooting)?;
    report.converged = true;
    report.iterations = newton_iterations;
    report.attempts = attempts;
    report.f_origin = st.f0;
    report.g_origin = st.g0;
    Ok(Solution { profile, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_coefficients() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.0, 0.3);
        let [f, fp, _, _] = series_start(1.0, 0.0, 1.0, &p);
        assert!(abs(f - 1.0 - 1.0 / 6.0) < 1e-15);
        assert!(abs(fp - 1.0 / 3.0) < 1e-15);
        let p = ModelParams::new(1.0, 1.0, 1.0, 1.0, 0.5);
        let [_, _, g, gp] = series_start(1.0, 0.3, 1.0, &p);
        assert!(abs(g - 0.35) < 1e-15);
        assert!(abs(gp - 0.1) < 1e-15);
        assert_eq!(series_start(0.0, 0.2, 0.5, &p), [0.0, 0.0, 0.2, 0.0]);
    }

    #[test]
    fn zero_amplitude_is_a_fixed_point() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 1.0, 0.3);
        let grid = RadialGrid::new(20.0, 800).unwrap();
        let st = integrate_outward(0.0, 0.17, &grid, &p).unwrap();
        assert!(st.f.iter().all(|&v| v == 0.0));
        assert!(st.g.iter().all(|&v| v == 0.17));
        assert!(st.event.is_none());
    }

    #[test]
    fn large_amplitude_trips_the_guard() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 1.0, 0.3);
        let grid = RadialGrid::new(20.0, 2000).unwrap();
        let st = integrate_outward(1.2 * p.amplitude_bound(), 0.1, &grid, &p).unwrap();
        assert!(matches!(st.event, Some(ShotEvent::Diverged { .. })));
        assert!(st.f.len() < grid.len());
    }
}
