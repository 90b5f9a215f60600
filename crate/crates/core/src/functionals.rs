//! Profiles and the scalar functionals evaluated on them.
//!
//! All integrals are radial, `int (.) r^2 dr` over the truncated grid. The
//! `4 pi` solid-angle factor only appears in [`SolveReport::e_total`] and in
//! the charge `Q`.
//!
//! Gradient terms are discretised on mesh edges (`sum edge_k (du)^2 / 2`)
//! and algebraic terms with the node weights of [`RadialGrid`]. The
//! minimiser, gauge solve and residuals are built on the same pair, so the
//! discrete Euler-Lagrange equations of these functionals are exactly the
//! centred finite-difference form of the radial ODEs.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{origin_value, RadialGrid};
use crate::math::{abs, weighted_norm};
use crate::params::ModelParams;

/// Sampled pair `(f, g)` plus node derivatives.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Profile {
    pub grid: RadialGrid,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub f_prime: Vec<f64>,
    pub g_prime: Vec<f64>,
}

impl Profile {
    pub fn new(grid: RadialGrid, f: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        check_samples("f", &f, &grid)?;
        check_samples("g", &g, &grid)?;
        let f_prime = grid.differentiate(&f)?;
        let g_prime = grid.differentiate(&g)?;
        Ok(Self {
            grid,
            f,
            g,
            f_prime,
            g_prime,
        })
    }

    /// Rebuilds a profile from stored samples, keeping the stored
    /// derivatives instead of recomputing them.
    pub fn from_parts(
        grid: RadialGrid,
        f: Vec<f64>,
        g: Vec<f64>,
        f_prime: Vec<f64>,
        g_prime: Vec<f64>,
    ) -> Result<Self> {
        for (name, v) in [("f", &f), ("g", &g), ("f_prime", &f_prime), ("g_prime", &g_prime)] {
            check_samples(name, v, &grid)?;
        }
        Ok(Self {
            grid,
            f,
            g,
            f_prime,
            g_prime,
        })
    }

    /// The pair `(0, g_inf)`.
    pub fn trivial(grid: RadialGrid, p: &ModelParams) -> Self {
        let n = grid.len();
        Self {
            f: alloc::vec![0.0; n],
            g: alloc::vec![p.g_inf; n],
            f_prime: alloc::vec![0.0; n],
            g_prime: alloc::vec![0.0; n],
            grid,
        }
    }

    /// `f(0)`, extrapolated from the first two nodes.
    pub fn f_origin(&self) -> f64 {
        origin_value(&self.f)
    }

    pub fn g_origin(&self) -> f64 {
        origin_value(&self.g)
    }

    pub fn energies(&self, p: &ModelParams) -> Result<Energies> {
        Energies::evaluate(&self.f, &self.g, &self.grid, p)
    }
}

fn check_samples(name: &'static str, v: &[f64], grid: &RadialGrid) -> Result<()> {
    if v.len() != grid.len() {
        return Err(Error::Grid(format!(
            "{name} has {} samples, grid has {}",
            v.len(),
            grid.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidNumber { field: name });
    }
    Ok(())
}

fn check_pair(f: &[f64], g: &[f64], grid: &RadialGrid) -> Result<()> {
    check_samples("f", f, grid)?;
    check_samples("g", g, grid)
}

fn finite(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Numerics(format!("{name} evaluated to {x}")))
    }
}

/// `(1/2) sum_k edge_k (u_{k+1} - u_k)^2`, the discrete `(1/2) int u'^2 r^2 dr`.
pub fn gradient_energy(grid: &RadialGrid, u: &[f64]) -> f64 {
    0.5 * u
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let d = w[1] - w[0];
            grid.edge(k) * d * d
        })
        .sum::<f64>()
}

/// Field energy of the exterior Coulomb tail `g = g_inf - beta/r` on
/// `(r_max, inf)`, with `beta = r_max (g_inf - g(r_max))`. Vanishes when
/// `g(r_max) = g_inf`.
pub fn exterior_field_energy(grid: &RadialGrid, g: &[f64], p: &ModelParams) -> f64 {
    let d = p.g_inf - g[g.len() - 1];
    0.5 * grid.r_max() * d * d / (p.e * p.e)
}

/// Scalar self-interaction density `m^2 f^2 - (h1/4) f^4 + (h2/12) f^6`.
#[inline]
pub(crate) fn potential(p: &ModelParams, f: f64) -> f64 {
    let f2 = f * f;
    f2 * (p.m * p.m - 0.25 * p.h1 * f2 + p.h2 / 12.0 * f2 * f2)
}

/// Half the derivative of [`potential`]: `m^2 f - (h1/2) f^3 + (h2/4) f^5`.
#[inline]
pub(crate) fn potential_force(p: &ModelParams, f: f64) -> f64 {
    let f2 = f * f;
    f * (p.m * p.m - 0.5 * p.h1 * f2 + 0.25 * p.h2 * f2 * f2)
}

/// Derivative of [`potential_force`].
#[inline]
pub(crate) fn potential_stiffness(p: &ModelParams, f: f64) -> f64 {
    let f2 = f * f;
    p.m * p.m - 1.5 * p.h1 * f2 + 1.25 * p.h2 * f2 * f2
}

fn weighted_sum(grid: &RadialGrid, mut term: impl FnMut(usize) -> f64) -> f64 {
    grid.weights().iter().enumerate().map(|(k, w)| w * term(k)).sum()
}

/// `K(f) = (1/2) int { f'^2 + m^2 f^2 - (h1/4) f^4 + (h2/12) f^6 } r^2 dr`
pub fn compute_k(f: &[f64], grid: &RadialGrid, p: &ModelParams) -> Result<f64> {
    check_samples("f", f, grid)?;
    let k = gradient_energy(grid, f) + 0.5 * weighted_sum(grid, |k| potential(p, f[k]));
    finite("K", k)
}

/// `J_f(g) = (1/2) int { g'^2 / e^2 + g^2 f^2 } r^2 dr`, including the
/// exterior Coulomb field energy beyond `r_max`.
pub fn compute_j(f: &[f64], g: &[f64], grid: &RadialGrid, p: &ModelParams) -> Result<f64> {
    check_pair(f, g, grid)?;
    let field = (gradient_energy(grid, g)) / (p.e * p.e) + exterior_field_energy(grid, g, p);
    let coupling = 0.5 * weighted_sum(grid, |k| g[k] * g[k] * f[k] * f[k]);
    finite("J", field + coupling)
}

/// The indefinite action `I = K - J`.
pub fn compute_i(f: &[f64], g: &[f64], grid: &RadialGrid, p: &ModelParams) -> Result<f64> {
    Ok(compute_k(f, grid, p)? - compute_j(f, g, grid, p)?)
}

/// Radial energy integral (no `4 pi`), summed term by term.
pub fn compute_e(f: &[f64], g: &[f64], grid: &RadialGrid, p: &ModelParams) -> Result<f64> {
    check_pair(f, g, grid)?;
    let gradients =
        gradient_energy(grid, f) + gradient_energy(grid, g) / (p.e * p.e) + exterior_field_energy(grid, g, p);
    let algebraic = 0.5 * weighted_sum(grid, |k| g[k] * g[k] * f[k] * f[k] + potential(p, f[k]));
    finite("E", gradients + algebraic)
}

/// Electric charge `Q = 4 pi e int g f^2 r^2 dr`.
pub fn compute_q(f: &[f64], g: &[f64], grid: &RadialGrid, p: &ModelParams) -> Result<f64> {
    check_pair(f, g, grid)?;
    let q = 4.0 * PI * p.e * weighted_sum(grid, |k| g[k] * f[k] * f[k]);
    finite("Q", q)
}

/// `(1/2) int (f'^2 + c f^2) r^2 dr - g_inf^2 / e^2`, the coercivity floor
/// for `I(f, g_f)`.
pub fn coercivity_lower_bound(f: &[f64], grid: &RadialGrid, p: &ModelParams) -> Result<f64> {
    check_samples("f", f, grid)?;
    let c = p.coercivity_constant()?;
    let b = gradient_energy(grid, f) + 0.5 * c * weighted_sum(grid, |k| f[k] * f[k]) - p.g_inf * p.g_inf / (p.e * p.e);
    finite("coercivity bound", b)
}

/// Residual of the scalar equation,
/// `f'' + (2/r) f' - (m^2 - g^2) f + (h1/2) f^3 - (h2/4) f^5`,
/// at every node except the clamped outer one (which is set to zero).
pub fn scalar_residual(f: &[f64], g: &[f64], grid: &RadialGrid, p: &ModelParams) -> Result<Vec<f64>> {
    check_pair(f, g, grid)?;
    let n = grid.len();
    let w = grid.weights();
    let mut out = alloc::vec![0.0; n];
    for k in 0..n - 1 {
        let flux_out = grid.edge(k) * (f[k + 1] - f[k]);
        let flux_in = if k > 0 {
            grid.edge(k - 1) * (f[k] - f[k - 1])
        } else {
            0.0
        };
        let laplacian = (flux_out - flux_in) / w[k];
        out[k] = laplacian - potential_force(p, f[k]) + g[k] * g[k] * f[k];
    }
    Ok(out)
}

/// `sqrt(int res^2 r^2 dr)` over the interior nodes.
pub fn residual_norm(residual: &[f64], grid: &RadialGrid) -> f64 {
    let n = grid.len();
    weighted_norm(&residual[..n - 1], &grid.weights()[..n - 1])
}

/// All energies of a pair, computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Energies {
    pub k: f64,
    pub j: f64,
    pub i: f64,
    pub e: f64,
    pub q: f64,
}

impl Energies {
    pub fn evaluate(f: &[f64], g: &[f64], grid: &RadialGrid, p: &ModelParams) -> Result<Self> {
        let k = compute_k(f, grid, p)?;
        let j = compute_j(f, g, grid, p)?;
        Ok(Self {
            k,
            j,
            i: k - j,
            e: compute_e(f, g, grid, p)?,
            q: compute_q(f, g, grid, p)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Method {
    Minimizer,
    Shooting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StepKind {
    Start,
    Newton,
    Gradient,
}

/// One accepted iterate of the minimiser.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub iteration: usize,
    pub attempt: usize,
    pub reduced_action: f64,
    pub gradient_norm: f64,
    /// Coercivity floor at this iterate, when the constant is positive.
    pub lower_bound: Option<f64>,
    /// Gauge-equation residual of `g_f` at this iterate.
    pub constraint_violation: f64,
    pub step: f64,
    pub kind: StepKind,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveReport {
    pub method: Method,
    pub k: f64,
    pub j: f64,
    pub i: f64,
    /// Radial energy integral.
    pub e: f64,
    /// `4 pi e`.
    pub e_total: f64,
    pub q: f64,
    pub f_origin: f64,
    pub g_origin: f64,
    pub residual_f: f64,
    pub residual_g: f64,
    /// `I < 0`.
    pub nontrivial: bool,
    pub converged: bool,
    pub iterations: usize,
    /// Number of trial-profile attempts (minimiser) or matcher restarts.
    pub attempts: usize,
    pub coercivity_violations: usize,
    pub history: Vec<IterationRecord>,
}

impl SolveReport {
    /// Fills energies and residuals for a finished profile.
    pub fn for_profile(profile: &Profile, p: &ModelParams, method: Method) -> Result<Self> {
        let en = profile.energies(p)?;
        let rf = scalar_residual(&profile.f, &profile.g, &profile.grid, p)?;
        let residual_f = residual_norm(&rf, &profile.grid);
        let residual_g = crate::gauge::gauge_residual(&profile.f, &profile.g, &profile.grid, p)?;
        Ok(Self {
            method,
            k: en.k,
            j: en.j,
            i: en.i,
            e: en.e,
            e_total: 4.0 * PI * en.e,
            q: en.q,
            f_origin: profile.f_origin(),
            g_origin: profile.g_origin(),
            residual_f,
            residual_g,
            nontrivial: en.i < -NONTRIVIAL_MARGIN * (1.0 + en.k + abs(en.j)),
            converged: false,
            iterations: 0,
            attempts: 0,
            coercivity_violations: 0,
            history: Vec::new(),
        })
    }
}

/// Relative margin below zero that `I` must clear to count as nontrivial;
/// the trivial pair only reaches roundoff-level negative values.
pub const NONTRIVIAL_MARGIN: f64 = 1e-10;

/// A profile together with the report describing how it was obtained.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Solution {
    pub profile: Profile,
    pub report: SolveReport,
}
