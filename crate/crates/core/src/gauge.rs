//! The constraint map `f -> g_f`.
//!
//! At fixed `f` the gauge equation `(r^2 g')' = e^2 g f^2 r^2` is linear in
//! `g`, and its discretisation is the stationarity condition of the
//! discrete `J_f`. It is solved directly with one tridiagonal sweep.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::linalg::solve_tridiagonal;
use crate::math::{abs, max, weighted_norm};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum OuterBoundary {
    /// `g(r_max) = g_inf`.
    Dirichlet,
    /// `g + r g' = g_inf` at `r_max`: the exterior field is `g_inf - beta/r`.
    #[default]
    Robin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct GaugeSolveOptions {
    pub boundary: OuterBoundary,
    /// Largest accepted [`gauge_residual`] of the computed field.
    pub tolerance: f64,
}

impl Default for GaugeSolveOptions {
    fn default() -> Self {
        Self {
            boundary: OuterBoundary::Robin,
            tolerance: 1e-6,
        }
    }
}

impl GaugeSolveOptions {
    pub fn dirichlet() -> Self {
        Self {
            boundary: OuterBoundary::Dirichlet,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tolerance > 0.0 && self.tolerance.is_finite() {
            Ok(())
        } else {
            Err(Error::Options(format!(
                "gauge tolerance must be positive, got {}",
                self.tolerance
            )))
        }
    }
}

/// Tridiagonal system for `g`, rows scaled by `e^2`. Row `i` reads
/// `c_{i-1}(g_i - g_{i-1}) + c_i(g_i - g_{i+1}) + e^2 w_i f_i^2 g_i = rhs_i`.
pub(crate) struct GaugeSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

pub(crate) fn assemble(f: &[f64], grid: &RadialGrid, p: &ModelParams, boundary: OuterBoundary) -> GaugeSystem {
    let n = grid.len();
    let w = grid.weights();
    let e2 = p.e * p.e;
    let mut lower = alloc::vec![0.0; n];
    let mut diag = alloc::vec![0.0; n];
    let mut upper = alloc::vec![0.0; n];
    let mut rhs = alloc::vec![0.0; n];
    for i in 0..n {
        let c_in = if i > 0 { grid.edge(i - 1) } else { 0.0 };
        let c_out = if i + 1 < n { grid.edge(i) } else { 0.0 };
        lower[i] = -c_in;
        upper[i] = -c_out;
        diag[i] = c_in + c_out + e2 * w[i] * f[i] * f[i];
    }
    match boundary {
        OuterBoundary::Dirichlet => {
            lower[n - 1] = 0.0;
            diag[n - 1] = 1.0;
            rhs[n - 1] = p.g_inf;
        }
        OuterBoundary::Robin => {
            diag[n - 1] += grid.r_max();
            rhs[n - 1] = grid.r_max() * p.g_inf;
        }
    }
    GaugeSystem {
        lower,
        diag,
        upper,
        rhs,
    }
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

/// Solve for `g_f` without checking the model parameters or the residual.
pub(crate) fn solve_unchecked(
    f: &[f64],
    grid: &RadialGrid,
    p: &ModelParams,
    boundary: OuterBoundary,
) -> Result<Vec<f64>> {
    let s = assemble(f, grid, p, boundary);
    solve_tridiagonal(&s.lower, &s.diag, &s.upper, &s.rhs)
}

/// `g_f` on the grid.
pub fn solve_gauge(f: &[f64], grid: &RadialGrid, p: &ModelParams, opts: &GaugeSolveOptions) -> Result<Vec<f64>> {
    p.ensure_valid()?;
    opts.validate()?;
    check_f(f, grid)?;
    let g = solve_unchecked(f, grid, p, opts.boundary)?;
    let res = gauge_residual(f, &g, grid, p)?;
    if res > opts.tolerance {
        return Err(Error::Solver(format!(
            "gauge residual {res:.3e} exceeds tolerance {:.3e}",
            opts.tolerance
        )));
    }
    Ok(g)
}

/// Pointwise `g'' + (2/r) g' - e^2 g f^2`, zero at the outer node.
pub fn gauge_residual_samples(f: &[f64], g: &[f64], grid: &RadialGrid, p: &ModelParams) -> Result<Vec<f64>> {
    check_f(f, grid)?;
    check_f(g, grid).map_err(|e| match e {
        Error::InvalidNumber { .. } => Error::InvalidNumber { field: "g" },
        other => other,
    })?;
    let n = grid.len();
    let w = grid.weights();
    let e2 = p.e * p.e;
    let mut out = alloc::vec![0.0; n];
    for i in 0..n - 1 {
        let flux_out = grid.edge(i) * (g[i + 1] - g[i]);
        let flux_in = if i > 0 {
            grid.edge(i - 1) * (g[i] - g[i - 1])
        } else {
            0.0
        };
        out[i] = (flux_out - flux_in) / w[i] - e2 * g[i] * f[i] * f[i];
    }
    Ok(out)
}

/// `L^2(r^2 dr)` norm of the gauge-equation residual over interior nodes.
pub fn gauge_residual(f: &[f64], g: &[f64], grid: &RadialGrid, p: &ModelParams) -> Result<f64> {
    let res = gauge_residual_samples(f, g, grid, p)?;
    let n = grid.len();
    let norm = weighted_norm(&res[..n - 1], &grid.weights()[..n - 1]);
    if norm.is_finite() {
        Ok(norm)
    } else {
        Err(Error::Numerics(format!("gauge residual evaluated to {norm}")))
    }
}

/// Largest `|int { g' v' / e^2 + g v f^2 } r^2 dr|` over test functions `v`
/// vanishing at `r_max`.
pub fn check_constraint(
    f: &[f64],
    g: &[f64],
    grid: &RadialGrid,
    p: &ModelParams,
    test_functions: &[Vec<f64>],
) -> Result<f64> {
    check_f(f, grid)?;
    check_f(g, grid)?;
    let n = grid.len();
    let w = grid.weights();
    let e2 = p.e * p.e;
    let mut worst: f64 = 0.0;
    for v in test_functions {
        if v.len() != n {
            return Err(Error::Grid(format!(
                "test function has {} samples, grid has {n}",
                v.len()
            )));
        }
        if abs(v[n - 1]) > 0.0 {
            return Err(Error::Options("test functions must vanish at r_max".into()));
        }
        let field: f64 = (0..n - 1)
            .map(|k| grid.edge(k) * (g[k + 1] - g[k]) * (v[k + 1] - v[k]))
            .sum();
        let coupling: f64 = (0..n).map(|k| w[k] * g[k] * v[k] * f[k] * f[k]).sum();
        worst = max(worst, abs(field / e2 + coupling));
    }
    Ok(worst)
}

/// `count` smooth compactly supported bumps, evenly spread over
/// `(0, r_max)`, each vanishing at `r_max`.
pub fn bump_test_functions(grid: &RadialGrid, count: usize) -> Vec<Vec<f64>> {
    let width = grid.r_max() / (count as f64 + 1.0);
    (1..=count)
        .map(|j| {
            let centre = j as f64 * width;
            let mut v = grid.sample(|r| {
                let x = (r - centre) / width;
                if abs(x) < 1.0 {
                    let s = 1.0 - x * x;
                    s * s
                } else {
                    0.0
                }
            });
            let last = v.len() - 1;
            v[last] = 0.0;
            v
        })
        .collect()
}
