//! Qualitative checks on a computed solution and the charge sweep.
//!
//! Every check is a pure function of a [`Profile`] and the model
//! parameters, so minimiser and shooting outputs go through identical code.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::functionals::Profile;
use crate::grid::{origin_value, RadialGrid};
use crate::math::{abs, ln, max, min, sqrt};
use crate::minimizer::{minimize, MinimizeOptions};
use crate::params::ModelParams;

/// Magnitude below which scalar samples count as underflowed.
pub const UNDERFLOW: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundsCheck {
    pub ok: bool,
    /// `min f` over checked nodes.
    pub f_low_margin: f64,
    /// `sqrt(2 h1 / h2) - max f`.
    pub f_high_margin: f64,
    pub g_low_margin: f64,
    /// `g_inf - max g`.
    pub g_high_margin: f64,
    /// First node breaking a bound.
    pub violation: Option<usize>,
    /// Far-tail nodes where `|f| <= UNDERFLOW`, exempt from `f > 0`.
    pub underflow_nodes: usize,
    pub note: Option<String>,
}

/// `0 < f < sqrt(2 h1 / h2)` and `0 < g < g_inf` on every node but the last.
pub fn check_bounds(profile: &Profile, p: &ModelParams) -> BoundsCheck {
    let n = profile.f.len();
    let interior = n - 1;
    let f = &profile.f[..interior];
    let g = &profile.g[..interior];
    let bound = p.amplitude_bound();

    let tail_start = f.iter().rposition(|v| abs(*v) > UNDERFLOW).map_or(0, |k| k + 1);
    let checked = if tail_start == 0 { interior } else { tail_start };
    let underflow_nodes = if tail_start == 0 { 0 } else { interior - tail_start };

    let mut violation = None;
    let (mut f_lo, mut f_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut g_lo, mut g_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..interior {
        let (fk, gk) = (f[k], g[k]);
        let f_checked = k < checked;
        if f_checked {
            f_lo = min(f_lo, fk);
        }
        f_hi = max(f_hi, fk);
        g_lo = min(g_lo, gk);
        g_hi = max(g_hi, gk);
        let f_bad = if f_checked { !(fk > 0.0) } else { fk < -UNDERFLOW } || !(fk < bound);
        let g_bad = !(gk > 0.0 && gk < p.g_inf);
        if violation.is_none() && (f_bad || g_bad) {
            violation = Some(k);
        }
    }
    let note = (underflow_nodes > 0).then(|| {
        format!(
            "{underflow_nodes} far-tail nodes beyond r = {:.4} have |f| <= {UNDERFLOW:e}",
            profile.grid.nodes()[tail_start]
        )
    });
    BoundsCheck {
        ok: violation.is_none(),
        f_low_margin: f_lo,
        f_high_margin: bound - f_hi,
        g_low_margin: g_lo,
        g_high_margin: p.g_inf - g_hi,
        violation,
        underflow_nodes,
        note,
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonotoneCheck {
    pub ok: bool,
    /// `g` strictly increasing (far-tail ties excepted).
    pub strict: bool,
    /// Discrete `r^2 g'` nondecreasing.
    pub flux_nondecreasing: bool,
    pub violation: Option<usize>,
    pub tied_nodes: usize,
    pub note: Option<String>,
}

/// Relative slack for the discrete flux test.
const FLUX_SLACK: f64 = 1e-9;

/// Strict increase of `g` and nondecreasing edge flux `r_k r_{k+1} (g_{k+1} - g_k) / h`.
pub fn check_monotone_g(profile: &Profile) -> MonotoneCheck {
    let g = &profile.g;
    let grid = &profile.grid;
    let n = g.len();
    let steps: Vec<f64> = g.windows(2).map(|w| w[1] - w[0]).collect();
    let last_rise = steps.iter().rposition(|d| *d > UNDERFLOW);
    let mut strict = true;
    let mut tied = 0;
    let mut violation = None;
    for (k, d) in steps.iter().enumerate() {
        let in_tail = last_rise.is_some_and(|j| k > j);
        if *d > 0.0 {
            continue;
        }
        if in_tail && *d >= -UNDERFLOW {
            tied += 1;
            continue;
        }
        strict = false;
        violation.get_or_insert(k);
    }
    let flux: Vec<f64> = (0..n - 1).map(|k| grid.edge(k) * steps[k]).collect();
    let scale = flux.iter().fold(0.0, |a: f64, v| max(a, abs(*v)));
    let mut flux_ok = scale > 0.0;
    for k in 0..flux.len().saturating_sub(1) {
        if flux[k + 1] < flux[k] - FLUX_SLACK * scale {
            flux_ok = false;
            violation.get_or_insert(k + 1);
        }
    }
    if scale == 0.0 {
        violation.get_or_insert(0);
    }
    MonotoneCheck {
        ok: strict && flux_ok,
        strict,
        flux_nondecreasing: flux_ok,
        violation,
        tied_nodes: tied,
        note: (tied > 0).then(|| format!("{tied} far-tail steps of g within {UNDERFLOW:e} of zero")),
    }
}

/// Least squares for `y ~ sum_j c_j x_j` with the given basis columns.
fn least_squares<const K: usize>(rows: impl Iterator<Item = ([f64; K], f64)> + Clone) -> Option<[f64; K]> {
    let mut a = [[0.0; K]; K];
    let mut b = [0.0; K];
    for (x, y) in rows {
        for i in 0..K {
            b[i] += x[i] * y;
            for j in 0..K {
                a[i][j] += x[i] * x[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..K {
        let piv = (col..K).fold(col, |best, r| if abs(a[r][col]) > abs(a[best][col]) { r } else { best });
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..K {
            let factor = a[r][col] / a[col][col];
            for c in col..K {
                a[r][c] -= factor * a[col][c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = [0.0; K];
    for i in (0..K).rev() {
        let s: f64 = (i + 1..K).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Linear fit `y = slope x + intercept` with relative RMS misfit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// `||y - fit|| / ||y||`.
    pub relative_residual: f64,
}

fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let [slope, intercept] = least_squares(x.iter().zip(y).map(|(&x, &y)| ([x, 1.0], y)))?;
    let (mut num, mut den) = (0.0, 0.0);
    for (&x, &y) in x.iter().zip(y) {
        let e = y - (slope * x + intercept);
        num += e * e;
        den += y * y;
    }
    Some(LineFit {
        slope,
        intercept,
        relative_residual: if den > 0.0 { sqrt(num / den) } else { f64::INFINITY },
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OriginFit {
    pub ok: bool,
    /// Fitted `f'(r) / r` near the origin.
    pub slope_f: LineFit,
    pub slope_g: LineFit,
    pub window_radius: f64,
    pub nodes: usize,
    /// `2a` and `2b` from the series coefficients at the extrapolated
    /// `f(0)`, `g(0)`.
    pub series_slope_f: f64,
    pub series_slope_g: f64,
    pub series_ok: bool,
}

/// Relative tolerance of the origin fits.
pub const ORIGIN_TOLERANCE: f64 = 0.05;

/// Fit `f' ~ alpha_f r + c_f` and `g' ~ alpha_g r + c_g` on `r <= window`.
///
/// Passes when both models leave at most 5% relative residual, both
/// intercepts are below `|alpha| h`, and the slopes agree with the series
/// coefficients to 5%.
pub fn check_origin_slopes(profile: &Profile, p: &ModelParams, window: Option<f64>) -> Result<OriginFit> {
    let grid = &profile.grid;
    let radius = window.unwrap_or(0.05 * grid.r_max());
    let nodes = grid.nodes().iter().take_while(|r| **r <= radius).count();
    if nodes < 5 {
        return Err(Error::Analysis(format!(
            "origin window r <= {radius} holds only {nodes} nodes"
        )));
    }
    let r = &grid.nodes()[..nodes];
    let fit = |d: &[f64]| fit_line(r, &d[..nodes]).ok_or_else(|| Error::Analysis("degenerate origin fit".into()));
    let slope_f = fit(&profile.f_prime)?;
    let slope_g = fit(&profile.g_prime)?;

    let (f0, g0) = (origin_value(&profile.f), origin_value(&profile.g));
    let series_slope_f =
        ((p.m * p.m - g0 * g0) * f0 - 0.5 * p.h1 * f0 * f0 * f0 + 0.25 * p.h2 * f0 * f0 * f0 * f0 * f0) / 3.0;
    let series_slope_g = p.e * p.e * g0 * f0 * f0 / 3.0;
    let close = |a: f64, b: f64| abs(a - b) <= ORIGIN_TOLERANCE * abs(b);
    let series_ok = close(slope_f.slope, series_slope_f) && close(slope_g.slope, series_slope_g);

    let h = grid.spacing();
    let line_ok = |l: &LineFit| l.relative_residual <= ORIGIN_TOLERANCE && abs(l.intercept) <= abs(l.slope) * h;
    Ok(OriginFit {
        ok: line_ok(&slope_f) && line_ok(&slope_g) && series_ok,
        slope_f,
        slope_g,
        window_radius: radius,
        nodes,
        series_slope_f,
        series_slope_g,
        series_ok,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayFit {
    pub ok: bool,
    pub sigma: f64,
    /// `-slope` of `ln(r f)` against `r`.
    pub sigma_plain: f64,
    /// `-slope` of `ln(r f)` against `(r, ln r)`: absorbs the Coulomb
    /// power `r^{-g_inf beta / sigma}` of the scalar tail.
    pub sigma_coulomb: f64,
    /// Fitted power of `r`.
    pub log_power: f64,
    pub plain_ok: bool,
    pub coulomb_ok: bool,
    pub window: (f64, f64),
    pub nodes: usize,
    /// RMS residual of the plain fit in `ln(r f)`.
    pub plain_rms: f64,
    pub coulomb_rms: f64,
}

/// Relative tolerance of the decay-rate fit.
pub const DECAY_TOLERANCE: f64 = 0.05;
/// Smallest tail window.
pub const MIN_TAIL_NODES: usize = 50;
/// Samples of `f` at or below this are excluded from the decay fit.
const DECAY_FLOOR: f64 = 1e-12;

/// Decay rate of the scalar tail on `[r_lo, r_hi]` (default
/// `[r_max / 2, r_max - 4 / sigma]`), dropping nodes where `f <= 1e-12`.
pub fn fit_decay_f(profile: &Profile, p: &ModelParams, window: Option<(f64, f64)>) -> Result<DecayFit> {
    let grid = &profile.grid;
    let sigma = p.sigma();
    let (lo, hi) = window.unwrap_or((0.5 * grid.r_max(), grid.r_max() - 4.0 / sigma));
    let idx: Vec<usize> = (0..grid.len())
        .filter(|&k| {
            let r = grid.nodes()[k];
            r >= lo && r <= hi && profile.f[k] > DECAY_FLOOR
        })
        .collect();
    if idx.len() < MIN_TAIL_NODES {
        return Err(Error::Analysis(format!(
            "decay window [{lo:.3}, {hi:.3}] has {} usable nodes, need {MIN_TAIL_NODES}",
            idx.len()
        )));
    }
    let r0 = grid.nodes()[idx[0]];
    let pts: Vec<(f64, f64)> = idx
        .iter()
        .map(|&k| {
            let r = grid.nodes()[k];
            (r, ln(r * profile.f[k]))
        })
        .collect();
    let plain = least_squares(pts.iter().map(|&(r, y)| ([r - r0, 1.0], y)))
        .ok_or_else(|| Error::Analysis("degenerate decay fit".into()))?;
    let coulomb = least_squares(pts.iter().map(|&(r, y)| ([r - r0, ln(r / r0), 1.0], y)))
        .ok_or_else(|| Error::Analysis("degenerate decay fit".into()))?;
    let rms = |model: &dyn Fn(f64) -> f64| {
        sqrt(pts.iter().map(|&(r, y)| (y - model(r)) * (y - model(r))).sum::<f64>() / pts.len() as f64)
    };
    let plain_rms = rms(&|r| plain[0] * (r - r0) + plain[1]);
    let coulomb_rms = rms(&|r| coulomb[0] * (r - r0) + coulomb[1] * ln(r / r0) + coulomb[2]);
    let within = |s: f64| abs(s - sigma) <= DECAY_TOLERANCE * sigma;
    let (sigma_plain, sigma_coulomb) = (-plain[0], -coulomb[0]);
    Ok(DecayFit {
        ok: within(sigma_coulomb),
        sigma,
        sigma_plain,
        sigma_coulomb,
        log_power: coulomb[1],
        plain_ok: within(sigma_plain),
        coulomb_ok: within(sigma_coulomb),
        window: (pts[0].0, pts[pts.len() - 1].0),
        nodes: pts.len(),
        plain_rms,
        coulomb_rms,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailFit {
    pub ok: bool,
    /// Mean of `r (g_inf - g)` over the window.
    pub beta: f64,
    /// Largest relative deviation from `beta` in the window.
    pub deviation: f64,
    pub window: (f64, f64),
    pub nodes: usize,
    /// `e^2 int g f^2 r^2 dr`.
    pub charge_beta: f64,
    /// `|beta - charge_beta| / charge_beta`.
    pub charge_deviation: f64,
    pub charge_ok: bool,
}

/// Tolerance for the tail flatness and the charge link.
pub const TAIL_TOLERANCE: f64 = 0.02;
/// `r f` threshold that defines the exterior window.
pub const EXTERIOR_THRESHOLD: f64 = 1e-8;

/// Coulomb coefficient of the gauge tail on the exterior window (every
/// node from the last one with `r f >= 1e-8` outwards), and its link to
/// the charge integral.
pub fn fit_tail_g(profile: &Profile, p: &ModelParams, window: Option<(f64, f64)>) -> Result<TailFit> {
    let grid = &profile.grid;
    let r = grid.nodes();
    let idx: Vec<usize> = match window {
        Some((lo, hi)) => (0..grid.len()).filter(|&k| r[k] >= lo && r[k] <= hi).collect(),
        None => {
            let start = (0..grid.len())
                .rposition(|k| r[k] * abs(profile.f[k]) >= EXTERIOR_THRESHOLD)
                .map_or(0, |k| k + 1);
            (start..grid.len()).collect()
        }
    };
    if idx.is_empty() {
        return Err(Error::Analysis(format!(
            "no exterior nodes with r f < {EXTERIOR_THRESHOLD:e} on r <= {}",
            grid.r_max()
        )));
    }
    let samples: Vec<f64> = idx.iter().map(|&k| r[k] * (p.g_inf - profile.g[k])).collect();
    let beta = samples.iter().sum::<f64>() / samples.len() as f64;
    let deviation = samples.iter().fold(0.0, |a: f64, s| max(a, abs(s - beta))) / abs(beta);
    let source: Vec<f64> = profile.g.iter().zip(&profile.f).map(|(g, f)| g * f * f).collect();
    let charge_beta = p.e * p.e * grid.integrate(&source)?;
    let charge_deviation = abs(beta - charge_beta) / abs(charge_beta);
    let ok = deviation <= TAIL_TOLERANCE;
    let charge_ok = charge_deviation <= TAIL_TOLERANCE;
    Ok(TailFit {
        ok,
        beta,
        deviation: if deviation.is_finite() {
            deviation
        } else {
            f64::INFINITY
        },
        window: (r[idx[0]], r[idx[idx.len() - 1]]),
        nodes: idx.len(),
        charge_beta,
        charge_deviation: if charge_deviation.is_finite() {
            charge_deviation
        } else {
            f64::INFINITY
        },
        charge_ok,
    })
}

/// Optional fit windows for [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct AnalysisOptions {
    /// Origin window radius; default `0.05 r_max`.
    pub origin_radius: Option<f64>,
    /// Decay window; default `[r_max / 2, r_max - 4 / sigma]`.
    pub decay_window: Option<(f64, f64)>,
    /// Exterior window; default where `r f < 1e-8`.
    pub tail_window: Option<(f64, f64)>,
}

/// All clause checks on one profile. Fits that cannot be carried out are
/// `None`, with the reason in `notes`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PropertyReport {
    pub bounds: BoundsCheck,
    pub monotone: MonotoneCheck,
    pub origin: Option<OriginFit>,
    pub decay: Option<DecayFit>,
    pub tail: Option<TailFit>,
    pub tolerances: Tolerances,
    pub notes: Vec<String>,
}

/// Tolerances the clause checks were run with.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    pub underflow: f64,
    pub flux_slack: f64,
    pub origin: f64,
    pub decay: f64,
    pub tail: f64,
    pub exterior_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            underflow: UNDERFLOW,
            flux_slack: FLUX_SLACK,
            origin: ORIGIN_TOLERANCE,
            decay: DECAY_TOLERANCE,
            tail: TAIL_TOLERANCE,
            exterior_threshold: EXTERIOR_THRESHOLD,
        }
    }
}

/// Pass flags of the individual clauses, in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PassPattern {
    pub bounds: bool,
    pub monotone: bool,
    pub origin: bool,
    pub decay: bool,
    pub tail: bool,
    pub charge_link: bool,
}

impl PassPattern {
    pub fn all(&self) -> bool {
        self.bounds && self.monotone && self.origin && self.decay && self.tail && self.charge_link
    }
}

impl PropertyReport {
    pub fn pattern(&self) -> PassPattern {
        PassPattern {
            bounds: self.bounds.ok,
            monotone: self.monotone.ok,
            origin: self.origin.as_ref().is_some_and(|o| o.ok),
            decay: self.decay.as_ref().is_some_and(|d| d.ok),
            tail: self.tail.as_ref().is_some_and(|t| t.ok),
            charge_link: self.tail.as_ref().is_some_and(|t| t.charge_ok),
        }
    }

    pub fn all_ok(&self) -> bool {
        self.pattern().all()
    }
}

fn keep<T>(r: Result<T>, what: &str, notes: &mut Vec<String>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{what}: {e}"));
            None
        }
    }
}

pub fn analyze(profile: &Profile, p: &ModelParams, opts: &AnalysisOptions) -> PropertyReport {
    let mut notes = Vec::new();
    let bounds = check_bounds(profile, p);
    let monotone = check_monotone_g(profile);
    notes.extend(bounds.note.clone());
    notes.extend(monotone.note.clone());
    let origin = keep(
        check_origin_slopes(profile, p, opts.origin_radius),
        "origin",
        &mut notes,
    );
    let decay = keep(fit_decay_f(profile, p, opts.decay_window), "decay", &mut notes);
    let tail = keep(fit_tail_g(profile, p, opts.tail_window), "tail", &mut notes);
    PropertyReport {
        bounds,
        monotone,
        origin,
        decay,
        tail,
        tolerances: Tolerances::default(),
        notes,
    }
}

/// How each sweep row builds its grid: `r_max = rmax_sigma / sigma(g_inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridPolicy {
    pub rmax_sigma: f64,
    pub n: usize,
}

impl GridPolicy {
    pub fn grid_for(&self, p: &ModelParams) -> Result<RadialGrid> {
        RadialGrid::for_decay(p.sigma(), self.rmax_sigma, self.n)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub g_inf: f64,
    pub q: f64,
    pub e_total: f64,
    pub i: f64,
    pub converged: bool,
    pub nontrivial: bool,
    pub iterations: usize,
    pub error: Option<String>,
}

impl SweepRow {
    /// Converged to a nontrivial solution.
    pub fn usable(&self) -> bool {
        self.converged && self.nontrivial && self.error.is_none()
    }
}

/// Solve one sweep row. Failures are recorded in the row.
pub fn sweep_row(base: &ModelParams, g_inf: f64, policy: &GridPolicy, opts: &MinimizeOptions) -> SweepRow {
    let p = base.with_g_inf(g_inf);
    let failed = |msg: String, sol: Option<&crate::Solution>| SweepRow {
        g_inf,
        q: sol.map_or(f64::NAN, |s| s.report.q),
        e_total: sol.map_or(f64::NAN, |s| s.report.e_total),
        i: sol.map_or(f64::NAN, |s| s.report.i),
        converged: sol.is_some_and(|s| s.report.converged),
        nontrivial: sol.is_some_and(|s| s.report.nontrivial),
        iterations: sol.map_or(0, |s| s.report.iterations),
        error: Some(msg),
    };
    if let Err(e) = p.ensure_valid() {
        return failed(format!("{e}"), None);
    }
    let grid = match policy.grid_for(&p) {
        Ok(g) => g,
        Err(e) => return failed(format!("{e}"), None),
    };
    match minimize(&p, &grid, opts) {
        Ok(s) => SweepRow {
            g_inf,
            q: s.report.q,
            e_total: s.report.e_total,
            i: s.report.i,
            converged: s.report.converged,
            nontrivial: s.report.nontrivial,
            iterations: s.report.iterations,
            error: None,
        },
        Err(e) => failed(format!("{e}"), e.partial()),
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepResult {
    pub e: f64,
    pub m: f64,
    pub h1: f64,
    pub h2: f64,
    /// Sorted by increasing `g_inf`.
    pub rows: Vec<SweepRow>,
}

/// Trend of `Q` as `g_inf` decreases, over usable rows.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChargeTrend {
    pub all_usable: bool,
    pub all_positive: bool,
    /// `Q` at the smallest usable `g_inf` over `Q` at the largest.
    pub terminal_ratio: f64,
    /// `Q` drops between the two smallest usable `g_inf`.
    pub last_two_decreasing: bool,
}

/// Terminal ratio required by the sweep trend check.
pub const TREND_RATIO: f64 = 0.1;

impl ChargeTrend {
    /// All rows usable with positive charge, the last two decreasing and
    /// the terminal ratio below `limit`.
    pub fn holds(&self, limit: f64) -> bool {
        self.all_usable && self.all_positive && self.last_two_decreasing && self.terminal_ratio < limit
    }
}

impl SweepResult {
    pub fn from_rows(base: &ModelParams, mut rows: Vec<SweepRow>) -> Self {
        rows.sort_by(|a, b| a.g_inf.total_cmp(&b.g_inf));
        Self {
            e: base.e,
            m: base.m,
            h1: base.h1,
            h2: base.h2,
            rows,
        }
    }

    pub fn trend(&self) -> ChargeTrend {
        let usable: Vec<&SweepRow> = self.rows.iter().filter(|r| r.usable()).collect();
        let terminal_ratio = match (usable.first(), usable.last()) {
            (Some(lo), Some(hi)) if usable.len() >= 2 => lo.q / hi.q,
            _ => f64::NAN,
        };
        ChargeTrend {
            all_usable: !self.rows.is_empty() && usable.len() == self.rows.len(),
            all_positive: !usable.is_empty() && usable.iter().all(|r| r.q > 0.0),
            terminal_ratio,
            last_two_decreasing: usable.len() >= 2 && usable[0].q < usable[1].q,
        }
    }
}

/// Sequential sweep over `g_inf` values.
pub fn sweep_charge(base: &ModelParams, g_infs: &[f64], policy: &GridPolicy, opts: &MinimizeOptions) -> SweepResult {
    let rows = g_infs.iter().map(|&g| sweep_row(base, g, policy, opts)).collect();
    SweepResult::from_rows(base, rows)
}
