//! Uniform radial mesh on `(0, r_max]` with `r^2 dr` quadrature.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Minimum node count accepted by [`RadialGrid::new`].
pub const MIN_NODES: usize = 16;

/// Nodes `r_k = (k + 1) h`, `k = 0..n`, with `h = r_max / n`.
///
/// `weights` integrate `u(r) r^2` by the composite trapezoid rule on
/// `[0, r_max]` (the `r = 0` end contributes nothing because of the `r^2`
/// factor), with an end correction on the last node that makes the rule
/// exact for constants. Interior weights are exactly `r_k^2 h`, which is
/// also the node mass used by the finite-difference operators, so discrete
/// energies and their gradients share one measure.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialGrid {
    r_max: f64,
    spacing: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !r_max.is_finite() || r_max <= 0.0 {
            return Err(Error::Grid(format!("r_max must be positive, got {r_max}")));
        }
        if n < MIN_NODES {
            return Err(Error::Grid(format!("need at least {MIN_NODES} nodes, got {n}")));
        }
        let h = r_max / n as f64;
        let mut nodes: Vec<f64> = (1..=n).map(|k| k as f64 * h).collect();
        nodes[n - 1] = r_max;
        let mut weights: Vec<f64> = nodes.iter().map(|r| r * r * h).collect();
        weights[n - 1] = r_max * r_max * h / 2.0 - r_max * h * h / 6.0;
        Ok(Self {
            r_max,
            spacing: h,
            nodes,
            weights,
        })
    }

    /// Truncation radius `rmax_sigma / sigma`, so the domain covers a fixed
    /// number of scalar decay lengths.
    pub fn for_decay(sigma: f64, rmax_sigma: f64, n: usize) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Grid(format!("decay rate must be positive, got {sigma}")));
        }
        Self::new(rmax_sigma / sigma, n)
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Coefficient `r_k r_{k+1} / h` of the edge between nodes `k` and `k+1`.
    ///
    /// `sum_k edge(k) (u_{k+1} - u_k)^2 / 2` approximates
    /// `(1/2) int u'^2 r^2 dr`; its gradient divided by the node weight is
    /// the centred stencil for `-(u'' + 2u'/r)`. The edge to the origin has
    /// coefficient zero, which is how regularity at `r = 0` enters.
    #[inline]
    pub fn edge(&self, k: usize) -> f64 {
        self.nodes[k] * self.nodes[k + 1] / self.spacing
    }

    /// Index of the first node with `r >= radius` (clamped to the last node).
    pub fn index_at(&self, radius: f64) -> usize {
        let k = libm::ceil(radius / self.spacing) as isize - 1;
        k.clamp(0, self.len() as isize - 1) as usize
    }

    fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::Grid(format!(
                "expected {} samples, got {}",
                self.len(),
                values.len()
            )));
        }
        Ok(())
    }

    /// `int_0^{r_max} u(r) r^2 dr`.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        self.check_len(values)?;
        Ok(values.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }

    /// Centred differences inside, second-order one-sided at both ends.
    pub fn differentiate(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values)?;
        let n = self.len();
        let h2 = 2.0 * self.spacing;
        let mut out = Vec::with_capacity(n);
        out.push((-3.0 * values[0] + 4.0 * values[1] - values[2]) / h2);
        for k in 1..n - 1 {
            out.push((values[k + 1] - values[k - 1]) / h2);
        }
        out.push((3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / h2);
        Ok(out)
    }

    /// Samples a closure at every node.
    pub fn sample(&self, mut func: impl FnMut(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&r| func(r)).collect()
    }
}

/// Value at `r = 0` of an even profile, from the first two nodes.
///
/// Exact for `u = a + b r^2`.
pub fn origin_value(values: &[f64]) -> f64 {
    (4.0 * values[0] - values[1]) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_is_uniform() {
        let g = RadialGrid::new(3.0, 3000).unwrap();
        assert!((g.spacing() - 0.001).abs() < 1e-15);
        assert_eq!(g.nodes()[g.len() - 1], 3.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!(g.nodes()[0] > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RadialGrid::new(0.0, 100), Err(Error::Grid(_))));
        assert!(matches!(RadialGrid::new(1.0, 15), Err(Error::Grid(_))));
        assert!(matches!(RadialGrid::new(f64::NAN, 100), Err(Error::Grid(_))));
    }

    #[test]
    fn weights_are_exact_for_constants() {
        for &(r_max, n) in &[(2.0, 16), (2.0, 777), (13.7, 4000), (0.3, 50_000)] {
            let g = RadialGrid::new(r_max, n).unwrap();
            assert!(g.weights().iter().all(|&w| w > 0.0));
            let total: f64 = g.weights().iter().sum();
            let exact = r_max * r_max * r_max / 3.0;
            assert!(((total - exact) / exact).abs() < 1e-12, "{total} vs {exact}");
        }
    }

    #[test]
    fn integrate_examples() {
        let g = RadialGrid::new(2.0, 1000).unwrap();
        assert_eq!(g.integrate(&vec![0.0; 1000]).unwrap(), 0.0);
        assert!((g.integrate(&vec![1.0; 1000]).unwrap() - 8.0 / 3.0).abs() < 1e-10);

        let g = RadialGrid::new(1.0, 4000).unwrap();
        let v = g.sample(|r| r * r);
        assert!((g.integrate(&v).unwrap() - 0.2).abs() < 1e-6);

        let v = g.sample(|r| r);
        assert!((g.integrate(&v).unwrap() - 0.25).abs() / 0.25 < 1e-6);

        let g = RadialGrid::new(20.0, 8000).unwrap();
        let v = g.sample(|r| libm::exp(-2.0 * r));
        assert!((g.integrate(&v).unwrap() - 0.25).abs() < 1e-5);
    }

    #[test]
    fn length_mismatch_is_grid_error() {
        let g = RadialGrid::new(1.0, 20).unwrap();
        assert!(g.integrate(&[1.0; 19]).is_err());
        assert!(g.differentiate(&[1.0; 21]).is_err());
    }

    #[test]
    fn differentiate_examples() {
        let g = RadialGrid::new(5.0, 64).unwrap();
        assert!(g.differentiate(&vec![2.5; 64]).unwrap().iter().all(|&d| d == 0.0));

        let d = g.differentiate(g.nodes()).unwrap();
        assert!(d.iter().all(|&x| (x - 1.0).abs() < 1e-10));

        let g = RadialGrid::new(1.0, 4000).unwrap();
        let v = g.sample(|r| r * r);
        let d = g.differentiate(&v).unwrap();
        for k in 1..g.len() - 1 {
            assert!((d[k] - 2.0 * g.nodes()[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn origin_extrapolation_is_exact_for_even_quadratics() {
        let g = RadialGrid::new(1.0, 100).unwrap();
        let v = g.sample(|r| 0.7 - 3.0 * r * r);
        assert!((origin_value(&v) - 0.7).abs() < 1e-14);
    }

    #[test]
    fn summation_by_parts_residual_is_second_order() {
        // int u' v r^2 dr = -int u (v r^2)' / r^2 * r^2 dr for u(r_max) = 0
        let errs: Vec<f64> = [400usize, 800]
            .iter()
            .map(|&n| {
                let g = RadialGrid::new(4.0, n).unwrap();
                let u = g.sample(|r| libm::cos(core::f64::consts::PI * r / 8.0));
                let v = g.sample(|r| libm::exp(-r * r));
                let up = g.differentiate(&u).unwrap();
                let vr2: Vec<f64> = v.iter().zip(g.nodes()).map(|(v, r)| v * r * r).collect();
                let dvr2 = g.differentiate(&vr2).unwrap();
                let lhs: f64 = g
                    .integrate(&up.iter().zip(&v).map(|(a, b)| a * b).collect::<Vec<_>>())
                    .unwrap();
                let rhs: f64 = -g
                    .integrate(
                        &u.iter()
                            .zip(&dvr2)
                            .zip(g.nodes())
                            .map(|((u, d), r)| u * d / (r * r))
                            .collect::<Vec<_>>(),
                    )
                    .unwrap();
                (lhs - rhs).abs()
            })
            .collect();
        assert!(errs[0] < 1e-3, "{errs:?}");
        assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
    }
}
