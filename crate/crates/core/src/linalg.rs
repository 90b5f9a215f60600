//! Banded direct solvers used by the gauge solve and the Newton step.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, max};

/// Solves `lower[k] x[k-1] + diag[k] x[k] + upper[k] x[k+1] = rhs[k]`.
///
/// `lower[0]` and `upper[n-1]` are ignored. No pivoting: intended for the
/// diagonally dominant M-matrices produced by the radial operators.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n || n == 0 {
        return Err(Error::Solver("tridiagonal system has inconsistent sizes".into()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    for k in 0..n {
        if k > 0 {
            pivot = diag[k] - lower[k] * c[k - 1];
        }
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Solver("singular tridiagonal pivot".into()));
        }
        c[k] = if k + 1 < n { upper[k] / pivot } else { 0.0 };
        d[k] = if k == 0 {
            rhs[0] / pivot
        } else {
            (rhs[k] - lower[k] * d[k - 1]) / pivot
        };
    }
    let mut x = d;
    for k in (0..n - 1).rev() {
        x[k] -= c[k] * x[k + 1];
    }
    Ok(x)
}

/// Dense 2x2 matrix stored row-major.
pub type Block = [[f64; 2]; 2];

fn block_mul(a: &Block, b: &Block) -> Block {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn block_vec(a: &Block, v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

fn block_inverse(a: &Block) -> Option<Block> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = max(max(abs(a[0][0]), abs(a[1][1])), max(abs(a[0][1]), abs(a[1][0])));
    if !det.is_finite() || abs(det) <= 1e-300 || abs(det) <= 1e-14 * scale * scale {
        return None;
    }
    Some([[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]])
}

/// Block Thomas algorithm for a block-tridiagonal system with 2x2 blocks.
///
/// Row `k` reads `lower[k] x[k-1] + diag[k] x[k] + upper[k] x[k+1] = rhs[k]`.
pub fn solve_block_tridiagonal(
    lower: &[Block],
    diag: &[Block],
    upper: &[Block],
    rhs: &[[f64; 2]],
) -> Result<Vec<[f64; 2]>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n || n == 0 {
        return Err(Error::Solver("block system has inconsistent sizes".into()));
    }
    let singular = || Error::Solver("singular 2x2 pivot block".into());
    let mut c: Vec<Block> = vec![[[0.0; 2]; 2]; n];
    let mut d: Vec<[f64; 2]> = vec![[0.0; 2]; n];
    for k in 0..n {
        let (pivot, r) = if k == 0 {
            (diag[0], rhs[0])
        } else {
            let lc = block_mul(&lower[k], &c[k - 1]);
            let ld = block_vec(&lower[k], d[k - 1]);
            (
                [
                    [diag[k][0][0] - lc[0][0], diag[k][0][1] - lc[0][1]],
                    [diag[k][1][0] - lc[1][0], diag[k][1][1] - lc[1][1]],
                ],
                [rhs[k][0] - ld[0], rhs[k][1] - ld[1]],
            )
        };
        let inv = block_inverse(&pivot).ok_or_else(singular)?;
        if k + 1 < n {
            c[k] = block_mul(&inv, &upper[k]);
        }
        d[k] = block_vec(&inv, r);
    }
    let mut x = d;
    for k in (0..n - 1).rev() {
        let cx = block_vec(&c[k], x[k + 1]);
        x[k] = [x[k][0] - cx[0], x[k][1] - cx[1]];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense_product() {
        let n = 7;
        let lower: Vec<f64> = (0..n).map(|k| -1.0 - 0.1 * k as f64).collect();
        let upper: Vec<f64> = (0..n).map(|k| -0.5 + 0.05 * k as f64).collect();
        let diag: Vec<f64> = (0..n).map(|k| 4.0 + k as f64).collect();
        let x_true: Vec<f64> = (0..n).map(|k| (k as f64).sin()).collect();
        let rhs: Vec<f64> = (0..n)
            .map(|k| {
                let mut s = diag[k] * x_true[k];
                if k > 0 {
                    s += lower[k] * x_true[k - 1];
                }
                if k + 1 < n {
                    s += upper[k] * x_true[k + 1];
                }
                s
            })
            .collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn tridiagonal_reports_singular_pivot() {
        let r = solve_tridiagonal(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]);
        assert!(matches!(r, Err(Error::Solver(_))));
    }

    #[test]
    fn block_solver_matches_dense_product() {
        let n = 6;
        let mk = |a: f64, b: f64, c: f64, d: f64| [[a, b], [c, d]];
        let diag: Vec<Block> = (0..n)
            .map(|k| mk(5.0 + k as f64, 0.7, 0.7, -(3.0 + 0.5 * k as f64)))
            .collect();
        let lower: Vec<Block> = (0..n).map(|_| mk(-1.0, 0.0, 0.0, 0.8)).collect();
        let upper = lower.clone();
        let x_true: Vec<[f64; 2]> = (0..n).map(|k| [(k as f64).cos(), 0.3 * k as f64 - 1.0]).collect();
        let rhs: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let mut s = block_vec(&diag[k], x_true[k]);
                if k > 0 {
                    let t = block_vec(&lower[k], x_true[k - 1]);
                    s = [s[0] + t[0], s[1] + t[1]];
                }
                if k + 1 < n {
                    let t = block_vec(&upper[k], x_true[k + 1]);
                    s = [s[0] + t[0], s[1] + t[1]];
                }
                s
            })
            .collect();
        let x = solve_block_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }
}
