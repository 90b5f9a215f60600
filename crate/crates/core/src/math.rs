//! Thin wrappers over `libm` so the rest of the crate reads like `std` code.

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn max(a: f64, b: f64) -> f64 {
    libm::fmax(a, b)
}

#[inline]
pub(crate) fn min(a: f64, b: f64) -> f64 {
    libm::fmin(a, b)
}

/// Euclidean-style norm `sqrt(sum w_i v_i^2)`.
pub(crate) fn weighted_norm(values: &[f64], weights: &[f64]) -> f64 {
    let s: f64 = values.iter().zip(weights).map(|(v, w)| w * v * v).sum();
    sqrt(s)
}
