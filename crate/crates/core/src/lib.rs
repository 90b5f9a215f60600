//! Numerical core for U(1) gauged Q-balls in the sextic-potential model.
//!
//! The static, spherically symmetric ansatz reduces the field equations to
//! two radial profiles: the scalar amplitude `f` and the rescaled electric
//! potential `g`, coupled through
//!
//! ```text
//! f'' + (2/r) f' - (m^2 - g^2) f + (h1/2) f^3 - (h2/4) f^5 = 0
//! g'' + (2/r) g' - e^2 g f^2                               = 0
//! ```
//!
//! with `f'(0) = g'(0) = 0`, `f(inf) = 0` and `g(inf) = g_inf`.
//!
//! Two independent solution paths are provided:
//!
//! * [`minimizer`]: descent on the reduced action `I(f, g_f)`, where
//!   `g_f` is the unique solution of the linear gauge problem at fixed `f`
//!   ([`gauge`]).
//! * [`shooting`]: outward integration from a regular series start at the
//!   origin, matched to the exponential / Coulomb tails.
//!
//! [`analysis`] checks the qualitative properties of a computed solution
//! (bounds, monotonicity, origin behaviour, tail asymptotics, charge).
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod functionals;
pub mod gauge;
pub mod grid;
pub mod linalg;
pub(crate) mod math;
pub mod minimizer;
pub mod params;
pub mod shooting;

pub use error::{Error, Result};
pub use functionals::{Profile, Solution, SolveReport};
pub use grid::RadialGrid;
pub use params::{Admissibility, ModelParams};
