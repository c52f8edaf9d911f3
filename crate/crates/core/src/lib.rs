//! Recover the exterior singularities of a function analytic in the unit disk
//! from its Taylor coefficients or boundary values.
//!
//! Each singular term is `M (z_j − z)^k` (algebraic, order k) or
//! `M log(z_j − z)` (logarithmic) with |z_j| > 1.

pub mod asymptotic;
pub mod boundary;
pub mod complement;
pub mod error;
mod numeric;
pub mod pair;
pub mod series;
pub mod sign_pattern;
pub mod single;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numeric::NewtonOptions;
