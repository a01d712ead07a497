//! Pseudo-spectral simulation of the fractional hyperbolic-parabolic
//! chemotaxis system
//!
//! ```text
//!     ∂t u = -μ Λ^α u + ∂x(u q),
//!     ∂t q = ∂x f(u),            x ∈ 𝕋 = [0, 2π),
//! ```
//!
//! together with a numerical laboratory for the fractional Fisher information,
//! its lower bounds, and the dissipation and conservation laws of the system.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod fraclap;
pub mod functionals;
pub mod ineqlab;
pub mod kinetics;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};

/// Formats a float with 17 significant digits, the precision used by every
/// CSV file the crate writes.
pub fn sci17(x: f64) -> String {
    format!("{x:.16e}")
}
