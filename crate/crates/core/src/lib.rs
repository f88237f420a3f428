//! Sheffer polynomials H_n(x) generated by Q(z)^x Q(−z)^{1−x} for quadratic Q.
//!
//! The crate covers the exact side (power series, exponential Riordan
//! matrices, generating trees, lattice paths) and the analytic side
//! (critical curves, contour integrals, asymptotic approximants, root finding
//! on the critical line Re x = 1/2).

pub mod analysis;
pub mod combinat;
pub mod error;
pub mod fmt;
pub mod riordan;
pub mod series;
pub mod sheffer;
pub mod zeros;

pub use error::{Error, Result};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 128;
