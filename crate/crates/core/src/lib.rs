//! Certified arbitrary-precision evaluation of Euler sums of hyperharmonic
//! numbers, `σ(r, m) = Σ_{n>=1} h_n^(r) / n^m`.

pub(crate) mod asymptotic;
pub mod error;
pub mod exact;
pub mod identities;
pub mod real;
pub mod sums;

pub use error::{Error, Result};
