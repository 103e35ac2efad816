//! Weighted finite sums `Σ_{a<n≤b} w(n) f(n)` for unit, periodic, divisor and
//! divisor-times-periodic weights, evaluated directly and through
//! Euler-Maclaurin and Poisson type identities.

pub mod arith;
pub mod error;
pub mod formulae;
pub mod kernels;
pub mod smoothfn;

pub use error::{Error, Guard, Result};
