//! Exact arithmetic substrate: rationals, multivariate polynomials and
//! dense linear solving over the rationals.
//!
//! Nothing in this module (or anywhere in the pipeline built on it) rounds:
//! all downstream identities are checked with structural equality.

pub mod linear;
pub mod poly;
pub mod rational;

pub use linear::LinearSystem;
pub use poly::Poly;
pub use rational::Rational;
