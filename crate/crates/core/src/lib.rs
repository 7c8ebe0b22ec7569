//! Sums of squares not divisible by a prime.
//!
//! The crate computes minimal decompositions `n = x_1^2 + ... + x_k^2` with
//! every `x_i` coprime to a prime `p`, scans integer ranges for the largest
//! such minimum, and carries the supporting machinery: representation counts
//! of ternary forms, local densities, q-series for the eta product
//! `eta^2(2z) eta^2(10z)`, and exact checks of the polynomial identities
//! behind the constructive decompositions.

pub mod arith;
pub mod identities;
pub mod localdensity;
pub mod modforms;
pub mod quadform;
pub mod restricted;

pub use arith::Rational;
pub use quadform::{GenusEntry, GenusRegistry, QuadForm, RepSet};
