//! Factorization invariants of monoids of zero-sum sequences over finite abelian groups.

pub mod atoms;
pub mod bits;
pub mod constructions;
pub mod error;
pub mod factorize;
pub mod group;
pub mod lengthsets;
pub mod sequence;

pub use error::{Error, Result};
pub use group::{FiniteAbelianGroup, GroupElement, GroupSpec, QuotientMap, Rational};
pub use sequence::Sequence;
