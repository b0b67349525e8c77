//! Entanglement correction factors and conjectural prime densities for
//! elliptic curves, with an empirical census to check them.
//!
//! The pipeline: a Galois image is described as per-prime components plus
//! abelian relations ([`entanglement::EntanglementSpec`]); a density problem
//! ([`density::DensityProblem`]) picks local sets; the character-sum formula
//! turns those into an exact correction factor, and an Euler product with a
//! rigorous tail gives the constant. [`verifier`] counts points prime by
//! prime to compare against it.

pub mod arith;
pub mod catalog;
pub mod characters;
pub mod density;
pub mod entanglement;
pub mod error;
pub mod groups;
pub mod verifier;

pub use catalog::{CatalogEntry, CurveGalois, WeierstrassCurve};
pub use characters::{Character, CyclotomicNumber, FiniteAbelianGroup};
pub use density::{DensityProblem, DensityResult, Vanishing};
pub use entanglement::{EntanglementSpec, LocalSet, PhiGroup};
pub use error::{Error, Result};
pub use groups::{AbstractFiniteGroup, GoursatData, MatrixGroup, ProductSubgroup, ResidueMatrix};

/// Exact rationals used throughout.
pub type Rational = num_rational::BigRational;

/// Default element cap for enumerated groups.
pub const DEFAULT_CAP: usize = 10_000_000;
