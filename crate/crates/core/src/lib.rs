//! Formal integrability analysis for linear PDE systems in jet coordinates,
//! over exact rational arithmetic.
//!
//! The pipeline goes: parse or pick a system ([`jet::JetSystem`]), compute its
//! geometric symbols ([`symbol::SymbolFamily`]), assemble δ-Spencer complexes
//! and their cohomology table ([`spencer`]), then derive numerical invariants
//! (Hilbert polynomials, Cartan characters, slopes, stability verdicts) in
//! [`numerics`]. Everything is deterministic given an input and a seed.
//!
//! Linear algebra is generic over the scalar (see [`scalar::Scalar`]); the
//! concrete aliases below fix the exact-rational instantiation used by the
//! whole analysis pipeline.

pub mod catalog;
pub mod error;
pub mod jet;
pub mod linalg;
pub mod multiindex;
pub mod numerics;
pub mod parse;
pub mod report;
pub mod scalar;
pub mod spencer;
pub mod symbol;

/// Exact rational scalar used throughout the analysis pipeline.
pub type Rat = num::BigRational;
/// Dense matrix over [`Rat`].
pub type RatMatrix = linalg::Matrix<Rat>;
/// Linear subspace of some `Q^n`, kept with a canonical (RREF) basis.
pub type RatSubspace = linalg::Subspace<Rat>;

/// Shorthand rational constructor.
pub fn rat(p: i64, q: i64) -> Rat {
    use num::BigInt;
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Shorthand integer-as-rational constructor.
pub fn ratz(p: i64) -> Rat {
    rat(p, 1)
}
