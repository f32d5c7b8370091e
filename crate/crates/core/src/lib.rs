//! Exact rational models of fibrewise self-equivalence spaces: derivation
//! DG Lie algebras of relative Sullivan models, their homology and brackets,
//! Chevalley–Eilenberg cochains, and classification of SU(n)-bundle families.

pub mod algebra;
pub mod classify;
pub mod cli;
pub mod cochains;
pub mod derivation;
pub mod dsl;
pub mod error;
pub mod exact;
pub mod hom;
pub mod par;
pub mod random;
pub mod report;

pub use error::Error;
