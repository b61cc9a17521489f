//! Orlicz functions and their calculus: evaluation, conjugates, level
//! sequences, Luxemburg norms and the Δ₂ / summability / equivalence
//! diagnostics.

mod conjugate;
mod diagnostics;
mod function;
mod norm;
mod quad;

pub use conjugate::{conjugate, level_sequence, ConjugatePair, LEVEL_TOLERANCE};
pub use diagnostics::{
    delta2_ratio, equivalence_check, summability_check, Equivalence, SummabilityReport, TailVerdict,
};
pub use function::{
    make_family, smooth, Extension, FamilySpec, FunctionInfo, OrliczFunction, SummabilityParams,
};
pub use norm::{luxemburg_norm, luxemburg_norm_grouped, modular};
