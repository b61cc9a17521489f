//! Orlicz sequence spaces `h_M` and their embedding into `C(ω^ω)`.
//!
//! The crate solves the extremal problem behind the embedding constant,
//! builds the countable norming set `K` with its evaluation operator, ranks
//! the points of `K` by Cantor–Bendixson derivation and produces the
//! explicit witnesses that rule out embeddings into `C(α)` for `α < ω^ω`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embedding;
pub mod error;
pub mod extremal;
pub mod nonembed;
pub mod ordinal;
pub mod orlicz;
pub mod report;
pub mod roots;
pub mod sequence;

pub use embedding::{Decomposition, KPoint, Sign};
pub use error::{Error, Result};
pub use extremal::{ExtremalProblem, ExtremalSolution};
pub use nonembed::{BlockPartition, Witness};
pub use ordinal::{OrdinalTag, SymbolicFamily};
pub use orlicz::{conjugate, make_family, ConjugatePair, FamilySpec, OrliczFunction};
pub use report::Record;
pub use sequence::FiniteSequence;
