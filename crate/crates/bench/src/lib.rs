//! Shared fixtures for the benchmarks.

use orlicz_core::{conjugate, ConjugatePair, FiniteSequence, OrliczFunction};

/// The three families used throughout: `power(2)`, `power(3)` and `lt`.
pub fn pairs(levels: usize) -> Vec<ConjugatePair> {
    [
        OrliczFunction::power(2.0).unwrap(),
        OrliczFunction::power(3.0).unwrap(),
        OrliczFunction::lt().unwrap(),
    ]
    .iter()
    .map(|m| conjugate(m).unwrap().with_levels(levels).unwrap())
    .collect()
}

/// A deterministic vector with `len` alternating, slowly decaying entries.
pub fn wavy(len: usize) -> FiniteSequence {
    let v: Vec<f64> = (1..=len)
        .map(|i| {
            let x = 1.0 / (i as f64).sqrt();
            if i % 3 == 0 {
                -x
            } else {
                x
            }
        })
        .collect();
    FiniteSequence::from_dense(&v)
}
