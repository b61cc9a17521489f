use super::function::OrliczFunction;
use crate::roots;
use crate::sequence::FiniteSequence;

/// `Σ multiplicity · M(|value| / ρ)` over grouped coordinates.
pub fn modular(m: &OrliczFunction, groups: &[(f64, f64)], rho: f64) -> f64 {
    groups
        .iter()
        .map(|&(v, count)| {
            if count == 0.0 {
                0.0
            } else {
                count * m.value(v.abs() / rho)
            }
        })
        .sum()
}

/// Luxemburg norm `inf{ρ > 0 : Σ M(|a_i|/ρ) <= 1}`.
pub fn luxemburg_norm(m: &OrliczFunction, a: &FiniteSequence) -> f64 {
    let groups: Vec<(f64, f64)> = a.values().map(|v| (v, 1.0)).collect();
    luxemburg_norm_grouped(m, &groups)
}

/// Luxemburg norm of a vector given as `(value, multiplicity)` groups, so
/// that vectors with huge supports need not be materialised.
pub fn luxemburg_norm_grouped(m: &OrliczFunction, groups: &[(f64, f64)]) -> f64 {
    let top = groups
        .iter()
        .filter(|&&(_, c)| c > 0.0)
        .map(|&(v, _)| v.abs())
        .fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    let fits = |rho: f64| modular(m, groups, rho) <= 1.0;
    let mut hi = top;
    while !fits(hi) {
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let mut lo = hi;
    while fits(lo) {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return 0.0;
        }
    }
    roots::bisect(fits, lo, hi)
}
