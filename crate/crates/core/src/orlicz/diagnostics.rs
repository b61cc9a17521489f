use serde::Serialize;

use super::conjugate::ConjugatePair;
use super::function::OrliczFunction;
use crate::error::{Error, Result};

/// Log-spaced grid points for the Δ₂ scan.
const DELTA2_GRID: usize = 256;
/// A term ratio counts as contracting below this value.
const CONTRACTION: f64 = 1.0 - 1e-3;
/// Number of trailing terms inspected for the geometric-tail verdict.
const TAIL: usize = 10;
/// Largest lattice exponent tried for the equivalence constants (2^6).
const LATTICE_MAX_EXP: i32 = 6;

/// `sup M*(2t)/M*(t)` over a log-spaced grid of `[t_low, t_high]`.
///
/// This is the Δ₂ constant estimate on `(0, t_1]`.
pub fn delta2_ratio(pair: &ConjugatePair, t_low: f64, t_high: f64) -> Result<f64> {
    if !(t_low > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_low = {t_low} must be positive"
        )));
    }
    if !(t_low < t_high) {
        return Err(Error::InvalidArgument("t_low must be below t_high".into()));
    }
    let t1 = pair.level(1)?;
    if t_high > t1 * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "t_high = {t_high} exceeds t_1 = {t1}"
        )));
    }
    let ratio = (t_high / t_low).ln();
    let sup = (0..DELTA2_GRID)
        .map(|k| t_low * (ratio * k as f64 / (DELTA2_GRID - 1) as f64).exp())
        .map(|t| pair.value(2.0 * t) / pair.value(t))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailVerdict {
    Convergent,
    Divergent,
    /// Too few representable terms to judge.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummabilityReport {
    pub eps: f64,
    pub s: f64,
    /// `M(ε s^i) / M(s^i)` for `i = 1..`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Growth of the partial sums over the final ten terms.
    pub last_decade_increment: f64,
    /// Ratios of consecutive terms over the tail.
    pub tail_ratios: Vec<f64>,
    pub verdict: TailVerdict,
    /// First `i` at which `M(s^i)` or `M(ε s^i)` left the normal range.
    pub truncated_at: Option<usize>,
}

/// Partial sums of `Σ M(ε s^i)/M(s^i)` with a geometric-tail verdict.
pub fn summability_check(
    m: &OrliczFunction,
    eps: f64,
    s: f64,
    i_max: usize,
) -> Result<SummabilityReport> {
    if !(eps > 0.0 && eps <= 1.0) || !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need eps in (0, 1] and s in (0, 1), got eps = {eps}, s = {s}"
        )));
    }
    if i_max == 0 {
        return Err(Error::InvalidArgument("i_max must be at least 1".into()));
    }
    let mut terms = Vec::with_capacity(i_max);
    let mut truncated_at = None;
    for i in 1..=i_max {
        let t = s.powi(i as i32);
        let (num, den) = (m.value(eps * t), m.value(t));
        if den < f64::MIN_POSITIVE || num < f64::MIN_POSITIVE {
            truncated_at = Some(i);
            break;
        }
        terms.push(num / den);
    }
    if terms.is_empty() {
        return Err(Error::Degenerate(1));
    }
    let partial_sums: Vec<f64> = terms
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    let last = *partial_sums.last().unwrap();
    let last_decade_increment = if partial_sums.len() > TAIL {
        last - partial_sums[partial_sums.len() - 1 - TAIL]
    } else {
        last
    };
    let tail_ratios: Vec<f64> = if terms.len() > TAIL {
        terms[terms.len() - 1 - TAIL..]
            .windows(2)
            .map(|w| w[1] / w[0])
            .collect()
    } else {
        Vec::new()
    };
    let verdict = if tail_ratios.is_empty() {
        TailVerdict::Inconclusive
    } else if tail_ratios.iter().all(|&r| r < CONTRACTION) {
        TailVerdict::Convergent
    } else {
        TailVerdict::Divergent
    };
    Ok(SummabilityReport {
        eps,
        s,
        terms,
        partial_sums,
        last_decade_increment,
        tail_ratios,
        verdict,
        truncated_at,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Equivalence {
    /// `K⁻¹ M(t/k) <= N(t) <= K M(k t)` held at every grid point.
    Equivalent { big_k: f64, small_k: f64 },
    /// No lattice pair worked; `violating_t` breaks the widest pair tried.
    NotEquivalent { violating_t: f64, lattice_max: f64 },
}

/// Searches the lattice `K, k ∈ {1, 2, 4, …, 64}` for equivalence constants
/// on a log-spaced grid of `[t0·1e-8, t0]`.
///
/// A negative verdict only covers the lattice and grid that were tried.
pub fn equivalence_check(
    m: &OrliczFunction,
    n: &OrliczFunction,
    t0: f64,
    grid: usize,
) -> Result<Equivalence> {
    if !(t0 > 0.0 && t0.is_finite()) || grid < 2 {
        return Err(Error::InvalidArgument("need t0 > 0 and grid >= 2".into()));
    }
    let span = 1e-8f64.ln().abs();
    let points: Vec<f64> = (0..grid)
        .map(|i| t0 * (-span * (1.0 - i as f64 / (grid - 1) as f64)).exp())
        .collect();
    let slack = 1.0 + 1e-12;
    let violation = |big: f64, small: f64| {
        points.iter().copied().find(|&t| {
            let nt = n.value(t);
            m.value(t / small) / big > nt * slack || nt > big * m.value(small * t) * slack
        })
    };
    for a in 0..=LATTICE_MAX_EXP {
        for b in 0..=LATTICE_MAX_EXP {
            let (small, big) = (2f64.powi(a), 2f64.powi(b));
            if violation(big, small).is_none() {
                return Ok(Equivalence::Equivalent {
                    big_k: big,
                    small_k: small,
                });
            }
        }
    }
    let widest = 2f64.powi(LATTICE_MAX_EXP);
    Ok(Equivalence::NotEquivalent {
        violating_t: violation(widest, widest).unwrap_or(f64::NAN),
        lattice_max: widest,
    })
}
