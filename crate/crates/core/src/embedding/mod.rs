//! The norming set `K ⊂ h_{M*}`, the evaluation operator `h_M → C(K)` and
//! the convex decomposition of normalised non-increasing vectors into
//! generators `t_i (e_1 + … + e_i)`.

mod kset;

pub use kset::{enumerate_truncated_k, KPoint, Sign, TruncatedK, ENUMERATION_GUARD};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::orlicz::{luxemburg_norm, ConjugatePair};
use crate::roots;
use crate::sequence::FiniteSequence;

/// Accepted `|Σ M*(b_i) - 1|` for input to [`decompose`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-8;
/// Slack on the pairing bound `sup_norm <= 2 · luxemburg_norm`.
pub const PAIRING_SLACK: f64 = 1e-9;
/// Headroom applied to the scan estimate of the uniform constant.
pub const C_HAT_HEADROOM: f64 = 1.1;

/// `b = Σ c_i · t_i (e_1 + … + e_i)` with `c_i = (b_i - b_{i+1}) / t_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub coefficients: Vec<f64>,
    pub levels: Vec<f64>,
}

impl Decomposition {
    /// The `i`-th generator `t_i Σ_{j<=i} e_j`, 1-based.
    pub fn generator(&self, i: usize) -> FiniteSequence {
        FiniteSequence::from_dense(&vec![self.levels[i - 1]; i])
    }

    /// `Σ_i c_i t_i [j <= i]` for every `j`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.coefficients.len()];
        let mut acc = 0.0;
        for i in (0..out.len()).rev() {
            acc += self.coefficients[i] * self.levels[i];
            out[i] = acc;
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.coefficients.iter().sum()
    }
}

/// `Σ M*(|b_i|)`.
pub fn conjugate_modular(b: &FiniteSequence, pair: &ConjugatePair) -> f64 {
    b.values().map(|v| pair.value(v.abs())).sum()
}

/// `f(b) = Σ (b_i - b_{i+1}) / t_i` over the dense coordinates of `b`.
pub fn telescoped_objective(b: &[f64], pair: &ConjugatePair) -> Result<f64> {
    if b.is_empty() {
        return Ok(0.0);
    }
    let levels = pair.levels_up_to(b.len())?;
    Ok((0..b.len())
        .map(|i| (b[i] - b.get(i + 1).copied().unwrap_or(0.0)) / levels[i])
        .sum())
}

/// Rescales `b` so that `Σ M*(|b_i|) = 1`.
pub fn normalize_to_unit_modular(
    b: &FiniteSequence,
    pair: &ConjugatePair,
) -> Result<FiniteSequence> {
    if b.is_zero() {
        return Err(Error::InvalidArgument(
            "cannot normalise the zero vector".into(),
        ));
    }
    let reaches = |c: f64| conjugate_modular(&b.scaled(c), pair) >= 1.0;
    let (lo, hi) = if reaches(1.0) {
        let lo = roots::expand_until(|c| !reaches(c), 0.5, 0.5, 1100, "normalising scale")?;
        (lo, 2.0 * lo)
    } else {
        let hi = roots::expand_until(reaches, 2.0, 2.0, 1100, "normalising scale")?;
        (0.5 * hi, hi)
    };
    let c = roots::bisect(reaches, lo, hi);
    let out = b.scaled(c);
    let residual = (conjugate_modular(&out, pair) - 1.0).abs();
    if residual > NORMALIZATION_TOLERANCE {
        return Err(Error::Residual {
            what: "normalisation",
            residual,
            tolerance: NORMALIZATION_TOLERANCE,
        });
    }
    Ok(out)
}

/// Splits a normalised, non-negative, non-increasing vector into the
/// generators `t_i (e_1 + … + e_i)`.
pub fn decompose(b: &FiniteSequence, pair: &ConjugatePair) -> Result<Decomposition> {
    let dense = b.to_dense();
    if let Some(i) = dense.iter().position(|&v| v < 0.0) {
        return Err(Error::NotDecreasing(i + 1));
    }
    if let Some(i) = dense.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::NotDecreasing(i + 2));
    }
    let residual = (conjugate_modular(b, pair) - 1.0).abs();
    if residual > NORMALIZATION_TOLERANCE {
        return Err(Error::Residual {
            what: "decomposition input normalisation",
            residual,
            tolerance: NORMALIZATION_TOLERANCE,
        });
    }
    let levels = pair.levels_up_to(dense.len())?.into_owned();
    let coefficients = (0..dense.len())
        .map(|i| (dense[i] - dense.get(i + 1).copied().unwrap_or(0.0)) / levels[i])
        .collect();
    Ok(Decomposition {
        coefficients,
        levels,
    })
}

/// Terms sorted in decreasing order and summed. Both [`evaluate`] and
/// [`sup_norm`] sum this way, so that the supremum over enumerated points
/// reproduces the selection rule bit for bit.
fn descending_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| b.total_cmp(a));
    terms.iter().sum()
}

/// `⟨b, x⟩ = t_n Σ_{i∈A} σ(i) b_i`.
pub fn evaluate(b: &FiniteSequence, x: &KPoint, pair: &ConjugatePair) -> Result<f64> {
    if x.is_zero() {
        return Ok(0.0);
    }
    let terms = x.iter().map(|(i, s)| s.apply(b.get(i))).collect();
    Ok(pair.level(x.n)? * descending_sum(terms))
}

/// `max_{n <= n_max} t_n · (sum of the n largest |b_i|)`, the supremum of
/// `⟨b, x⟩` over the first `n_max` levels of `K`.
pub fn sup_norm(b: &FiniteSequence, pair: &ConjugatePair, n_max: usize) -> Result<f64> {
    let mut mags: Vec<f64> = b.values().map(f64::abs).filter(|&v| v > 0.0).collect();
    if mags.is_empty() || n_max == 0 {
        return Ok(0.0);
    }
    mags.sort_by(|a, b| b.total_cmp(a));
    let levels = pair.levels_up_to(n_max)?;
    let mut best = 0.0f64;
    let mut prefix = 0.0;
    for n in 1..=n_max {
        if let Some(&v) = mags.get(n - 1) {
            prefix += v;
        }
        best = best.max(levels[n - 1] * prefix);
    }
    Ok(best)
}

/// [`sup_norm`] over all of `K`: levels past the support size cannot help
/// since `t_n` decreases.
pub fn sup_norm_full(b: &FiniteSequence, pair: &ConjugatePair) -> Result<f64> {
    sup_norm(b, pair, b.support_len())
}

/// The aligned point at level `n`: the `n` largest `|b_i|` with matching
/// signs. Ties go to the smaller index.
pub fn best_point(b: &FiniteSequence, n: usize) -> Result<KPoint> {
    let mut entries: Vec<(usize, f64)> = b.iter().filter(|&(_, v)| v != 0.0).collect();
    entries.sort_by(|x, y| y.1.abs().total_cmp(&x.1.abs()).then(x.0.cmp(&y.0)));
    entries.truncate(n);
    let (support, signs) = entries.into_iter().map(|(i, v)| (i, Sign::of(v))).unzip();
    KPoint::new(n, support, signs)
}

/// Largest `⟨b, x⟩` over the given points (and 0 for the origin).
pub fn enumeration_sup<'a, I>(b: &FiniteSequence, points: I, pair: &ConjugatePair) -> Result<f64>
where
    I: IntoIterator<Item = &'a KPoint>,
{
    let mut best = 0.0f64;
    for x in points {
        best = best.max(evaluate(b, x, pair)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRatio {
    pub sample_id: usize,
    pub lux_norm: f64,
    pub sup_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEquivalenceReport {
    pub samples: Vec<SampleRatio>,
    /// Ids of zero samples, which have no ratio.
    pub skipped: Vec<usize>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `1 / min_ratio`, the empirical norming constant.
    pub norming_constant: f64,
    /// Ids whose ratio exceeds `2 + PAIRING_SLACK`.
    pub pairing_violations: Vec<usize>,
}

impl NormEquivalenceReport {
    pub fn pairing_bound_holds(&self) -> bool {
        self.pairing_violations.is_empty()
    }
}

/// `sup_norm(b) / luxemburg_norm(b)` per sample.
pub fn norm_equivalence_report(
    pair: &ConjugatePair,
    samples: &[FiniteSequence],
) -> Result<NormEquivalenceReport> {
    let mut rows = Vec::with_capacity(samples.len());
    let mut skipped = Vec::new();
    for (id, b) in samples.iter().enumerate() {
        if b.is_zero() {
            skipped.push(id);
            continue;
        }
        let lux = luxemburg_norm(pair.base(), b);
        let sup = sup_norm_full(b, pair)?;
        rows.push(SampleRatio {
            sample_id: id,
            lux_norm: lux,
            sup_norm: sup,
            ratio: sup / lux,
        });
    }
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = rows
        .iter()
        .map(|r| r.ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    let pairing_violations = rows
        .iter()
        .filter(|r| !(r.sup_norm <= 2.0 * r.lux_norm + PAIRING_SLACK))
        .map(|r| r.sample_id)
        .collect();
    Ok(NormEquivalenceReport {
        samples: rows,
        skipped,
        min_ratio,
        max_ratio,
        norming_constant: 1.0 / min_ratio,
        pairing_violations,
    })
}
