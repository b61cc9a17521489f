use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orlicz::ConjugatePair;
use crate::sequence::FiniteSequence;

/// Guard on the index and level bounds of [`TruncatedK`].
pub const ENUMERATION_GUARD: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Sign::Plus => x,
            Sign::Minus => -x,
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("sign must be 1 or -1, got {other}")),
        }
    }
}

/// A point `(n, A, σ)` of the norming set: the sequence equal to
/// `σ(i) t_n` on `A` and zero elsewhere, with `|A| <= n`.
///
/// Level 0 is reserved for the origin shared by all levels; a level-`n`
/// point with empty support is the per-level copy of the origin.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct KPoint {
    pub n: usize,
    #[serde(rename = "A")]
    support: Vec<usize>,
    signs: Vec<Sign>,
}

impl KPoint {
    /// Validates `|A| <= n`, distinct positive indices and one sign per
    /// index. The support is sorted, carrying the signs along.
    pub fn new(n: usize, support: Vec<usize>, signs: Vec<Sign>) -> Result<Self> {
        if support.len() != signs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} indices but {} signs",
                support.len(),
                signs.len()
            )));
        }
        if n == 0 && !support.is_empty() {
            return Err(Error::InvalidArgument(
                "the origin has empty support".into(),
            ));
        }
        if support.len() > n {
            return Err(Error::InvalidArgument(format!(
                "support of size {} exceeds level {n}",
                support.len()
            )));
        }
        let mut pairs: Vec<(usize, Sign)> = support.into_iter().zip(signs).collect();
        pairs.sort();
        if pairs.first().is_some_and(|p| p.0 == 0) {
            return Err(Error::InvalidArgument("indices start at 1".into()));
        }
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument(
                "support indices must be distinct".into(),
            ));
        }
        let (support, signs) = pairs.into_iter().unzip();
        Ok(Self { n, support, signs })
    }

    /// All signs positive.
    pub fn positive(n: usize, support: Vec<usize>) -> Result<Self> {
        let signs = vec![Sign::Plus; support.len()];
        Self::new(n, support, signs)
    }

    pub fn origin() -> Self {
        Self {
            n: 0,
            support: Vec::new(),
            signs: Vec::new(),
        }
    }

    pub fn is_origin(&self) -> bool {
        self.n == 0
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Sign)> + '_ {
        self.support.iter().copied().zip(self.signs.iter().copied())
    }

    /// The point as a sequence, `σ(i) t_n` on `A`.
    pub fn realize(&self, pair: &ConjugatePair) -> Result<FiniteSequence> {
        if self.is_zero() {
            return Ok(FiniteSequence::zero());
        }
        let t = pair.level(self.n)?;
        FiniteSequence::new(self.iter().map(|(i, s)| (i, s.apply(t))).collect())
    }

    /// Restriction of the support to indices `<= k`, keeping the level.
    pub fn truncated(&self, k: usize) -> Self {
        let (support, signs) = self.iter().filter(|&(i, _)| i <= k).unzip();
        Self {
            n: self.n,
            support,
            signs,
        }
    }
}

/// Iterator over the truncated norming set: the origin followed by every
/// `(n, A, σ)` with `1 <= n <= N`, `∅ ≠ A ⊆ {1..I}`, `|A| <= n`.
#[derive(Debug, Clone)]
pub struct TruncatedK {
    index_bound: usize,
    level_bound: usize,
    origin_pending: bool,
    level: usize,
    subset: u32,
    sign_mask: u32,
}

impl TruncatedK {
    pub fn new(index_bound: usize, level_bound: usize) -> Result<Self> {
        for (what, v) in [
            ("index bound I", index_bound),
            ("level bound N", level_bound),
        ] {
            if v > ENUMERATION_GUARD {
                return Err(Error::Guard {
                    what,
                    limit: ENUMERATION_GUARD,
                    got: v,
                });
            }
        }
        Ok(Self {
            index_bound,
            level_bound,
            origin_pending: true,
            level: 1,
            subset: 1,
            sign_mask: 0,
        })
    }

    /// `1 + Σ_{n<=N} Σ_{1<=k<=min(n,I)} C(I,k) 2^k`.
    pub fn expected_len(index_bound: usize, level_bound: usize) -> usize {
        let mut binom = vec![1usize; index_bound + 1];
        for k in 1..=index_bound {
            binom[k] = binom[k - 1] * (index_bound + 1 - k) / k;
        }
        1 + (1..=level_bound)
            .map(|n| {
                (1..=n.min(index_bound))
                    .map(|k| binom[k] << k)
                    .sum::<usize>()
            })
            .sum::<usize>()
    }

    fn point(&self) -> KPoint {
        let support: Vec<usize> = (0..self.index_bound)
            .filter(|b| self.subset >> b & 1 == 1)
            .map(|b| b + 1)
            .collect();
        let signs = (0..support.len())
            .map(|b| {
                if self.sign_mask >> b & 1 == 1 {
                    Sign::Minus
                } else {
                    Sign::Plus
                }
            })
            .collect();
        KPoint {
            n: self.level,
            support,
            signs,
        }
    }
}

impl Iterator for TruncatedK {
    type Item = KPoint;

    fn next(&mut self) -> Option<KPoint> {
        if self.origin_pending {
            self.origin_pending = false;
            return Some(KPoint::origin());
        }
        let subsets = 1u32 << self.index_bound;
        while self.level <= self.level_bound {
            while self.subset < subsets {
                let size = self.subset.count_ones();
                if size as usize <= self.level && self.sign_mask < 1 << size {
                    let p = self.point();
                    self.sign_mask += 1;
                    return Some(p);
                }
                self.subset += 1;
                self.sign_mask = 0;
            }
            self.level += 1;
            self.subset = 1;
        }
        None
    }
}

/// Collects [`TruncatedK`].
pub fn enumerate_truncated_k(index_bound: usize, level_bound: usize) -> Result<Vec<KPoint>> {
    Ok(TruncatedK::new(index_bound, level_bound)?.collect())
}
