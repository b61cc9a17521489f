//! Cantor–Bendixson derivatives of the norming set `K` and its relatives.
//!
//! A family is described by a cap `κ(n)` per level: level `n` holds every
//! `(n, A, σ)` with `|A| <= κ(n)`. Caps are kept in the affine-with-ceiling
//! form `κ(n) = min(n - shift, cap)` over a level range, which is closed
//! under derivation.
//!
//! Within one level a point is a weak* limit only by letting support indices
//! escape to infinity, which removes them; across levels `t_n → 0` sends
//! everything to the origin. So one derivation lowers every cap by one, and
//! the origin survives as long as some level still holds a nonzero point.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::embedding::{KPoint, TruncatedK};
use crate::error::{Error, Result};

/// Guard on the index and level bounds of [`definition_based_derive`].
pub const ORACLE_GUARD: usize = 6;

/// Cantor–Bendixson rank: a natural number or `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OrdinalTag {
    Finite(usize),
    Omega,
}

impl fmt::Display for OrdinalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrdinalTag::Finite(k) => write!(f, "{k}"),
            OrdinalTag::Omega => f.write_str("ω"),
        }
    }
}

impl Serialize for OrdinalTag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            OrdinalTag::Finite(k) => s.serialize_u64(*k as u64),
            OrdinalTag::Omega => s.serialize_str("ω"),
        }
    }
}

/// Levels `n_min..=n_max` with caps `κ(n) = min(n - shift, cap)`, plus the
/// origin when `zero` is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicFamily {
    /// `None` once every level has vanished.
    n_min: Option<usize>,
    /// `None` for infinitely many levels.
    n_max: Option<usize>,
    shift: usize,
    cap: Option<usize>,
    zero: bool,
}

impl SymbolicFamily {
    /// General constructor; requires `n_min >= max(shift, 1)`.
    pub fn new(
        n_min: usize,
        n_max: Option<usize>,
        shift: usize,
        cap: Option<usize>,
    ) -> Result<Self> {
        if n_min == 0 || n_min < shift {
            return Err(Error::InvalidArgument(format!(
                "first level {n_min} must be positive and at least the shift {shift}"
            )));
        }
        if n_max.is_some_and(|hi| hi < n_min) {
            return Err(Error::InvalidArgument("empty level range".into()));
        }
        Ok(Self {
            n_min: Some(n_min),
            n_max,
            shift,
            cap,
            zero: true,
        })
    }

    /// `K` itself: `κ(n) = n` for all `n >= 1`.
    pub fn full() -> Self {
        Self::new(1, None, 0, None).expect("valid")
    }

    /// `κ(n) = min(n, cap)`.
    pub fn capped(cap: usize) -> Self {
        Self::new(1, None, 0, Some(cap)).expect("valid")
    }

    /// A single level `n` with cap `κ <= n`.
    pub fn single_level(n: usize, kappa: usize) -> Result<Self> {
        if kappa > n {
            return Err(Error::InvalidArgument(format!(
                "cap {kappa} exceeds level {n}"
            )));
        }
        Self::new(n, Some(n), n - kappa, None)
    }

    pub fn kappa(&self, n: usize) -> Option<usize> {
        let lo = self.n_min?;
        if n < lo || self.n_max.is_some_and(|hi| n > hi) {
            return None;
        }
        let k = n - self.shift;
        Some(self.cap.map_or(k, |c| k.min(c)))
    }

    pub fn first_level(&self) -> Option<usize> {
        self.n_min
    }

    pub fn last_level(&self) -> Option<usize> {
        self.n_min.and(self.n_max)
    }

    pub fn has_zero(&self) -> bool {
        self.zero
    }

    pub fn is_empty(&self) -> bool {
        self.n_min.is_none() && !self.zero
    }

    /// True when the only point left is the origin.
    pub fn is_origin_only(&self) -> bool {
        self.zero && !self.has_nonzero_point()
    }

    /// Some level allows a non-empty support.
    pub fn has_nonzero_point(&self) -> bool {
        let Some(lo) = self.n_min else {
            return false;
        };
        if self.cap == Some(0) {
            return false;
        }
        self.n_max.is_none_or(|hi| hi >= lo.max(self.shift + 1))
    }

    pub fn contains(&self, x: &KPoint) -> bool {
        if x.is_origin() {
            return self.zero;
        }
        self.kappa(x.n).is_some_and(|k| x.support().len() <= k)
    }

    /// The derived family.
    pub fn derive(&self) -> Self {
        let zero = self.has_nonzero_point();
        let shift = self.shift + 1;
        let n_min = match (self.n_min, self.cap) {
            (None, _) | (_, Some(0)) => None,
            (Some(lo), _) => {
                let lo = lo.max(shift);
                self.n_max.map_or(Some(lo), |hi| (lo <= hi).then_some(lo))
            }
        };
        Self {
            n_min,
            n_max: self.n_max,
            shift,
            cap: self.cap.map(|c| c.saturating_sub(1)),
            zero,
        }
    }

    /// `m`-fold derivative.
    pub fn derive_times(&self, m: usize) -> Self {
        (0..m).fold(self.clone(), |f, _| f.derive())
    }
}

impl Serialize for SymbolicFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Caps {
            rule: &'static str,
            shift: usize,
            cap: Option<usize>,
            n_max: Option<usize>,
        }
        #[derive(Serialize)]
        struct Repr {
            n_min: Option<usize>,
            caps: Caps,
            zero_flag: bool,
        }
        Repr {
            n_min: self.n_min,
            caps: Caps {
                rule: "min(n - shift, cap)",
                shift: self.shift,
                cap: self.cap,
                n_max: self.n_max,
            },
            zero_flag: self.zero,
        }
        .serialize(s)
    }
}

/// Rank in `K`: `n - |A|` for a point of level `n`, `ω` for the origin.
pub fn cb_rank(x: &KPoint) -> OrdinalTag {
    if x.is_origin() {
        OrdinalTag::Omega
    } else {
        OrdinalTag::Finite(x.n - x.support().len())
    }
}

/// Rank of `x` in `fam` found by repeated derivation: the last stage `m`
/// with `x ∈ fam^{(m)}`, or `ω` if `x` survives `horizon` stages.
pub fn cb_rank_by_derivation(
    fam: &SymbolicFamily,
    x: &KPoint,
    horizon: usize,
) -> Option<OrdinalTag> {
    if !fam.contains(x) {
        return None;
    }
    let mut cur = fam.clone();
    for m in 0..horizon {
        let next = cur.derive();
        if !next.contains(x) {
            return Some(OrdinalTag::Finite(m));
        }
        cur = next;
    }
    Some(OrdinalTag::Omega)
}

/// The truncated universe: every `(n, A, σ)` with `1 <= n <= N`,
/// `A ⊆ {1..I}`, `|A| <= n`, including one empty-support point per level.
pub fn truncated_universe(index_bound: usize, level_bound: usize) -> Result<BTreeSet<KPoint>> {
    guard(index_bound, level_bound)?;
    let mut out: BTreeSet<KPoint> = TruncatedK::new(index_bound, level_bound)?
        .filter(|p| !p.is_origin())
        .collect();
    for n in 1..=level_bound {
        out.insert(KPoint::positive(n, Vec::new())?);
    }
    Ok(out)
}

fn guard(index_bound: usize, level_bound: usize) -> Result<()> {
    for (what, v) in [
        ("index bound I", index_bound),
        ("level bound N", level_bound),
    ] {
        if v > ORACLE_GUARD {
            return Err(Error::Guard {
                what,
                limit: ORACLE_GUARD,
                got: v,
            });
        }
    }
    Ok(())
}

/// Limit points of `x` inside a truncated universe.
///
/// Every neighbourhood of `p = (n, B, σ)` fixes finitely many coordinates,
/// so `p` is a limit of `(n, B ∪ C, σ')` as `min C → ∞`. In the truncation
/// the largest indices stand in for the escaping ones: `p` is a limit point
/// when some `q ∈ x` at the same level agrees with `p` on `{1..k}`, has no
/// other support there and some support beyond `k`.
pub fn limit_points(x: &BTreeSet<KPoint>) -> BTreeSet<KPoint> {
    let mut out = BTreeSet::new();
    for q in x {
        let top = q.support().last().copied().unwrap_or(0);
        for k in 0..top {
            out.insert(q.truncated(k));
        }
    }
    out
}

/// `m` derivations of the truncated universe, computed from the definition.
pub fn definition_based_derive(
    index_bound: usize,
    level_bound: usize,
    m: usize,
) -> Result<BTreeSet<KPoint>> {
    let mut cur = truncated_universe(index_bound, level_bound)?;
    for _ in 0..m {
        cur = limit_points(&cur);
    }
    Ok(cur)
}

/// Points of the universe that the symbolic rule keeps after `m` steps:
/// `|A| <= n - m` and `max A + m <= I` (with `max ∅ = 0`), i.e. room for
/// `m` escaping indices above the support.
pub fn symbolic_restriction(
    fam: &SymbolicFamily,
    index_bound: usize,
    level_bound: usize,
    m: usize,
) -> Result<BTreeSet<KPoint>> {
    let derived = fam.derive_times(m);
    Ok(truncated_universe(index_bound, level_bound)?
        .into_iter()
        .filter(|p| derived.contains(p))
        .filter(|p| p.support().last().copied().unwrap_or(0) + m <= index_bound)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSummary {
    pub m: usize,
    pub family: SymbolicFamily,
    pub contains_zero: bool,
    pub nonempty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaReport {
    pub m_max: usize,
    pub stages: Vec<StageSummary>,
    pub zero_in_every_stage: bool,
    /// Levels `n <= m_max` and sizes `k <= n` whose point `(n, {1..k})`
    /// does not leave the derivation sequence right after stage `n - k`.
    pub rank_mismatches: Vec<(usize, usize)>,
    pub zero_rank: OrdinalTag,
    pub passed: bool,
}

/// Checks that the origin lies in every `K^{(m)}`, `m <= m_max`, while every
/// point of level `n <= m_max` drops out after `n - |A|` steps.
pub fn verify_omega(fam: &SymbolicFamily, m_max: usize) -> OmegaReport {
    let stages: Vec<StageSummary> = (0..=m_max)
        .scan(fam.clone(), |cur, m| {
            let out = StageSummary {
                m,
                family: cur.clone(),
                contains_zero: cur.has_zero(),
                nonempty: !cur.is_empty(),
            };
            *cur = cur.derive();
            Some(out)
        })
        .collect();
    let zero_in_every_stage = stages.iter().all(|s| s.contains_zero && s.nonempty);
    let mut rank_mismatches = Vec::new();
    for n in 1..=m_max {
        for k in 0..=n {
            let x = KPoint::positive(n, (1..=k).collect()).expect("|A| <= n");
            if !fam.contains(&x) {
                continue;
            }
            let expected = n - k;
            let last_in = stages.iter().take_while(|s| s.family.contains(&x)).count();
            // present in stages 0..=expected and absent from the next one
            if last_in != expected + 1 {
                rank_mismatches.push((n, k));
            }
        }
    }
    let zero_rank = if zero_in_every_stage {
        OrdinalTag::Omega
    } else {
        OrdinalTag::Finite(
            stages
                .iter()
                .take_while(|s| s.contains_zero)
                .count()
                .saturating_sub(1),
        )
    };
    let passed = zero_in_every_stage && rank_mismatches.is_empty();
    OmegaReport {
        m_max,
        stages,
        zero_in_every_stage,
        rank_mismatches,
        zero_rank,
        passed,
    }
}
