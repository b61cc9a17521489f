//! Witnesses against embeddings of `h_M` into `C(α)`, `α < ω^ω`.
//!
//! For `M(1) = 1`, pick `|A_j|` blocks carrying the value `1/j` with
//! `|A_j| M(1/j) >= 1`. Block norms are `1/j → 0`, yet each group
//! contributes at least one unit of modular, so the formal sum of the
//! blocks does not converge in `h_M`.

use std::io::Write;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::orlicz::{luxemburg_norm, luxemburg_norm_grouped, OrliczFunction};
use crate::sequence::FiniteSequence;

/// Largest witness materialised as a coordinate vector.
pub const COORDINATE_GUARD: usize = 1_000_000;
/// Default truncation horizon.
pub const DEFAULT_HORIZON: usize = 100;
/// Relative slack in `|A_j| M(1/j) >= 1`, absorbing rounding in `M(1/j)`.
pub const SIZE_SLACK: f64 = 1e-12;
/// Norm level that the partial witnesses are expected to pass.
pub const NORM_TARGET: f64 = 10.0;
/// Last `j` tried when looking for the first partial norm above the target.
pub const SEARCH_LIMIT: usize = 1_000_000;

/// Tolerance for `M(1) = 1`.
const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// `M(k t)` with `M(k) = 1`.
pub fn normalize(m: &OrliczFunction) -> Result<OrliczFunction> {
    m.normalized()
}

fn check_normalized(m: &OrliczFunction) -> Result<()> {
    let at_one = m.value(1.0);
    if (at_one - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "expected M(1) = 1, got {at_one}; normalise first"
        )));
    }
    Ok(())
}

/// `⌈(1 - slack) / M(1/j)⌉` as a float, or an error if `M(1/j)` vanishes.
fn size_f64(m: &OrliczFunction, j: usize) -> Result<f64> {
    let v = m.value(1.0 / j as f64);
    if !(v >= f64::MIN_POSITIVE) {
        return Err(Error::Degenerate(j));
    }
    Ok(((1.0 - SIZE_SLACK) / v).ceil().max(1.0))
}

/// `|A_j|` for `j = 1..=horizon`: the least integer with `|A_j| M(1/j) >= 1`.
pub fn witness_sizes(m: &OrliczFunction, horizon: usize) -> Result<Vec<u64>> {
    check_normalized(m)?;
    (1..=horizon)
        .map(|j| {
            let s = size_f64(m, j)?;
            if s >= u64::MAX as f64 {
                return Err(Error::Guard {
                    what: "witness group size",
                    limit: usize::MAX,
                    got: usize::MAX,
                });
            }
            Ok(s as u64)
        })
        .collect()
}

/// Block ends `0 = i_0 < i_1 < i_2 < …`; block `k` is `i_{k-1}+1 ..= i_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockPartition {
    ends: Vec<usize>,
}

impl BlockPartition {
    pub fn new(ends: Vec<usize>) -> Result<Self> {
        let mut prev = 0;
        for (k, &e) in ends.iter().enumerate() {
            if e <= prev {
                return Err(Error::InvalidArgument(format!(
                    "block ends must increase strictly from 0 (i_{} = {e})",
                    k + 1
                )));
            }
            prev = e;
        }
        Ok(Self { ends })
    }

    /// `i_k = step · k` for `k = 1..=len`.
    pub fn uniform(step: usize, len: usize) -> Result<Self> {
        if step == 0 {
            return Err(Error::InvalidArgument("block step must be positive".into()));
        }
        Self::new((1..=len).map(|k| k * step).collect())
    }

    pub fn len(&self) -> usize {
        self.ends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ends.is_empty()
    }

    /// `i_k`, 1-based.
    pub fn end(&self, k: usize) -> usize {
        self.ends[k - 1]
    }

    /// Coordinates of block `k`.
    pub fn block(&self, k: usize) -> RangeInclusive<usize> {
        let start = if k == 1 { 1 } else { self.ends[k - 2] + 1 };
        start..=self.ends[k - 1]
    }
}

/// Groups `A_1 < A_2 < …` of consecutive block numbers; the blocks of `A_j`
/// carry `1/j` at their last coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub sizes: Vec<u64>,
    /// `A_j` as an inclusive range of block numbers.
    pub groups: Vec<(u64, u64)>,
}

impl Witness {
    pub fn horizon(&self) -> usize {
        self.sizes.len()
    }

    pub fn total_blocks(&self) -> u64 {
        self.groups.last().map_or(0, |g| g.1)
    }

    /// Group `j` containing block `k`.
    pub fn group_of(&self, k: u64) -> Option<usize> {
        let idx = self.groups.partition_point(|g| g.1 < k);
        (idx < self.groups.len() && self.groups[idx].0 <= k).then_some(idx + 1)
    }

    /// The truncated witness `Σ_{j<=J} Σ_{k∈A_j} e_{i_k} / j`.
    pub fn realize(&self, partition: &BlockPartition) -> Result<FiniteSequence> {
        let total = self.total_blocks();
        if total > COORDINATE_GUARD as u64 {
            return Err(Error::Guard {
                what: "witness coordinates",
                limit: COORDINATE_GUARD,
                got: usize::try_from(total).unwrap_or(usize::MAX),
            });
        }
        if total as usize > partition.len() {
            return Err(Error::PartitionExhausted {
                needed: total as usize,
                available: partition.len(),
            });
        }
        let mut entries = Vec::with_capacity(total as usize);
        for (j, &(lo, hi)) in self.groups.iter().enumerate() {
            let v = 1.0 / (j + 1) as f64;
            for k in lo..=hi {
                entries.push((partition.end(k as usize), v));
            }
        }
        FiniteSequence::new(entries)
    }
}

/// Assigns consecutive block numbers to the groups `A_1, …, A_J`.
pub fn build_witness(
    m: &OrliczFunction,
    partition: &BlockPartition,
    horizon: usize,
) -> Result<Witness> {
    let sizes = witness_sizes(m, horizon)?;
    let mut groups = Vec::with_capacity(sizes.len());
    let mut next = 1u64;
    for &s in &sizes {
        let hi = next
            .checked_add(s - 1)
            .ok_or_else(|| Error::Internal("block count overflow".into()))?;
        groups.push((next, hi));
        next = hi + 1;
    }
    let needed = next - 1;
    if needed > partition.len() as u64 {
        return Err(Error::PartitionExhausted {
            needed: usize::try_from(needed).unwrap_or(usize::MAX),
            available: partition.len(),
        });
    }
    Ok(Witness { sizes, groups })
}

/// Luxemburg norm of the witness restricted to each block it occupies.
pub fn block_norms(
    witness: &Witness,
    m: &OrliczFunction,
    partition: &BlockPartition,
) -> Result<Vec<f64>> {
    let v = witness.realize(partition)?;
    Ok((1..=witness.total_blocks() as usize)
        .map(|k| {
            let r = partition.block(k);
            luxemburg_norm(m, &v.restrict(*r.start(), *r.end()))
        })
        .collect())
}

/// Norm of one block of group `j`, which holds the single value `1/j`.
pub fn group_block_norm(m: &OrliczFunction, j: usize) -> f64 {
    luxemburg_norm_grouped(m, &[(1.0 / j as f64, 1.0)])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub j: usize,
    pub size: u64,
    /// `|A_j| M(1/j)`.
    pub term: f64,
    /// `S_j`.
    pub partial_sum: f64,
    /// Norm of a single block of group `j`.
    pub block_norm: f64,
    /// Norm of group `j` on its own.
    pub group_norm: f64,
    /// Norm of the witness truncated after group `j`.
    pub norm_partial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct DivergenceReport {
    pub J: usize,
    pub rows: Vec<DivergenceRow>,
    pub partial_sums_dominate_j: bool,
    pub block_norms_bounded: bool,
    pub norm_partials_non_decreasing: bool,
    /// First `J` whose partial witness has norm above [`NORM_TARGET`],
    /// searched up to [`SEARCH_LIMIT`].
    pub j_star: Option<usize>,
    /// Where the search stopped without reaching the target.
    pub search_stopped_at: Option<usize>,
    /// Smallest norm of a single group. Groups with norm near 1 at every
    /// `j` keep the partial sums from being Cauchy.
    pub min_group_norm: f64,
}

impl DivergenceReport {
    pub fn sizes(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.size).collect()
    }

    pub fn partial_sums(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.partial_sum).collect()
    }

    pub fn norm_partials(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.norm_partial).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Io {
                path: "<csv>".into(),
                message: e.to_string(),
            })?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<csv>".into(),
            message: e.to_string(),
        })
    }
}

/// First `J` at which `Σ_{j<=J} |A_j| M(1/(target j)) > 1`, i.e. the
/// partial witness has norm above `target`.
fn first_norm_crossing(m: &OrliczFunction, target: f64) -> (Option<usize>, Option<usize>) {
    let mut acc = 0.0;
    for j in 1..=SEARCH_LIMIT {
        let Ok(size) = size_f64(m, j) else {
            return (None, Some(j));
        };
        let term = size * m.value(1.0 / (target * j as f64));
        if !term.is_finite() {
            return (None, Some(j));
        }
        acc += term;
        // a crossing within rounding of 1 is a tie, not an excess
        if acc > 1.0 + 1e-9 {
            return (Some(j), None);
        }
    }
    (None, Some(SEARCH_LIMIT))
}

/// `S_J = Σ_{j<=J} |A_j| M(1/j)` together with the norms of the partial
/// witnesses.
pub fn divergence_partial_sums(m: &OrliczFunction, horizon: usize) -> Result<DivergenceReport> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("J must be at least 1".into()));
    }
    let sizes = witness_sizes(m, horizon)?;
    let mut groups: Vec<(f64, f64)> = Vec::with_capacity(horizon);
    let mut rows = Vec::with_capacity(horizon);
    let mut sum = 0.0;
    for (idx, &size) in sizes.iter().enumerate() {
        let j = idx + 1;
        let v = 1.0 / j as f64;
        let term = size as f64 * m.value(v);
        sum += term;
        groups.push((v, size as f64));
        rows.push(DivergenceRow {
            j,
            size,
            term,
            partial_sum: sum,
            block_norm: group_block_norm(m, j),
            group_norm: luxemburg_norm_grouped(m, &[(v, size as f64)]),
            norm_partial: luxemburg_norm_grouped(m, &groups),
        });
    }
    let partial_sums_dominate_j = rows
        .iter()
        .all(|r| r.partial_sum >= r.j as f64 * (1.0 - SIZE_SLACK));
    let block_norms_bounded = rows
        .iter()
        .all(|r| r.block_norm <= (1.0 + SIZE_SLACK) / r.j as f64);
    let norm_partials_non_decreasing = rows
        .windows(2)
        .all(|w| w[1].norm_partial >= w[0].norm_partial);
    let (j_star, search_stopped_at) = first_norm_crossing(m, NORM_TARGET);
    let min_group_norm = rows
        .iter()
        .map(|r| r.group_norm)
        .fold(f64::INFINITY, f64::min);
    Ok(DivergenceReport {
        J: horizon,
        rows,
        partial_sums_dominate_j,
        block_norms_bounded,
        norm_partials_non_decreasing,
        j_star,
        search_stopped_at,
        min_group_norm,
    })
}
