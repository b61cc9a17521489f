//! Maximisation of `f(b) = Σ (b_i - b_{i+1}) / t_i` over non-negative,
//! non-increasing `b` with `Σ M*(b_i) = 1`.
//!
//! Summation by parts turns the objective into `Σ w_i b_i` with
//! `w_i = 1/t_i - 1/t_{i-1}`. Stationarity gives `w_i = λ (M*)'(b_i)` on runs
//! of equal values, hence `b = M'(w̄/λ)` where `w̄` is the non-increasing
//! isotonic fit of `w` (pool adjacent violators). The multiplier `λ` is then
//! the unique root of the feasibility residual, which is monotone in `λ`.

mod oracle;
mod scan;

pub use oracle::{brute_force_oracle, ORACLE_MAX_N};
pub use scan::{boundedness_scan, ScanRow, ScanTable, PLATEAU_FRACTION};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::orlicz::ConjugatePair;
use crate::roots;

/// Feasibility tolerance `|Σ M*(a_i) - 1|` for a returned solution.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;
/// Cap on bracket expansions by a factor of 4 in each direction.
const MAX_EXPANSIONS: usize = 200;

/// The extremal problem for a fixed `n`.
#[derive(Debug, Clone)]
pub struct ExtremalProblem<'a> {
    pair: &'a ConjugatePair,
    weights: Vec<f64>,
    /// `1/t_k` for `k = 1..=n`, the prefix sums of `weights`.
    inv_levels: Vec<f64>,
}

/// Builds the problem from the pair's own levels `t_1..t_n`.
pub fn build_problem(pair: &ConjugatePair, n: usize) -> Result<ExtremalProblem<'_>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let levels = pair.levels_up_to(n)?;
    ExtremalProblem::from_levels(pair, &levels)
}

impl<'a> ExtremalProblem<'a> {
    /// Uses the given levels, which must be positive and non-increasing.
    pub fn from_levels(pair: &'a ConjugatePair, levels: &[f64]) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if levels.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidArgument("levels must be positive".into()));
        }
        if let Some(i) = levels.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument(format!(
                "levels must be non-increasing (t_{} < t_{})",
                i + 1,
                i + 2
            )));
        }
        let inv_levels: Vec<f64> = levels.iter().map(|t| 1.0 / t).collect();
        let mut weights = Vec::with_capacity(levels.len());
        let mut prev = 0.0;
        for &inv in &inv_levels {
            weights.push(inv - prev);
            prev = inv;
        }
        let problem = Self {
            pair,
            weights,
            inv_levels,
        };
        problem.check_telescoping()?;
        Ok(problem)
    }

    /// A problem with arbitrary non-negative weights; the implied levels are
    /// the reciprocals of the weight prefix sums.
    pub fn from_weights(pair: &'a ConjugatePair, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) || weights[0] <= 0.0 {
            return Err(Error::InvalidArgument(
                "weights must be non-negative with a positive first entry".into(),
            ));
        }
        let inv_levels = weights
            .iter()
            .scan(0.0, |acc, &w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            pair,
            weights,
            inv_levels,
        })
    }

    fn check_telescoping(&self) -> Result<()> {
        let mut acc = 0.0;
        for (w, inv) in self.weights.iter().zip(&self.inv_levels) {
            acc += w;
            let residual = (acc - inv).abs() / inv;
            if residual > 1e-12 {
                return Err(Error::Residual {
                    what: "weight telescoping",
                    residual,
                    tolerance: 1e-12,
                });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn pair(&self) -> &'a ConjugatePair {
        self.pair
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `t_k`, 1-based.
    pub fn level(&self, k: usize) -> f64 {
        1.0 / self.inv_levels[k - 1]
    }

    /// `Σ w_i b_i`.
    pub fn objective(&self, b: &[f64]) -> f64 {
        self.weights.iter().zip(b).map(|(w, b)| w * b).sum()
    }

    /// `Σ (b_i - b_{i+1}) / t_i` with `b_{n+1} = 0`.
    pub fn objective_telescoped(&self, b: &[f64]) -> f64 {
        (0..self.n())
            .map(|i| {
                let next = b.get(i + 1).copied().unwrap_or(0.0);
                (b.get(i).copied().unwrap_or(0.0) - next) * self.inv_levels[i]
            })
            .sum()
    }

    /// Multiplies every weight by `c > 0`.
    pub fn rescaled(&self, c: f64) -> Self {
        assert!(c > 0.0);
        Self {
            pair: self.pair,
            weights: self.weights.iter().map(|w| w * c).collect(),
            inv_levels: self.inv_levels.iter().map(|w| w * c).collect(),
        }
    }
}

/// A run `start..=end` of equal optimal values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Block {
    pub start: usize,
    pub end: usize,
    /// The common value `a_{i_j}`.
    pub value: f64,
    /// `Σ_{i in block} w_i = 1/t_{i_j} - 1/t_{i_{j-1}}`, i.e. `1/η_j`.
    pub span_weight: f64,
}

impl Block {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `η_j`.
    pub fn eta(&self) -> f64 {
        1.0 / self.span_weight
    }
}

/// Optimal point in block form together with its multiplier.
///
/// Indices past the last block carry the value 0 (only possible when the
/// trailing weights vanish).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalSolution {
    pub n: usize,
    pub blocks: Vec<Block>,
    pub lambda: f64,
    pub objective: f64,
}

impl ExtremalSolution {
    /// Block boundaries `i_1 < … < i_m`.
    pub fn boundaries(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.end).collect()
    }

    /// `η_1, …, η_m`.
    pub fn etas(&self) -> Vec<f64> {
        self.blocks.iter().map(Block::eta).collect()
    }

    /// Dense optimal vector `a_1..a_n`.
    pub fn values(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for b in &self.blocks {
            out[b.start - 1..b.end].fill(b.value);
        }
        out
    }

    /// `Σ M*(a_i) - 1`, evaluated with the variational conjugate.
    pub fn feasibility_residual(&self, pair: &ConjugatePair) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.len() as f64 * pair.value(b.value))
            .sum::<f64>()
            - 1.0
    }

    /// `Σ_j a_{i_j} / η_j`.
    pub fn objective_from_etas(&self) -> f64 {
        self.blocks.iter().map(|b| b.value / b.eta()).sum()
    }

    /// `λ Σ M*(2 a_i)`, an upper bound for the objective.
    pub fn doubling_bound(&self, pair: &ConjugatePair) -> f64 {
        self.lambda
            * self
                .blocks
                .iter()
                .map(|b| b.len() as f64 * pair.value(2.0 * b.value))
                .sum::<f64>()
    }

    /// Copy with block `j` (0-based) scaled by `factor`.
    pub fn perturbed(&self, j: usize, factor: f64) -> Self {
        let mut out = self.clone();
        out.blocks[j].value *= factor;
        out
    }
}

/// Pool adjacent violators for a non-increasing fit with unit weights.
/// Equal neighbours are pooled as well, so block means decrease strictly.
/// Returns `(start, end, sum)` triples with 1-based inclusive bounds.
fn pool_adjacent_violators(weights: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut blocks: Vec<(usize, usize, f64)> = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        blocks.push((i + 1, i + 1, w));
        while blocks.len() > 1 {
            let (s1, e1, w1) = blocks[blocks.len() - 1];
            let (s0, e0, w0) = blocks[blocks.len() - 2];
            let mean0 = w0 / (e0 + 1 - s0) as f64;
            let mean1 = w1 / (e1 + 1 - s1) as f64;
            if mean0 > mean1 {
                break;
            }
            blocks.pop();
            *blocks.last_mut().unwrap() = (s0, e1, w0 + w1);
        }
    }
    blocks
}

/// Solves the extremal problem by dual bisection on `λ`.
pub fn solve(problem: &ExtremalProblem<'_>) -> Result<ExtremalSolution> {
    let pair = problem.pair;
    let m = pair.base();
    let pooled: Vec<(usize, usize, f64)> = pool_adjacent_violators(&problem.weights)
        .into_iter()
        .filter(|&(_, _, sum)| sum > 0.0)
        .collect();
    if pooled.is_empty() {
        return Err(Error::InvalidArgument("all weights vanish".into()));
    }
    if pooled.windows(2).any(|w| w[0].1 + 1 != w[1].0) {
        return Err(Error::Internal("block merge left a gap".into()));
    }
    let groups: Vec<(f64, f64)> = pooled
        .iter()
        .map(|&(s, e, sum)| {
            let len = (e + 1 - s) as f64;
            (len, sum / len)
        })
        .collect();

    // Σ |B_j| M*(M'(w̄_j/λ)), non-increasing in λ
    let modular = |lambda: f64| -> f64 {
        groups
            .iter()
            .map(|&(len, mean)| len * pair.value_at_slope_of(mean / lambda))
            .sum()
    };

    let start = problem.inv_levels[0];
    let mut lo = start;
    let mut steps = 0;
    while modular(lo) < 1.0 {
        lo /= 4.0;
        steps += 1;
        if steps > MAX_EXPANSIONS {
            return Err(Error::BracketNotFound {
                what: "multiplier",
                lo,
                hi: start,
            });
        }
    }
    let mut hi = start;
    steps = 0;
    while modular(hi) > 1.0 {
        hi *= 4.0;
        steps += 1;
        if steps > MAX_EXPANSIONS {
            return Err(Error::BracketNotFound {
                what: "multiplier",
                lo: start,
                hi,
            });
        }
    }
    let lo = lo.min(hi);
    let mid = lo.sqrt() * hi.sqrt();
    if !(modular(lo) >= modular(mid) && modular(mid) >= modular(hi)) {
        return Err(Error::Internal(
            "feasibility residual is not monotone on the multiplier bracket".into(),
        ));
    }
    let lambda = if lo == hi {
        lo
    } else {
        roots::bisect_geometric(|l| modular(l) <= 1.0, lo, hi)
    };

    let blocks: Vec<Block> = pooled
        .iter()
        .zip(&groups)
        .map(|(&(start, end, sum), &(_, mean))| Block {
            start,
            end,
            value: m.derivative(mean / lambda),
            span_weight: sum,
        })
        .collect();
    if blocks.windows(2).any(|w| w[1].value > w[0].value) {
        return Err(Error::Internal("block values are not monotone".into()));
    }
    let objective = blocks.iter().map(|b| b.value * b.span_weight).sum::<f64>();
    let solution = ExtremalSolution {
        n: problem.n(),
        blocks,
        lambda,
        objective,
    };
    let residual = solution.feasibility_residual(pair).abs();
    if residual > FEASIBILITY_TOLERANCE {
        return Err(Error::Residual {
            what: "extremal feasibility",
            residual,
            tolerance: FEASIBILITY_TOLERANCE,
        });
    }
    Ok(solution)
}

/// Largest relative deviation `|λ_j - λ| / λ` over the blocks, where
/// `λ_j = (1/t_{i_j} - 1/t_{i_{j-1}}) / ((i_j - i_{j-1}) (M*)'(a_{i_j}))`.
///
/// For the first block this reads `1 / (i_1 t_{i_1} (M*)'(a_{i_1}))`.
pub fn kkt_residual(solution: &ExtremalSolution, pair: &ConjugatePair) -> f64 {
    solution
        .blocks
        .iter()
        .map(|b| {
            let slope = pair.derivative_inverse(b.value);
            let block_lambda = b.span_weight / (b.len() as f64 * slope);
            (block_lambda - solution.lambda).abs() / solution.lambda
        })
        .fold(0.0, f64::max)
}
