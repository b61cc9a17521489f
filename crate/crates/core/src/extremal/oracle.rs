use super::ExtremalProblem;
use crate::error::{Error, Result};

/// Largest `n` accepted by [`brute_force_oracle`].
pub const ORACLE_MAX_N: usize = 4;
/// Upper bound on enumerated grid points.
const MAX_POINTS: f64 = 2e9;

/// Grid search for the extremal value, independent of the multiplier solver.
///
/// Feasible points are parametrised by their modular shares
/// `u_i = M*(b_i)`, which lie on the simplex `Σ u_i = 1`; `b` is
/// non-increasing exactly when `u` is. The shares run over multiples of
/// `1/grid`, so the last share is determined exactly and every coordinate is
/// a lookup into a table of `(M*)^{-1}(k/grid)`.
pub fn brute_force_oracle(problem: &ExtremalProblem<'_>, grid: usize) -> Result<f64> {
    let n = problem.n();
    if n > ORACLE_MAX_N {
        return Err(Error::Guard {
            what: "oracle dimension",
            limit: ORACLE_MAX_N,
            got: n,
        });
    }
    if grid == 0 {
        return Err(Error::InvalidArgument("grid must be positive".into()));
    }
    let estimate = (grid as f64).powi(n as i32 - 1) / factorial(n - 1) / factorial(n);
    if estimate > MAX_POINTS {
        return Err(Error::Guard {
            what: "oracle grid",
            limit: MAX_POINTS as usize,
            got: estimate as usize,
        });
    }
    let pair = problem.pair();
    let inv: Vec<f64> = (0..=grid)
        .map(|k| pair.inverse(k as f64 / grid as f64))
        .collect::<Result<_>>()?;
    let w = problem.weights();
    Ok(best(w, &inv, 0, grid, grid, 0.0))
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Best completion of coordinates `i..n` given `remaining` grid units, each
/// share at most `cap`, with `acc` collected so far.
fn best(w: &[f64], inv: &[f64], i: usize, remaining: usize, cap: usize, acc: f64) -> f64 {
    let left = w.len() - i;
    match left {
        1 if remaining <= cap => acc + w[i] * inv[remaining],
        1 => f64::NEG_INFINITY,
        2 => {
            let (wa, wb) = (w[i], w[i + 1]);
            let lo = remaining.div_ceil(2);
            let hi = remaining.min(cap);
            (lo..=hi)
                .map(|k| wa * inv[k] + wb * inv[remaining - k])
                .fold(f64::NEG_INFINITY, f64::max)
                + acc
        }
        _ => {
            // the current share is at least the average of what is left
            let lo = remaining.div_ceil(left);
            let hi = remaining.min(cap);
            (lo..=hi)
                .map(|k| best(w, inv, i + 1, remaining - k, k, acc + w[i] * inv[k]))
                .fold(f64::NEG_INFINITY, f64::max)
        }
    }
}
