//! Bracketing bisection on monotone predicates.
//!
//! Every scalar solve in the crate (conjugates, level sequences, Luxemburg
//! norms, multipliers) reduces to locating the switch point of a predicate
//! that is `false` to the left of a root and `true` to the right.

use crate::error::{Error, Result};

/// Upper bound on halvings; enough to walk from 1e300 down to subnormals.
const MAX_HALVINGS: usize = 2200;

/// Bisects `[lo, hi]` for the switch point of a monotone predicate.
///
/// Requires `!at_or_past(lo)` and `at_or_past(hi)`. Returns the right end of
/// the final bracket, so the predicate holds at the returned point. Stops once
/// the endpoints are adjacent floats.
pub fn bisect<P>(mut at_or_past: P, mut lo: f64, mut hi: f64) -> f64
where
    P: FnMut(f64) -> bool,
{
    debug_assert!(lo <= hi);
    for _ in 0..MAX_HALVINGS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if at_or_past(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Geometric bisection for brackets spanning many orders of magnitude.
///
/// Both ends must be positive.
pub fn bisect_geometric<P>(mut at_or_past: P, mut lo: f64, mut hi: f64) -> f64
where
    P: FnMut(f64) -> bool,
{
    debug_assert!(lo > 0.0 && lo <= hi);
    for _ in 0..MAX_HALVINGS {
        let mid = if hi / lo > 4.0 {
            lo.sqrt() * hi.sqrt()
        } else {
            lo + 0.5 * (hi - lo)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        if at_or_past(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Multiplies `start` by `factor` until the predicate holds.
pub fn expand_until<P>(
    mut holds: P,
    start: f64,
    factor: f64,
    max_steps: usize,
    what: &'static str,
) -> Result<f64>
where
    P: FnMut(f64) -> bool,
{
    let mut x = start;
    for _ in 0..=max_steps {
        if holds(x) {
            return Ok(x);
        }
        x *= factor;
        if !x.is_finite() || x == 0.0 {
            break;
        }
    }
    let (lo, hi) = if factor > 1.0 { (start, x) } else { (x, start) };
    Err(Error::BracketNotFound { what, lo, hi })
}
