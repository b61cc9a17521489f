use std::borrow::Cow;

use super::function::OrliczFunction;
use super::quad;
use crate::error::{Error, Result};
use crate::roots;

/// Largest residual `|M*(t_n) - 1/n|` accepted for a level.
pub const LEVEL_TOLERANCE: f64 = 1e-12;

/// An Orlicz function together with its conjugate `M*` and the levels
/// `t_n = (M*)^{-1}(1/n)`.
///
/// `M*` is evaluated through the variational formula
/// `M*(t) = sup_u (u t - M(u))`; the supremum sits where `M'(u) = t`, so the
/// concave objective is maximised by bisecting on the sign of its slope. The
/// level table is filled by [`ConjugatePair::with_levels`] and is read-only
/// afterwards.
#[derive(Debug, Clone)]
pub struct ConjugatePair {
    base: OrliczFunction,
    levels: Vec<f64>,
}

/// Forms the conjugate pair of a regular Orlicz function.
pub fn conjugate(m: &OrliczFunction) -> Result<ConjugatePair> {
    m.check_regular()?;
    Ok(ConjugatePair {
        base: m.clone(),
        levels: Vec::new(),
    })
}

impl ConjugatePair {
    pub fn base(&self) -> &OrliczFunction {
        &self.base
    }

    /// `(M')^{-1}(y)`, which is also `(M*)'(y)`.
    pub fn derivative_inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let m = &self.base;
        let reaches = |u: f64| m.derivative(u) >= y;
        let mut hi = 1.0f64;
        let mut lo;
        if reaches(hi) {
            lo = 0.5 * hi;
            while reaches(lo) {
                hi = lo;
                lo *= 0.5;
                if lo == 0.0 {
                    return 0.0;
                }
            }
        } else {
            loop {
                lo = hi;
                hi *= 2.0;
                if !hi.is_finite() {
                    return f64::INFINITY;
                }
                if reaches(hi) {
                    break;
                }
            }
        }
        roots::bisect(reaches, lo, hi)
    }

    /// `M*(t)`.
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let u = self.derivative_inverse(t);
        (t * u - self.base.value(u)).max(0.0)
    }

    /// `M*(M'(u)) = u M'(u) - M(u)`, the equality case of Young's inequality.
    pub fn value_at_slope_of(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        (u * self.base.derivative(u) - self.base.value(u)).max(0.0)
    }

    /// `M*(t) = ∫_0^t (M')^{-1}`, evaluated by quadrature.
    pub fn value_by_quadrature(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        // kinks of (M')^{-1} sit at the images of the kinks of M'
        let breaks: Vec<f64> = self
            .base
            .breakpoints(self.derivative_inverse(t))
            .into_iter()
            .map(|b| self.base.derivative(b))
            .collect();
        quad::integrate_checked(|v| self.derivative_inverse(v), 0.0, t, &breaks)
    }

    /// `N(t) = M*(t) / t` for `t > 0`.
    pub fn quotient(&self, t: f64) -> f64 {
        self.value(t) / t
    }

    /// `(M*)^{-1}(y)`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        let hi = roots::expand_until(|t| self.value(t) >= y, 1.0, 2.0, 1100, "(M*)^{-1}")?;
        let lo = if hi > 1.0 { 0.5 * hi } else { 0.0 };
        Ok(roots::bisect(|t| self.value(t) >= y, lo, hi))
    }

    /// Memoizes `t_1..t_{n_max}`.
    pub fn with_levels(mut self, n_max: usize) -> Result<Self> {
        if n_max > self.levels.len() {
            self.levels = level_sequence(&self, n_max)?;
        }
        Ok(self)
    }

    /// The memoized levels (possibly empty).
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// `t_1..t_n`, borrowed from the table when it is long enough.
    pub fn levels_up_to(&self, n: usize) -> Result<Cow<'_, [f64]>> {
        if n <= self.levels.len() {
            Ok(Cow::Borrowed(&self.levels[..n]))
        } else {
            level_sequence(self, n).map(Cow::Owned)
        }
    }

    /// `t_n`, 1-based.
    pub fn level(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("levels are indexed from 1".into()));
        }
        Ok(self.levels_up_to(n)?[n - 1])
    }
}

/// `t_n` solving `M*(t_n) = 1/n` for `n = 1..=n_max`, by bisection.
pub fn level_sequence(pair: &ConjugatePair, n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let mut out: Vec<f64> = Vec::with_capacity(n_max);
    out.extend(pair.levels.iter().take(n_max));
    while out.len() < n_max {
        let n = out.len() + 1;
        let target = 1.0 / n as f64;
        let t = match out.last() {
            None => pair.inverse(1.0)?,
            Some(&prev) => {
                // convexity with M*(0) = 0 gives t_n >= t_{n-1} (n-1)/n
                let lo = prev * (n - 1) as f64 / n as f64 * (1.0 - 1e-12);
                let lo = if pair.value(lo) < target { lo } else { 0.0 };
                roots::bisect(|t| pair.value(t) >= target, lo, prev)
            }
        };
        let residual = (pair.value(t) - target).abs();
        if residual > LEVEL_TOLERANCE {
            return Err(Error::Residual {
                what: "level sequence",
                residual,
                tolerance: LEVEL_TOLERANCE,
            });
        }
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(p: f64) -> ConjugatePair {
        conjugate(&OrliczFunction::power(p).unwrap()).unwrap()
    }

    #[test]
    fn quadratic_is_self_conjugate() {
        let c = pair(2.0);
        assert!((c.value(1.0) - 0.5).abs() < 1e-15);
        assert_eq!(c.value(0.0), 0.0);
    }

    #[test]
    fn cubic_conjugate_closed_form() {
        // q = 3/2, M*(t) = t^q / q
        let c = pair(3.0);
        assert!((c.value(1.0) - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_agrees_with_variational_form() {
        for p in [1.5, 2.0, 3.0] {
            let c = pair(p);
            for t in [0.01, 0.3, 1.0, 2.5] {
                let a = c.value(t);
                let b = c.value_by_quadrature(t).unwrap();
                assert!(
                    (a - b).abs() <= 1e-9 * a.max(1e-12),
                    "p={p} t={t}: {a} vs {b}"
                );
            }
        }
        let lt = conjugate(&OrliczFunction::lt().unwrap()).unwrap();
        for t in [1e-3, 0.1, 0.9, 1.5, 3.0] {
            let a = lt.value(t);
            let b = lt.value_by_quadrature(t).unwrap();
            assert!((a - b).abs() <= 1e-8 * a, "lt t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn levels_for_quadratic() {
        let c = pair(2.0).with_levels(8).unwrap();
        assert!((c.level(2).unwrap() - 1.0).abs() < 1e-14);
        assert!((c.level(8).unwrap() - 0.5).abs() < 1e-14);
        assert!(c.levels().windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn conjugation_rejects_flat_derivative() {
        assert!(matches!(
            conjugate(&OrliczFunction::linear()),
            Err(Error::FlatDerivative { .. })
        ));
        assert!(matches!(
            conjugate(&OrliczFunction::power(1.0).unwrap()),
            Err(Error::PowerExponent(_))
        ));
    }

    #[test]
    fn zero_levels_is_an_error() {
        assert!(level_sequence(&pair(2.0), 0).is_err());
        assert!(pair(2.0).level(0).is_err());
    }
}
