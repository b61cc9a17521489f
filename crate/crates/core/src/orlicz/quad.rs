use crate::error::{Error, Result};

/// Integrates `f` over `[a, b]`, splitting at the interior `breaks` so that
/// each piece is smooth.
///
/// Returns the integral and the largest per-piece error estimate relative
/// to the piece's magnitude.
pub(crate) fn integrate<F>(f: F, a: f64, b: f64, breaks: &[f64]) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    if b <= a {
        return (0.0, 0.0);
    }
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut total = 0.0;
    let mut worst = 0.0f64;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let scale = (hi - lo) * f(lo).abs().max(f(mid).abs()).max(f(hi).abs());
        if scale == 0.0 {
            continue;
        }
        // Clenshaw-Curtis for smooth pieces, double-exponential when the
        // piece has an endpoint singularity in a derivative
        let target = 1e-15 * scale;
        let mut out = quadrature::clenshaw_curtis::integrate(&f, lo, hi, target);
        if out.error_estimate > target {
            let de = quadrature::double_exponential::integrate(&f, lo, hi, target);
            if de.error_estimate < out.error_estimate {
                out = de;
            }
        }
        total += out.integral;
        worst = worst.max(out.error_estimate / scale);
    }
    (total, worst)
}

/// Relative error estimate above which a quadrature result is rejected.
pub(crate) const ACCEPT: f64 = 1e-8;

pub(crate) fn integrate_checked<F>(f: F, a: f64, b: f64, breaks: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (value, rel) = integrate(f, a, b, breaks);
    if rel > ACCEPT || !value.is_finite() {
        return Err(Error::Quadrature {
            lo: a,
            hi: b,
            estimate: rel,
        });
    }
    Ok(value)
}
