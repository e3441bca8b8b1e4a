//! Empirical-versus-limit CDF overlays and QQ data.

use crate::error::{Error, Result};
use crate::limit_laws::LimitLaw;

/// `(x_(i), i/n, F(x_(i)))` for a sorted sample.
pub fn cdf_overlay<F>(sorted: &[f64], cdf: F) -> Result<Vec<(f64, f64, f64)>>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| Ok((x, (i + 1) as f64 / n, cdf(x)?)))
        .collect()
}

/// `(F^←((i − ½)/n), x_(i))` for a sorted sample.
pub fn qq_points<Q>(sorted: &[f64], quantile: Q) -> Result<Vec<(f64, f64)>>
where
    Q: Fn(f64) -> Result<f64>,
{
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| Ok((quantile((i as f64 + 0.5) / n)?, x)))
        .collect()
}

/// Quantile of a marginal by bracketing and bisection on its CDF.
pub fn marginal_quantile(law: &LimitLaw, component: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("probability", p));
    }
    let f = |x: f64| law.marginal_cdf(component, x);
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut k = 0;
    while f(lo)? >= p {
        lo *= 2.0;
        k += 1;
        if k > 1100 {
            return Err(Error::domain("quantile bracket", p));
        }
    }
    while f(hi)? < p {
        hi *= 2.0;
        k += 1;
        if k > 1100 {
            return Err(Error::domain("quantile bracket", p));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
