use crate::error::{Error, Result};

/// One-sample Kolmogorov–Smirnov distance
/// `D_n = max_i max(i/n − F(x_(i)), F(x_(i)) − (i−1)/n)`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    if sorted.iter().any(|x| x.is_nan()) || sorted.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::NotSorted);
    }
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max(hi - f).max(f - lo);
    }
    Ok(d.clamp(0.0, 1.0))
}
