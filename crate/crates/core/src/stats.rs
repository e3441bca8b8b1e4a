//! Small numerical helpers shared by the simulator and the harness.

use libm::erfc;
use std::f64::consts::SQRT_2;

/// Standard normal distribution function.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-x / SQRT_2)
}

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Sample mean, unbiased variance and fourth central moment of a column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColumnSummary {
    pub n: usize,
    pub mean: f64,
    pub var: f64,
    pub m4: f64,
}

impl ColumnSummary {
    pub fn of(xs: impl Iterator<Item = f64> + Clone) -> Self {
        let n = xs.clone().count();
        let mean = xs.clone().collect::<NeumaierSum>().value() / n as f64;
        let ss = xs.clone().map(|x| (x - mean).powi(2)).collect::<NeumaierSum>();
        let m4 = xs.map(|x| (x - mean).powi(4)).collect::<NeumaierSum>().value() / n as f64;
        let var = if n > 1 {
            ss.value() / (n - 1) as f64
        } else {
            f64::NAN
        };
        ColumnSummary { n, mean, var, m4 }
    }

    /// Standard error of the sample variance.
    pub fn var_std_error(&self) -> f64 {
        let s4 = self.var * self.var;
        ((self.m4 - s4).max(0.0) / self.n as f64).sqrt()
    }
}

/// Pearson correlation of the two columns of `rows`.
pub fn correlation(rows: &[[f64; 2]]) -> f64 {
    let n = rows.len() as f64;
    let mx = rows.iter().map(|r| r[0]).collect::<NeumaierSum>().value() / n;
    let my = rows.iter().map(|r| r[1]).collect::<NeumaierSum>().value() / n;
    let sxy = rows
        .iter()
        .map(|r| (r[0] - mx) * (r[1] - my))
        .collect::<NeumaierSum>()
        .value();
    let sxx = rows.iter().map(|r| (r[0] - mx).powi(2)).collect::<NeumaierSum>().value();
    let syy = rows.iter().map(|r| (r[1] - my).powi(2)).collect::<NeumaierSum>().value();
    sxy / (sxx * syy).sqrt()
}

/// Sort a copy of `xs` with NaN pushed to the end.
pub fn sorted(xs: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = xs.into_iter().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_values() {
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((std_normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((std_normal_cdf(2.0) - 0.977_249_868_051_820_8).abs() < 1e-15);
        assert!(std_normal_cdf(-40.0) >= 0.0);
        assert_eq!(std_normal_cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let s: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn correlation_of_linear_pair_is_one() {
        let rows: Vec<[f64; 2]> = (0..50).map(|i| [i as f64, 3.0 * i as f64 - 2.0]).collect();
        assert!((correlation(&rows) - 1.0).abs() < 1e-12);
    }
}
