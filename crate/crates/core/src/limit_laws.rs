//! Limit distributions as pushforwards of two independent standard normals
//! `(N_X, N_Γ)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norming::{h_fn, h_inverse_fn};
use crate::quadrature::integrate;
use crate::rng::RngStream;
use crate::scheme::Scheme;
use crate::stats::std_normal_cdf;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawMoments {
    pub mean: [f64; 2],
    pub var: [f64; 2],
    pub corr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub scheme: Scheme,
    pub gamma: f64,
    pub c_alpha: Option<f64>,
    pub t: f64,
}

/// Build the limit law of `scheme` in the regime `(gamma, c_alpha)`.
pub fn make_limit_law(scheme: Scheme, gamma: f64, c_alpha: Option<f64>, t: f64) -> Result<LimitLaw> {
    scheme.check_compatible(gamma, c_alpha, t)?;
    Ok(LimitLaw {
        scheme,
        gamma,
        c_alpha,
        t,
    })
}

/// `Φ(√t h_γ(x))`, and 0 below the support `x ≤ -1/|γ|` when `γ < 0`.
pub fn delta_limit_cdf(gamma: f64, x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain("time horizon", t));
    }
    if gamma < 0.0 && 1.0 - gamma * x <= 0.0 {
        return Ok(0.0);
    }
    Ok(std_normal_cdf(t.sqrt() * h_fn(gamma, x)?))
}

/// Mean and variance of `expm1(kN)/k`-type variables: `e^{kN}` with `N ~ N(0,1)`.
fn lognormal_mean_var(k: f64) -> (f64, f64) {
    let m = (0.5 * k * k).exp();
    let v = (k * k).exp() * (k * k).exp_m1();
    (m, v)
}

impl LimitLaw {
    fn g(&self) -> f64 {
        self.gamma.abs()
    }

    fn c(&self) -> f64 {
        self.c_alpha.unwrap_or(f64::NAN)
    }

    /// The scheme's map applied to `(N_X, N_Γ)`.
    pub fn map(&self, nx: f64, ng: f64) -> [f64; 2] {
        let g = self.g();
        match self.scheme {
            Scheme::CondClt | Scheme::JointRandom => [nx, h_inverse_fn(self.gamma, ng).expect("gamma checked")],
            Scheme::DeltaOnly => [nx, h_inverse_fn(self.gamma, ng / self.t.sqrt()).expect("gamma checked")],
            Scheme::NegDetScale => {
                let e = (-0.5 * g * ng).exp();
                [nx * e, e]
            }
            Scheme::NegDetCenter => {
                let e = (-0.5 * g * ng).exp();
                [(2.0 / g) * (e - 1.0), e]
            }
            Scheme::G0DetScale | Scheme::SlowDetCenter => [nx, 0.5 * ng],
            Scheme::RvDetCenter => [nx + ng / self.c().sqrt(), 0.5 * ng],
        }
    }

    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let nx: f64 = rng.sample(StandardNormal);
        let ng: f64 = rng.sample(StandardNormal);
        self.map(nx, ng)
    }

    /// Distribution function of component 1 or 2.
    pub fn marginal_cdf(&self, component: usize, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::domain("cdf argument", x));
        }
        let g = self.g();
        match component {
            1 => Ok(match self.scheme {
                Scheme::RvDetCenter => std_normal_cdf(x / (1.0 + 1.0 / self.c()).sqrt()),
                Scheme::NegDetCenter => {
                    let u = 1.0 + 0.5 * g * x;
                    if u <= 0.0 {
                        0.0
                    } else {
                        std_normal_cdf(2.0 * u.ln() / g)
                    }
                }
                Scheme::NegDetScale => neg_scale_mixture_cdf(g, x)?,
                _ => std_normal_cdf(x),
            }),
            2 => match self.scheme {
                Scheme::CondClt | Scheme::JointRandom => delta_limit_cdf(self.gamma, x, 1.0),
                Scheme::DeltaOnly => delta_limit_cdf(self.gamma, x, self.t),
                Scheme::NegDetScale | Scheme::NegDetCenter => Ok(if x <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf(2.0 * x.ln() / g)
                }),
                Scheme::G0DetScale | Scheme::RvDetCenter | Scheme::SlowDetCenter => Ok(std_normal_cdf(2.0 * x)),
            },
            _ => Err(Error::Config(format!("component must be 1 or 2, got {component}"))),
        }
    }

    /// Means, variances and correlation of the pair.
    pub fn moments(&self) -> LawMoments {
        let g = self.g();
        let gamma = self.gamma;
        let h_inv_moments = |s: f64| -> (f64, f64) {
            // h^←(N s) with N ~ N(0,1)
            if gamma == 0.0 {
                (0.0, 0.25 * s * s)
            } else {
                let (m, v) = lognormal_mean_var(0.5 * g * s);
                ((m - 1.0) / g, v / (g * g))
            }
        };
        match self.scheme {
            Scheme::CondClt | Scheme::JointRandom => {
                let (m, v) = h_inv_moments(1.0);
                LawMoments {
                    mean: [0.0, m],
                    var: [1.0, v],
                    corr: 0.0,
                }
            }
            Scheme::DeltaOnly => {
                let (m, v) = h_inv_moments(1.0 / self.t.sqrt());
                LawMoments {
                    mean: [0.0, m],
                    var: [1.0, v],
                    corr: 0.0,
                }
            }
            Scheme::NegDetScale => {
                let (m, v) = lognormal_mean_var(0.5 * g);
                LawMoments {
                    mean: [0.0, m],
                    var: [(0.5 * g * g).exp(), v],
                    corr: 0.0,
                }
            }
            Scheme::NegDetCenter => {
                let (m, v) = lognormal_mean_var(0.5 * g);
                LawMoments {
                    mean: [(2.0 / g) * (m - 1.0), m],
                    var: [4.0 / (g * g) * v, v],
                    corr: 1.0,
                }
            }
            Scheme::G0DetScale | Scheme::SlowDetCenter => LawMoments {
                mean: [0.0, 0.0],
                var: [1.0, 0.25],
                corr: 0.0,
            },
            Scheme::RvDetCenter => {
                let c = self.c();
                LawMoments {
                    mean: [0.0, 0.0],
                    var: [1.0 + 1.0 / c, 0.25],
                    corr: 1.0 / (1.0 + c).sqrt(),
                }
            }
        }
    }
}

/// `P(N_X e^{-g N_Γ / 2} ≤ x) = E Φ(x e^{g N/2})`, by adaptive quadrature
/// against the normal density on `[-12, 12]`.
fn neg_scale_mixture_cdf(g: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.5);
    }
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let q = integrate(
        |n| Ok(norm * (-0.5 * n * n).exp() * std_normal_cdf(x * (0.5 * g * n).exp())),
        -12.0,
        12.0,
        1e-12,
        1e-14,
        2000,
    )?;
    if !q.converged {
        return Err(Error::Quadrature {
            partial: q.value,
            bound: q.error,
        });
    }
    Ok(q.value.clamp(0.0, 1.0))
}

/// `n` draws from one stream.
pub fn limit_sample(law: &LimitLaw, stream: RngStream, n: usize) -> Vec<[f64; 2]> {
    let mut rng = stream.rng();
    (0..n).map(|_| law.sample_pair(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{correlation, sorted, ColumnSummary};
    use crate::verify::ks_statistic;

    fn law(scheme: Scheme, gamma: f64, c: Option<f64>) -> LimitLaw {
        make_limit_law(scheme, gamma, c, 1.0).unwrap()
    }

    fn all_laws() -> Vec<LimitLaw> {
        vec![
            law(Scheme::CondClt, 0.0, None),
            law(Scheme::JointRandom, -1.0, None),
            law(Scheme::NegDetScale, -1.0, None),
            law(Scheme::NegDetCenter, -1.0, None),
            law(Scheme::G0DetScale, 0.0, None),
            law(Scheme::RvDetCenter, 0.0, Some(1.0 / 3.0)),
            law(Scheme::SlowDetCenter, 0.0, Some(0.0)),
            make_limit_law(Scheme::DeltaOnly, 0.0, None, 4.0).unwrap(),
            make_limit_law(Scheme::DeltaOnly, -0.5, None, 2.0).unwrap(),
        ]
    }

    #[test]
    fn delta_cdf_examples() {
        assert_eq!(delta_limit_cdf(0.0, 0.0, 1.0).unwrap(), 0.5);
        assert!((delta_limit_cdf(0.0, 0.5, 1.0).unwrap() - 0.841_345).abs() < 1e-6);
        assert!((delta_limit_cdf(0.0, 0.5, 4.0).unwrap() - 0.977_250).abs() < 1e-6);
        assert_eq!(delta_limit_cdf(-1.0, -1.0, 1.0).unwrap(), 0.0);
        assert_eq!(delta_limit_cdf(-1.0, -3.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn delta_representation_identity() {
        // P(h^←(N) ≤ x) = Φ(h(x)) because h^← is increasing.
        for &g in &[0.0, -0.5, -1.0, -2.0] {
            for i in 0..100 {
                let y = -4.0 + 8.0 * i as f64 / 99.0;
                let x = h_inverse_fn(g, y).unwrap();
                let cdf = delta_limit_cdf(g, x, 1.0).unwrap();
                assert!((cdf - std_normal_cdf(y)).abs() < 1e-12, "g={g} y={y}");
            }
        }
    }

    #[test]
    fn rv_limit_moments() {
        let m = law(Scheme::RvDetCenter, 0.0, Some(1.0 / 3.0)).moments();
        assert!((m.var[0] - 4.0).abs() < 1e-14);
        assert!((m.corr - 3f64.sqrt() / 2.0).abs() < 1e-14);
        assert!((m.corr - 0.8660).abs() < 1e-4);
    }

    #[test]
    fn neg_ratio_marginal_is_lognormal() {
        let l = law(Scheme::NegDetScale, -1.0, None);
        let xs = limit_sample(&l, RngStream::new(1, 0), 100_000);
        let logs: Vec<f64> = xs.iter().map(|p| p[1].ln()).collect();
        let s = ColumnSummary::of(logs.iter().copied());
        assert!((s.var - 0.25).abs() < 0.01);
        let ks = ks_statistic(&sorted(logs), |x| std_normal_cdf(2.0 * x)).unwrap();
        assert!(ks < 1.36 / (1e5f64).sqrt() * 1.5);
    }

    #[test]
    fn g0_components_are_independent() {
        let xs = limit_sample(&law(Scheme::G0DetScale, 0.0, None), RngStream::new(2, 0), 100_000);
        assert!(correlation(&xs).abs() <= 0.01);
        let v2 = ColumnSummary::of(xs.iter().map(|p| p[1])).var;
        assert!((v2 - 0.25).abs() < 0.01);
    }

    #[test]
    fn neg_scale_correlation_matches_brute_force() {
        // oracle: direct pushforward of 10⁷ normal pairs
        let mut rng = RngStream::new(1234, 99).rng();
        let oracle_rows: Vec<[f64; 2]> = (0..10_000_000)
            .map(|_| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                let e = (-0.5 * b).exp();
                [a * e, e]
            })
            .collect();
        let oracle = correlation(&oracle_rows);
        let l = law(Scheme::NegDetScale, -1.0, None);
        let xs = limit_sample(&l, RngStream::new(3, 0), 100_000);
        assert!((correlation(&xs) - oracle).abs() <= 0.02);
        assert!((l.moments().corr - oracle).abs() <= 0.01);
    }

    #[test]
    fn ratio_coupling_is_standard_normal() {
        let l = law(Scheme::NegDetScale, -1.0, None);
        let xs = limit_sample(&l, RngStream::new(4, 0), 100_000);
        let ratio = sorted(xs.iter().map(|p| p[0] / p[1]));
        let ks = ks_statistic(&ratio, std_normal_cdf).unwrap();
        assert!(ks < 1.36 / (1e5f64).sqrt() * 1.5);
    }

    #[test]
    fn self_consistency_of_every_marginal() {
        let bound = 1.36 / (1e5f64).sqrt() * 1.5;
        for (k, l) in all_laws().into_iter().enumerate() {
            let xs = limit_sample(&l, RngStream::new(10, k as u64), 100_000);
            for c in 1..=2 {
                let col = sorted(xs.iter().map(|p| p[c - 1]));
                let ks = ks_statistic(&col, |x| l.marginal_cdf(c, x).unwrap()).unwrap();
                assert!(ks <= bound, "{:?} component {c}: {ks}", l.scheme);
            }
        }
    }

    #[test]
    fn declared_moments_match_sampler() {
        for (k, l) in all_laws().into_iter().enumerate() {
            let xs = limit_sample(&l, RngStream::new(20, k as u64), 200_000);
            let m = l.moments();
            for c in 0..2 {
                let s = ColumnSummary::of(xs.iter().map(|p| p[c]));
                let se_mean = (s.var / s.n as f64).sqrt();
                assert!((s.mean - m.mean[c]).abs() <= 4.0 * se_mean, "{:?} mean {c}", l.scheme);
                assert!((s.var - m.var[c]).abs() <= 4.0 * s.var_std_error(), "{:?} var {c}: {} vs {}", l.scheme, s.var, m.var[c]);
            }
            let corr = correlation(&xs);
            assert!((corr - m.corr).abs() <= 0.01, "{:?} corr {corr} vs {}", l.scheme, m.corr);
        }
    }

    #[test]
    fn marginals_are_monotone_distribution_functions() {
        for l in all_laws() {
            for c in 1..=2 {
                let mut prev = 0.0;
                for i in 0..=400 {
                    let x = -10.0 + 0.05 * i as f64;
                    let v = l.marginal_cdf(c, x).unwrap();
                    assert!((0.0..=1.0).contains(&v));
                    assert!(v + 1e-12 >= prev, "{:?} c={c} x={x}", l.scheme);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn sampler_is_reproducible() {
        let l = law(Scheme::CondClt, 0.0, None);
        assert_eq!(limit_sample(&l, RngStream::new(5, 5), 100), limit_sample(&l, RngStream::new(5, 5), 100));
    }

    #[test]
    fn incompatible_parameters_are_rejected() {
        assert!(make_limit_law(Scheme::RvDetCenter, 0.0, Some(0.0), 1.0).is_err());
        assert!(make_limit_law(Scheme::NegDetScale, 0.0, None, 1.0).is_err());
    }
}
