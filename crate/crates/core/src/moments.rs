//! Truncated moments `∫_0^t u^p Π(du)` and the `c_α` ratio.
//!
//! Quadrature runs on the transformed integral `∫_{Π̄(t)}^∞ (Π̄^←(u))^p du`
//! with `u = Π̄(t)·e^v`, so the integrand starts at `t^p` and decays
//! monotonically. Everything is carried in logs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LevyTail;
use crate::quadrature::{integrate, integrate_to_infinity};

/// Relative tolerance of the quadrature path.
pub const QUAD_REL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedMoment {
    pub p: f64,
    pub t: f64,
    pub value: f64,
    pub log_value: f64,
    pub method: Method,
    /// Absolute error bound; zero for closed forms.
    pub est_error: f64,
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain("moment order", p));
    }
    Ok(())
}

/// `∫_0^t u^p Π(du)`.
pub fn truncated_moment<M: LevyTail + ?Sized>(model: &M, p: f64, t: f64) -> Result<TruncatedMoment> {
    if !(t > 0.0) {
        return Err(Error::domain("truncation point", t));
    }
    let mut m = truncated_moment_log(model, p, t.ln(), false)?;
    m.t = t;
    Ok(m)
}

/// Same as [`truncated_moment`] with the truncation point given as `ln t`.
/// `force_quadrature` bypasses the closed form.
pub fn truncated_moment_log<M: LevyTail + ?Sized>(
    model: &M,
    p: f64,
    log_t: f64,
    force_quadrature: bool,
) -> Result<TruncatedMoment> {
    check_p(p)?;
    if log_t.is_nan() || log_t == f64::INFINITY && model.log_support_edge().is_infinite() {
        return Err(Error::domain("log truncation point", log_t));
    }
    let t = log_t.exp();
    if !force_quadrature {
        if let Some(lv) = model.analytic_log_moment(p, log_t) {
            return Ok(TruncatedMoment {
                p,
                t,
                value: lv.exp(),
                log_value: lv,
                method: Method::Analytic,
                est_error: 0.0,
            });
        }
    }
    let (lv, err) = quadrature_log_moment(model, p, log_t)?;
    Ok(TruncatedMoment {
        p,
        t,
        value: lv.exp(),
        log_value: lv,
        method: Method::Quadrature,
        est_error: err * lv.exp(),
    })
}

/// `ln ∫_0^t u^p Π(du)`, closed form when available.
pub fn log_moment<M: LevyTail + ?Sized>(model: &M, p: f64, log_t: f64) -> Result<f64> {
    if let Some(lv) = model.analytic_log_moment(p, log_t) {
        return Ok(lv);
    }
    check_p(p)?;
    Ok(quadrature_log_moment(model, p, log_t)?.0)
}

/// Returns `(ln I, relative error bound)`.
fn quadrature_log_moment<M: LevyTail + ?Sized>(model: &M, p: f64, log_t: f64) -> Result<(f64, f64)> {
    let edge = model.log_support_edge();
    let lt = log_t.min(edge);
    let y0 = model.tail_at_log(lt)?;
    if y0 > 0.0 && y0.is_finite() {
        let ly0 = y0.ln();
        let q = integrate_to_infinity(
            |v| {
                let l = model.log_inverse((ly0 + v).exp())?;
                Ok((v + p * (l - lt)).exp())
            },
            0.0,
            QUAD_REL_TOL,
        )?;
        let rel = q.error / q.value;
        if !q.converged || !(rel <= QUAD_REL_TOL.max(1e3 * f64::EPSILON)) {
            return Err(Error::Quadrature {
                partial: (ly0 + p * lt + q.value.ln()).exp(),
                bound: rel,
            });
        }
        return Ok((ly0 + p * lt + q.value.ln(), rel));
    }
    if y0 == 0.0 {
        // At or beyond the support edge: integrate over the whole range of
        // the inverse, in units of edge^p.
        let head = integrate(
            |u| {
                if u <= 0.0 {
                    return Ok(1.0);
                }
                Ok((p * (model.log_inverse(u)? - lt)).exp())
            },
            0.0,
            1.0,
            QUAD_REL_TOL,
            0.0,
            400,
        )?;
        let tail = integrate_to_infinity(
            |v| {
                let l = model.log_inverse(v.exp())?;
                Ok((v + p * (l - lt)).exp())
            },
            0.0,
            QUAD_REL_TOL,
        )?;
        let value = head.value + tail.value;
        let rel = (head.error + tail.error) / value;
        if !(head.converged && tail.converged) || !(rel <= QUAD_REL_TOL.max(1e3 * f64::EPSILON)) {
            return Err(Error::Quadrature {
                partial: (p * lt + value.ln()).exp(),
                bound: rel,
            });
        }
        return Ok((p * lt + value.ln(), rel));
    }
    Err(Error::domain("tail value at truncation point", y0))
}

/// `σ²(x) / (x² Π̄(x))`.
pub fn c_alpha_ratio<M: LevyTail + ?Sized>(model: &M, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("ratio argument", x));
    }
    c_alpha_ratio_log(model, x.ln())
}

/// [`c_alpha_ratio`] at `x = e^log_x`.
pub fn c_alpha_ratio_log<M: LevyTail + ?Sized>(model: &M, log_x: f64) -> Result<f64> {
    if log_x >= model.log_support_edge() {
        return Err(Error::domain("ratio argument beyond the support", log_x.exp()));
    }
    let tail = model.tail_at_log(log_x)?;
    if !(tail > 0.0) {
        return Err(Error::domain("ratio argument beyond the support", log_x.exp()));
    }
    let lm = log_moment(model, 2.0, log_x)?;
    Ok((lm - 2.0 * log_x - tail.ln()).exp())
}

/// Extrapolated `lim_{x↓0} σ²(x)/(x²Π̄(x))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CAlphaEstimate {
    /// `(ln x_k, ratio)` at the probe points.
    pub points: Vec<(f64, f64)>,
    /// `None` when the ratios do not settle.
    pub limit: Option<f64>,
    pub uncertainty: Option<f64>,
    pub note: String,
}

/// Evaluate the ratio at `x_k = exp(-2^k)`, `k = k0..k0+6`, and extrapolate
/// with Aitken's Δ² on the last two triples.
pub fn c_alpha_limit<M: LevyTail + ?Sized>(model: &M, k0: u32) -> Result<CAlphaEstimate> {
    let mut points = Vec::with_capacity(6);
    for k in k0..k0 + 6 {
        let lx = -(2f64.powi(k as i32));
        points.push((lx, c_alpha_ratio_log(model, lx)?));
    }
    let r: Vec<f64> = points.iter().map(|p| p.1).collect();
    let aitken = |a: f64, b: f64, c: f64| {
        let d2 = c - 2.0 * b + a;
        if d2.abs() <= 1e-14 * c.abs().max(1e-300) {
            c
        } else {
            c - (c - b).powi(2) / d2
        }
    };
    let e1 = aitken(r[2], r[3], r[4]);
    let e2 = aitken(r[3], r[4], r[5]);
    let diffs: Vec<f64> = r.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    // Differences at the roundoff level of the ratio count as settled.
    let floor = 1e-11 * r[5].abs();
    let settling = diffs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + floor);
    let spread = (e2 - e1).abs().max(diffs[4]);
    let scale = r[5].abs().max(1e-3);
    if !settling || !e2.is_finite() || spread > 0.05 * scale.max(1.0) {
        return Ok(CAlphaEstimate {
            points,
            limit: None,
            uncertainty: None,
            note: "no limit detected".into(),
        });
    }
    let limit = e2.max(0.0);
    Ok(CAlphaEstimate {
        points,
        limit: Some(limit),
        uncertainty: Some((e2 - e1).abs().max(if e2 < 0.0 { -e2 } else { 0.0 })),
        note: "Aitken extrapolation of the last six ratios".into(),
    })
}
