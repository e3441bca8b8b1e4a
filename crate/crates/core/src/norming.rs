//! The limit-function family `h_γ`, norming sequences and the de Haan
//! diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LevyTail;
use crate::moments::log_moment;
use crate::quadrature::integrate_to_infinity;

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma <= 0.0) || !gamma.is_finite() {
        return Err(Error::domain("gamma", gamma));
    }
    Ok(())
}

/// `h_γ(x)`: `2x` for `γ = 0`, `-(2/γ) ln(1 - γx)` otherwise.
pub fn h_fn(gamma: f64, x: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma == 0.0 {
        return Ok(2.0 * x);
    }
    let u = -gamma * x;
    if !(u > -1.0) {
        return Err(Error::domain("h argument outside R_gamma", x));
    }
    Ok(-(2.0 / gamma) * u.ln_1p())
}

/// `h_γ^←(y)`: `y/2` for `γ = 0`, `(e^{|γ|y/2} - 1)/|γ|` otherwise.
pub fn h_inverse_fn(gamma: f64, y: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma == 0.0 {
        return Ok(0.5 * y);
    }
    Ok(-(-gamma * y / 2.0).exp_m1() / gamma)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormingSequences {
    pub r: f64,
    pub a_r: f64,
    pub b_r: f64,
    pub log_a: f64,
    pub log_b: f64,
    pub gamma: f64,
}

impl NormingSequences {
    /// `ln(a_r / b_r)`.
    pub fn log_ratio(&self) -> f64 {
        self.log_a - self.log_b
    }
}

/// `b_r = Π̄^←(r)`; `a_r = |γ| b_r` for `γ < 0` and
/// `a_r = 2(Π̄^←(r - √r) - Π̄^←(r))` for `γ = 0`.
pub fn norming_sequences<M: LevyTail + ?Sized>(model: &M, r: f64) -> Result<NormingSequences> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::domain("trimming level (needs r > 1)", r));
    }
    let gamma = model.gamma();
    if gamma > 0.0 {
        return Err(Error::InvalidModel(format!("gamma = {gamma} > 0 has no norming here")));
    }
    let (log_a, log_b) = match model.analytic_norming(r) {
        Some(ab) => ab,
        None => {
            let log_b = model.log_inverse(r)?;
            let log_a = if gamma < 0.0 {
                gamma.abs().ln() + log_b
            } else {
                let l1 = model.log_inverse(r - r.sqrt())?;
                let d = (l1 - log_b).exp_m1();
                if !(d > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "degenerate scale at r = {r}: the inverse tail is flat on [r - sqrt(r), r]"
                    )));
                }
                std::f64::consts::LN_2 + log_b + d.ln()
            };
            (log_a, log_b)
        }
    };
    Ok(NormingSequences {
        r,
        a_r: log_a.exp(),
        b_r: log_b.exp(),
        log_a,
        log_b,
        gamma,
    })
}

/// `(r - Π̄(a_r x + b_r)) / √r`.
pub fn empirical_h<M: LevyTail + ?Sized>(model: &M, r: f64, x: f64) -> Result<f64> {
    let ns = norming_sequences(model, r)?;
    let u = x * ns.log_ratio().exp();
    if !(u > -1.0) {
        return Err(Error::domain("a_r x + b_r must be positive; x", x));
    }
    let tail = model.tail_at_log(ns.log_b + u.ln_1p())?;
    Ok((r - tail) / r.sqrt())
}

/// `H(t) = e^{2√t}`.
pub fn big_h(t: f64) -> f64 {
    (2.0 * t.sqrt()).exp()
}

/// `H^←(y) = ¼ ln² y` on `[1, ∞)`.
pub fn big_h_inverse(y: f64) -> Result<f64> {
    if !(y >= 1.0) {
        return Err(Error::domain("H inverse argument", y));
    }
    Ok(0.25 * y.ln().powi(2))
}

/// `ln V(x)` with `V = Π̄^← ∘ H^←`, for `x = e^log_x > 1`.
pub fn log_v<M: LevyTail + ?Sized>(model: &M, log_x: f64) -> Result<f64> {
    if !(log_x > 0.0) {
        return Err(Error::domain("V argument must exceed 1; ln x", log_x));
    }
    model.log_inverse(0.25 * log_x * log_x)
}

/// Auxiliary function of `H`: `f(t) = √t`.
pub fn aux_f(t: f64) -> f64 {
    t.sqrt()
}

/// `ln π_p(t)`, `π_p(t) = ∫_t^∞ V^p(v) ½ ln v dv/v`, at `t = e^log_t > 1`.
pub fn log_pi_p<M: LevyTail + ?Sized>(model: &M, p: f64, log_t: f64) -> Result<f64> {
    if !(log_t > 0.0) {
        return Err(Error::domain("pi_p argument must exceed 1; ln t", log_t));
    }
    // With w = ln v the integrand is V^p(e^w) w/2; factor out V^p(t).
    let l0 = log_v(model, log_t)?;
    let q = integrate_to_infinity(
        |s| {
            let w = log_t + s;
            Ok((p * (log_v(model, w)? - l0)).exp() * 0.5 * w)
        },
        0.0,
        1e-12,
    )?;
    if !q.converged {
        return Err(Error::Quadrature {
            partial: q.value,
            bound: q.error,
        });
    }
    Ok(p * l0 + q.value.ln())
}

/// `ln g_p(t)`, `g_p(t) = ½ V^p(t) ln t`.
pub fn log_g_p<M: LevyTail + ?Sized>(model: &M, p: f64, log_t: f64) -> Result<f64> {
    Ok((0.5f64).ln() + p * log_v(model, log_t)? + log_t.ln())
}

/// `(V(sx) - V(s)) / a(H^←(s))` with `s = e^log_s`.
pub fn dehaan_v_check<M: LevyTail + ?Sized>(model: &M, x: f64, log_s: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("x", x));
    }
    let lsx = log_s + x.ln();
    if !(log_s > 0.0) || !(lsx > 0.0) {
        return Err(Error::domain("ln s (needs s > 1 and s x > 1)", log_s));
    }
    let t0 = 0.25 * log_s * log_s;
    if !(t0 > 1.0) {
        return Err(Error::domain("H inverse of s must exceed 1; ln s", log_s));
    }
    let ns = norming_sequences(model, t0)?;
    let l1 = log_v(model, lsx)?;
    Ok((ns.log_b - ns.log_a).exp() * (l1 - ns.log_b).exp_m1())
}

/// Identity `∫_0^{V(t)} u^p Π(du) = π_p(t)` evaluated through the moment engine.
pub fn log_pi_p_via_moment<M: LevyTail + ?Sized>(model: &M, p: f64, log_t: f64) -> Result<f64> {
    log_moment(model, p, log_v(model, log_t)?)
}
