//! Adaptive Gauss–Kronrod (7/15) quadrature.

// Nodes and weights as published, beyond double precision.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad {
    pub value: f64,
    /// Absolute error estimate.
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kron.abs();
    let mut fv = [0.0f64; 14];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx)?;
        let f2 = f(c + dx)?;
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kron * h;
    let res_abs = abs_sum * h.abs();
    let res_asc = asc * h.abs();
    let mut error = ((kron - gauss) * h).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::Quadrature {
            partial: value,
            bound: f64::INFINITY,
        });
    }
    Ok(Segment { a, b, value, error })
}

/// Integrate `f` over `[a, b]` until the error estimate drops below
/// `max(abs_tol, rel_tol·|I|)` or `max_segments` is reached.
pub fn integrate<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_segments: usize,
) -> Result<Quad> {
    if a == b {
        return Ok(Quad {
            value: 0.0,
            error: 0.0,
            evals: 0,
            converged: true,
        });
    }
    let mut segs = vec![gk15(&mut f, a, b)?];
    let mut evals = 15;
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        let tol = abs_tol.max(rel_tol * value.abs());
        if error <= tol || segs.len() >= max_segments {
            return Ok(Quad {
                value,
                error,
                evals,
                converged: error <= tol,
            });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let s = segs.swap_remove(worst);
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            // Cannot split further in floating point.
            segs.push(s);
            let value: f64 = segs.iter().map(|s| s.value).sum();
            let error: f64 = segs.iter().map(|s| s.error).sum();
            return Ok(Quad {
                value,
                error,
                evals,
                converged: false,
            });
        }
        segs.push(gk15(&mut f, s.a, m)?);
        segs.push(gk15(&mut f, m, s.b)?);
        evals += 30;
    }
}

/// Integrate a decaying `f` over `[a, ∞)` on panels of doubling width.
/// Stops once a panel and the integrand at its right end, scaled by the next
/// width, both fall below `1e-16` of the running total.
pub fn integrate_to_infinity<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, rel_tol: f64) -> Result<Quad> {
    const CUTOFF: f64 = 1e-16;
    let mut total: f64 = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    let mut converged = true;
    let mut lo = a;
    let mut width = 1.0;
    for _ in 0..1100 {
        let hi = lo + width;
        let q = integrate(&mut f, lo, hi, rel_tol, rel_tol * total.abs() * 0.1, 400)?;
        total += q.value;
        err += q.error;
        evals += q.evals + 1;
        converged &= q.converged;
        let edge = f(hi)?.abs();
        let small = CUTOFF * total.abs();
        if q.value.abs() <= small && edge * 2.0 * width <= small {
            return Ok(Quad {
                value: total,
                error: err,
                evals,
                converged,
            });
        }
        if !hi.is_finite() {
            break;
        }
        lo = hi;
        if lo - a >= 1.0 {
            width *= 2.0;
        }
    }
    Ok(Quad {
        value: total,
        error: err,
        evals,
        converged: false,
    })
}
