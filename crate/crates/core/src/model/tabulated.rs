use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::LevyTail;
use crate::error::{Error, Result};

/// A user-supplied tail given on a grid, interpolated by a monotone
/// piecewise cubic (PCHIP) in `(ln x, ln Π̄)`.
#[derive(Clone, Debug)]
pub struct TabulatedModel {
    lx: Vec<f64>,
    ly: Vec<f64>,
    slopes: Vec<f64>,
    gamma: f64,
    c_alpha: Option<f64>,
    extrapolate: bool,
    source: String,
}

#[derive(Deserialize)]
struct Row {
    x: f64,
    tail: f64,
}

const BISECT_TOL: f64 = 1e-12;

impl TabulatedModel {
    /// Build from grid points. Rows may come in any order of `x` but every
    /// `x` must be distinct; monotonicity of the tail is left to
    /// [`validate_model`](super::validate_model).
    pub fn from_points(xs: &[f64], tails: &[f64]) -> Result<Self> {
        if xs.len() != tails.len() {
            return Err(Error::InvalidModel("x and tail columns differ in length".into()));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidModel("a tabulated tail needs at least two rows".into()));
        }
        let mut rows: Vec<(f64, f64)> = xs.iter().copied().zip(tails.iter().copied()).collect();
        for &(x, y) in &rows {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidModel(format!("grid abscissa {x} is not a positive finite number")));
            }
            if !(y > 0.0 && y.is_finite()) {
                return Err(Error::InvalidModel(format!("tail value {y} at x = {x} is not a positive finite number")));
            }
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidModel("repeated x in tail table".into()));
        }
        let lx: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
        let ly: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
        let slopes = pchip_slopes(&lx, &ly);
        Ok(Self {
            lx,
            ly,
            slopes,
            gamma: 0.0,
            c_alpha: None,
            extrapolate: false,
            source: "inline".into(),
        })
    }

    /// Parse a CSV with header `x,tail`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "tail" {
            return Err(Error::InvalidModel(format!(
                "tail table header must be `x,tail`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for row in rdr.deserialize() {
            let Row { x, tail } = row?;
            xs.push(x);
            ys.push(tail);
        }
        Self::from_points(&xs, &ys)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut m = Self::from_csv_reader(file)?;
        m.source = path.display().to_string();
        Ok(m)
    }

    pub fn set_gamma(&mut self, gamma: f64) {
        self.gamma = gamma;
    }

    pub fn set_c_alpha(&mut self, c: Option<f64>) {
        self.c_alpha = c;
    }

    pub fn set_extrapolate(&mut self, on: bool) {
        self.extrapolate = on;
    }

    pub fn extrapolates(&self) -> bool {
        self.extrapolate
    }

    /// Grid in `(ln x, ln Π̄)`, sorted by `x`.
    pub fn log_grid(&self) -> (&[f64], &[f64]) {
        (&self.lx, &self.ly)
    }

    fn n(&self) -> usize {
        self.lx.len()
    }

    fn x_range(&self) -> (f64, f64) {
        (self.lx[0].exp(), self.lx[self.n() - 1].exp())
    }

    /// `ln Π̄` at `lx`, with optional log-log linear continuation.
    fn log_tail(&self, lx: f64) -> Result<f64> {
        let n = self.n();
        if lx < self.lx[0] || lx > self.lx[n - 1] {
            if !self.extrapolate {
                let (lo, hi) = self.x_range();
                return Err(Error::Extrapolation {
                    what: "tail argument",
                    value: lx.exp(),
                    lo,
                    hi,
                });
            }
            let k = if lx < self.lx[0] { 0 } else { n - 1 };
            return Ok(self.ly[k] + self.slopes[k] * (lx - self.lx[k]));
        }
        let i = match self.lx.partition_point(|&v| v <= lx) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        Ok(self.hermite(i, lx))
    }

    fn hermite(&self, i: usize, lx: f64) -> f64 {
        let h = self.lx[i + 1] - self.lx[i];
        let s = (lx - self.lx[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.ly[i] + h10 * h * self.slopes[i] + h01 * self.ly[i + 1] + h11 * h * self.slopes[i + 1]
    }

    fn log_inverse_impl(&self, y: f64) -> Result<f64> {
        let n = self.n();
        let l = y.ln();
        let (top, bottom) = (self.ly[0], self.ly[n - 1]);
        if l > top || l < bottom {
            if !self.extrapolate {
                return Err(Error::Extrapolation {
                    what: "tail inverse argument",
                    value: y,
                    lo: bottom.exp(),
                    hi: top.exp(),
                });
            }
            let k = if l > top { 0 } else { n - 1 };
            let slope = self.slopes[k];
            if !(slope < 0.0) {
                return Err(Error::InvalidModel(
                    "tail table is not decreasing at its end; cannot extrapolate the inverse".into(),
                ));
            }
            return Ok(self.lx[k] + (l - self.ly[k]) / slope);
        }
        // First grid index with ln Π̄ <= l; the generalized inverse lies in
        // the segment just before it.
        let j = self.ly.iter().position(|&v| v <= l).unwrap_or(n - 1);
        if j == 0 {
            return Ok(self.lx[0]);
        }
        let (mut lo, mut hi) = (self.lx[j - 1], self.lx[j]);
        let i = j - 1;
        while hi - lo > BISECT_TOL * hi.abs().max(1.0) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.hermite(i, mid) <= l {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Fritsch–Carlson derivative estimates with the shape-preserving three
/// point end conditions.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = del[0];
        d[1] = del[0];
        return d;
    }
    for k in 1..n - 1 {
        if del[k - 1] * del[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    d[0] = end_slope(h[0], h[1], del[0], del[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

impl LevyTail for TabulatedModel {
    fn label(&self) -> String {
        format!("tabulated({})", self.source)
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn tail_at_log(&self, log_x: f64) -> Result<f64> {
        Ok(self.log_tail(log_x)?.exp())
    }

    fn log_inverse(&self, y: f64) -> Result<f64> {
        self.log_inverse_impl(y)
    }

    fn declared_c_alpha(&self) -> Option<f64> {
        self.c_alpha
    }
}
