//! Real functions sampled on a uniform grid.
//!
//! A [`SampledFunction`] stands for a concrete continuous function: the
//! piecewise-linear interpolant of its samples, or the cubic Hermite
//! interpolant when slopes are attached. Outside the grid it is zero, so the
//! boundary samples of compactly supported functions should vanish. Both the
//! point evaluation and the Fourier transform refer to that same interpolant,
//! which keeps spatial and frequency computations consistent.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::fourier::expsum::UniformExpSum;
use crate::quad::sinc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    start: f64,
    step: f64,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slopes: Option<Vec<f64>>,
}

impl SampledFunction {
    /// Samples `values` at `start + k * step`.
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(param("step", format!("must be positive, got {step}")));
        }
        if values.len() < 2 {
            return Err(param("values", "need at least two samples"));
        }
        Ok(Self {
            start,
            step,
            values,
            slopes: None,
        })
    }

    /// Attaches exact derivatives at the nodes, switching to Hermite interpolation.
    pub fn with_slopes(mut self, slopes: Vec<f64>) -> Result<Self> {
        if slopes.len() != self.values.len() {
            return Err(param("slopes", "length differs from values"));
        }
        self.slopes = Some(slopes);
        Ok(self)
    }

    /// Tabulates `f` (and optionally its derivative) on `n` intervals of `[a, b]`.
    pub fn tabulate(
        a: f64,
        b: f64,
        n: usize,
        f: impl Fn(f64) -> f64,
        df: Option<&dyn Fn(f64) -> f64>,
    ) -> Result<Self> {
        if !(b > a) || n == 0 {
            return Err(param("interval", format!("[{a}, {b}] with {n} intervals")));
        }
        let step = (b - a) / n as f64;
        let xs: Vec<f64> = (0..=n).map(|k| a + step * k as f64).collect();
        let out = Self::new(a, step, xs.iter().map(|&x| f(x)).collect())?;
        match df {
            Some(df) => out.with_slopes(xs.iter().map(|&x| df(x)).collect()),
            None => Ok(out),
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> Option<&[f64]> {
        self.slopes.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, k: usize) -> f64 {
        self.start + self.step * k as f64
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.start) / self.step;
        let last = self.values.len() - 1;
        if !(u >= 0.0 && u <= last as f64) {
            return 0.0;
        }
        let k = (u.floor() as usize).min(last - 1);
        let t = u - k as f64;
        let (f0, f1) = (self.values[k], self.values[k + 1]);
        match &self.slopes {
            None => f0 + (f1 - f0) * t,
            Some(d) => {
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                h00 * f0 + h01 * f1 + self.step * (h10 * d[k] + h11 * d[k + 1])
            }
        }
    }

    /// Exact integral of the interpolant.
    pub fn integral(&self) -> f64 {
        let h = self.step;
        let trap: f64 = self.values.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum::<f64>() * h;
        match &self.slopes {
            None => trap,
            Some(d) => trap + h * h * (d[0] - d[d.len() - 1]) / 12.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise combination `a * self + b * other` on a shared grid.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.values.len() != other.values.len()
            || self.start != other.start
            || self.step != other.step
            || self.slopes.is_some() != other.slopes.is_some()
        {
            return Err(param("other", "grids differ"));
        }
        let mix = |x: &[f64], y: &[f64]| -> Vec<f64> {
            x.iter().zip(y).map(|(u, v)| a * u + b * v).collect()
        };
        Ok(Self {
            start: self.start,
            step: self.step,
            values: mix(&self.values, &other.values),
            slopes: match (&self.slopes, &other.slopes) {
                (Some(x), Some(y)) => Some(mix(x, y)),
                _ => None,
            },
        })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            start: self.start,
            step: self.step,
            values: self.values.iter().map(|v| a * v).collect(),
            slopes: self
                .slopes
                .as_ref()
                .map(|d| d.iter().map(|v| a * v).collect()),
        }
    }

    pub(crate) fn value_sum(&self) -> UniformExpSum {
        UniformExpSum::new(self.start, self.step, self.values.clone())
    }

    pub(crate) fn slope_sum(&self) -> Option<UniformExpSum> {
        self.slopes
            .as_ref()
            .map(|d| UniformExpSum::new(self.start, self.step, d.clone()))
    }

    /// Fourier transform `∫ f(x) e^{-2πixξ} dx` of the interpolant.
    pub fn fourier(&self, xi: f64) -> Complex64 {
        let (a, b) = self.basis_transforms(xi);
        let mut out = a * self.value_sum().eval(xi);
        if let Some(s) = self.slope_sum() {
            out += b * s.eval(xi);
        }
        out
    }

    /// Transform on the grid `k * dxi`, `k = 0..count`.
    pub fn fourier_grid(&self, dxi: f64, count: usize) -> Vec<Complex64> {
        let values = self.value_sum().grid(dxi, count);
        let slopes = self.slope_sum().map(|s| s.grid(dxi, count));
        (0..count)
            .map(|k| {
                let xi = k as f64 * dxi;
                let (a, b) = self.basis_transforms(xi);
                let mut out = a * values[k];
                if let Some(s) = &slopes {
                    out += b * s[k];
                }
                out
            })
            .collect()
    }

    /// Multipliers of the value and slope sums in the transform.
    fn basis_transforms(&self, xi: f64) -> (Complex64, Complex64) {
        let h = self.step;
        let nu = h * xi;
        if self.slopes.is_none() {
            let s = sinc(std::f64::consts::PI * nu);
            return (Complex64::new(h * s * s, 0.0), Complex64::new(0.0, 0.0));
        }
        let (c0, s1) = hermite_basis_transforms(nu);
        (Complex64::new(h * c0, 0.0), Complex64::new(0.0, -h * h * s1))
    }

    /// Total variation of the derivative, so that `|f̂(ξ)| ≤ V/(2πξ)²`.
    pub(crate) fn slope_variation(&self) -> f64 {
        let var: f64 = match &self.slopes {
            Some(d) => d.windows(2).map(|w| (w[1] - w[0]).abs()).sum(),
            None => {
                let v = &self.values;
                let mut total = (v[1] - v[0]).abs() / self.step;
                total += v
                    .windows(3)
                    .map(|w| (w[2] - 2.0 * w[1] + w[0]).abs() / self.step)
                    .sum::<f64>();
                total + (v[v.len() - 1] - v[v.len() - 2]).abs() / self.step
            }
        };
        var
    }
}

/// Transforms of the two cubic Hermite basis shapes on `[-1, 1]`:
/// `2∫₀¹ (1 - 3u² + 2u³) cos(2πνu) du` and `2∫₀¹ u(1-u)² sin(2πνu) du`.
fn hermite_basis_transforms(nu: f64) -> (f64, f64) {
    let w = 2.0 * std::f64::consts::PI * nu;
    if w.abs() < 0.5 {
        let w2 = w * w;
        let c = 1.0
            - w2 * (1.0 / 15.0
                - w2 * (1.0 / 560.0
                    - w2 * (1.0 / 37800.0 - w2 * (1.0 / 3991680.0 - w2 / 605404800.0))));
        let s = w
            * (1.0 / 15.0
                - w2 * (1.0 / 315.0
                    - w2 * (1.0 / 15120.0 - w2 * (1.0 / 1247400.0 - w2 / 155675520.0))));
        return (c, s);
    }
    let (sn, cs) = w.sin_cos();
    let w4 = w * w * w * w;
    (
        12.0 * (2.0 - 2.0 * cs - w * sn) / w4,
        4.0 * (w * (cs + 2.0) - 3.0 * sn) / w4,
    )
}
