//! The configuration integral evaluated in frequency space:
//! `∫∫ μ̂(ξ+η)·conj f̂(ξ)·conj ĝ(η)·m(ξ, η) dξ dη` with
//! `m(ξ, η) = ∫ e^{-2πi(tξ + P(t)η)} τ_l(t) dt`.
//!
//! On a grid of step `Δ` with `1/Δ` beyond the spatial extent of the
//! integrand, the Riemann sum over `(ξ, η)` reproduces the truncated integral
//! with no aliasing, so the only error is the truncation to `|ξ|, |η| ≤ Ξ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::QuadraticPattern;
use crate::error::{param, Error, Result};
use crate::fourier::transform_grid;
use crate::measure::{GridMeasure, WindowTau};
use crate::sampled::SampledFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub value: Complex64,
    /// `mass·‖τ_l‖₁·(∫_{>Ξ}|f̂|·∫|ĝ| + ∫|f̂|·∫_{>Ξ}|ĝ|)`.
    pub truncation_bound: f64,
    pub cutoff: f64,
    pub dxi: f64,
    pub t_step: f64,
}

const MAX_EXTENT_GRID: usize = 1 << 22;

fn pow2_at_least(x: f64) -> f64 {
    x.max(1e-300).log2().ceil().exp2()
}

fn at(v: &[Complex64], i: i64) -> Complex64 {
    if i >= 0 {
        v[i as usize]
    } else {
        v[(-i) as usize].conj()
    }
}

/// `(∫|f̂|, ∫_{|ξ|>cutoff}|f̂|)` from samples at `k·dxi`, plus the `V/(2πξ)²` tail.
fn abs_mass(f: &SampledFunction, values: &[Complex64], dxi: f64, n: usize) -> (f64, f64) {
    let last = values.len() - 1;
    let trap = |from: usize| -> f64 {
        if from >= last {
            return 0.0;
        }
        let inner: f64 = values[from + 1..last].iter().map(|v| v.norm()).sum();
        dxi * (inner + 0.5 * (values[from].norm() + values[last].norm()))
    };
    let ext = last as f64 * dxi;
    let beyond = 2.0 * f.slope_variation() / (4.0 * PI * PI * ext);
    (2.0 * trap(0) + beyond, 2.0 * trap(n) + beyond)
}

/// Frequency-space configuration integral truncated to `|ξ|, |η| ≤ trunc`.
/// With `tolerance`, a truncation bound above it is an accuracy error.
pub fn config_integral_frequency(
    f: &SampledFunction,
    g: &SampledFunction,
    mu: &GridMeasure,
    pat: &QuadraticPattern,
    trunc: f64,
    tolerance: Option<f64>,
) -> Result<FrequencyEstimate> {
    if !(trunc > 0.0 && trunc.is_finite()) {
        return Err(param("trunc", format!("must be positive and finite, got {trunc}")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let Some((ma, mb)) = mu.support_hull() else {
        return Ok(FrequencyEstimate {
            value: zero,
            truncation_bound: 0.0,
            cutoff: trunc,
            dxi: 0.0,
            t_step: 0.0,
        });
    };
    let (t0, t1) = pat.window();
    let (p0, p1) = pat.range();
    let y_ext = (f.start() - mb - t1).abs().max((f.end() - ma - t0).abs());
    let z_ext = (g.start() - mb - p1).abs().max((g.end() - ma - p0).abs());
    let inv = pow2_at_least(y_ext.max(z_ext).max(t1 - t0) * (1.0 + 1e-9));
    let dxi = 1.0 / inv;
    let n = (trunc / dxi).ceil() as usize;
    let cutoff = n as f64 * dxi;

    let extent = |h: &SampledFunction| -> Result<Vec<Complex64>> {
        let ext = (2.0 * cutoff).max(8.0 / h.step());
        let count = ((ext / dxi).ceil() as usize).max(n + 1).min(MAX_EXTENT_GRID.max(n + 1));
        Ok(h.fourier_grid(dxi, count + 1))
    };
    let fh = extent(f)?;
    let gh = extent(g)?;
    let (nf, tf) = abs_mass(f, &fh, dxi, n);
    let (ng, tg) = abs_mass(g, &gh, dxi, n);
    let truncation_bound =
        mu.total_mass() * WindowTau.scaled_l1_norm(pat.l()) * (tf * ng + nf * tg);
    if let Some(tol) = tolerance {
        if truncation_bound > tol {
            return Err(Error::Accuracy(format!(
                "truncation bound {truncation_bound:.3e} at Ξ = {cutoff} exceeds tolerance {tol:.3e}"
            )));
        }
    }
    let muh = transform_grid(mu, dxi, 2 * n + 1);

    // t-grid with 1/dt = Δ·L beyond the largest phase frequency plus a margin
    // for the decay of τ̂_l, so the periodic sum in ξ is the integral.
    let band = cutoff * (1.0 + pat.max_slope()) + 128.0 * (pat.l() as f64).exp2();
    let len = (pow2_at_least(band * inv) as usize).max((2 * n + 1).next_power_of_two());
    let dt = 1.0 / (dxi * len as f64);
    let samples = (((t1 - t0) / dt).floor() as usize + 1).min(len);
    let tnodes: Vec<(f64, f64)> = (0..samples)
        .map(|j| {
            let t = t0 + j as f64 * dt;
            (dt * pat.tau(t), pat.eval(t))
        })
        .collect();
    let shift: Vec<Complex64> = (0..=n)
        .map(|i| Complex64::from_polar(1.0, -2.0 * PI * t0 * i as f64 * dxi))
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(len);
    let ni = n as i64;

    let rows: Vec<Complex64> = (-ni..=ni)
        .into_par_iter()
        .map_init(
            || vec![zero; len],
            |buf, k| {
                let gk = at(&gh, k);
                if gk == zero {
                    return zero;
                }
                let eta = k as f64 * dxi;
                buf.iter_mut().for_each(|b| *b = zero);
                for (b, &(w, p)) in buf.iter_mut().zip(&tnodes) {
                    *b = Complex64::from_polar(w, -2.0 * PI * p * eta);
                }
                fft.process(buf);
                let mut acc = zero;
                for i in -ni..=ni {
                    let m = buf[i.rem_euclid(len as i64) as usize] * at(&shift, i);
                    acc += at(&muh, i + k) * at(&fh, i).conj() * m;
                }
                acc * gk.conj()
            },
        )
        .collect();
    let value = rows.iter().fold(zero, |a, r| a + r) * (dxi * dxi);
    Ok(FrequencyEstimate {
        value,
        truncation_bound,
        cutoff,
        dxi,
        t_step: dt,
    })
}
