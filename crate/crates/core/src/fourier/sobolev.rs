//! Sobolev norms `‖f‖²_{H^σ} = ∫|f̂(ξ)|²(1+|ξ|²)^{σ/2} dξ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::transform_grid;
use crate::error::{param, Error, Result};
use crate::measure::GridMeasure;
use crate::quad::gregory_weights;
use crate::sampled::SampledFunction;

/// Sobolev exponent `σ` (negative for `H^{-γ}`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex {
    pub sigma: f64,
}

impl SobolevIndex {
    /// `H^{-γ}`.
    pub fn negative(gamma: f64) -> Self {
        Self { sigma: -gamma }
    }

    fn weight(&self, xi: f64) -> f64 {
        (1.0 + xi * xi).powf(0.5 * self.sigma)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum SobolevTarget<'a> {
    Measure(&'a GridMeasure),
    Function(&'a SampledFunction),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevEstimate {
    /// Truncated integral plus `tail`.
    pub norm_squared: f64,
    /// Bound (functions) or estimate (measures) of the part beyond `cutoff`.
    pub tail: f64,
    pub cutoff: f64,
}

impl SobolevEstimate {
    pub fn norm(&self) -> f64 {
        self.norm_squared.max(0.0).sqrt()
    }
}

pub fn sobolev_norm(target: SobolevTarget<'_>, index: SobolevIndex) -> Result<SobolevEstimate> {
    match target {
        SobolevTarget::Measure(mu) => measure_sobolev(mu, index),
        SobolevTarget::Function(f) => function_sobolev(f, index),
    }
}

pub(crate) const STEP: f64 = 1.0 / 16.0;
const MAX_GRID: usize = 1 << 23;

/// Weights `W_k` with `2∫₀^{count·step} g ≈ step·Σ W_k g(k·step)` for an even,
/// smooth `g`: plain trapezoid at the origin, Gregory corrections at the far end.
pub(crate) fn even_weights(count: usize) -> Vec<f64> {
    let mut w = gregory_weights(count);
    w[1] = 1.0;
    w[2] = 1.0;
    w[0] = 0.5;
    w.iter_mut().for_each(|x| *x *= 2.0);
    w
}

pub(crate) fn even_integral(values: impl Iterator<Item = f64>, count: usize, step: f64) -> f64 {
    let w = even_weights(count);
    step * values.zip(&w).map(|(v, w)| v * w).sum::<f64>()
}

pub fn measure_sobolev(mu: &GridMeasure, index: SobolevIndex) -> Result<SobolevEstimate> {
    if index.sigma > 0.0 {
        return Err(Error::Divergence(format!(
            "H^{} norm of a measure with piecewise-constant density: |μ̂|² decays only like |ξ|^-2",
            index.sigma
        )));
    }
    let l = mu.cell_width();
    let count = ((16.0 / l / STEP).round() as usize).min(MAX_GRID);
    let cutoff = count as f64 * STEP;
    let values = transform_grid(mu, STEP, count + 1);
    let body = even_integral(
        values
            .iter()
            .enumerate()
            .map(|(k, v)| v.norm_sqr() * index.weight(k as f64 * STEP)),
        count,
        STEP,
    );
    let sq = mu.tail_coefficient();
    let tail = sq / (PI * PI * l * l) * cutoff.powf(index.sigma - 1.0) / (1.0 - index.sigma);
    Ok(SobolevEstimate {
        norm_squared: body + tail,
        tail,
        cutoff,
    })
}

/// `∫|μ̂(ξ)|² m(ξ)² (1+|ξ|²)^{σ/2} dξ` for an even multiplier `m` vanishing beyond `cutoff`.
pub fn mollified_sobolev(
    mu: &GridMeasure,
    multiplier: impl Fn(f64) -> f64,
    index: SobolevIndex,
    cutoff: f64,
) -> Result<SobolevEstimate> {
    if !(cutoff > 0.0) {
        return Err(param("cutoff", "must be positive"));
    }
    let count = ((cutoff / STEP).ceil() as usize).clamp(8, MAX_GRID);
    let values = transform_grid(mu, STEP, count + 1);
    let body = even_integral(
        values.iter().enumerate().map(|(k, v)| {
            let xi = k as f64 * STEP;
            v.norm_sqr() * multiplier(xi).powi(2) * index.weight(xi)
        }),
        count,
        STEP,
    );
    Ok(SobolevEstimate {
        norm_squared: body,
        tail: 0.0,
        cutoff: count as f64 * STEP,
    })
}

fn function_sobolev(f: &SampledFunction, index: SobolevIndex) -> Result<SobolevEstimate> {
    if index.sigma >= 3.0 {
        return Err(Error::Divergence(format!(
            "H^{} needs more smoothness than a cubic interpolant's |ξ|^-4 decay guarantees",
            index.sigma
        )));
    }
    let h = f.step();
    let support = (f.end() - f.start()).max(1.0);
    let periods = ((16.0 * support / h).ceil() as usize).next_power_of_two();
    let dxi = 1.0 / (h * periods as f64);
    let cutoff = 8.0 / h;
    let count = ((cutoff / dxi).round() as usize).min(MAX_GRID);
    let cutoff = count as f64 * dxi;
    let values = f.fourier_grid(dxi, count + 1);
    let body = even_integral(
        values
            .iter()
            .enumerate()
            .map(|(k, v)| v.norm_sqr() * index.weight(k as f64 * dxi)),
        count,
        dxi,
    );
    // |f̂(ξ)| ≤ V/(2πξ)² beyond the cutoff.
    let v = f.slope_variation() / (4.0 * PI * PI);
    let c = v * v;
    let growth = 2f64.powf(0.5 * index.sigma.max(0.0));
    let e = index.sigma.max(0.0);
    let tail = 2.0 * c * growth * cutoff.powf(e - 3.0) / (3.0 - e);
    Ok(SobolevEstimate {
        norm_squared: body + tail,
        tail,
        cutoff,
    })
}
