//! The spectral-gap integral `∫_{A^{1/5} ≤ |ξ| ≤ B²} |μ̂(ξ)| dξ`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::measure::GridMeasure;

/// Upper limit on midpoint nodes per half-annulus.
const NODE_CAP: usize = 1 << 25;
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapIntegral {
    pub value: f64,
    /// Midpoint-rule bound `2·L·h·(b−a)/4` from the Lipschitz constant `L` of `|μ̂|`.
    pub error_bound: f64,
    pub lipschitz: f64,
    pub step: f64,
    pub nodes_per_side: usize,
    pub lower: f64,
    pub upper: f64,
    /// `A^{-3}`.
    pub threshold: f64,
}

impl GapIntegral {
    /// Whether `value ≤ A^{-3}`.
    pub fn holds(&self) -> bool {
        self.value <= self.threshold
    }
}

fn annulus(a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0) {
        return Err(param("A/B", "must be positive"));
    }
    let (lo, hi) = (a.powf(0.2), b * b);
    if lo >= hi {
        return Err(param("B", format!("A^(1/5) = {lo} is not below B² = {hi}")));
    }
    Ok((lo, hi))
}

/// `2π·mass·R`, with `R` the half-width of the support hull.
fn lipschitz(mu: &GridMeasure) -> f64 {
    match mu.support_hull() {
        Some((lo, hi)) => 2.0 * PI * mu.total_mass() * 0.5 * (hi - lo),
        None => 0.0,
    }
}

/// Gap integral with the step chosen so the error bound is below 1% of `A^{-3}`.
pub fn gap_integral(mu: &GridMeasure, a: f64, b: f64) -> Result<GapIntegral> {
    let (lo, hi) = annulus(a, b)?;
    let len = hi - lo;
    let tol = 0.01 * a.powi(-3);
    let l = lipschitz(mu);
    let nodes = ((l * len * len / (2.0 * tol)).ceil() as usize).max(16);
    if nodes > NODE_CAP {
        return Err(Error::Accuracy(format!(
            "certifying the gap integral to {tol:.3e} needs {nodes} nodes per side (cap {NODE_CAP})"
        )));
    }
    evaluate(mu, a, lo, hi, nodes)
}

/// Gap integral on a fixed midpoint step (rounded so it divides the annulus).
pub fn gap_integral_with_step(mu: &GridMeasure, a: f64, b: f64, step: f64) -> Result<GapIntegral> {
    let (lo, hi) = annulus(a, b)?;
    if !(step > 0.0) {
        return Err(param("step", "must be positive"));
    }
    let nodes = ((hi - lo) / step).ceil() as usize;
    if nodes > NODE_CAP {
        return Err(Error::Accuracy(format!("{nodes} nodes exceed the cap {NODE_CAP}")));
    }
    evaluate(mu, a, lo, hi, nodes.max(1))
}

fn evaluate(mu: &GridMeasure, a: f64, lo: f64, hi: f64, nodes: usize) -> Result<GapIntegral> {
    let h = (hi - lo) / nodes as f64;
    let sum = mu.center_sum();
    let taylor = sum.taylor(hi);
    let use_taylor = taylor.block_len() >= 8;
    let magnitude = |xi: f64| {
        let s = if use_taylor { taylor.eval(xi) } else { sum.eval(xi) };
        (mu.cell_factor(xi) * s).norm()
    };
    let partial: Vec<f64> = (0..nodes.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(nodes);
            (c * CHUNK..end)
                .map(|k| magnitude(lo + (k as f64 + 0.5) * h))
                .sum::<f64>()
        })
        .collect();
    let value = 2.0 * h * partial.iter().sum::<f64>();
    let l = lipschitz(mu);
    Ok(GapIntegral {
        value,
        error_bound: 2.0 * l * h * (hi - lo) / 4.0,
        lipschitz: l,
        step: h,
        nodes_per_side: nodes,
        lower: lo,
        upper: hi,
        threshold: a.powi(-3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_halving_within_bound() {
        let leb = GridMeasure::lebesgue(6).unwrap();
        let coarse = gap_integral_with_step(&leb, 2.0, 2.0, 1e-3).unwrap();
        let fine = gap_integral_with_step(&leb, 2.0, 2.0, 5e-4).unwrap();
        assert!((coarse.value - fine.value).abs() <= coarse.error_bound + fine.error_bound);
        assert!(gap_integral(&leb, 2.0, 2.0).unwrap().error_bound <= 0.01 / 8.0);
    }

    #[test]
    fn rejects_empty_annulus() {
        let leb = GridMeasure::lebesgue(2).unwrap();
        assert!(gap_integral(&leb, 1e6, 1.0).is_err());
    }
}
