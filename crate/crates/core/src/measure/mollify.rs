//! Mollification `μ_ε = μ ∗ φ_ε` of grid measures.

use rayon::prelude::*;

use super::kernels::MollifierPhi;
use super::GridMeasure;
use crate::error::{param, Result};
use crate::sampled::SampledFunction;

/// Output grid `start + k·step`, `k = 0..=intervals`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifyGrid {
    pub start: f64,
    pub step: f64,
    pub intervals: usize,
}

impl MollifyGrid {
    /// Level-`resolution` grid extended past `[0, 1]` by at least `pad` on each side.
    pub fn covering(resolution: u32, pad: f64) -> Self {
        let n = 1usize << resolution;
        let step = 1.0 / n as f64;
        let k = (pad / step).ceil() as usize + 1;
        Self {
            start: -(k as f64) * step,
            step,
            intervals: n + 2 * k,
        }
    }
}

/// Density of `μ ∗ φ_ε` with exact slopes on a grid extending `ε` past `[0, 1]`.
pub fn mollify(mu: &GridMeasure, eps: f64, out_resolution: u32) -> Result<SampledFunction> {
    mollify_on(mu, eps, MollifyGrid::covering(out_resolution, eps))
}

/// `μ_ε(x) = Σ_j (w_j/l)·[Φ((x−a_j)/ε) − Φ((x−b_j)/ε)]` on `grid`.
pub fn mollify_on(mu: &GridMeasure, eps: f64, grid: MollifyGrid) -> Result<SampledFunction> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(param("eps", format!("must be positive, got {eps}")));
    }
    let phi = MollifierPhi::standard();
    let n = mu.len();
    let l = mu.cell_width();
    let density: Vec<f64> = mu.weights().iter().map(|w| w / l).collect();
    let node = |k: usize| grid.start + grid.step * k as f64;
    let pairs: Vec<(f64, f64)> = (0..=grid.intervals)
        .into_par_iter()
        .map(|k| {
            let x = node(k);
            let lo = ((x - eps) / l).floor().max(0.0) as usize;
            let hi = (((x + eps) / l).ceil().max(0.0) as usize).min(n);
            if lo >= hi {
                return (0.0, 0.0);
            }
            let mut value = 0.0;
            let mut slope = 0.0;
            let mut cdf_left = phi.cdf((x - lo as f64 * l) / eps);
            let mut pdf_left = phi.eval((x - lo as f64 * l) / eps);
            for (j, &d) in density.iter().enumerate().take(hi).skip(lo) {
                let u = (x - (j + 1) as f64 * l) / eps;
                let (cdf_right, pdf_right) = (phi.cdf(u), phi.eval(u));
                if d != 0.0 {
                    value += d * (cdf_left - cdf_right);
                    slope += d * (pdf_left - pdf_right);
                }
                cdf_left = cdf_right;
                pdf_left = pdf_right;
            }
            (value.max(0.0), slope / eps)
        })
        .collect();
    let (values, slopes): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    SampledFunction::new(grid.start, grid.step, values)?.with_slopes(slopes)
}
