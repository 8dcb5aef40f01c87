//! Empirical probe of the trilinear form
//! `Λ(f, g, h) = ∫∫ f(x+t) g(x+P(t)) h(x) τ_l(t) dt dx` against `H^{-γ}` norms.

use serde::{Deserialize, Serialize};

use super::config::{refine, ConfigNodes, Settle};
use super::QuadraticPattern;
use crate::error::{param, Result};
use crate::fourier::{sobolev_norm, SobolevIndex, SobolevTarget};
use crate::sampled::SampledFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrilinearEstimate {
    pub value: f64,
    pub error_estimate: f64,
    /// `|Λ|/(‖f‖‖g‖‖h‖)` in `H^{-γ}`; zero when the value is zero.
    pub ratio: f64,
    pub norms: [f64; 3],
}

pub fn trilinear_estimate(
    f: &SampledFunction,
    g: &SampledFunction,
    h: &SampledFunction,
    pat: &QuadraticPattern,
    gamma: f64,
) -> Result<TrilinearEstimate> {
    if !(gamma >= 0.0 && gamma < 1.0) {
        return Err(param("gamma", format!("must lie in [0, 1), got {gamma}")));
    }
    let width = 4.0 * f.step().max(g.step()).max(h.step());
    let (_, est) = refine(
        width,
        Settle::for_functions(&[f, g, h]),
        |w| ConfigNodes::for_function(h, pat, w),
        |u, v| [f.eval(u) * g.eval(v)],
    )?;
    let index = SobolevIndex::negative(gamma);
    let norm = |x: &SampledFunction| -> Result<f64> {
        Ok(sobolev_norm(SobolevTarget::Function(x), index)?.norm())
    };
    let norms = [norm(f)?, norm(g)?, norm(h)?];
    let product: f64 = norms.iter().product();
    let ratio = if est.value == 0.0 || product == 0.0 {
        0.0
    } else {
        est.value.abs() / product
    };
    Ok(TrilinearEstimate {
        value: est.value,
        error_estimate: est.error_estimate,
        ratio,
        norms,
    })
}

/// Least-squares fit `log₂ ratio ≈ intercept + κ̂·l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaFit {
    pub kappa: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_kappa(ls: &[u32], ratios: &[f64]) -> Result<KappaFit> {
    if ls.len() != ratios.len() || ls.len() < 2 {
        return Err(param("ls", "need at least two (l, ratio) pairs of equal length"));
    }
    if ratios.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(param("ratios", "must be positive and finite"));
    }
    let n = ls.len() as f64;
    let xs: Vec<f64> = ls.iter().map(|&l| l as f64).collect();
    let ys: Vec<f64> = ratios.iter().map(|r| r.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(param("ls", "need at least two distinct scales"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let kappa = sxy / sxx;
    let intercept = my - kappa * mx;
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - kappa * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(KappaFit {
        kappa,
        intercept,
        r_squared,
    })
}
