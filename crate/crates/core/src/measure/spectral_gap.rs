//! Probability measures with a spectral gap, built child by child at level `T`.

use serde::{Deserialize, Serialize};

use super::frostman::{capped_tree, FROSTMAN_C};
use super::kernels::WeightVarphi;
use super::GridMeasure;
use crate::dyadic::{content_upper, content_within, DyadicInterval, DyadicSet, CONTENT_SLACK};
use crate::error::{param, Error, Result};

/// Gap parameters `(A, B)` with optional overrides of the derived `(T, δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapParameters {
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub t_override: Option<u32>,
    #[serde(default)]
    pub delta_override: Option<f64>,
}

impl GapParameters {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 1.0 && a.is_finite()) {
            return Err(param("A", format!("must exceed 1, got {a}")));
        }
        if !(b > a && b.is_finite()) {
            return Err(param("B", format!("must exceed A = {a}, got {b}")));
        }
        if a.powf(0.2) >= b * b {
            return Err(param("B", "annulus A^{1/5} ≤ |ξ| ≤ B² is empty"));
        }
        Ok(Self {
            a,
            b,
            t_override: None,
            delta_override: None,
        })
    }

    pub fn with_scale(mut self, t: u32, delta: Option<f64>) -> Self {
        self.t_override = Some(t);
        self.delta_override = delta;
        self
    }

    /// Effective `(T, δ)`.
    pub fn scale(&self) -> (u32, f64) {
        let t = self
            .t_override
            .unwrap_or_else(|| spectral_gap_scale(self.a, self.b).0);
        let delta = self
            .delta_override
            .unwrap_or_else(|| (-3.0 * t as f64 - 3.0).exp2());
        (t, delta)
    }
}

/// Smallest `T ≥ 1` with `2^{-T+3}B^4 ≤ A^{-3}/2`, and `δ = 2^{-3T-3}`.
pub fn spectral_gap_scale(a: f64, b: f64) -> (u32, f64) {
    let target = 0.5 * a.powi(-3);
    let mut t = 1u32;
    while (3.0 - t as f64).exp2() * b.powi(4) > target {
        t += 1;
    }
    (t, (-3.0 * t as f64 - 3.0).exp2())
}

/// Parameters and diagnostics of a spectral-gap construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    #[serde(rename = "T")]
    pub t: u32,
    pub delta: f64,
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    /// `H^β_∞(E)`.
    pub content: f64,
    /// `β` above which `1−δ > 2^{-Tβ}(2^T − 1/2)`, forcing the per-child bound.
    pub beta_threshold: f64,
    /// Smallest `H^β_∞(E∩Q)/l(Q)^β` over level-`T` children.
    pub min_child_ratio: f64,
    /// `w(Q) = ∫_Q ϕ` per level-`T` child.
    pub child_masses: Vec<f64>,
    /// Ball constant guaranteed by the construction, `16·C`.
    pub frostman_constant: f64,
    #[serde(default)]
    pub gap_integral: Option<f64>,
}

/// Spectral-gap measure for `(A, B)` with the derived `(T, δ)`.
pub fn spectral_gap_measure(
    set: &DyadicSet,
    a: f64,
    b: f64,
    beta: f64,
) -> Result<(GridMeasure, ConstructionReport)> {
    spectral_gap_measure_with(set, &GapParameters::new(a, b)?, beta)
}

pub fn spectral_gap_measure_with(
    set: &DyadicSet,
    params: &GapParameters,
    beta: f64,
) -> Result<(GridMeasure, ConstructionReport)> {
    let (t, delta) = params.scale();
    if !(delta > 0.0 && delta < 1.0) {
        return Err(param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let m = set.resolution();
    if m < t {
        return Err(Error::Resolution { have: m, need: t });
    }
    let content = content_upper(set, beta)?;
    if content < (1.0 - delta) * (1.0 - CONTENT_SLACK) {
        return Err(Error::Precondition {
            condition: "H^β_∞(E) ≥ 1 − δ",
            detail: format!(
                "content {content:.6e} at β = {beta} is short of 1 − δ = {:.6e} by {:.3e}",
                1.0 - delta,
                (1.0 - delta) - content
            ),
        });
    }
    let beta_threshold = ((t as f64).exp2() - 0.5).log2() / t as f64
        - (1.0 - delta).log2() / t as f64;

    let children = 1u64 << t;
    let child_cost = (-(t as f64) * beta).exp2();
    let mut min_ratio = f64::INFINITY;
    for index in 0..children {
        let q = DyadicInterval { level: t, index };
        let ratio = content_within(set, q, beta)? / child_cost;
        min_ratio = min_ratio.min(ratio);
        if ratio < 0.5 * (1.0 - CONTENT_SLACK) {
            return Err(Error::Precondition {
                condition: "H^β_∞(E∩Q) ≥ l(Q)^β/2 for every level-T child Q",
                detail: format!(
                    "child {index} of level {t} has ratio {ratio:.4}; \
                     the per-child bound is only forced for β > {beta_threshold:.6}"
                ),
            });
        }
    }

    let base = capped_tree(set, beta, t)?;
    let varphi = WeightVarphi::standard();
    let width = 1usize << (m - t);
    let mut weights = base.weights().to_vec();
    let mut child_masses = Vec::with_capacity(children as usize);
    for (index, chunk) in weights.chunks_mut(width).enumerate() {
        let q = DyadicInterval {
            level: t,
            index: index as u64,
        };
        let w_q = varphi.mass(q.start(), q.end());
        let own: f64 = chunk.iter().sum();
        let f = w_q / own;
        for v in chunk.iter_mut() {
            *v *= f;
        }
        child_masses.push(w_q);
    }
    let mu = GridMeasure::new(m, weights)?;
    let report = ConstructionReport {
        t,
        delta,
        a: params.a,
        b: params.b,
        beta,
        content,
        beta_threshold,
        min_child_ratio: min_ratio,
        child_masses,
        frostman_constant: 16.0 * FROSTMAN_C,
        gap_integral: None,
    };
    Ok((mu, report))
}
