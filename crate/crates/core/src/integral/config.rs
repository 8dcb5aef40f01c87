//! Direct quadrature of configuration integrals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::QuadraticPattern;
use crate::error::{param, Error, Result};
use crate::measure::{mollify_on, GridMeasure, MollifyGrid};
use crate::quad::GL4;
use crate::sampled::SampledFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigEstimate {
    pub value: f64,
    /// `|I_h − I_{h/2}|` between the last two refinements.
    pub error_estimate: f64,
    pub outer_nodes: usize,
    pub inner_nodes: usize,
}

/// Weighted outer nodes `x` and inner nodes `(t, P(t), w·τ_l(t))`.
pub(crate) struct ConfigNodes {
    pub outer: Vec<(f64, f64)>,
    pub inner: Vec<(f64, f64, f64)>,
}

impl ConfigNodes {
    /// Outer nodes on μ's cells and inner nodes on the window, with panels no
    /// wider than `width` in `x`, `t` and `P(t)`.
    pub(crate) fn for_measure(mu: &GridMeasure, pat: &QuadraticPattern, width: f64) -> Self {
        let l = mu.cell_width();
        let per_cell = (l / width).ceil().max(1.0) as usize;
        let mut outer = Vec::new();
        for (j, &w) in mu.weights().iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let a = j as f64 * l;
            let density = w / l;
            for (x, wx) in GL4.composite_nodes(a, a + l, per_cell) {
                outer.push((x, density * wx));
            }
        }
        Self {
            outer,
            inner: inner_nodes(pat, width),
        }
    }

    /// Outer nodes weighted by `h(x)dx` on h's grid.
    pub(crate) fn for_function(h: &SampledFunction, pat: &QuadraticPattern, width: f64) -> Self {
        let panels = ((h.end() - h.start()) / width).ceil().max(1.0) as usize;
        let outer = GL4
            .composite_nodes(h.start(), h.end(), panels)
            .into_iter()
            .map(|(x, w)| (x, w * h.eval(x)))
            .filter(|&(_, w)| w != 0.0)
            .collect();
        Self {
            outer,
            inner: inner_nodes(pat, width),
        }
    }

    /// `Σ_x w_x Σ_t w_t·term(x+t, x+P(t))`, summed in a fixed order.
    pub(crate) fn accumulate<const K: usize>(
        &self,
        term: impl Fn(f64, f64) -> [f64; K] + Sync,
    ) -> [f64; K] {
        let partials: Vec<[f64; K]> = self
            .outer
            .par_chunks(64)
            .map(|chunk| {
                let mut acc = [0.0; K];
                for &(x, wx) in chunk {
                    let mut row = [0.0; K];
                    for &(t, pt, wt) in &self.inner {
                        let v = term(x + t, x + pt);
                        for k in 0..K {
                            row[k] += wt * v[k];
                        }
                    }
                    for k in 0..K {
                        acc[k] += wx * row[k];
                    }
                }
                acc
            })
            .collect();
        let mut total = [0.0; K];
        for p in partials {
            for k in 0..K {
                total[k] += p[k];
            }
        }
        total
    }
}

fn inner_nodes(pat: &QuadraticPattern, width: f64) -> Vec<(f64, f64, f64)> {
    let (a, b) = pat.window();
    let stretch = pat.max_slope().max(1.0);
    let panels = (((b - a) * stretch / width).ceil() as usize).max(16);
    GL4.composite_nodes(a, b, panels)
        .into_iter()
        .map(|(t, w)| (t, pat.eval(t), w * pat.tau(t)))
        .filter(|&(_, _, w)| w != 0.0)
        .collect()
}

const ABS_TOL: f64 = 1e-13;

/// Stopping rule of [`refine`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct Settle {
    rel_tol: f64,
    max_halvings: u32,
}

impl Settle {
    /// Smooth integrands (mollified densities, Hermite interpolants).
    pub(crate) const SMOOTH: Self = Self {
        rel_tol: 1e-6,
        max_halvings: 4,
    };
    /// Piecewise-linear interpolants: kinks cap GL4 at second order.
    pub(crate) const LINEAR: Self = Self {
        rel_tol: 1e-4,
        max_halvings: 6,
    };

    pub(crate) fn for_functions(fs: &[&SampledFunction]) -> Self {
        if fs.iter().all(|f| f.slopes().is_some()) {
            Self::SMOOTH
        } else {
            Self::LINEAR
        }
    }
}

/// Runs `eval(width)` with halving widths until consecutive values agree.
/// Returns the last `K`-vector, the error estimate of component 0 and node counts.
pub(crate) fn refine<const K: usize>(
    width: f64,
    settle: Settle,
    build: impl Fn(f64) -> ConfigNodes,
    term: impl Fn(f64, f64) -> [f64; K] + Sync + Copy,
) -> Result<([f64; K], ConfigEstimate)> {
    let mut w = width;
    let nodes = build(w);
    let mut prev = nodes.accumulate(term);
    for _ in 0..settle.max_halvings {
        w *= 0.5;
        let nodes = build(w);
        let next = nodes.accumulate(term);
        let err = (next[0] - prev[0]).abs();
        let scale = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if err <= settle.rel_tol * scale + ABS_TOL {
            let est = ConfigEstimate {
                value: next[0],
                error_estimate: err,
                outer_nodes: nodes.outer.len(),
                inner_nodes: nodes.inner.len(),
            };
            return Ok((next, est));
        }
        prev = next;
    }
    Err(Error::Accuracy(format!(
        "configuration integral did not settle after {} halvings (panel width {w:.3e})",
        settle.max_halvings
    )))
}

/// Step of the grid on which `μ_ε` is tabulated: a power of two at most `ε/8`.
pub(crate) fn mollify_resolution(eps: f64) -> u32 {
    ((8.0 / eps).log2().ceil() as u32).max(4)
}

/// `∫∫ μ_ε(x+t) μ_ε(x+P(t)) τ_l(t) dt dμ(x)`.
pub fn config_integral(mu: &GridMeasure, eps: f64, pat: &QuadraticPattern) -> Result<ConfigEstimate> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(param("eps", format!("must be positive, got {eps}")));
    }
    let grid = MollifyGrid::covering(mollify_resolution(eps), eps);
    let f = mollify_on(mu, eps, grid)?;
    let (_, est) = refine(
        eps / 2.0,
        Settle::SMOOTH,
        |w| ConfigNodes::for_measure(mu, pat, w),
        |u, v| [f.eval(u) * f.eval(v)],
    )?;
    Ok(ConfigEstimate {
        value: est.value.max(0.0),
        ..est
    })
}

/// `∫∫ f(x+t) g(x+P(t)) τ_l(t) dt dμ(x)` for tabulated `f`, `g`.
pub fn config_integral_with(
    f: &SampledFunction,
    g: &SampledFunction,
    mu: &GridMeasure,
    pat: &QuadraticPattern,
) -> Result<ConfigEstimate> {
    let width = 4.0 * f.step().max(g.step());
    let (_, est) = refine(
        width,
        Settle::for_functions(&[f, g]),
        |w| ConfigNodes::for_measure(mu, pat, w),
        |u, v| [f.eval(u) * g.eval(v)],
    )?;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::WindowTau;

    #[test]
    fn lebesgue_lower_bound_and_refinement() {
        let mu = GridMeasure::lebesgue(8).unwrap();
        let pat = QuadraticPattern::new(1.0, 0.0, 2).unwrap();
        let eps = 1.0 / 64.0;
        let est = config_integral(&mu, eps, &pat).unwrap();
        // μ_ε = 1 on [ε, 1−ε] and t² ≤ t, so x ∈ [ε, 1−ε−t] keeps both points there.
        let (a, b) = pat.window();
        let floor = crate::quad::GL32.composite(a, b, 64, |t| {
            WindowTau.scaled(2, t) * (1.0 - 2.0 * eps - t).max(0.0)
        });
        assert!(floor > 0.0 && est.value >= floor);
        assert!(est.error_estimate <= 1e-6 * est.value + 1e-13);
        let coarse = GridMeasure::lebesgue(6).unwrap();
        let other = config_integral(&coarse, eps, &pat).unwrap();
        assert!((other.value / est.value - 1.0).abs() < 0.01);
    }

    #[test]
    fn separated_support_gives_zero() {
        let l = 2;
        let mut w = vec![0.0; 1 << 10];
        let cells = (1usize << 10) >> (l + 2);
        for x in w.iter_mut().take(cells) {
            *x = 1.0 / cells as f64;
        }
        let mu = GridMeasure::new(10, w).unwrap();
        let pat = QuadraticPattern::new(1.0, 0.0, l as u32).unwrap();
        let est = config_integral(&mu, 1.0 / 512.0, &pat).unwrap();
        assert!(est.value < 1e-12, "{est:?}");
    }
}
