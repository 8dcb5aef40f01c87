//! Constructive Frostman measures and ball-mass scans.

use serde::{Deserialize, Serialize};

use super::{CumulativeMass, GridMeasure};
use crate::dyadic::{DyadicInterval, DyadicSet, CONTENT_SLACK};
use crate::error::{param, Result};

/// Ball constant of the capped-tree construction: `ν(B(x,r)) ≤ 4·r^β`.
pub const FROSTMAN_C: f64 = 4.0;

/// Capped-tree measure: every kept leaf starts with `l^β`, then each node
/// whose subtree mass exceeds `l(node)^β` is scaled down to exactly that.
///
/// The total mass equals the dyadic content of `set`.
pub fn frostman(set: &DyadicSet, beta: f64) -> Result<GridMeasure> {
    capped_tree(set, beta, 0)
}

/// Capped tree with caps applied only at levels `≥ min_level`.
pub(crate) fn capped_tree(set: &DyadicSet, beta: f64, min_level: u32) -> Result<GridMeasure> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(param("beta", format!("must lie in (0, 1], got {beta}")));
    }
    if set.is_empty() {
        return Err(param("set", "a Frostman measure needs a nonempty set"));
    }
    let m = set.resolution();
    let costs: Vec<f64> = (0..=m).map(|j| (-(j as f64) * beta).exp2()).collect();
    let mut weights = vec![0.0; set.cell_count() as usize];
    build(set, DyadicInterval::unit(), &costs, min_level.min(m), &mut weights);
    GridMeasure::new(m, weights)
}

fn build(set: &DyadicSet, q: DyadicInterval, costs: &[f64], min_level: u32, w: &mut [f64]) -> f64 {
    let m = set.resolution();
    let r = q.cell_range(m);
    let (lo, hi) = (r.start as usize, r.end as usize);
    let kept = set.count_range(r.start, r.end);
    if kept == 0 {
        return 0.0;
    }
    let own = costs[q.level as usize];
    if q.level == m {
        w[lo] = own;
        return own;
    }
    if kept as usize == hi - lo && q.level >= min_level {
        let each = own / (hi - lo) as f64;
        w[lo..hi].fill(each);
        return own;
    }
    let [a, b] = q.children();
    let total = build(set, a, costs, min_level, w) + build(set, b, costs, min_level, w);
    if q.level >= min_level && total >= own * (1.0 - CONTENT_SLACK) {
        let f = own / total;
        for v in &mut w[lo..hi] {
            *v *= f;
        }
        own
    } else {
        total
    }
}

/// Largest `ν(B(x, r))/r^β` over `x` on the half-cell grid and dyadic `r ∈ [2^{-m}, 1]`.
pub fn ball_constant(mu: &GridMeasure, beta: f64) -> f64 {
    let cum = CumulativeMass::new(mu);
    let m = mu.resolution();
    let half = 0.5 * mu.cell_width();
    let mut worst: f64 = 0.0;
    for j in 0..=2 * mu.len() {
        let x = j as f64 * half;
        for k in 0..=m {
            let r = (-(k as f64)).exp2();
            worst = worst.max(cum.interval(x - r, x + r) / r.powf(beta));
        }
    }
    worst
}

/// Cells whose center `x` has a dyadic radius `r ∈ [2^{-m}, 1]` with `μ(B(x,r)) ≤ c·r`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularCore {
    pub c: f64,
    /// `μ(D_c)`.
    pub core_mass: f64,
    pub total_mass: f64,
    /// Per-cell membership in `D_c` (cells without mass are never members).
    pub in_core: Vec<bool>,
}

impl RegularCore {
    /// `μ` restricted to the complement of `D_c`.
    pub fn complement_measure(&self, mu: &GridMeasure) -> Result<GridMeasure> {
        let w = mu
            .weights()
            .iter()
            .zip(&self.in_core)
            .map(|(&w, &inside)| if inside { 0.0 } else { w })
            .collect();
        GridMeasure::new(mu.resolution(), w)
    }
}

pub fn regular_core(mu: &GridMeasure, c: f64) -> Result<RegularCore> {
    if !(c > 0.0) {
        return Err(param("c", format!("must be positive, got {c}")));
    }
    let cum = CumulativeMass::new(mu);
    let m = mu.resolution();
    let l = mu.cell_width();
    let mut in_core = vec![false; mu.len()];
    let mut core_mass = 0.0;
    for (j, &w) in mu.weights().iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let x = (j as f64 + 0.5) * l;
        let thin = (0..=m).any(|k| {
            let r = (-(k as f64)).exp2();
            cum.interval(x - r, x + r) <= c * r
        });
        if thin {
            in_core[j] = true;
            core_mass += w;
        }
    }
    Ok(RegularCore {
        c,
        core_mass,
        total_mass: mu.total_mass(),
        in_core,
    })
}
