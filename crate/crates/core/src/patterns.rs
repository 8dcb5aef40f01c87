//! Brute-force pattern search, configuration sets `Δ_q(E)` and translation defects.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicSet;
use crate::error::{param, Result};
use crate::integral::QuadraticPattern;

/// `{x, x+t, x+P(t)} ⊂ E`, with membership in closed cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternWitness {
    pub x: f64,
    pub t: f64,
    pub points: [f64; 3],
    pub distinct: bool,
}

impl PatternWitness {
    fn new(pat: &QuadraticPattern, x: f64, t: f64) -> Self {
        let points = [x, x + t, x + pat.eval(t)];
        let distinct = points[0] != points[1] && points[0] != points[2] && points[1] != points[2];
        Self {
            x,
            t,
            points,
            distinct,
        }
    }

    /// Direct membership check of all three points and `t ≠ 0`.
    pub fn verify(&self, set: &DyadicSet) -> bool {
        self.t != 0.0 && self.points.iter().all(|&p| set.contains_point(p))
    }
}

/// Scans `x` over the grid points `k·2^{-m}` of `E` and `t` over the multiples
/// of `2^{-m}` in the window, returning the first witness in `(x, t)` order.
/// `None` only means no witness at grid scale.
pub fn search_pattern(
    set: &DyadicSet,
    pat: &QuadraticPattern,
    require_distinct: bool,
) -> Option<PatternWitness> {
    let n = set.cell_count();
    let h = set.cell_width();
    let (lo, hi) = pat.window();
    let first = ((lo / h).ceil() as u64).max(1);
    let last = (hi / h).floor() as u64;
    if first > last {
        return None;
    }
    (0..=n)
        .into_par_iter()
        .filter(|&k| set.contains_point(k as f64 * h))
        .find_map_first(|k| {
            let x = k as f64 * h;
            (first..=last).find_map(|j| {
                let t = j as f64 * h;
                let w = PatternWitness::new(pat, x, t);
                (w.verify(set) && (w.distinct || !require_distinct)).then_some(w)
            })
        })
}

/// Whether `z = y` is admitted when enumerating `Δ_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleMode {
    /// `x ≠ y`, `x ≠ z`.
    #[default]
    AllowCoincident,
    /// Additionally `y ≠ z`.
    Distinct,
}

/// `((z−x) − q(y−x))/(y−x)²`.
pub fn configuration_value(x: f64, y: f64, z: f64, q: f64) -> f64 {
    let d = y - x;
    ((z - x) - q * d) / (d * d)
}

pub const DEDUP_TOL: f64 = 1e-12;

/// Sorted values of `Δ_q(E)` over ordered triples, merged within [`DEDUP_TOL`].
pub fn configuration_set(points: &[f64], q: f64, mode: TripleMode) -> Result<Vec<f64>> {
    if points.iter().any(|p| !p.is_finite()) || !q.is_finite() {
        return Err(param("points", "values must be finite"));
    }
    let mut pts = points.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Err(param("points", "need at least two distinct points"));
    }
    let mut values = Vec::with_capacity(pts.len().pow(3));
    for &x in &pts {
        for &y in &pts {
            if y == x {
                continue;
            }
            for &z in &pts {
                if z == x || (mode == TripleMode::Distinct && z == y) {
                    continue;
                }
                values.push(configuration_value(x, y, z, q));
            }
        }
    }
    values.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for v in values {
        match out.last() {
            Some(&last) if v - last <= DEDUP_TOL => {}
            _ => out.push(v),
        }
    }
    Ok(out)
}

/// One value per line under a `value` header.
pub fn write_configuration_csv<W: Write>(values: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["value"])?;
    for v in values {
        w.write_record([format!("{v:e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Grid measure of `E \ ∩_j (E − f_j(t))`: cells of `E` whose center, moved
/// by some `f_j(t)`, leaves `E`.
pub fn translation_defect(set: &DyadicSet, t: f64, shifts: &[&dyn Fn(f64) -> f64]) -> f64 {
    let h = set.cell_width();
    let moves: Vec<f64> = shifts.iter().map(|f| f(t)).collect();
    let lost = set
        .cells()
        .filter(|&k| {
            let c = (k as f64 + 0.5) * h;
            moves.iter().any(|&s| !set.contains_point(c + s))
        })
        .count();
    lost as f64 * h
}
