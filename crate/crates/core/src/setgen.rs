//! Benchmark sets: self-similar Cantor sets and seeded percolation.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicSet, MAX_RESOLUTION};
use crate::error::{param, Result};

/// Keep `pattern` digits (base `2^branching`) at each of `depth` iterations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CantorSpec {
    pub pattern: Vec<u64>,
    pub branching: u32,
    pub depth: u32,
}

impl CantorSpec {
    /// `[0,1/4] ∪ [3/4,1]` iterated `depth` times.
    pub fn quarter(depth: u32) -> Self {
        Self {
            pattern: vec![0, 3],
            branching: 2,
            depth,
        }
    }

    pub fn resolution(&self) -> u32 {
        self.branching * self.depth
    }

    /// Similarity dimension `log₂(#pattern) / b`.
    pub fn dimension(&self) -> f64 {
        (self.pattern.len() as f64).log2() / self.branching as f64
    }
}

pub fn cantor(spec: &CantorSpec) -> Result<DyadicSet> {
    if spec.pattern.is_empty() {
        return Err(param("pattern", "keep-pattern is empty"));
    }
    if spec.branching == 0 || spec.branching > MAX_RESOLUTION {
        return Err(param("branching", format!("{} out of range", spec.branching)));
    }
    let base = 1u64 << spec.branching;
    let mut digits = spec.pattern.clone();
    digits.sort_unstable();
    digits.dedup();
    if let Some(d) = digits.iter().find(|&&d| d >= base) {
        return Err(param("pattern", format!("digit {d} exceeds 2^{}", spec.branching)));
    }
    let mut set = DyadicSet::empty(spec.resolution())?;
    let mut cells = vec![0u64];
    for _ in 0..spec.depth {
        cells = cells
            .iter()
            .flat_map(|&c| digits.iter().map(move |&d| c * base + d))
            .collect();
    }
    for c in cells {
        set.insert(c);
    }
    Ok(set)
}

/// Keeps each level-`depth` cell independently with probability `p`.
///
/// Cell `k` consumes the `k`-th output `u` of ChaCha8 seeded by
/// `seed_from_u64(seed)` and is kept when `(u >> 11)·2^{-53} < p`.
pub fn percolation(p: f64, depth: u32, seed: u64) -> Result<DyadicSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(param("p", format!("must lie in [0, 1], got {p}")));
    }
    let mut set = DyadicSet::empty(depth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (-53f64).exp2();
    for k in 0..set.cell_count() {
        if ((rng.next_u64() >> 11) as f64) * scale < p {
            set.insert(k);
        }
    }
    Ok(set)
}
