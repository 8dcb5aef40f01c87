//! Grid measures on `[0, 1]` and the constructions built on them.
//!
//! A [`GridMeasure`] spreads mass `w_j` uniformly over the `j`-th level-`m`
//! cell, so every quantity here (ball masses, transforms, mollifications)
//! refers to that piecewise-constant density.

mod frostman;
mod kernels;
mod mollify;
mod spectral_gap;

pub use frostman::{ball_constant, frostman, regular_core, RegularCore, FROSTMAN_C};
pub use kernels::{smooth_step, MollifierPhi, WeightVarphi, WindowTau};
pub use mollify::{mollify, mollify_on, MollifyGrid};
pub use spectral_gap::{
    spectral_gap_measure, spectral_gap_measure_with, spectral_gap_scale, ConstructionReport,
    GapParameters,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicInterval, DyadicSet, MAX_RESOLUTION};
use crate::error::{param, Error, Result};
use crate::fourier::expsum::UniformExpSum;
use crate::quad::sinc;

/// Nonnegative mass per level-`m` cell, read as a piecewise-constant density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridMeasureJson", into = "GridMeasureJson")]
pub struct GridMeasure {
    resolution: u32,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridMeasureJson {
    resolution: u32,
    weights: Vec<f64>,
}

impl From<GridMeasure> for GridMeasureJson {
    fn from(m: GridMeasure) -> Self {
        Self {
            resolution: m.resolution,
            weights: m.weights,
        }
    }
}

impl TryFrom<GridMeasureJson> for GridMeasure {
    type Error = Error;

    fn try_from(raw: GridMeasureJson) -> Result<Self> {
        GridMeasure::new(raw.resolution, raw.weights)
    }
}

impl GridMeasure {
    pub fn new(resolution: u32, weights: Vec<f64>) -> Result<Self> {
        if resolution > MAX_RESOLUTION {
            return Err(param("resolution", format!("{resolution} too large")));
        }
        if weights.len() as u64 != 1u64 << resolution {
            return Err(param(
                "weights",
                format!("expected 2^{resolution} entries, got {}", weights.len()),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(param("weights", format!("negative or non-finite weight {w:e}")));
        }
        Ok(Self {
            resolution,
            weights,
        })
    }

    /// Lebesgue measure restricted to `[0, 1]`.
    pub fn lebesgue(resolution: u32) -> Result<Self> {
        let n = 1usize << resolution.min(MAX_RESOLUTION + 1);
        Self::new(resolution, vec![1.0 / n as f64; n])
    }

    /// Normalized Lebesgue measure on the kept cells.
    pub fn uniform_on(set: &DyadicSet) -> Result<Self> {
        if set.is_empty() {
            return Err(param("set", "empty"));
        }
        let mass = 1.0 / set.len() as f64;
        let mut w = vec![0.0; set.cell_count() as usize];
        for k in set.cells() {
            w[k as usize] = mass;
        }
        Self::new(set.resolution(), w)
    }

    pub fn zero(resolution: u32) -> Result<Self> {
        Self::new(resolution, vec![0.0; 1usize << resolution.min(MAX_RESOLUTION + 1)])
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cell_width(&self) -> f64 {
        (-(self.resolution as f64)).exp2()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σw_j² − Σw_j w_{j+1}`: mean of `2 sin²(πlξ)|Σ_j w_j e^{-2πic_jξ}|²` over a period.
    pub(crate) fn tail_coefficient(&self) -> f64 {
        let w = &self.weights;
        let sq: f64 = w.iter().map(|x| x * x).sum();
        let lag: f64 = w.windows(2).map(|p| p[0] * p[1]).sum();
        sq - lag
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Rescaled to total mass one.
    pub fn normalized(&self) -> Result<Self> {
        let mass = self.total_mass();
        if mass <= 0.0 {
            return Err(param("measure", "zero total mass"));
        }
        Ok(self.scaled(1.0 / mass))
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            resolution: self.resolution,
            weights: self.weights.iter().map(|w| a * w).collect(),
        }
    }

    /// Cells carrying positive mass.
    pub fn support(&self) -> DyadicSet {
        let mut set = DyadicSet::empty(self.resolution).expect("resolution checked");
        for (k, _) in self.weights.iter().enumerate().filter(|(_, w)| **w > 0.0) {
            set.insert(k as u64);
        }
        set
    }

    /// Smallest interval containing the support, if any.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        let first = self.weights.iter().position(|w| *w > 0.0)?;
        let last = self.weights.iter().rposition(|w| *w > 0.0)?;
        let l = self.cell_width();
        Some((first as f64 * l, (last + 1) as f64 * l))
    }

    /// Mass of a dyadic interval.
    pub fn mass_of(&self, q: DyadicInterval) -> f64 {
        if q.level > self.resolution {
            let parent = DyadicInterval {
                level: self.resolution,
                index: q.index >> (q.level - self.resolution),
            };
            return self.weights[parent.index as usize] * (-((q.level - self.resolution) as f64)).exp2();
        }
        let r = q.cell_range(self.resolution);
        self.weights[r.start as usize..r.end as usize].iter().sum()
    }

    /// Mass of `[a, b]` with partial cells prorated.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.max(0.0), b.min(1.0));
        if b <= a {
            return 0.0;
        }
        let n = self.weights.len();
        let scale = n as f64;
        let (ua, ub) = (a * scale, b * scale);
        let (ka, kb) = (ua.floor() as usize, (ub.floor() as usize).min(n - 1));
        if ka == kb {
            return self.weights[ka] * (ub - ua);
        }
        let mut total = self.weights[ka] * (ka as f64 + 1.0 - ua);
        total += self.weights[ka + 1..kb].iter().sum::<f64>();
        total + self.weights[kb] * (ub - kb as f64).min(1.0)
    }

    /// `Σ_j w_j e^{-2πi c_j ξ}` over cell centers.
    pub(crate) fn center_sum(&self) -> UniformExpSum {
        let l = self.cell_width();
        UniformExpSum::new(0.5 * l, l, self.weights.clone())
    }

    /// `sinc(πlξ)`, the transform of one normalized cell.
    pub(crate) fn cell_factor(&self, xi: f64) -> f64 {
        sinc(std::f64::consts::PI * self.cell_width() * xi)
    }

    /// Exact transform `μ̂(ξ) = ∫ e^{-2πixξ} dμ(x)`, by direct summation.
    pub fn fourier(&self, xi: f64) -> Complex64 {
        self.cell_factor(xi) * self.center_sum().eval(xi)
    }
}

/// Exact mass of `[x − r, x + r]`.
pub fn ball_mass(mu: &GridMeasure, x: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(param("r", format!("must be positive, got {r}")));
    }
    Ok(mu.interval_mass(x - r, x + r))
}

/// Prefix sums for repeated interval-mass queries.
pub(crate) struct CumulativeMass {
    prefix: Vec<f64>,
    weights: Vec<f64>,
    scale: f64,
}

impl CumulativeMass {
    pub(crate) fn new(mu: &GridMeasure) -> Self {
        let mut prefix = Vec::with_capacity(mu.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for w in &mu.weights {
            acc += w;
            prefix.push(acc);
        }
        Self {
            prefix,
            weights: mu.weights.clone(),
            scale: mu.len() as f64,
        }
    }

    /// Mass of `[0, y]`.
    pub(crate) fn cdf(&self, y: f64) -> f64 {
        let n = self.weights.len();
        let u = (y * self.scale).clamp(0.0, n as f64);
        let k = (u.floor() as usize).min(n - 1);
        self.prefix[k] + self.weights[k] * (u - k as f64)
    }

    pub(crate) fn interval(&self, a: f64, b: f64) -> f64 {
        (self.cdf(b) - self.cdf(a)).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(GridMeasure::new(2, vec![0.25; 3]).is_err());
        assert!(GridMeasure::new(1, vec![0.5, -0.1]).is_err());
        let json = r#"{"resolution":1,"weights":[0.25,0.75]}"#;
        let mu: GridMeasure = serde_json::from_str(json).unwrap();
        assert_eq!(serde_json::to_string(&mu).unwrap(), json);
        assert!(serde_json::from_str::<GridMeasure>(r#"{"resolution":1,"weights":[1]}"#).is_err());
    }

    #[test]
    fn ball_mass_examples() {
        let leb = GridMeasure::lebesgue(6).unwrap();
        assert!((ball_mass(&leb, 0.5, 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!((ball_mass(&leb, 0.3, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((ball_mass(&leb, 0.0, 0.1).unwrap() - 0.1).abs() < 1e-15);
        assert!(ball_mass(&leb, 0.0, 0.0).is_err());
        let cum = CumulativeMass::new(&leb);
        assert!((cum.interval(0.1, 0.35) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn lebesgue_transform_is_sinc() {
        let leb = GridMeasure::lebesgue(8).unwrap();
        for &xi in &[0.0, 0.5, 1.0, 3.3, 100.7] {
            let want = sinc(std::f64::consts::PI * xi).abs();
            assert!((leb.fourier(xi).norm() - want).abs() < 1e-13);
        }
    }

    #[test]
    fn support_hull_and_mass_of() {
        let mu = GridMeasure::new(3, vec![0.0, 0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(mu.support_hull(), Some((0.125, 0.75)));
        assert_eq!(mu.mass_of(DyadicInterval::new(1, 0).unwrap()), 0.5);
        assert_eq!(mu.mass_of(DyadicInterval::new(4, 2).unwrap()), 0.25);
        assert_eq!(mu.support().len(), 2);
    }
}
