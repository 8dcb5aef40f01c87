//! Fourier transforms of grid measures and the quantities built from them:
//! spectra, `s`-energies, negative Sobolev norms and the spectral-gap integral.
//!
//! For a grid measure `μ̂(ξ) = sinc(πlξ)·Σ_j w_j e^{-2πi c_j ξ}` exactly, so the
//! only discretization error in any frequency integral is the `ξ`-quadrature.

mod energy;
pub(crate) mod expsum;
mod gap;
mod sobolev;

pub use energy::{
    exponent_check, rho, s_energy, s_energy_frequency, s_energy_spatial, EnergyEstimate,
    EnergyForm, ExponentCheck,
};
pub use gap::{gap_integral, gap_integral_with_step, GapIntegral};
pub use sobolev::{
    measure_sobolev, mollified_sobolev, sobolev_norm, SobolevEstimate, SobolevIndex,
    SobolevTarget,
};
pub(crate) use sobolev::{even_weights, STEP as SPECTRAL_STEP};

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::measure::GridMeasure;

/// `μ̂` on the symmetric grid `k·step`, `|k| ≤ ⌊max_freq/step⌋`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub step: f64,
    pub max_freq: f64,
    pub frequencies: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl SpectralProfile {
    /// Value at the grid index `k` (may be negative).
    pub fn at(&self, k: i64) -> Option<Complex64> {
        let mid = (self.values.len() / 2) as i64;
        self.values.get((mid + k) as usize).copied()
    }

    /// CSV with columns `xi,re,im,abs`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["xi", "re", "im", "abs"])?;
        for (xi, v) in self.frequencies.iter().zip(&self.values) {
            w.write_record([
                format!("{xi:.17e}"),
                format!("{:.17e}", v.re),
                format!("{:.17e}", v.im),
                format!("{:.17e}", v.norm()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn spectrum(mu: &GridMeasure, max_freq: f64, step: f64) -> Result<SpectralProfile> {
    if !(max_freq > 0.0 && step > 0.0 && max_freq.is_finite()) {
        return Err(param("max_freq/step", "both must be positive and finite"));
    }
    let n = (max_freq / step * (1.0 + 1e-12)).floor() as usize;
    let positive = transform_grid(mu, step, n + 1);
    let mut frequencies = Vec::with_capacity(2 * n + 1);
    let mut values = Vec::with_capacity(2 * n + 1);
    for k in (1..=n).rev() {
        frequencies.push(-(k as f64) * step);
        values.push(positive[k].conj());
    }
    for (k, v) in positive.into_iter().enumerate() {
        frequencies.push(k as f64 * step);
        values.push(v);
    }
    Ok(SpectralProfile {
        step,
        max_freq,
        frequencies,
        values,
    })
}

/// `μ̂(k·step)` for `k = 0..count`.
pub(crate) fn transform_grid(mu: &GridMeasure, step: f64, count: usize) -> Vec<Complex64> {
    let sums = mu.center_sum().grid(step, count);
    sums.into_iter()
        .enumerate()
        .map(|(k, s)| mu.cell_factor(k as f64 * step) * s)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::sinc;

    #[test]
    fn spectrum_basics() {
        let leb = GridMeasure::lebesgue(6).unwrap();
        let p = spectrum(&leb, 10.0, 0.25).unwrap();
        assert_eq!(p.values.len(), 81);
        assert!((p.at(0).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        for (xi, v) in p.frequencies.iter().zip(&p.values) {
            assert!((v.norm() - sinc(std::f64::consts::PI * xi).abs()).abs() < 1e-13);
        }
        assert_eq!(p.at(-3).unwrap(), p.at(3).unwrap().conj());
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 82);
    }
}
