//! Riesz `s`-energies `I_s(μ) = ∫∫|x−y|^{-s} dμ dμ` in spatial and frequency form.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::transform_grid;
use crate::error::{param, Result};
use crate::measure::GridMeasure;
use crate::quad::{gregory_weights, GL16};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyForm {
    Spatial,
    Frequency,
}

/// A frequency-form energy with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub value: f64,
    /// Analytic estimate of the part beyond `cutoff`, already included in `value`.
    pub tail: f64,
    pub cutoff: f64,
    /// Set when the tail exceeds 1% of the value.
    pub tail_warning: bool,
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(param("s", format!("must lie in (0, 1), got {s}")));
    }
    Ok(())
}

/// `ρ_s = π^{s−1/2} Γ((1−s)/2) / Γ(s/2)`, written as
/// `π^{s−1/2} Γ((3−s)/2) / Γ(1+s/2) · s/(1−s)` so both ends stay finite.
pub fn rho(s: f64) -> f64 {
    PI.powf(s - 0.5) * gamma(1.5 - 0.5 * s) / gamma(1.0 + 0.5 * s) * s / (1.0 - s)
}

pub fn s_energy(mu: &GridMeasure, s: f64, form: EnergyForm) -> Result<f64> {
    match form {
        EnergyForm::Spatial => s_energy_spatial(mu, s),
        EnergyForm::Frequency => s_energy_frequency(mu, s).map(|e| e.value),
    }
}

/// `∫_0^1∫_0^1 |u − v + n|^{-s} du dv`.
fn cell_kernel(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    if n >= 64 {
        let a = s * (s + 1.0) / 12.0;
        let b = s * (s + 1.0) * (s + 2.0) * (s + 3.0) / 360.0;
        let r = nf.powi(-2);
        return nf.powf(-s) * (1.0 + r * (a + r * b));
    }
    let c = 1.0 / ((1.0 - s) * (2.0 - s));
    let f = |z: f64| c * z.abs().powf(2.0 - s);
    f(nf + 1.0) - 2.0 * f(nf) + f(nf - 1.0)
}

/// `a_n = Σ_j w_j w_{j+n}` for `n = 0..N`.
fn autocorrelation(w: &[f64]) -> Vec<f64> {
    let n = w.len();
    if n <= 256 {
        return (0..n)
            .map(|d| (0..n - d).map(|j| w[j] * w[j + d]).sum())
            .collect();
    }
    let size = 2 * n;
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = w
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(size)
        .collect();
    planner.plan_fft_forward(size).process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    buf.iter().take(n).map(|v| v.re / size as f64).collect()
}

/// Exact energy of the piecewise-constant density, from closed-form cell-pair integrals.
pub fn s_energy_spatial(mu: &GridMeasure, s: f64) -> Result<f64> {
    check_s(s)?;
    let ac = autocorrelation(mu.weights());
    let mut total = cell_kernel(0, s) * ac[0];
    for (n, a) in ac.iter().enumerate().skip(1) {
        total += 2.0 * cell_kernel(n, s) * a;
    }
    Ok(mu.cell_width().powf(-s) * total)
}

const FREQ_STEP: f64 = 1.0 / 16.0;
const MAX_GRID: usize = 1 << 23;

/// `ρ_s ∫|μ̂(ξ)|²|ξ|^{s−1} dξ`, with the analytic tail beyond `16/l`.
pub fn s_energy_frequency(mu: &GridMeasure, s: f64) -> Result<EnergyEstimate> {
    check_s(s)?;
    let raw = weighted_power_integral(mu, s - 1.0)?;
    Ok(EnergyEstimate {
        value: rho(s) * raw.value,
        tail: rho(s) * raw.tail,
        cutoff: raw.cutoff,
        tail_warning: raw.tail > 0.01 * raw.value,
    })
}

/// `∫|μ̂(ξ)|²|ξ|^e dξ` over ℝ for `−1 < e < 1`.
pub(crate) fn weighted_power_integral(mu: &GridMeasure, e: f64) -> Result<EnergyEstimate> {
    if !(e > -1.0 && e < 1.0) {
        return Err(param("exponent", format!("must lie in (-1, 1), got {e}")));
    }
    let l = mu.cell_width();
    let sum = mu.center_sum();
    let power = |xi: f64| (mu.cell_factor(xi) * sum.eval(xi)).norm_sqr();
    // Near the origin substitute u = ξ^{e+1}.
    let p = e + 1.0;
    let near = GL16.composite(0.0, 1.0, 8, |u| power(u.powf(1.0 / p))) / p;

    let mut cutoff = 16.0 / l;
    let mut count = (cutoff / FREQ_STEP).round() as usize;
    if count > MAX_GRID {
        count = MAX_GRID;
        cutoff = count as f64 * FREQ_STEP;
    }
    let first = (1.0 / FREQ_STEP).round() as usize;
    let values = transform_grid(mu, FREQ_STEP, count + 1);
    let weights = gregory_weights(count - first);
    let far: f64 = values[first..]
        .iter()
        .zip(&weights)
        .enumerate()
        .map(|(i, (v, w))| {
            let xi = (first + i) as f64 * FREQ_STEP;
            w * v.norm_sqr() * xi.powf(e)
        })
        .sum::<f64>()
        * FREQ_STEP;
    let sq = mu.tail_coefficient();
    // Beyond the cutoff, sinc² averages to 1/(2π²l²ξ²) and |Σ|² to Σw².
    let tail = sq / (PI * PI * l * l) * cutoff.powf(e - 1.0) / (1.0 - e);
    let value = 2.0 * (near + far) + tail;
    Ok(EnergyEstimate {
        value,
        tail,
        cutoff,
        tail_warning: tail > 0.01 * value,
    })
}

/// Frequency form of the Lebesgue energy under both candidate weights, against
/// the closed form `2/((1−s)(2−s))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentCheck {
    pub s: f64,
    pub closed_form: f64,
    /// With weight `|ξ|^{s−1}`.
    pub operative: f64,
    /// With weight `|ξ|^{−s/2}`.
    pub printed: f64,
}

impl ExponentCheck {
    pub fn operative_error(&self) -> f64 {
        (self.operative / self.closed_form - 1.0).abs()
    }

    pub fn printed_error(&self) -> f64 {
        (self.printed / self.closed_form - 1.0).abs()
    }
}

pub fn exponent_check(s: f64) -> Result<ExponentCheck> {
    check_s(s)?;
    let leb = GridMeasure::lebesgue(8)?;
    Ok(ExponentCheck {
        s,
        closed_form: 2.0 / ((1.0 - s) * (2.0 - s)),
        operative: rho(s) * weighted_power_integral(&leb, s - 1.0)?.value,
        printed: rho(s) * weighted_power_integral(&leb, -0.5 * s)?.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_values() {
        assert!((rho(0.5) - 1.0).abs() < 1e-14);
        let direct = |s: f64| PI.powf(s - 0.5) * gamma(0.5 * (1.0 - s)) / gamma(0.5 * s);
        for s in [0.1, 0.3, 0.7, 0.9] {
            assert!((rho(s) / direct(s) - 1.0).abs() < 1e-12);
        }
        assert!(rho(1e-9) > 0.0 && rho(1e-9) < 1e-8);
    }

    #[test]
    fn cell_kernel_series_matches_difference() {
        let s: f64 = 0.4;
        let c = 1.0 / ((1.0 - s) * (2.0 - s));
        let f = |z: f64| c * z.powf(2.0 - s);
        let n = 64.0;
        let diff = f(n + 1.0) - 2.0 * f(n) + f(n - 1.0);
        assert!((cell_kernel(64, s) / diff - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lebesgue_closed_form() {
        for m in [0, 5, 9] {
            let leb = GridMeasure::lebesgue(m).unwrap();
            let i = s_energy_spatial(&leb, 0.5).unwrap();
            assert!((i - 8.0 / 3.0).abs() < 1e-11, "m={m}: {i}");
        }
    }

    #[test]
    fn autocorrelation_paths_agree() {
        let w: Vec<f64> = (0..600).map(|k| ((k * 31) % 17) as f64).collect();
        let fast = autocorrelation(&w);
        for d in [0, 1, 77, 599] {
            let direct: f64 = (0..600 - d).map(|j| w[j] * w[j + d]).sum();
            assert!((fast[d] - direct).abs() < 1e-9 * direct.max(1.0));
        }
    }

    #[test]
    fn exponent_validation_selects_s_minus_one() {
        let check = exponent_check(0.5).unwrap();
        assert!(check.operative_error() < 1e-3, "{check:?}");
        assert!(check.printed_error() > 0.05, "{check:?}");
    }
}
