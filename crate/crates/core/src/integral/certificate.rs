//! Positivity certificate: main term minus all remainders, along a shrinking
//! sequence of `ε`.

use serde::{Deserialize, Serialize};

use super::decompose::{decompose_with, DecomposeOptions, DecompositionReport};
use super::QuadraticPattern;
use crate::error::{param, Result};
use crate::measure::GridMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateStatus {
    Positive,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonTrial {
    pub eps: f64,
    pub margin: f64,
    pub main: f64,
    pub total: f64,
    pub supported_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub status: CertificateStatus,
    pub pattern: QuadraticPattern,
    pub a: f64,
    pub b: f64,
    pub window: (f64, f64),
    pub trials: Vec<EpsilonTrial>,
    /// Smallest margin over the trials.
    pub margin: f64,
    /// Consecutive margins differ by at most half the later one.
    pub stable: bool,
    /// Most of the integral comes from points outside supp μ, reached only through the blur.
    pub degenerate_t: bool,
    pub reports: Vec<DecompositionReport>,
}

/// `ε` values tried: `{ε, ε/2, ε/4}` for a given `ε`, else `{1/(2B), 1/(4B), 1/(8B)}`.
pub fn epsilon_schedule(eps: Option<f64>, b: f64) -> Vec<f64> {
    let first = eps.unwrap_or(0.5 / b);
    vec![first, 0.5 * first, 0.25 * first]
}

pub fn positivity_certificate(
    mu: &GridMeasure,
    eps: Option<f64>,
    a: f64,
    b: f64,
    pat: &QuadraticPattern,
    s: f64,
    gamma: f64,
) -> Result<Certificate> {
    positivity_certificate_with(mu, eps, a, b, pat, s, gamma, &DecomposeOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn positivity_certificate_with(
    mu: &GridMeasure,
    eps: Option<f64>,
    a: f64,
    b: f64,
    pat: &QuadraticPattern,
    s: f64,
    gamma: f64,
    opts: &DecomposeOptions,
) -> Result<Certificate> {
    if mu.total_mass() <= 0.0 {
        return Err(param("mu", "measure has no mass"));
    }
    let reports = epsilon_schedule(eps, b)
        .into_iter()
        .map(|e| decompose_with(mu, e, a, b, pat, s, gamma, opts))
        .collect::<Result<Vec<_>>>()?;
    let trials: Vec<EpsilonTrial> = reports
        .iter()
        .map(|r| EpsilonTrial {
            eps: r.eps,
            margin: r.margin,
            main: r.main.value,
            total: r.total,
            supported_fraction: r.supported_fraction,
        })
        .collect();
    let margin = trials.iter().map(|t| t.margin).fold(f64::INFINITY, f64::min);
    let stable = trials
        .windows(2)
        .all(|w| (w[1].margin - w[0].margin).abs() <= 0.5 * w[1].margin.abs());
    let degenerate_t = trials.iter().any(|t| t.supported_fraction < 0.5);
    let status = if margin > 0.0 && stable {
        CertificateStatus::Positive
    } else {
        CertificateStatus::Inconclusive
    };
    Ok(Certificate {
        status,
        pattern: *pat,
        a,
        b,
        window: pat.window(),
        trials,
        margin,
        stable,
        degenerate_t,
        reports,
    })
}
