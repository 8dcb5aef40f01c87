//! Configuration integrals `∫∫ f(x+t) g(x+P(t)) τ_l(t) dt dμ(x)`, their
//! frequency-space form, the nine-term decomposition and the positivity
//! certificate built on it.

mod certificate;
mod config;
mod decompose;
mod frequency;
mod trilinear;

pub use certificate::{
    epsilon_schedule, positivity_certificate, positivity_certificate_with, Certificate,
    CertificateStatus, EpsilonTrial,
};
pub use config::{config_integral, config_integral_with, ConfigEstimate};
pub use decompose::{
    decompose, decompose_with, DecomposeOptions, DecompositionReport, MainTermCheck, Piece,
    TermEntry, TermKind,
};
pub use frequency::{config_integral_frequency, FrequencyEstimate};
pub use trilinear::{fit_kappa, trilinear_estimate, KappaFit, TrilinearEstimate};

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::measure::WindowTau;

/// `P(t) = p·t² + q·t` together with the scale index `l` of the window `τ_l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PatternJson", into = "PatternJson")]
pub struct QuadraticPattern {
    p: f64,
    q: f64,
    l: u32,
}

#[derive(Serialize, Deserialize)]
struct PatternJson {
    p: f64,
    q: f64,
    l: u32,
}

impl TryFrom<PatternJson> for QuadraticPattern {
    type Error = Error;

    fn try_from(v: PatternJson) -> Result<Self> {
        Self::new(v.p, v.q, v.l)
    }
}

impl From<QuadraticPattern> for PatternJson {
    fn from(v: QuadraticPattern) -> Self {
        Self {
            p: v.p,
            q: v.q,
            l: v.l,
        }
    }
}

impl QuadraticPattern {
    pub fn new(p: f64, q: f64, l: u32) -> Result<Self> {
        if !(p.is_finite() && p != 0.0) {
            return Err(param("p", format!("must be finite and nonzero, got {p}")));
        }
        if !q.is_finite() {
            return Err(param("q", format!("must be finite, got {q}")));
        }
        if l > 40 {
            return Err(param("l", format!("scale index {l} is too large")));
        }
        Ok(Self { p, q, l })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn with_l(&self, l: u32) -> Result<Self> {
        Self::new(self.p, self.q, l)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.p * t + self.q) * t
    }

    pub fn derivative(&self, t: f64) -> f64 {
        2.0 * self.p * t + self.q
    }

    /// Support `[2^{-l-1}, 2^{-l+2}]` of `τ_l`.
    pub fn window(&self) -> (f64, f64) {
        let s = -(self.l as f64);
        ((s - 1.0).exp2(), (s + 2.0).exp2())
    }

    /// `τ_l(t)`.
    pub fn tau(&self, t: f64) -> f64 {
        WindowTau.scaled(self.l, t)
    }

    /// `max |P'|` over the window.
    pub fn max_slope(&self) -> f64 {
        let (a, b) = self.window();
        self.derivative(a).abs().max(self.derivative(b).abs())
    }

    /// `[min P, max P]` over the window.
    pub fn range(&self) -> (f64, f64) {
        let (a, b) = self.window();
        let mut lo = self.eval(a).min(self.eval(b));
        let mut hi = self.eval(a).max(self.eval(b));
        let vertex = -self.q / (2.0 * self.p);
        if vertex > a && vertex < b {
            lo = lo.min(self.eval(vertex));
            hi = hi.max(self.eval(vertex));
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_basics() {
        assert!(QuadraticPattern::new(0.0, 1.0, 2).is_err());
        let p = QuadraticPattern::new(1.0, -0.5, 2).unwrap();
        assert_eq!(p.window(), (0.125, 1.0));
        assert_eq!(p.eval(1.0), 0.5);
        assert_eq!(p.range(), (-0.0625, 0.5));
        assert_eq!(p.max_slope(), 1.5);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<QuadraticPattern>(&json).unwrap(), p);
        assert!(serde_json::from_str::<QuadraticPattern>(r#"{"p":0,"q":0,"l":1}"#).is_err());
    }
}
