//! The nine-term split of the configuration integral along
//! `μ_ε = μ_{1/A} + (μ_{1/B} − μ_{1/A}) + (μ_ε − μ_{1/B})` and its ledger.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::{mollify_resolution, refine, ConfigNodes, Settle};
use super::QuadraticPattern;
use crate::error::{param, Result};
use crate::fourier::{
    even_weights, measure_sobolev, s_energy_spatial, transform_grid, SobolevIndex, SPECTRAL_STEP,
};
use crate::measure::{mollify_on, regular_core, GridMeasure, MollifierPhi, MollifyGrid, WindowTau};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Piece {
    Low,
    Mid,
    High,
}

impl Piece {
    pub const ALL: [Piece; 3] = [Piece::Low, Piece::Mid, Piece::High];

    pub fn name(&self) -> &'static str {
        match self {
            Piece::Low => "low",
            Piece::Mid => "mid",
            Piece::High => "high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Main,
    /// No high piece in the integrand.
    TypeI,
    TypeII,
}

/// One cell of the 3×3 ledger: `∫∫ row(x+t)·col(x+P(t))·τ_l dt dμ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEntry {
    pub row: Piece,
    pub col: Piece,
    pub kind: TermKind,
    pub value: f64,
    /// Table expression with its implicit constant set to 1 (a lower bound for the main term).
    pub table_bound: f64,
    /// `|value|/table_bound`.
    pub table_ratio: f64,
    /// Bound evaluated from measured norms: `‖τ_l‖₁·mass·∫|F̂_row|·∫|F̂_col|` for
    /// Type I, `C_γ 2^{κl}‖F_row‖‖F_col‖‖μ‖` in `H^{-γ}` for Type II, the
    /// `2^{-10}c²/A` floor for the main term.
    pub measured_bound: f64,
    /// `|value| ≤ measured_bound`, or `value ≥ measured_bound` for the main term.
    pub within_measured_bound: bool,
}

/// The main-term floor and the hypotheses under which it is claimed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTermCheck {
    pub c: f64,
    pub lower_bound: f64,
    pub value: f64,
    /// `μ(D_c)`.
    pub core_mass: f64,
    pub total_mass: f64,
    /// `(4A)^{-1} = 2^{1-l}`.
    pub scale_matches: bool,
    /// `|p|(4A)^{-1} + |q| ≤ 1`.
    pub pattern_small: bool,
    pub preconditions_hold: bool,
    pub holds: bool,
}

/// Configuration inputs with no numeric value attached in the theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecomposeOptions {
    pub kappa: f64,
    pub c_gamma: f64,
    /// Regularity constant `c` of the main-term lemma.
    pub c: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            c_gamma: 1.0,
            c: 1.0 / 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub s: f64,
    pub gamma: f64,
    pub options: DecomposeOptions,
    pub pattern: QuadraticPattern,
    pub i_s: f64,
    pub i_one_minus_gamma: f64,
    /// `𝗖 = max(I_s, I_{1−γ})`.
    pub big_c: f64,
    /// Row-major over `(row, col)` in low, mid, high order.
    pub terms: Vec<TermEntry>,
    /// Undecomposed integral with `μ_ε` in both slots.
    pub total: f64,
    pub total_error: f64,
    pub term_sum: f64,
    /// `|term_sum − total|/|total|`.
    pub identity_residual: f64,
    /// Share of `total` from `(x, t)` with both `x+t` and `x+P(t)` in supp μ.
    pub supported_fraction: f64,
    /// `H^{-γ}` norms of the low, mid and high densities.
    pub piece_norms: [f64; 3],
    /// `∫|F̂|` for the low, mid and high densities.
    pub piece_l1: [f64; 3],
    pub measure_norm: f64,
    /// `‖μ_{1/B} − μ_{1/A}‖²/A^{-3}`.
    pub mid_norm_ratio: f64,
    /// `‖μ_ε − μ_{1/B}‖²/(B^{(1−s−γ)/5}·I_s)`.
    pub high_norm_ratio: f64,
    /// `s > 1 − γ`, under which the high-piece bound is claimed.
    pub high_bound_applicable: bool,
    pub main: MainTermCheck,
    /// `main − Σ|remainders|`.
    pub margin: f64,
}

impl DecompositionReport {
    pub fn term(&self, row: Piece, col: Piece) -> &TermEntry {
        &self.terms[row as usize * 3 + col as usize]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Ledger in the 3×3 layout: one line per row piece, value/bound/ratio per column piece.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["row".to_string()];
        for c in Piece::ALL {
            for f in ["value", "table_bound", "table_ratio", "measured_bound", "within"] {
                header.push(format!("{}_{}", c.name(), f));
            }
        }
        w.write_record(&header)?;
        for r in Piece::ALL {
            let mut rec = vec![r.name().to_string()];
            for c in Piece::ALL {
                let t = self.term(r, c);
                rec.push(format!("{:e}", t.value));
                rec.push(format!("{:e}", t.table_bound));
                rec.push(format!("{:e}", t.table_ratio));
                rec.push(format!("{:e}", t.measured_bound));
                rec.push(t.within_measured_bound.to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn decompose(
    mu: &GridMeasure,
    eps: f64,
    a: f64,
    b: f64,
    pat: &QuadraticPattern,
    s: f64,
    gamma: f64,
) -> Result<DecompositionReport> {
    decompose_with(mu, eps, a, b, pat, s, gamma, &DecomposeOptions::default())
}

fn check_order(eps: f64, a: f64, b: f64, s: f64, gamma: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0 / b && 1.0 / b < 1.0 / a && 1.0 / a < 1.0) {
        return Err(param(
            "eps, A, B",
            format!("need 0 < ε < 1/B < 1/A < 1, got ε = {eps}, A = {a}, B = {b}"),
        ));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(param("s", format!("must lie in (0, 1), got {s}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(param("gamma", format!("must lie in (0, 1), got {gamma}")));
    }
    Ok(())
}

/// Spectral norms of the three densities: `[H^{-γ} norm², ∫|F̂|]` per piece.
fn piece_spectra(mu: &GridMeasure, eps: f64, a: f64, b: f64, gamma: f64) -> ([f64; 3], [f64; 3]) {
    let phi = MollifierPhi::standard();
    let step = SPECTRAL_STEP;
    let cutoff = phi.transform_cutoff() / eps;
    let count = ((cutoff / step).ceil() as usize).clamp(8, 1 << 23);
    let muh = transform_grid(mu, step, count + 1);
    let w = even_weights(count);
    let mut sq = [0.0; 3];
    let mut l1 = [0.0; 3];
    for (k, (v, wk)) in muh.iter().zip(&w).enumerate() {
        let xi = k as f64 * step;
        let (pa, pb, pe) = (phi.fourier(xi / a), phi.fourier(xi / b), phi.fourier(eps * xi));
        let m = [pa, pb - pa, pe - pb];
        let amp = v.norm();
        let sob = (1.0 + xi * xi).powf(-0.5 * gamma);
        for i in 0..3 {
            let f = amp * m[i].abs();
            sq[i] += wk * f * f * sob;
            l1[i] += wk * f;
        }
    }
    (sq.map(|x| x * step), l1.map(|x| x * step))
}

#[allow(clippy::too_many_arguments)]
pub fn decompose_with(
    mu: &GridMeasure,
    eps: f64,
    a: f64,
    b: f64,
    pat: &QuadraticPattern,
    s: f64,
    gamma: f64,
    opts: &DecomposeOptions,
) -> Result<DecompositionReport> {
    check_order(eps, a, b, s, gamma)?;
    let grid = MollifyGrid::covering(mollify_resolution(eps), 1.0 / a);
    let low = mollify_on(mu, 1.0 / a, grid)?;
    let upto_b = mollify_on(mu, 1.0 / b, grid)?;
    let full = mollify_on(mu, eps, grid)?;
    let support = mu.support();
    let pieces = |x: f64| {
        let (p, q, r) = (low.eval(x), upto_b.eval(x), full.eval(x));
        [p, q - p, r - q, r]
    };
    // Component 0 is the undecomposed integrand so that `refine` tracks it.
    let (sums, est) = refine(
        eps / 2.0,
        Settle::SMOOTH,
        |w| ConfigNodes::for_measure(mu, pat, w),
        |u, v| {
            let (f, g) = (pieces(u), pieces(v));
            let both = f[3] * g[3];
            let inside = support.contains_point(u) && support.contains_point(v);
            let mut out = [0.0; 11];
            out[0] = both;
            out[1] = if inside { both } else { 0.0 };
            for i in 0..3 {
                for j in 0..3 {
                    out[2 + 3 * i + j] = f[i] * g[j];
                }
            }
            out
        },
    )?;
    let total = sums[0];
    let values: Vec<f64> = sums[2..].to_vec();
    let term_sum: f64 = values.iter().sum();
    let identity_residual = if total != 0.0 {
        (term_sum - total).abs() / total.abs()
    } else {
        term_sum.abs()
    };

    let i_s = s_energy_spatial(mu, s)?;
    let i_g = s_energy_spatial(mu, 1.0 - gamma)?;
    let big_c = i_s.max(i_g);
    let (sq, l1) = piece_spectra(mu, eps, a, b, gamma);
    let piece_norms = sq.map(|x| x.max(0.0).sqrt());
    let measure_norm = measure_sobolev(mu, SobolevIndex::negative(gamma))?.norm();
    let mass = mu.total_mass();
    let l = pat.l() as f64;
    let tau_l1 = WindowTau.scaled_l1_norm(pat.l());
    let e = 1.0 - s - gamma;
    let growth = opts.c_gamma * (opts.kappa * l).exp2();

    let main_floor = (-10f64).exp2() * opts.c * opts.c / a;
    let table = |r: Piece, c: Piece| -> f64 {
        use Piece::*;
        let dyadic = (-l).exp2();
        match (r, c) {
            (Low, Low) => main_floor,
            (Low, Mid) | (Mid, Low) => dyadic * a.powf(-0.4),
            (Mid, Mid) => dyadic * a.powf(-2.8),
            (Low, High) | (High, Low) => big_c.powf(1.5) * growth * b.powf(e / 10.0),
            (Mid, High) | (High, Mid) => big_c * growth * a.powf(-1.5) * b.powf(e / 10.0),
            (High, High) => big_c.powf(1.5) * growth * b.powf(e / 5.0),
        }
    };

    let core = regular_core(mu, opts.c)?;
    let quarter = 0.25 / a;
    let scale_matches = ((1.0 - l).exp2() / quarter - 1.0).abs() < 1e-12;
    let pattern_small = pat.p().abs() * quarter + pat.q().abs() <= 1.0;
    let preconditions_hold =
        core.core_mass <= 0.5 * core.total_mass && scale_matches && pattern_small;
    let main_value = values[0];

    let mut terms = Vec::with_capacity(9);
    for r in Piece::ALL {
        for c in Piece::ALL {
            let value = values[r as usize * 3 + c as usize];
            let kind = match (r, c) {
                (Piece::Low, Piece::Low) => TermKind::Main,
                (Piece::High, _) | (_, Piece::High) => TermKind::TypeII,
                _ => TermKind::TypeI,
            };
            let table_bound = table(r, c);
            let (measured_bound, within) = match kind {
                TermKind::Main => (main_floor, value >= main_floor),
                TermKind::TypeI => {
                    let m = tau_l1 * mass * l1[r as usize] * l1[c as usize];
                    (m, value.abs() <= m)
                }
                TermKind::TypeII => {
                    let m = growth * piece_norms[r as usize] * piece_norms[c as usize] * measure_norm;
                    (m, value.abs() <= m)
                }
            };
            terms.push(TermEntry {
                row: r,
                col: c,
                kind,
                value,
                table_bound,
                table_ratio: value.abs() / table_bound,
                measured_bound,
                within_measured_bound: within,
            });
        }
    }
    let remainders: f64 = values[1..].iter().map(|v| v.abs()).sum();

    Ok(DecompositionReport {
        a,
        b,
        eps,
        s,
        gamma,
        options: *opts,
        pattern: *pat,
        i_s,
        i_one_minus_gamma: i_g,
        big_c,
        terms,
        total,
        total_error: est.error_estimate,
        term_sum,
        identity_residual,
        supported_fraction: if total > 0.0 { sums[1] / total } else { 0.0 },
        piece_norms,
        piece_l1: l1,
        measure_norm,
        mid_norm_ratio: sq[1] * a.powi(3),
        high_norm_ratio: sq[2] / (b.powf(e / 5.0) * i_s),
        high_bound_applicable: s > 1.0 - gamma,
        main: MainTermCheck {
            c: opts.c,
            lower_bound: main_floor,
            value: main_value,
            core_mass: core.core_mass,
            total_mass: core.total_mass,
            scale_matches,
            pattern_small,
            preconditions_hold,
            holds: main_value >= main_floor,
        },
        margin: main_value - remainders,
    })
}
