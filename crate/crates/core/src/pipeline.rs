//! End-to-end runs: set → dense cube → measure → spectrum → certificate → witness.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dyadic::{content_upper, find_dense_cube, rescale, DyadicInterval, DyadicSet};
use crate::error::{param, Error, Result};
use crate::fourier::{gap_integral, spectrum, GapIntegral};
use crate::integral::{
    fit_kappa, positivity_certificate_with, trilinear_estimate, Certificate, CertificateStatus,
    DecomposeOptions, KappaFit, QuadraticPattern,
};
use crate::measure::{
    frostman, spectral_gap_measure_with, ConstructionReport, GapParameters, GridMeasure,
};
use crate::patterns::{search_pattern, PatternWitness};
use crate::sampled::SampledFunction;
use crate::setgen::{cantor, percolation, CantorSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSpec {
    Full { resolution: u32 },
    Quarter { depth: u32 },
    Cantor(CantorSpec),
    Percolation {
        p: f64,
        depth: u32,
        /// Falls back to the run seed.
        #[serde(default)]
        seed: Option<u64>,
    },
    RunLength { text: String },
    Hex { resolution: u32, mask: String },
}

impl SetSpec {
    pub fn build(&self, seed: u64) -> Result<DyadicSet> {
        match self {
            SetSpec::Full { resolution } => DyadicSet::full(*resolution),
            SetSpec::Quarter { depth } => cantor(&CantorSpec::quarter(*depth)),
            SetSpec::Cantor(spec) => cantor(spec),
            SetSpec::Percolation { p, depth, seed: s } => percolation(*p, *depth, s.unwrap_or(seed)),
            SetSpec::RunLength { text } => DyadicSet::from_run_length(text),
            SetSpec::Hex { resolution, mask } => DyadicSet::from_hex(*resolution, mask),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    /// Spectral-gap construction, falling back to the Frostman measure when
    /// its hypotheses fail.
    SpectralGap,
    Frostman,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub p: f64,
    pub q: f64,
    /// Defaults to `log₂A + 3`, rounded.
    #[serde(default)]
    pub l: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleOverride {
    #[serde(rename = "T")]
    pub t: u32,
    #[serde(default)]
    pub delta: Option<f64>,
}

/// A complete, self-describing run description. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub set: SetSpec,
    pub a: f64,
    pub b: f64,
    pub scale: Option<ScaleOverride>,
    pub beta: f64,
    pub s: f64,
    pub gamma: f64,
    pub pattern: PatternSpec,
    /// First `ε` of the schedule; `None` uses `1/(2B)`.
    pub eps: Option<f64>,
    pub measure: MeasureKind,
    /// Zoom into a dense cube before building the measure.
    pub dense_cube: bool,
    pub cube_delta: f64,
    pub spectrum_max_freq: f64,
    pub spectrum_step: f64,
    pub gap_integral: bool,
    pub require_distinct: bool,
    /// Reject `s ≤ 1 − γ`, where the high-piece bound is not claimed.
    pub require_high_bound: bool,
    pub decompose: DecomposeOptions,
    pub seed: u64,
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            set: SetSpec::Full { resolution: 10 },
            a: 4.0,
            b: 16.0,
            scale: None,
            beta: 0.9,
            s: 0.5,
            gamma: 0.05,
            pattern: PatternSpec {
                p: 1.0,
                q: 0.0,
                l: None,
            },
            eps: None,
            measure: MeasureKind::SpectralGap,
            dense_cube: true,
            cube_delta: 0.125,
            spectrum_max_freq: 64.0,
            spectrum_step: 0.25,
            gap_integral: false,
            require_distinct: false,
            require_high_bound: false,
            decompose: DecomposeOptions::default(),
            seed: 0,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Copy with every defaulted choice written out.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        if out.pattern.l.is_none() {
            out.pattern.l = Some((out.a.log2().round().max(0.0) as u32) + 3);
        }
        out
    }

    pub fn quadratic_pattern(&self) -> Result<QuadraticPattern> {
        let l = self
            .pattern
            .l
            .unwrap_or_else(|| (self.a.log2().round().max(0.0) as u32) + 3);
        QuadraticPattern::new(self.pattern.p, self.pattern.q, l)
    }

    pub fn gap_parameters(&self) -> Result<GapParameters> {
        let params = GapParameters::new(self.a, self.b)?;
        Ok(match self.scale {
            Some(s) => params.with_scale(s.t, s.delta),
            None => params,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.gap_parameters()?;
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps < 1.0 / self.b) {
                return Err(param(
                    "eps",
                    format!("need 0 < ε < 1/B = {}, got {eps}", 1.0 / self.b),
                ));
            }
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(param("beta", format!("must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(param("s", format!("must lie in (0, 1), got {}", self.s)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(param("gamma", format!("must lie in (0, 1), got {}", self.gamma)));
        }
        if self.require_high_bound && self.s <= 1.0 - self.gamma {
            return Err(param(
                "s",
                format!("high-piece bound needs s > 1 − γ = {}", 1.0 - self.gamma),
            ));
        }
        if !(self.cube_delta > 0.0 && self.cube_delta < 1.0) {
            return Err(param("cube_delta", "must lie in (0, 1)"));
        }
        if !(self.spectrum_step > 0.0 && self.spectrum_max_freq >= 0.0) {
            return Err(param("spectrum_step", "must be positive"));
        }
        self.quadratic_pattern()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSummary {
    pub resolution: u32,
    pub cells: u64,
    pub measure: f64,
    /// SHA-256 of the hex mask.
    pub mask_sha256: String,
}

impl SetSummary {
    fn of(set: &DyadicSet) -> Self {
        Self {
            resolution: set.resolution(),
            cells: set.len(),
            measure: set.measure(),
            mask_sha256: hex::encode(Sha256::digest(set.to_hex().as_bytes())),
        }
    }
}

/// A witness mapped back from the dense cube: `x ↦ x_Q + l(Q)·x`, which turns
/// `P(t) = pt² + qt` into `(p/l(Q))t² + qt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappedWitness {
    pub x: f64,
    pub t: f64,
    pub p: f64,
    pub q: f64,
    pub points: [f64; 3],
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub config: RunConfig,
    pub set: SetSummary,
    pub content: f64,
    pub dense_cube: Option<DyadicInterval>,
    pub working_set: SetSummary,
    pub measure_used: MeasureKind,
    pub notes: Vec<String>,
    pub construction: Option<ConstructionReport>,
    pub gap: Option<GapIntegral>,
    pub spectrum_csv: String,
    pub certificate: Certificate,
    pub ledger_csv: String,
    pub witness: Option<PatternWitness>,
    pub witness_original: Option<MappedWitness>,
    /// SHA-256 of the bundle serialized with this field empty.
    pub hash: String,
}

impl ReportBundle {
    fn digest(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.hash.clear();
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(&copy)?)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `bundle.json`, `certificate.json`, `witness.json`, `spectrum.csv`, `ledger.csv`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("bundle.json"), self.to_json()?)?;
        fs::write(
            dir.join("certificate.json"),
            serde_json::to_string_pretty(&self.certificate)?,
        )?;
        fs::write(
            dir.join("witness.json"),
            serde_json::to_string_pretty(&(&self.witness, &self.witness_original))?,
        )?;
        fs::write(dir.join("spectrum.csv"), &self.spectrum_csv)?;
        fs::write(dir.join("ledger.csv"), &self.ledger_csv)?;
        Ok(())
    }
}

fn build_measure(
    cfg: &RunConfig,
    set: &DyadicSet,
    notes: &mut Vec<String>,
) -> Result<(GridMeasure, Option<ConstructionReport>, MeasureKind)> {
    match cfg.measure {
        MeasureKind::Uniform => Ok((GridMeasure::uniform_on(set)?, None, MeasureKind::Uniform)),
        MeasureKind::Frostman => Ok((frostman(set, cfg.beta)?, None, MeasureKind::Frostman)),
        MeasureKind::SpectralGap => {
            match spectral_gap_measure_with(set, &cfg.gap_parameters()?, cfg.beta) {
                Ok((mu, report)) => Ok((mu, Some(report), MeasureKind::SpectralGap)),
                Err(e @ (Error::Resolution { .. } | Error::Precondition { .. })) => {
                    notes.push(format!("spectral-gap construction skipped: {e}; using Frostman"));
                    Ok((frostman(set, cfg.beta)?, None, MeasureKind::Frostman))
                }
                Err(e) => Err(e),
            }
        }
    }
}

/// Output of the stages up to and including the measure.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub pattern: QuadraticPattern,
    pub set: DyadicSet,
    pub content: f64,
    pub cube: Option<DyadicInterval>,
    /// `set ∩ Q` rescaled to `[0, 1]`, or `set` itself.
    pub work: DyadicSet,
    pub mu: GridMeasure,
    pub construction: Option<ConstructionReport>,
    pub measure_used: MeasureKind,
    pub notes: Vec<String>,
}

/// Validate, generate, compute content, zoom into the dense cube and build the
/// normalized measure.
pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    let cfg = config.resolved();
    cfg.validate().map_err(|e| e.at("validate"))?;
    let pattern = cfg.quadratic_pattern().map_err(|e| e.at("validate"))?;
    let set = cfg.set.build(cfg.seed).map_err(|e| e.at("generate"))?;
    if set.is_empty() {
        return Err(Error::Precondition {
            condition: "E ≠ ∅",
            detail: "generated set has no cells".into(),
        }
        .at("generate"));
    }
    let content = content_upper(&set, cfg.beta).map_err(|e| e.at("content"))?;
    let mut notes = Vec::new();
    let cube = if cfg.dense_cube {
        Some(find_dense_cube(&set, cfg.beta, cfg.cube_delta).map_err(|e| e.at("dense_cube"))?)
    } else {
        None
    };
    let work = match cube {
        Some(q) => rescale(&set, q).map_err(|e| e.at("dense_cube"))?,
        None => set.clone(),
    };
    if let Some(q) = cube {
        if q.level > 0 {
            notes.push(format!(
                "zoomed into [{}, {}] (level {}), working resolution {}",
                q.start(),
                q.end(),
                q.level,
                work.resolution()
            ));
        }
    }
    let (mu, construction, measure_used) =
        build_measure(&cfg, &work, &mut notes).map_err(|e| e.at("measure"))?;
    let mu = mu.normalized().map_err(|e| e.at("measure"))?;
    Ok(Prepared {
        config: cfg,
        pattern,
        set,
        content,
        cube,
        work,
        mu,
        construction,
        measure_used,
        notes,
    })
}

impl Prepared {
    /// Maps a witness in the working set back to the original coordinates.
    pub fn map_witness(&self, w: &PatternWitness) -> MappedWitness {
        let (start, len) = self.cube.map_or((0.0, 1.0), |q| (q.start(), q.length()));
        let (x, t) = (start + len * w.x, len * w.t);
        let (p, q) = (self.pattern.p() / len, self.pattern.q());
        let points = [x, x + t, x + p * t * t + q * t];
        MappedWitness {
            x,
            t,
            p,
            q,
            points,
            verified: t != 0.0 && points.iter().all(|&y| self.set.contains_point(y)),
        }
    }
}

pub fn run_pipeline(config: &RunConfig) -> Result<ReportBundle> {
    let prepared = prepare(config)?;
    let Prepared {
        config: cfg,
        pattern: pat,
        set,
        content,
        cube,
        work,
        mu,
        construction,
        measure_used,
        mut notes,
    } = prepared.clone();

    let profile = spectrum(&mu, cfg.spectrum_max_freq, cfg.spectrum_step)
        .map_err(|e| e.at("spectrum"))?;
    let mut buf = Vec::new();
    profile.write_csv(&mut buf).map_err(|e| e.at("spectrum"))?;
    let spectrum_csv = String::from_utf8(buf).expect("csv is utf-8");

    let gap = if cfg.gap_integral {
        match gap_integral(&mu, cfg.a, cfg.b) {
            Ok(g) => Some(g),
            Err(e) => {
                notes.push(format!("gap integral not evaluated: {e}"));
                None
            }
        }
    } else {
        None
    };

    let certificate = positivity_certificate_with(
        &mu,
        cfg.eps,
        cfg.a,
        cfg.b,
        &pat,
        cfg.s,
        cfg.gamma,
        &cfg.decompose,
    )
    .map_err(|e| e.at("certificate"))?;
    let mut buf = Vec::new();
    certificate
        .reports
        .last()
        .expect("schedule is nonempty")
        .write_csv(&mut buf)
        .map_err(|e| e.at("certificate"))?;
    let ledger_csv = String::from_utf8(buf).expect("csv is utf-8");

    let witness = search_pattern(&work, &pat, cfg.require_distinct);
    let witness_original = witness.map(|w| prepared.map_witness(&w));
    if certificate.status == CertificateStatus::Positive && witness.is_none() {
        notes.push("POSITIVE certificate without a grid witness".into());
    }

    let mut bundle = ReportBundle {
        config: cfg,
        set: SetSummary::of(&set),
        content,
        dense_cube: cube,
        working_set: SetSummary::of(&work),
        measure_used,
        notes,
        construction,
        gap,
        spectrum_csv,
        certificate,
        ledger_csv,
        witness,
        witness_original,
        hash: String::new(),
    };
    bundle.hash = bundle.digest()?;
    if let Some(dir) = &bundle.config.output {
        bundle.write_dir(Path::new(dir)).map_err(|e| e.at("output"))?;
    }
    Ok(bundle)
}

pub const SWEEP_AXES: [&str; 11] = [
    "q", "p", "l", "beta", "a", "b", "eps", "s", "gamma", "seed", "trilinear_l",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub status: Option<CertificateStatus>,
    pub margin: Option<f64>,
    pub main: Option<f64>,
    pub total: Option<f64>,
    pub content: Option<f64>,
    pub witness: Option<bool>,
    pub trilinear_ratio: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: String,
    pub rows: Vec<SweepRow>,
    /// Log-linear fit of the trilinear ratio against `l`.
    pub kappa_fit: Option<KappaFit>,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            self.axis.as_str(),
            "status",
            "margin",
            "main",
            "total",
            "content",
            "witness",
            "trilinear_ratio",
            "error",
        ])?;
        for r in &self.rows {
            let status = r.status.map(|s| match s {
                CertificateStatus::Positive => "POSITIVE",
                CertificateStatus::Inconclusive => "INCONCLUSIVE",
            });
            w.write_record([
                r.value.to_string(),
                opt(&status),
                opt(&r.margin),
                opt(&r.main),
                opt(&r.total),
                opt(&r.content),
                opt(&r.witness),
                opt(&r.trilinear_ratio),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn set_axis(cfg: &mut RunConfig, axis: &str, v: f64) -> Result<()> {
    let as_u32 = |v: f64| -> Result<u32> {
        if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
            Ok(v as u32)
        } else {
            Err(param("value", format!("{v} is not a nonnegative integer")))
        }
    };
    match axis {
        "q" => cfg.pattern.q = v,
        "p" => cfg.pattern.p = v,
        "l" => cfg.pattern.l = Some(as_u32(v)?),
        "beta" => cfg.beta = v,
        "a" => cfg.a = v,
        "b" => cfg.b = v,
        "eps" => cfg.eps = Some(v),
        "s" => cfg.s = v,
        "gamma" => cfg.gamma = v,
        "seed" => cfg.seed = as_u32(v)? as u64,
        _ => return Err(param("axis", format!("unknown sweep axis `{axis}`"))),
    }
    Ok(())
}

/// Fixed smooth bumps `(f, g, h)` used by the `trilinear_l` axis.
pub fn reference_bumps() -> [SampledFunction; 3] {
    let bump = |c: f64, r: f64| {
        SampledFunction::tabulate(
            c - r,
            c + r,
            256,
            move |x| (1.0 - ((x - c) / r).powi(2)).max(0.0).powi(4),
            Some(&move |x: f64| {
                let u = (x - c) / r;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    -8.0 * u * (1.0 - u * u).powi(3) / r
                }
            }),
        )
        .expect("valid grid")
    };
    [bump(0.6, 0.4), bump(0.55, 0.45), bump(0.4, 0.3)]
}

fn trilinear_row(cfg: &RunConfig, v: f64) -> Result<f64> {
    let mut c = cfg.clone();
    set_axis(&mut c, "l", v)?;
    let pat = c.quadratic_pattern()?;
    let [f, g, h] = reference_bumps();
    Ok(trilinear_estimate(&f, &g, &h, &pat, c.gamma)?.ratio)
}

/// One row per value; failures are recorded in the row rather than aborting.
pub fn sweep(config: &RunConfig, axis: &str, values: &[f64]) -> Result<SweepTable> {
    if !SWEEP_AXES.contains(&axis) {
        return Err(param(
            "axis",
            format!("unknown sweep axis `{axis}`; expected one of {SWEEP_AXES:?}"),
        ));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut row = SweepRow {
            value: v,
            status: None,
            margin: None,
            main: None,
            total: None,
            content: None,
            witness: None,
            trilinear_ratio: None,
            error: None,
        };
        if axis == "trilinear_l" {
            match trilinear_row(config, v) {
                Ok(r) => row.trilinear_ratio = Some(r),
                Err(e) => row.error = Some(e.to_string()),
            }
        } else {
            let mut cfg = config.clone();
            cfg.output = None;
            let run = set_axis(&mut cfg, axis, v).and_then(|_| run_pipeline(&cfg));
            match run {
                Ok(b) => {
                    let main = b.certificate.trials.last().map(|t| t.main);
                    row.status = Some(b.certificate.status);
                    row.margin = Some(b.certificate.margin);
                    row.main = main;
                    row.total = b.certificate.trials.last().map(|t| t.total);
                    row.content = Some(b.content);
                    row.witness = Some(b.witness.is_some());
                }
                Err(e) => row.error = Some(e.to_string()),
            }
        }
        rows.push(row);
    }
    let kappa_fit = if axis == "trilinear_l" {
        let pairs: Vec<(u32, f64)> = rows
            .iter()
            .filter_map(|r| Some((r.value as u32, r.trilinear_ratio.filter(|x| *x > 0.0)?)))
            .collect();
        let (ls, ratios): (Vec<u32>, Vec<f64>) = pairs.into_iter().unzip();
        fit_kappa(&ls, &ratios).ok()
    } else {
        None
    };
    Ok(SweepTable {
        axis: axis.to_string(),
        rows,
        kappa_fit,
    })
}
