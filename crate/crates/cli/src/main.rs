//! Command-line front end for `fracpat`.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fracpat::integral::{decompose_with, epsilon_schedule, positivity_certificate_with};
use fracpat::patterns::search_pattern;
use fracpat::pipeline::{
    prepare, run_pipeline, sweep, MeasureKind, RunConfig, ScaleOverride, SetSpec, SWEEP_AXES,
};
use fracpat::setgen::CantorSpec;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fracpat", version, about = "Quadratic three-point patterns in dyadic fractal sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the generated set as `{resolution, mask}` JSON.
    Generate(Common),
    /// Dyadic Hausdorff content and dense cube.
    Content(Common),
    /// Build the measure on the working set.
    Measure(Common),
    /// `|μ̂|` on a frequency grid, as CSV.
    Spectrum(Common),
    /// Nine-term decomposition at the first `ε` of the schedule.
    Decompose {
        #[command(flatten)]
        common: Common,
        /// Emit the term table as CSV instead of the JSON report.
        #[arg(long)]
        csv: bool,
    },
    /// Positivity certificate over the `ε` schedule.
    Certify(Common),
    /// Brute-force witness search on the working set.
    Search(Common),
    /// Full pipeline; writes the bundle to `--output` if given.
    Run(Common),
    /// Sweep one parameter and tabulate margins as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SWEEP_AXES))]
        axis: String,
        /// Comma-separated values; empty for an empty table.
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        values: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    SpectralGap,
    Frostman,
    Uniform,
}

impl From<MeasureArg> for MeasureKind {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::SpectralGap => MeasureKind::SpectralGap,
            MeasureArg::Frostman => MeasureKind::Frostman,
            MeasureArg::Uniform => MeasureKind::Uniform,
        }
    }
}

/// Flags mirror the fields of the JSON run config and override it.
#[derive(Args, Clone)]
struct Common {
    /// JSON run config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Set spec as JSON, e.g. `{"kind":"quarter","depth":5}`.
    #[arg(long, conflicts_with_all = ["full", "quarter", "cantor", "percolation"])]
    set: Option<String>,
    /// Full interval at this resolution.
    #[arg(long)]
    full: Option<u32>,
    /// Quarter Cantor set of this depth.
    #[arg(long)]
    quarter: Option<u32>,
    /// Cantor set `PATTERN:BRANCHING:DEPTH`, pattern digits separated by `+`.
    #[arg(long)]
    cantor: Option<String>,
    /// Percolation with keep probability `P`; needs `--depth`.
    #[arg(long, requires = "depth")]
    percolation: Option<f64>,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Override the scale `T` of the spectral-gap construction.
    #[arg(long = "scale-t")]
    scale_t: Option<u32>,
    #[arg(long, requires = "scale_t")]
    delta: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_enum)]
    measure: Option<MeasureArg>,
    /// Work on the whole set instead of a dense cube.
    #[arg(long)]
    no_dense_cube: bool,
    #[arg(long)]
    cube_delta: Option<f64>,
    #[arg(long)]
    max_freq: Option<f64>,
    #[arg(long)]
    freq_step: Option<f64>,
    #[arg(long)]
    gap_integral: bool,
    #[arg(long)]
    distinct: bool,
    #[arg(long)]
    require_high_bound: bool,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    c_gamma: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (`run`) or file (other commands); stdout otherwise.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_cantor(text: &str) -> Result<CantorSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    let [pattern, branching, depth] = parts[..] else {
        bail!("--cantor expects PATTERN:BRANCHING:DEPTH, got `{text}`");
    };
    Ok(CantorSpec {
        pattern: pattern
            .split('+')
            .map(|d| d.trim().parse())
            .collect::<Result<_, _>>()
            .context("cantor pattern digits")?,
        branching: branching.parse().context("cantor branching")?,
        depth: depth.parse().context("cantor depth")?,
    })
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(json) = &self.set {
            cfg.set = serde_json::from_str(json).context("parsing --set")?;
        }
        if let Some(resolution) = self.full {
            cfg.set = SetSpec::Full { resolution };
        }
        if let Some(depth) = self.quarter {
            cfg.set = SetSpec::Quarter { depth };
        }
        if let Some(text) = &self.cantor {
            cfg.set = SetSpec::Cantor(parse_cantor(text)?);
        }
        if let Some(p) = self.percolation {
            cfg.set = SetSpec::Percolation {
                p,
                depth: self.depth.expect("clap enforces --depth"),
                seed: None,
            };
        }
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$($field).+ = v.into(); })*
            };
        }
        set!(
            a => a, b => b, beta => beta, s => s, gamma => gamma,
            p => pattern.p, q => pattern.q, cube_delta => cube_delta,
            max_freq => spectrum_max_freq, freq_step => spectrum_step,
            kappa => decompose.kappa, c_gamma => decompose.c_gamma, c => decompose.c,
            seed => seed,
        );
        if let Some(l) = self.l {
            cfg.pattern.l = Some(l);
        }
        if let Some(eps) = self.eps {
            cfg.eps = Some(eps);
        }
        if let Some(t) = self.scale_t {
            cfg.scale = Some(ScaleOverride {
                t,
                delta: self.delta,
            });
        }
        if let Some(m) = self.measure {
            cfg.measure = m.into();
        }
        cfg.dense_cube &= !self.no_dense_cube;
        cfg.gap_integral |= self.gap_integral;
        cfg.require_distinct |= self.distinct;
        cfg.require_high_bound |= self.require_high_bound;
        Ok(cfg)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut out = io::stdout().lock();
                let written = out.write_all(text.as_bytes()).and_then(|_| {
                    if text.ends_with('\n') {
                        Ok(())
                    } else {
                        out.write_all(b"\n")
                    }
                });
                match written {
                    Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                    other => Ok(other?),
                }
            }
        }
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> Result<()> {
        self.emit(&serde_json::to_string_pretty(value)?)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(c) => {
            let cfg = c.config()?;
            let set = cfg.set.build(cfg.seed)?;
            c.emit_json(&set)
        }
        Command::Content(c) => {
            let mut cfg = c.config()?;
            cfg.dense_cube = true;
            cfg.measure = MeasureKind::Uniform;
            let prep = prepare(&cfg)?;
            c.emit_json(&serde_json::json!({
                "beta": prep.config.beta,
                "resolution": prep.set.resolution(),
                "cells": prep.set.len(),
                "content": prep.content,
                "dense_cube": prep.cube,
                "working_resolution": prep.work.resolution(),
            }))
        }
        Command::Measure(c) => {
            let prep = prepare(&c.config()?)?;
            c.emit_json(&serde_json::json!({
                "measure_used": prep.measure_used,
                "dense_cube": prep.cube,
                "notes": prep.notes,
                "construction": prep.construction,
                "measure": prep.mu,
            }))
        }
        Command::Spectrum(c) => {
            let prep = prepare(&c.config()?)?;
            let cfg = &prep.config;
            let profile = fracpat::fourier::spectrum(&prep.mu, cfg.spectrum_max_freq, cfg.spectrum_step)?;
            let mut buf = Vec::new();
            profile.write_csv(&mut buf)?;
            c.emit(&String::from_utf8(buf)?)
        }
        Command::Decompose { common: c, csv } => {
            let prep = prepare(&c.config()?)?;
            let cfg = &prep.config;
            let eps = epsilon_schedule(cfg.eps, cfg.b)[0];
            let report = decompose_with(
                &prep.mu, eps, cfg.a, cfg.b, &prep.pattern, cfg.s, cfg.gamma, &cfg.decompose,
            )?;
            if csv {
                let mut buf = Vec::new();
                report.write_csv(&mut buf)?;
                c.emit(&String::from_utf8(buf)?)
            } else {
                c.emit(&report.to_json()?)
            }
        }
        Command::Certify(c) => {
            let prep = prepare(&c.config()?)?;
            let cfg = &prep.config;
            let cert = positivity_certificate_with(
                &prep.mu, cfg.eps, cfg.a, cfg.b, &prep.pattern, cfg.s, cfg.gamma, &cfg.decompose,
            )?;
            c.emit_json(&cert)
        }
        Command::Search(c) => {
            let mut cfg = c.config()?;
            cfg.measure = MeasureKind::Uniform;
            let prep = prepare(&cfg)?;
            let witness = search_pattern(&prep.work, &prep.pattern, prep.config.require_distinct);
            c.emit_json(&serde_json::json!({
                "pattern": prep.pattern,
                "dense_cube": prep.cube,
                "witness": witness,
                "witness_original": witness.map(|w| prep.map_witness(&w)),
            }))
        }
        Command::Run(c) => {
            let mut cfg = c.config()?;
            if let Some(dir) = &c.output {
                cfg.output = Some(dir.display().to_string());
            }
            let bundle = run_pipeline(&cfg)?;
            let summary = serde_json::json!({
                "status": bundle.certificate.status,
                "margin": bundle.certificate.margin,
                "witness": bundle.witness_original,
                "notes": bundle.notes,
                "hash": bundle.hash,
            });
            if cfg.output.is_some() {
                println!("{}", serde_json::to_string_pretty(&summary)?);
                Ok(())
            } else {
                c.emit(&bundle.to_json()?)
            }
        }
        Command::Sweep {
            common: c,
            axis,
            values,
            json,
        } => {
            let values = values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(|v| v.parse::<f64>().with_context(|| format!("sweep value `{v}`")))
                .collect::<Result<Vec<_>>>()?;
            let table = sweep(&c.config()?, &axis, &values)?;
            if json {
                c.emit_json(&table)
            } else {
                let mut buf = Vec::new();
                table.write_csv(&mut buf)?;
                c.emit(&String::from_utf8(buf)?)
            }
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::parse_from([
            "fracpat", "certify", "--quarter", "5", "--b", "8", "--q", "-0.5", "--no-dense-cube",
        ]);
        let Command::Certify(c) = cli.command else { panic!() };
        let cfg = c.config().unwrap();
        assert_eq!(cfg.set, SetSpec::Quarter { depth: 5 });
        assert_eq!(cfg.b, 8.0);
        assert_eq!(cfg.pattern.q, -0.5);
        assert!(!cfg.dense_cube);
    }

    #[test]
    fn cantor_flag() {
        let spec = parse_cantor("0+3:2:4").unwrap();
        assert_eq!(spec, CantorSpec::quarter(4));
        assert!(parse_cantor("0+3:2").is_err());
    }
}
