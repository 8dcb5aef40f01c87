//! Worked examples per module, each checked against an oracle written here.

use std::f64::consts::PI;

use fracpat::dyadic::{content_upper, content_within, find_dense_cube, rescale};
use fracpat::fourier::{
    exponent_check, measure_sobolev, rho, s_energy_frequency, s_energy_spatial, spectrum,
    SobolevIndex,
};
use fracpat::integral::{
    positivity_certificate, trilinear_estimate, CertificateStatus, QuadraticPattern,
};
use fracpat::measure::{
    ball_mass, frostman, mollify, regular_core, spectral_gap_measure_with, GapParameters,
    FROSTMAN_C,
};
use fracpat::patterns::{configuration_value, search_pattern, translation_defect};
use fracpat::pipeline::{sweep, MeasureKind, RunConfig, SetSpec};
use fracpat::setgen::{cantor, percolation, CantorSpec};
use fracpat::{DyadicInterval, DyadicSet, GridMeasure, SampledFunction};

/// Plain recursive content: `min(l(Q)^β, Σ children)`, leaves cost `l^β` when occupied.
fn naive_content(mask: &[bool], beta: f64) -> f64 {
    fn go(mask: &[bool], beta: f64, len: f64) -> f64 {
        if !mask.iter().any(|&b| b) {
            return 0.0;
        }
        let own = len.powf(beta);
        if mask.len() == 1 {
            return own;
        }
        let (l, r) = mask.split_at(mask.len() / 2);
        own.min(go(l, beta, len / 2.0) + go(r, beta, len / 2.0))
    }
    go(mask, beta, 1.0)
}

fn mask_of(set: &DyadicSet) -> Vec<bool> {
    (0..set.cell_count()).map(|k| set.contains_cell(k)).collect()
}

#[test]
fn quarter_cantor_content_is_one_at_half() {
    let mut v = 1.0f64;
    for n in 1..=7 {
        v = 1f64.min(2.0 * (0.5f64.sqrt()).min(v / 2.0));
        let set = cantor(&CantorSpec::quarter(n)).unwrap();
        let c = content_upper(&set, 0.5).unwrap();
        assert!((c - v).abs() < 1e-12, "depth {n}: {c} vs {v}");
        assert!((c - 1.0).abs() < 1e-12);
        assert!((naive_content(&mask_of(&set), 0.5) - c).abs() < 1e-12);
    }
}

#[test]
fn content_matches_naive_recursion_on_percolation() {
    for seed in 0..6 {
        let set = percolation(0.55, 9, seed).unwrap();
        for beta in [0.3, 0.6, 0.85, 1.0] {
            let c = content_upper(&set, beta).unwrap();
            let oracle = naive_content(&mask_of(&set), beta);
            assert!((c - oracle).abs() <= 1e-12 * oracle.max(1.0), "{seed} {beta}");
        }
    }
}

#[test]
fn dense_cube_on_percolation_is_verified_post_hoc() {
    let set = percolation(0.5, 6, 7).unwrap();
    let (beta, delta) = (0.8, 0.2);
    let q = find_dense_cube(&set, beta, delta).unwrap();
    let mask = mask_of(&set);
    let oracle = |q: DyadicInterval| {
        let r = q.cell_range(6);
        naive_content(&mask[r.start as usize..r.end as usize], beta) * q.length().powf(beta)
    };
    assert!(oracle(q) >= (1.0 - delta) * q.length().powf(beta) * (1.0 - 1e-12));
    assert!((content_within(&set, q, beta).unwrap() - oracle(q)).abs() < 1e-12);
    for level in 0..q.level {
        for index in 0..(1u64 << level) {
            let c = DyadicInterval::new(level, index).unwrap();
            assert!(oracle(c) < (1.0 - delta) * c.length().powf(beta));
        }
    }
}

#[test]
fn quarter_cantor_is_self_similar() {
    for n in 2..=6 {
        let set = cantor(&CantorSpec::quarter(n)).unwrap();
        let smaller = cantor(&CantorSpec::quarter(n - 1)).unwrap();
        for index in [0, 3] {
            let child = DyadicInterval::new(2, index).unwrap();
            assert_eq!(rescale(&set, child).unwrap(), smaller);
        }
    }
    let spec = CantorSpec {
        pattern: vec![0, 2, 7],
        branching: 3,
        depth: 3,
    };
    let set = cantor(&spec).unwrap();
    let smaller = cantor(&CantorSpec { depth: 2, ..spec }).unwrap();
    for index in [0, 2, 7] {
        assert_eq!(rescale(&set, DyadicInterval::new(3, index).unwrap()).unwrap(), smaller);
    }
}

#[test]
fn percolation_count_is_binomial() {
    let set = percolation(0.7, 10, 42).unwrap();
    let sigma = (1024.0f64 * 0.21).sqrt();
    assert!((set.len() as f64 - 0.7 * 1024.0).abs() <= 3.0 * sigma, "{}", set.len());
    assert_eq!(set, percolation(0.7, 10, 42).unwrap());
}

#[test]
fn frostman_on_quarter_cantor() {
    let set = cantor(&CantorSpec::quarter(6)).unwrap();
    let mu = frostman(&set, 0.5).unwrap();
    assert!((mu.total_mass() - 1.0).abs() < 1e-12);
    let h = mu.cell_width();
    let direct = |x: f64, r: f64| -> f64 {
        mu.weights()
            .iter()
            .enumerate()
            .map(|(j, w)| {
                let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
                w * ((b.min(x + r) - a.max(x - r)).max(0.0) / h)
            })
            .sum()
    };
    for j in 0..mu.len() {
        let x = (j as f64 + 0.5) * h;
        for k in 0..=mu.resolution() {
            let r = (-(k as f64)).exp2();
            let m = direct(x, r);
            assert!((ball_mass(&mu, x, r).unwrap() - m).abs() < 1e-12);
            assert!(m <= FROSTMAN_C * r.sqrt() * (1.0 + 1e-12), "x={x} r={r}");
        }
    }
    for k in 0..6 {
        let r = 0.25f64.powi(k);
        assert!(direct(0.0, r) <= FROSTMAN_C * 0.5f64.powi(k));
    }
}

#[test]
fn mollified_percolation_keeps_mass() {
    let set = percolation(0.6, 10, 3).unwrap();
    let mu = GridMeasure::uniform_on(&set).unwrap().normalized().unwrap();
    let f = mollify(&mu, 1.0 / 32.0, 12).unwrap();
    assert!((f.integral() - 1.0).abs() < 1e-8, "{}", f.integral());
}

#[test]
fn spectral_gap_children_and_core() {
    let set = percolation(0.97, 12, 11).unwrap();
    let params = GapParameters::new(4.0, 4.5).unwrap().with_scale(5, Some(0.01));
    let (mu, report) = spectral_gap_measure_with(&set, &params, 0.9).unwrap();
    for (k, w) in report.child_masses.iter().enumerate() {
        let q = DyadicInterval::new(5, k as u64).unwrap();
        assert!(*w <= 2.0 * (-5f64).exp2() * (1.0 + 1e-12));
        assert!((mu.mass_of(q) - w).abs() < 1e-14);
    }
    let core = regular_core(&mu, 1.0 / 20.0).unwrap();
    assert!(core.core_mass <= 0.5 * core.total_mass);
}

#[test]
fn quarter_cantor_transform_is_a_product() {
    let n = 5;
    let set = cantor(&CantorSpec::quarter(n)).unwrap();
    let mu = GridMeasure::uniform_on(&set).unwrap().normalized().unwrap();
    let h = 0.25f64.powi(n as i32);
    for xi in [0.0, 0.37, 1.0, 3.3, 17.25, 100.5, 511.0] {
        let mut prod = num_complex::Complex64::new(1.0, 0.0);
        for k in 1..=n {
            let a = 0.75 * 0.25f64.powi(k as i32 - 1) * xi;
            prod *= num_complex::Complex64::from_polar(1.0, -PI * a) * (PI * a).cos();
        }
        let u = PI * h * xi;
        let sinc = if u == 0.0 { 1.0 } else { u.sin() / u };
        let expected = prod * num_complex::Complex64::from_polar(sinc, -u);
        let got = mu.fourier(xi);
        assert!((got - expected).norm() < 1e-12, "ξ={xi}: {got} vs {expected}");
    }
    let profile = spectrum(&mu, 4.0, 0.5).unwrap();
    assert!((profile.at(0).unwrap().re - 1.0).abs() < 1e-14);
}

#[test]
fn lebesgue_energy_closed_form() {
    let mu = GridMeasure::lebesgue(10).unwrap();
    for s in [0.25, 0.5, 0.75] {
        let exact = 2.0 / ((1.0 - s) * (2.0 - s));
        assert!((s_energy_spatial(&mu, s).unwrap() - exact).abs() < 1e-6 * exact);
        let f = s_energy_frequency(&mu, s).unwrap().value;
        assert!((f - exact).abs() < 0.02 * exact, "s={s}: {f} vs {exact}");
    }
    let check = exponent_check(0.5).unwrap();
    assert!(check.operative_error() < check.printed_error());
}

#[test]
fn lebesgue_negative_sobolev_norm() {
    let gamma = 0.1;
    let mu = GridMeasure::lebesgue(8).unwrap();
    let got = measure_sobolev(&mu, SobolevIndex::negative(gamma)).unwrap().norm_squared;
    // Simpson on [0, X] for sin²(πξ)/(πξ)²·(1+ξ²)^{-γ/2}, plus the mean tail.
    let x_max = 20_000.0;
    let n = 2_560_000usize;
    let dx = x_max / n as f64;
    let f = |x: f64| {
        let s = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
        s * s * (1.0 + x * x).powf(-0.5 * gamma)
    };
    let mut acc = f(0.0) + f(x_max);
    for k in 1..n {
        acc += f(k as f64 * dx) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    let body = acc * dx / 3.0;
    let tail = 1.0 / (2.0 * PI * PI * (1.0 + gamma) * x_max.powf(1.0 + gamma));
    let oracle = 2.0 * (body + tail);
    assert!((got - oracle).abs() < 1e-6 * oracle, "{got} vs {oracle}");
}

#[test]
fn negative_sobolev_norm_is_dominated_by_energy() {
    // (1+ξ²)^{-γ/2} ≤ |ξ|^{-γ} gives ‖μ‖²_{H^{-γ}} ≤ I_{1−γ}(μ)/ρ_{1−γ}.
    let gamma = 0.3;
    let s = 1.0 - gamma;
    let measures = [
        GridMeasure::lebesgue(10).unwrap(),
        frostman(&cantor(&CantorSpec::quarter(5)).unwrap(), 0.5).unwrap(),
        GridMeasure::uniform_on(&percolation(0.5, 10, 1).unwrap())
            .unwrap()
            .normalized()
            .unwrap(),
    ];
    for mu in &measures {
        let norm = measure_sobolev(mu, SobolevIndex::negative(gamma)).unwrap().norm_squared;
        let energy = s_energy_spatial(mu, s).unwrap();
        assert!(norm <= energy / rho(s) * (1.0 + 1e-3), "{norm} vs {}", energy / rho(s));
    }
}

#[test]
fn trilinear_ratio_is_stable_under_refinement() {
    let pat = QuadraticPattern::new(1.0, 0.0, 2).unwrap();
    let density = |n: u32| {
        let f = mollify(&GridMeasure::lebesgue(8).unwrap(), 1.0 / 16.0, n).unwrap();
        f
    };
    let coarse: SampledFunction = density(9);
    let fine: SampledFunction = density(10);
    let a = trilinear_estimate(&coarse, &coarse, &coarse, &pat, 0.05).unwrap();
    let b = trilinear_estimate(&fine, &fine, &fine, &pat, 0.05).unwrap();
    assert!(a.ratio.is_finite() && a.ratio > 0.0);
    assert!((a.ratio - b.ratio).abs() < 0.02 * b.ratio, "{} vs {}", a.ratio, b.ratio);
}

#[test]
fn lebesgue_certificate_is_positive() {
    let mu = GridMeasure::lebesgue(10).unwrap();
    let pat = QuadraticPattern::new(1.0, 0.0, 5).unwrap();
    let cert = positivity_certificate(&mu, Some(1.0 / 256.0), 4.0, 64.0, &pat, 0.5, 0.05).unwrap();
    assert_eq!(cert.status, CertificateStatus::Positive);
    assert!(!cert.degenerate_t);
}

#[test]
fn separated_cells_are_not_certified_silently() {
    let mut w = vec![0.0; 1 << 8];
    w[0] = 0.5;
    w[255] = 0.5;
    let mu = GridMeasure::new(8, w).unwrap();
    let pat = QuadraticPattern::new(1.0, 0.0, 5).unwrap();
    let cert = positivity_certificate(&mu, None, 4.0, 16.0, &pat, 0.5, 0.05).unwrap();
    assert!(cert.status == CertificateStatus::Inconclusive || cert.degenerate_t);
}

#[test]
fn quarter_cantor_witness_against_certificate() {
    let set = cantor(&CantorSpec::quarter(5)).unwrap();
    let mu = frostman(&set, 0.5).unwrap();
    let pat = QuadraticPattern::new(1.0, 0.0, 5).unwrap();
    let cert = positivity_certificate(&mu, None, 4.0, 16.0, &pat, 0.4, 0.05).unwrap();
    let witness = search_pattern(&set, &cert.pattern, false);
    if cert.status == CertificateStatus::Positive {
        assert!(witness.is_some());
    }
    if let Some(w) = witness {
        assert!(w.verify(&set));
        let (lo, hi) = pat.window();
        assert!(w.t >= lo && w.t <= hi);
    }
}

#[test]
fn translation_defect_on_percolation_tends_to_zero() {
    let set = percolation(0.6, 10, 5).unwrap();
    let defects: Vec<f64> = (3..=10)
        .map(|k| {
            let t = (-(k as f64)).exp2();
            translation_defect(&set, t, &[&|t| t, &|t| t * t])
        })
        .collect();
    let spacing = set.cell_width();
    assert!(defects.windows(2).all(|w| w[1] <= w[0] + 4.0 * spacing), "{defects:?}");
    // Below one cell both shifts stay inside closed cells.
    let tiny = translation_defect(&set, 0.25 * spacing, &[&|t| t, &|t| t * t]);
    assert!(tiny <= *defects.last().unwrap());
    assert!(defects.last().unwrap() < defects.first().unwrap());
}

#[test]
fn quarter_cantor_sweep_over_q() {
    let cfg = RunConfig {
        set: SetSpec::Quarter { depth: 5 },
        beta: 0.5,
        measure: MeasureKind::Frostman,
        ..RunConfig::default()
    };
    let mut found = 0;
    for q in [-0.5, 0.0, 0.5] {
        let mut c = cfg.clone();
        c.pattern.q = q;
        let bundle = fracpat::pipeline::run_pipeline(&c).unwrap();
        let Some(w) = bundle.witness_original else {
            assert!(bundle.witness.is_none());
            continue;
        };
        found += 1;
        assert!(w.verified);
        let [x, y, z] = w.points;
        let a = configuration_value(x, y, z, q);
        assert!((a - w.p).abs() < 1e-9 * w.p.abs().max(1.0), "{a} vs {}", w.p);
    }
    assert!(found >= 2);
}

#[test]
fn beta_sweep_on_percolation() {
    let cfg = RunConfig {
        set: SetSpec::Percolation {
            p: 0.8,
            depth: 10,
            seed: Some(9),
        },
        measure: MeasureKind::Frostman,
        ..RunConfig::default()
    };
    let betas = [0.6, 0.7, 0.8, 0.9, 0.95];
    let table = sweep(&cfg, "beta", &betas).unwrap();
    assert_eq!(table.rows.len(), betas.len());
    let contents: Vec<f64> = table.rows.iter().map(|r| r.content.unwrap()).collect();
    assert!(contents.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{contents:?}");
    assert!(table.rows.iter().all(|r| r.status.is_some()));
}

#[test]
fn trilinear_sweep_feeds_kappa_regression() {
    let table = sweep(&RunConfig::default(), "trilinear_l", &[3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
    let fit = table.kappa_fit.unwrap();
    assert!(fit.kappa.is_finite());
    let logs: Vec<f64> = table.rows.iter().map(|r| r.trilinear_ratio.unwrap().log2()).collect();
    let steps: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps.iter().all(|d| d.signum() == steps[0].signum()), "{logs:?}");
}
