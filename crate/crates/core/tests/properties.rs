use proptest::prelude::*;

use fracpat::dyadic::content_upper;
use fracpat::integral::{config_integral, decompose, trilinear_estimate, QuadraticPattern};
use fracpat::measure::{ball_constant, frostman, mollify, regular_core, FROSTMAN_C};
use fracpat::patterns::{configuration_set, search_pattern, TripleMode};
use fracpat::setgen::{cantor, percolation, CantorSpec};
use fracpat::{DyadicInterval, DyadicSet, GridMeasure, SampledFunction};

fn set_strategy(max_res: u32) -> impl Strategy<Value = DyadicSet> {
    (1..=max_res).prop_flat_map(|m| {
        prop::collection::vec(any::<bool>(), 1usize << m).prop_map(move |bits| {
            DyadicSet::from_cells(m, bits.iter().enumerate().filter(|b| *b.1).map(|b| b.0 as u64))
                .unwrap()
        })
    })
}

fn measure_strategy(m: u32) -> impl Strategy<Value = GridMeasure> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], 1usize << m)
        .prop_filter("nonzero", |w| w.iter().sum::<f64>() > 0.0)
        .prop_map(move |w| GridMeasure::new(m, w).unwrap().normalized().unwrap())
}

/// Closed-cell membership by scanning every kept cell.
fn naive_contains(set: &DyadicSet, y: f64) -> bool {
    let h = set.cell_width();
    set.cells().any(|k| k as f64 * h <= y && y <= (k + 1) as f64 * h)
}

/// First `(x, t)` in lexicographic grid order, by a plain double loop.
fn naive_search(set: &DyadicSet, pat: &QuadraticPattern, distinct: bool) -> Option<(f64, f64)> {
    let h = set.cell_width();
    let (lo, hi) = pat.window();
    for k in 0..=set.cell_count() {
        let x = k as f64 * h;
        if !naive_contains(set, x) {
            continue;
        }
        for j in 1..=set.cell_count() * 8 {
            let t = j as f64 * h;
            if t < lo || t > hi {
                continue;
            }
            let (y, z) = (x + t, x + pat.eval(t));
            if distinct && (y == z || z == x) {
                continue;
            }
            if naive_contains(set, y) && naive_contains(set, z) {
                return Some((x, t));
            }
        }
    }
    None
}

fn bump(c: f64, r: f64, n: usize) -> SampledFunction {
    SampledFunction::tabulate(
        0.0,
        1.0,
        n,
        move |x| (1.0 - ((x - c) / r).powi(2)).max(0.0).powi(3),
        None,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn content_is_monotone_and_bounded(a in set_strategy(8), beta in 0.05..1.0f64) {
        let ca = content_upper(&a, beta).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ca));
        let mut b = a.clone();
        for k in (0..a.cell_count()).step_by(3) {
            b.insert(k);
        }
        prop_assert!(content_upper(&b, beta).unwrap() >= ca - 1e-12);
        prop_assert!(ca <= a.cell_width().powf(beta) * a.len() as f64 + 1e-12);
    }

    #[test]
    fn frostman_mass_is_content_and_balls_are_bounded(set in set_strategy(7), beta in 0.2..1.0f64) {
        prop_assume!(!set.is_empty());
        let mu = frostman(&set, beta).unwrap();
        prop_assert!((mu.total_mass() - content_upper(&set, beta).unwrap()).abs() < 1e-12);
        prop_assert!(ball_constant(&mu, beta) <= FROSTMAN_C * (1.0 + 1e-12));
        prop_assert!(mu.support().intersection(&set.complement()).unwrap().is_empty());
    }

    #[test]
    fn thin_core_has_at_most_half_the_mass(mu in measure_strategy(7)) {
        let core = regular_core(&mu, 1.0 / 20.0).unwrap();
        prop_assert!(core.core_mass <= 0.5 * core.total_mass + 1e-12);
    }

    #[test]
    fn transform_is_bounded_by_mass(mu in measure_strategy(6), xi in -300.0..300.0f64) {
        let v = mu.fourier(xi);
        prop_assert!(v.norm() <= mu.total_mass() * (1.0 + 1e-12));
        prop_assert!((mu.fourier(-xi) - v.conj()).norm() < 1e-12);
        prop_assert!((mu.fourier(0.0).re - mu.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn percolation_is_reproducible(p in 0.0..1.0f64, depth in 0u32..12, seed in any::<u64>()) {
        prop_assert_eq!(percolation(p, depth, seed).unwrap(), percolation(p, depth, seed).unwrap());
    }

    #[test]
    fn cantor_is_self_similar(
        digits in prop::collection::btree_set(0u64..8, 1..8),
        depth in 2u32..5,
    ) {
        let pattern: Vec<u64> = digits.into_iter().collect();
        let spec = CantorSpec { pattern: pattern.clone(), branching: 3, depth };
        let set = cantor(&spec).unwrap();
        let smaller = cantor(&CantorSpec { depth: depth - 1, ..spec }).unwrap();
        for &d in &pattern {
            let q = DyadicInterval::new(3, d).unwrap();
            prop_assert_eq!(fracpat::dyadic::rescale(&set, q).unwrap(), smaller.clone());
        }
    }

    #[test]
    fn search_matches_naive_oracle(set in set_strategy(7), l in 0u32..4, p in -2.0..2.0f64, q in -1.0..1.0f64, distinct: bool) {
        prop_assume!(p.abs() > 1e-3);
        let pat = QuadraticPattern::new(p, q, l).unwrap();
        let got = search_pattern(&set, &pat, distinct).map(|w| (w.x, w.t));
        prop_assert_eq!(got, naive_search(&set, &pat, distinct));
    }

    #[test]
    fn configuration_set_scales(
        pts in prop::collection::btree_set(-64i32..64, 2..9),
        q in -2.0..2.0f64,
        k in -3i32..4,
        shift in -8i32..8,
    ) {
        let base: Vec<f64> = pts.iter().map(|&v| v as f64 / 16.0).collect();
        let lambda = (k as f64).exp2();
        let moved: Vec<f64> = base.iter().map(|x| lambda * x + shift as f64).collect();
        let a = configuration_set(&base, q, TripleMode::AllowCoincident).unwrap();
        let b = configuration_set(&moved, q, TripleMode::AllowCoincident).unwrap();
        prop_assert!(!a.is_empty());
        prop_assert_eq!(a.len(), b.len());
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u / lambda - v).abs() <= 1e-9 * (u / lambda).abs().max(1.0));
        }
    }

    #[test]
    fn mollification_keeps_mass(mu in measure_strategy(6), e in 3u32..7) {
        let f = mollify(&mu, (-(e as f64)).exp2(), 10).unwrap();
        prop_assert!((f.integral() - mu.total_mass()).abs() < 1e-9);
        prop_assert!(f.values().iter().all(|&v| v >= -1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn configuration_integral_is_nonnegative(mu in measure_strategy(6), l in 1u32..4, q in -0.5..0.5f64) {
        let pat = QuadraticPattern::new(1.0, q, l).unwrap();
        let v = config_integral(&mu, 1.0 / 16.0, &pat).unwrap();
        prop_assert!(v.value >= 0.0);
    }

    #[test]
    fn nine_terms_sum_to_the_total(mu in measure_strategy(7), q in -0.5..0.5f64) {
        let pat = QuadraticPattern::new(1.0, q, 5).unwrap();
        let r = decompose(&mu, 1.0 / 32.0, 4.0, 16.0, &pat, 0.5, 0.05).unwrap();
        prop_assert!(r.identity_residual <= 1e-8 * r.total.abs().max(1e-300));
        let direct = config_integral(&mu, 1.0 / 32.0, &pat).unwrap();
        prop_assert!((r.total - direct.value).abs() <= 1e-8 * direct.value.max(1e-12) + 2.0 * direct.error_estimate);
    }

    #[test]
    fn trilinear_form_is_linear_in_each_slot(a in 0.1..2.0f64, b in 0.1..2.0f64, l in 0u32..4) {
        let pat = QuadraticPattern::new(1.0, 0.0, l).unwrap();
        let f1 = bump(0.5, 0.4, 128);
        let f2 = bump(0.55, 0.3, 128);
        let g = bump(0.6, 0.35, 128);
        let h = bump(0.4, 0.3, 128);
        let mix = f1.combine(a, &f2, b).unwrap();
        let run = |f: &SampledFunction, g: &SampledFunction, h: &SampledFunction| {
            trilinear_estimate(f, g, h, &pat, 0.05).unwrap()
        };
        // Adaptive refinement may settle at different widths, so compare within error bars.
        for (mixed, one, two) in [
            (run(&mix, &g, &h), run(&f1, &g, &h), run(&f2, &g, &h)),
            (run(&g, &h, &mix), run(&g, &h, &f1), run(&g, &h, &f2)),
        ] {
            let bar = mixed.error_estimate + a * one.error_estimate + b * two.error_estimate;
            let expected = a * one.value + b * two.value;
            prop_assert!((mixed.value - expected).abs() <= bar + 1e-12 * expected.abs(),
                "{} vs {expected} (bar {bar})", mixed.value);
        }
    }
}
