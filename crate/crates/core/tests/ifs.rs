use std::collections::BTreeSet;

use approx::assert_relative_eq;
use fractal_smalldev::geometry::AaBox;
use fractal_smalldev::ifs::{
    builtin, compose, cover_levels, enumerate_level_words, sample_measure, stratified_sample, SelfSimilarSystem,
    Similarity, SystemSpec, Weights, DEFAULT_BURN_IN, DEFAULT_WORD_CAP,
};
use fractal_smalldev::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Middle-thirds membership to 20 ternary digits: repeatedly zoom into the
/// left or right third. Zooming triples rounding error, so the slack does too.
fn in_cantor(mut x: f64) -> bool {
    let mut tol = 1e-13;
    for _ in 0..20 {
        tol *= 3.0;
        let y = 3.0 * x;
        if y <= 1.0 + tol {
            x = y.clamp(0.0, 1.0);
        } else if y >= 2.0 - tol {
            x = (y - 2.0).clamp(0.0, 1.0);
        } else {
            return false;
        }
    }
    true
}

/// Disjoint intervals of lengths λ placed left to right in [0, 1].
fn line_system(scales: &[f64], weights: Weights) -> SelfSimilarSystem {
    let gap = (1.0 - scales.iter().sum::<f64>()) / (scales.len() - 1) as f64;
    let mut x = 0.0;
    let mut maps = Vec::new();
    for &s in scales {
        maps.push(Similarity::scaled(s, &[x]).unwrap());
        x += s + gap;
    }
    SelfSimilarSystem::new(maps, weights, AaBox::unit(1)).unwrap()
}

/// Level-s cover computed from scratch: breadth-first over all words, keeping
/// those whose own cost reaches s while the parent's does not.
fn brute_force_cover(system: &SelfSimilarSystem, h: f64, q: f64, s: f64) -> BTreeSet<Vec<usize>> {
    let cost = |word: &[usize]| {
        let lam: f64 = word.iter().map(|&i| system.maps()[i].scale()).product();
        let rho: f64 = word.iter().map(|&i| system.weights()[i]).product();
        -(lam.powf(h) * rho.powf(1.0 / q)).ln()
    };
    let mut out = BTreeSet::new();
    let mut frontier = vec![Vec::new()];
    while let Some(w) = frontier.pop() {
        for j in 0..system.len() {
            let mut child = w.clone();
            child.push(j);
            if cost(&child) >= s - 1e-12 {
                out.insert(child);
            } else {
                frontier.push(child);
            }
        }
    }
    out
}

#[test]
fn closed_form_exponents() {
    let c = builtin::cantor();
    assert_relative_eq!(c.similarity_dimension().unwrap().value, 2f64.ln() / 3f64.ln(), epsilon = 1e-12);
    let g = c.gamma_exponent(0.5, 2.0).unwrap();
    assert_relative_eq!(g.gamma, 2.0 * 2f64.ln() / 6f64.ln(), epsilon = 1e-12);
    assert_relative_eq!(g.rate, 2.0 * 2f64.ln() / 3f64.ln(), epsilon = 1e-12);
    let s = builtin::sierpinski();
    assert_relative_eq!(s.similarity_dimension().unwrap().value, 3f64.ln() / 2f64.ln(), epsilon = 1e-12);
    let v = builtin::vicsek();
    assert_relative_eq!(v.similarity_dimension().unwrap().value, 5f64.ln() / 3f64.ln(), epsilon = 1e-12);
    let g = builtin::lebesgue_square().gamma_exponent(0.5, f64::INFINITY).unwrap();
    assert_relative_eq!(g.rate, 4.0, epsilon = 1e-12);
}

#[test]
fn single_map_rejected() {
    let maps = vec![Similarity::scaled(0.5, &[0.0]).unwrap()];
    let err = SelfSimilarSystem::new(maps, Weights::Hausdorff, AaBox::unit(1)).unwrap_err();
    assert!(matches!(err, Error::DegenerateSystem));
}

#[test]
fn overlapping_or_oversized_systems_rejected() {
    let big = vec![Similarity::scaled(0.6, &[0.0]).unwrap(), Similarity::scaled(0.6, &[0.4]).unwrap()];
    assert!(SelfSimilarSystem::new(big, Weights::Hausdorff, AaBox::unit(1)).is_err());
    let bad_weights = vec![Similarity::scaled(0.3, &[0.0]).unwrap(), Similarity::scaled(0.3, &[0.7]).unwrap()];
    assert!(SelfSimilarSystem::new(bad_weights, Weights::Explicit(vec![0.5, 0.6]), AaBox::unit(1)).is_err());
}

#[test]
fn chaos_game_stays_on_the_cantor_set() {
    // 0.7 = 0.(2002) and 0.75 = 0.(20) in base 3; 0.4 and 0.15 have a digit 1
    assert!(in_cantor(0.25) && in_cantor(1.0 / 3.0) && in_cantor(0.0) && in_cantor(0.7) && in_cantor(0.75));
    assert!(!in_cantor(0.5) && !in_cantor(0.15) && !in_cantor(0.4));
    let wp = sample_measure(&builtin::cantor(), 5000, 11, DEFAULT_BURN_IN).unwrap();
    for p in wp.points.iter() {
        assert!(in_cantor(p[0]), "{} is not in the Cantor set", p[0]);
    }
    // the measure is symmetric: about half the points in each half
    let left = wp.points.iter().filter(|p| p[0] < 0.5).count() as f64 / 5000.0;
    assert!((left - 0.5).abs() < 0.03, "{left}");
}

#[test]
fn stratified_sites_carry_exact_cell_masses() {
    let wp = stratified_sample(&builtin::sierpinski(), 0.5, 2.0, 3.0, 2, 5).unwrap();
    assert_relative_eq!(wp.total_mass(), 1.0, epsilon = 1e-12);
    let distinct: BTreeSet<u64> = wp.masses.iter().map(|m| m.to_bits()).collect();
    assert_eq!(distinct.len(), 1);
}

#[test]
fn covers_match_brute_force() {
    let weighted = line_system(&[0.2, 0.5], Weights::Explicit(vec![0.35, 0.65]));
    for system in [builtin::cantor(), builtin::sierpinski(), weighted] {
        for &(h, q) in &[(0.5, 2.0), (0.3, 1.0), (0.8, 5.0)] {
            for s in [0.4, 1.3, 2.9, 4.2] {
                let fast: BTreeSet<Vec<usize>> = enumerate_level_words(&system, h, q, s, DEFAULT_WORD_CAP)
                    .unwrap()
                    .into_iter()
                    .map(|w| w.indices)
                    .collect();
                assert_eq!(fast, brute_force_cover(&system, h, q, s), "h={h} q={q} s={s}");
            }
        }
    }
}

#[test]
fn cover_cap_is_enforced() {
    let err = enumerate_level_words(&builtin::vicsek(), 0.5, 2.0, 20.0, 1000).unwrap_err();
    assert!(matches!(err, Error::CoverTooLarge { .. }));
}

#[test]
fn cover_levels_track_word_counts() {
    let sys = builtin::vicsek();
    let levels = cover_levels(&sys, 0.5, 2.0, 1.0, 3000).unwrap();
    for l in levels.iter().filter(|l| l.s_hi.is_finite()) {
        let words = enumerate_level_words(&sys, 0.5, 2.0, l.s_hi, DEFAULT_WORD_CAP).unwrap();
        assert_eq!(words.len(), l.cells);
        let sum: f64 = words.iter().map(|w| w.weight).sum();
        assert_relative_eq!(sum, l.power_sum, max_relative = 1e-9);
    }
}

#[test]
fn config_round_trip_through_json_and_toml() {
    let dir = tempfile::tempdir().unwrap();
    for name in builtin::NAMES {
        let sys = builtin::by_name(name).unwrap();
        let spec = SystemSpec::from_system(&sys);
        let path = dir.path().join(format!("{name}.json"));
        std::fs::write(&path, serde_json::to_string(&spec).unwrap()).unwrap();
        let back = fractal_smalldev::ifs::load_system(&path).unwrap();
        assert_eq!(back.len(), sys.len());
        assert_relative_eq!(
            back.similarity_dimension().unwrap().value,
            sys.similarity_dimension().unwrap().value,
            epsilon = 1e-15
        );
    }
    let shipped = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/cantor.toml");
    let sys = fractal_smalldev::ifs::load_system(std::path::Path::new(shipped)).unwrap();
    assert_relative_eq!(sys.gamma_exponent(0.5, 2.0).unwrap().gamma, 2.0 * 2f64.ln() / 6f64.ln(), epsilon = 1e-12);
}

#[test]
fn missing_config_reports_path() {
    let err = fractal_smalldev::ifs::load_system(std::path::Path::new("/no/such/system.toml")).unwrap_err();
    assert!(err.to_string().contains("/no/such/system.toml"));
}

fn rotation(theta: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

proptest! {
    #[test]
    fn compose_is_associative(
        s in proptest::array::uniform3(0.1f64..0.9),
        th in proptest::array::uniform3(-3.0f64..3.0),
        b in proptest::array::uniform6(-1.0f64..1.0),
        x in proptest::array::uniform2(-2.0f64..2.0),
    ) {
        let maps: Vec<Similarity> = (0..3)
            .map(|i| Similarity::new(s[i], rotation(th[i]), DVector::from_column_slice(&b[2 * i..2 * i + 2])).unwrap())
            .collect();
        let left = maps[0].compose(&maps[1]).compose(&maps[2]);
        let right = maps[0].compose(&maps[1].compose(&maps[2]));
        let (u, v) = (left.apply(&x), right.apply(&x));
        let direct = maps[0].apply(&maps[1].apply(&maps[2].apply(&x)));
        for k in 0..2 {
            prop_assert!((u[k] - v[k]).abs() < 1e-12);
            prop_assert!((u[k] - direct[k]).abs() < 1e-12);
        }
        prop_assert!((left.scale() - s[0] * s[1] * s[2]).abs() < 1e-15);
    }

    #[test]
    fn gamma_for_power_weights(
        raw in proptest::collection::vec(0.2f64..1.0, 2..6),
        s in 1.0f64..3.0,
        h in 0.1f64..1.0,
        q in 1.0f64..8.0,
    ) {
        // λᵢ = ρᵢˢ gives Σ ρᵢ^{γ(sH + 1/q)} = 1, so γ = 1/(sH + 1/q)
        let total: f64 = raw.iter().sum();
        let rho: Vec<f64> = raw.iter().map(|r| r / total).collect();
        let lam: Vec<f64> = rho.iter().map(|r| r.powf(s)).collect();
        prop_assume!(lam.iter().all(|&l| l < 0.999));
        let sys = line_system(&lam, Weights::Explicit(rho));
        let g = sys.mixed_root(h, q).unwrap().value;
        prop_assert!((g - 1.0 / (s * h + 1.0 / q)).abs() < 1e-9);
    }

    #[test]
    fn hausdorff_identity(
        scales in proptest::collection::vec(0.05f64..0.45, 2..6),
        h in 0.1f64..1.0,
        q in 1.0f64..10.0,
    ) {
        prop_assume!(scales.iter().sum::<f64>() < 0.99);
        let sys = line_system(&scales, Weights::Hausdorff);
        let d = sys.similarity_dimension().unwrap().value;
        let g = sys.gamma_exponent(h, q).unwrap();
        prop_assert!((g.rate - d / h).abs() < 1e-9, "{} vs {}", g.rate, d / h);
    }

    #[test]
    fn covers_are_prefix_free_and_mass_complete(s in 0.1f64..5.0, pick in 0usize..3) {
        let sys = [builtin::cantor(), builtin::sierpinski(), builtin::vicsek()][pick].clone();
        let words = enumerate_level_words(&sys, 0.5, 2.0, s, DEFAULT_WORD_CAP).unwrap();
        let mass: f64 = words.iter().map(|w| w.mass).sum();
        prop_assert!((mass - 1.0).abs() < 1e-12);
        for (i, a) in words.iter().enumerate() {
            for b in &words[i + 1..] {
                prop_assert!(!a.is_prefix_of(b) && !b.is_prefix_of(a));
            }
            let composed = compose(&sys, &a.indices).unwrap();
            prop_assert!((composed.scale() - a.scale).abs() < 1e-15);
        }
    }
}
