//! Two-way MANOVA checked against a normal-equations implementation of the
//! general linear hypothesis.

mod common;

use common::{check_rao, oracle_categorical, oracle_numeric, rel, synth, Row};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use studiomap::stats::{anova_posthoc, manova_two_way, Effect, YearCoding};
use studiomap::Nation;

#[test]
fn numeric_coding_matches_glh_oracle() {
    for seed in 0..20 {
        let d = synth(seed, 60 + seed as usize * 7, 5);
        let got = manova_two_way(&d.y, &d.nation, &d.year, YearCoding::Numeric).unwrap();
        let want = oracle_numeric(&d);
        for (r, w) in got.iter().zip(want) {
            assert!(
                rel(r.wilks_lambda, w) < 1e-8,
                "seed {seed} {:?}: {} vs {w}",
                r.effect,
                r.wilks_lambda
            );
            assert_eq!(r.df1, 4.0);
            check_rao(r, w, 1.0, (d.y.len() - 4) as f64);
        }
    }
}

#[test]
fn categorical_coding_matches_residual_oracle() {
    for seed in 0..20 {
        let d = synth(100 + seed, 80 + seed as usize * 5, 4);
        let got = manova_two_way(&d.y, &d.nation, &d.year, YearCoding::Categorical).unwrap();
        let want = oracle_categorical(&d);
        for (r, w) in got.iter().zip(want) {
            assert!(
                rel(r.wilks_lambda, w) < 1e-8,
                "seed {seed} {:?}: {} vs {w}",
                r.effect,
                r.wilks_lambda
            );
            // full model: intercept, nation, 3 year dummies, 3 interactions
            check_rao(r, w, r.df1 / 4.0, (d.y.len() - 8) as f64);
        }
        // 4 years: nation q=1, year q=3, interaction q=3
        assert_eq!(got[0].df1, 4.0);
        assert_eq!(got[1].df1, 12.0);
        assert_eq!(got[2].df1, 12.0);
    }
}

#[test]
fn empty_interaction_cells_are_dropped() {
    // 1993 contains only German tracks, so one interaction column aliases
    let mut d = synth(7, 120, 3);
    for i in 0..20 {
        d.y.push([i as f64 * 0.1, (i as f64).sin(), (i as f64).cos(), 0.0]);
        d.nation.push(Nation::Germany);
        d.year.push(1993);
    }
    let got = manova_two_way(&d.y, &d.nation, &d.year, YearCoding::Categorical).unwrap();
    assert_eq!(got[1].df1, 12.0);
    assert_eq!(got[2].df1, 8.0);
}

#[test]
fn affine_invariance() {
    let d = synth(3, 200, 6);
    let base = manova_two_way(&d.y, &d.nation, &d.year, YearCoding::Numeric).unwrap();
    let scaled: Vec<Row> =
        d.y.iter()
            .map(|r| [3.0 * r[0] + 1.0, -0.5 * r[1] + 7.0, 100.0 * r[2], r[3] - 2.0])
            .collect();
    let moved = manova_two_way(&scaled, &d.nation, &d.year, YearCoding::Numeric).unwrap();
    for (a, b) in base.iter().zip(&moved) {
        assert!(rel(b.wilks_lambda, a.wilks_lambda) < 1e-9);
        assert!((a.p_value - b.p_value).abs() < 1e-9);
    }
}

#[test]
fn null_data_gives_lambda_near_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 10_000;
    let y: Vec<Row> = (0..n)
        .map(|_| std::array::from_fn(|_| StandardNormal.sample(&mut rng)))
        .collect();
    let nation: Vec<Nation> = (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                Nation::Germany
            } else {
                Nation::Usa
            }
        })
        .collect();
    let year: Vec<i32> = (0..n).map(|_| 1990 + rng.random_range(0..20)).collect();
    // E[1 - lambda] grows like p q / N, so the categorical run uses 5 levels
    let coarse: Vec<i32> = year.iter().map(|y| 1990 + (y - 1990) / 4).collect();
    for (coding, year) in [(YearCoding::Numeric, &year), (YearCoding::Categorical, &coarse)] {
        for r in manova_two_way(&y, &nation, year, coding).unwrap() {
            assert!((0.99..=1.0).contains(&r.wilks_lambda), "{coding:?} {r:?}");
        }
    }
}

#[test]
fn nation_shift_is_detected() {
    let mut d = synth(11, 400, 5);
    for (r, g) in d.y.iter_mut().zip(&d.nation) {
        if *g == Nation::Germany {
            r[3] += 1.0;
        }
    }
    let res = manova_two_way(&d.y, &d.nation, &d.year, YearCoding::Numeric).unwrap();
    let nation = res.iter().find(|r| r.effect == Effect::Nation).unwrap();
    assert!(nation.p_value < 1e-10);
    assert!(nation.partial_eta_sq > 0.1);
}

#[test]
fn posthoc_isolates_shifted_feature() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 600;
    let nation: Vec<Nation> = (0..n)
        .map(|i| if i % 2 == 0 { Nation::Germany } else { Nation::Usa })
        .collect();
    let year: Vec<i32> = (0..n).map(|i| 1990 + (i / 2) % 10).collect();
    let y: Vec<Row> = nation
        .iter()
        .map(|g| {
            let mut r: Row = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
            if *g == Nation::Germany {
                r[2] += 3.0;
            }
            r
        })
        .collect();
    let res = anova_posthoc(&y, &nation, &year, YearCoding::Numeric).unwrap();
    assert_eq!(res.len(), 12);
    for r in &res {
        let shifted = r.feature == "channel_correlation" && r.effect == Effect::Nation;
        if shifted {
            assert!(r.p_bonferroni < 1e-10, "{r:?}");
        } else {
            assert!(r.p_bonferroni >= 0.01, "{r:?}");
        }
        assert!(r.p_bonferroni >= r.p_raw);
        assert!(r.p_bonferroni <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn statistics_stay_in_range(seed in 0u64..10_000, n in 20usize..120) {
        let d = synth(seed, n, 4);
        for coding in [YearCoding::Numeric, YearCoding::Categorical] {
            let Ok(res) = manova_two_way(&d.y, &d.nation, &d.year, coding) else { continue };
            for r in res {
                prop_assert!(r.wilks_lambda > 0.0 && r.wilks_lambda <= 1.0);
                prop_assert!((0.0..1.0).contains(&r.partial_eta_sq));
                prop_assert!((0.0..=1.0).contains(&r.p_value));
                prop_assert!(r.f_stat >= 0.0);
            }
        }
    }

    #[test]
    fn row_order_does_not_matter(seed in 0u64..10_000) {
        let d = synth(seed, 50, 3);
        let a = manova_two_way(&d.y, &d.nation, &d.year, YearCoding::Numeric).unwrap();
        let idx: Vec<usize> = (0..d.y.len()).rev().collect();
        let y: Vec<Row> = idx.iter().map(|&i| d.y[i]).collect();
        let g: Vec<Nation> = idx.iter().map(|&i| d.nation[i]).collect();
        let yr: Vec<i32> = idx.iter().map(|&i| d.year[i]).collect();
        let b = manova_two_way(&y, &g, &yr, YearCoding::Numeric).unwrap();
        for (x, z) in a.iter().zip(&b) {
            prop_assert!(rel(z.wilks_lambda, x.wilks_lambda) < 1e-9);
        }
    }
}
