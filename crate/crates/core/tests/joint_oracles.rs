mod common;

use std::f64::consts::PI;

use common::rng;
use proptest::prelude::*;
use rand::Rng;
use rankjoint_core::joint::{
    default_bandwidth, detect_anomalies, joint_density, rank_distances, standardize,
    DetectOptions, RankVector,
};

/// Mid-ranks by counting: 1 + #{smaller} + (#{equal} - 1) / 2.
fn rank_oracle(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let less = values.iter().filter(|&&w| w < v).count() as f64;
            let equal = values.iter().filter(|&&w| w == v).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

/// Full double sum with no cutoff.
fn kde_oracle(a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
    let m = a.len() as f64;
    let norm = 1.0 / (2.0 * PI * h * h);
    a.iter()
        .zip(b)
        .map(|(&ai, &bi)| {
            let s: f64 = a
                .iter()
                .zip(b)
                .map(|(&aj, &bj)| {
                    norm * (-((ai - aj).powi(2) + (bi - bj).powi(2)) / (2.0 * h * h)).exp()
                })
                .sum();
            s / m
        })
        .collect()
}

fn ids(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("c{i:05}")).collect()
}

fn random_ranks(seed: u64, m: usize, ties: bool) -> (RankVector, RankVector) {
    let mut g = rng(seed);
    let draw = |g: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        (0..m)
            .map(|_| {
                if ties {
                    f64::from(g.random_range(0u32..12))
                } else {
                    g.random_range(0.0..10.0)
                }
            })
            .collect()
    };
    let da = draw(&mut g);
    let db = draw(&mut g);
    (
        RankVector::from_distances(ids(m), &da).unwrap(),
        RankVector::from_distances(ids(m), &db).unwrap(),
    )
}

#[test]
fn ranks_match_counting_oracle() {
    let mut g = rng(1);
    for t in 0..300 {
        let m = g.random_range(1..120);
        let v: Vec<f64> = if t % 2 == 0 {
            (0..m).map(|_| f64::from(g.random_range(0u32..5))).collect()
        } else {
            (0..m).map(|_| g.random_range(0.0..1.0)).collect()
        };
        assert_eq!(rank_distances(&v).unwrap(), rank_oracle(&v));
    }
}

#[test]
fn kde_matches_direct_double_sum() {
    for (m, ties) in [(50, false), (200, true), (500, false), (500, true)] {
        let (a, b) = random_ranks(m as u64, m, ties);
        let h = default_bandwidth(m);
        let jrd = joint_density(&a, &b, 32, h).unwrap();
        let oracle = kde_oracle(&a.ranks, &b.ranks, h);
        for (x, y) in jrd.density.iter().zip(&oracle) {
            assert!((x - y).abs() / y <= 1e-12, "{x} vs {y}");
        }
    }
}

#[test]
fn grid_matches_direct_sum_at_cell_centres() {
    let m = 120;
    let (a, b) = random_ranks(77, m, false);
    let h = 7.5;
    let g = 20;
    let jrd = joint_density(&a, &b, g, h).unwrap();
    let axis = jrd.grid_axis();
    let norm = 1.0 / (2.0 * PI * h * h);
    for (r, &y) in axis.iter().enumerate() {
        for (c, &x) in axis.iter().enumerate() {
            let s: f64 = a
                .ranks
                .iter()
                .zip(&b.ranks)
                .map(|(&aj, &bj)| norm * (-((x - aj).powi(2) + (y - bj).powi(2)) / (2.0 * h * h)).exp())
                .sum::<f64>()
                / m as f64;
            let got = jrd.grid[r * g + c];
            assert!((got - s).abs() <= 1e-12 * s.max(1e-12), "{got} vs {s}");
        }
    }
}

#[test]
fn z_scores_are_standardized() {
    let (a, b) = random_ranks(5, 400, false);
    let jrd = joint_density(&a, &b, 16, 8.0).unwrap();
    let m = jrd.len() as f64;
    let mean = jrd.z_score.iter().sum::<f64>() / m;
    let var = jrd.z_score.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (m - 1.0);
    assert!(mean.abs() <= 1e-10);
    assert!((var.sqrt() - 1.0).abs() <= 1e-10);
}

#[test]
fn constant_values_standardize_to_zero() {
    let (_, _, z) = standardize(&[3.0; 10]);
    assert!(z.iter().all(|&v| v == 0.0));
}

#[test]
fn density_is_invariant_to_monotone_transforms() {
    let mut g = rng(9);
    let da: Vec<f64> = (0..150).map(|_| g.random_range(0.1..5.0)).collect();
    let db: Vec<f64> = (0..150).map(|_| g.random_range(0.1..5.0)).collect();
    let base = joint_density(
        &RankVector::from_distances(ids(150), &da).unwrap(),
        &RankVector::from_distances(ids(150), &db).unwrap(),
        16,
        3.0,
    )
    .unwrap();
    let ta: Vec<f64> = da.iter().map(|x| x.ln() * 3.0 + 1.0).collect();
    let tb: Vec<f64> = db.iter().map(|x| x.powi(3)).collect();
    let moved = joint_density(
        &RankVector::from_distances(ids(150), &ta).unwrap(),
        &RankVector::from_distances(ids(150), &tb).unwrap(),
        16,
        3.0,
    )
    .unwrap();
    assert_eq!(base, moved);
}

#[test]
fn flagged_count_shrinks_as_threshold_rises() {
    let (a, b) = random_ranks(21, 300, false);
    let jrd = joint_density(&a, &b, 16, 6.0).unwrap();
    let mut prev = usize::MAX;
    for t in [-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let opts = DetectOptions {
            threshold: t,
            ..DetectOptions::default()
        };
        let n = detect_anomalies(&jrd, &opts).unwrap().counts.flagged;
        assert!(n <= prev);
        prev = n;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ranks_are_a_permutation_of_positions(v in proptest::collection::vec(0u8..6, 1..50)) {
        let values: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
        let r = rank_distances(&values).unwrap();
        let m = values.len() as f64;
        prop_assert!((r.iter().sum::<f64>() - m * (m + 1.0) / 2.0).abs() < 1e-9);
        prop_assert_eq!(r, rank_oracle(&values));
    }
}
