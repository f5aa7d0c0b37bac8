mod common;

use common::*;
use cutoff_lab::bd::corner_separation;
use cutoff_lab::distances::distance;
use cutoff_lab::{eigen_summary, Chain, DistanceQuery, Metric, TimeMode};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_reversible(rng: &mut ChaCha8Rng, n: usize) -> Chain {
    let mut w = vec![vec![0.0; n]; n];
    for x in 0..n {
        for y in x..n {
            let v = if rng.gen_bool(0.6) || y == x + 1 {
                rng.gen_range(0.01..1.0)
            } else {
                0.0
            };
            w[x][y] = v;
            w[y][x] = v;
        }
    }
    let rows: Vec<Vec<f64>> = w
        .iter()
        .map(|r| {
            let total: f64 = r.iter().sum();
            r.iter().map(|v| v / total).collect()
        })
        .collect();
    Chain::dense(&rows).unwrap()
}

fn random_stochastic(rng: &mut ChaCha8Rng, n: usize) -> Chain {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let total: f64 = r.iter().sum();
            r.iter().map(|v| v / total).collect()
        })
        .collect();
    Chain::dense(&rows).unwrap()
}

fn nalgebra_laplacian_spectrum(chain: &Chain) -> Vec<f64> {
    let n = chain.size();
    let pi = chain.stationary();
    let sym = DMatrix::from_fn(n, n, |x, y| {
        let s = pi[x].sqrt() * chain.entry(x, y) / pi[y].sqrt();
        if x == y {
            1.0 - s
        } else {
            -s
        }
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn dense_spectrum_matches_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.gen_range(2..=12);
        let chain = random_reversible(&mut rng, n);
        let s = eigen_summary(&chain).unwrap();
        let oracle = nalgebra_laplacian_spectrum(&chain);
        assert!(oracle[0].abs() < 1e-9);
        for (a, b) in s.eigenvalues.iter().zip(&oracle[1..]) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn birth_death_spectrum_matches_nalgebra() {
    for chain in corpus(60, 40, 5) {
        let s = eigen_summary(&chain).unwrap();
        let oracle = nalgebra_laplacian_spectrum(&chain);
        for (a, b) in s.eigenvalues.iter().zip(&oracle[1..]) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn corner_separation_matches_worst_case_separation() {
    let mode = TimeMode::Lazy { delta: 0.5 };
    let query = DistanceQuery::exhaustive(mode, Metric::Sep).unwrap();
    for chain in corpus(25, 32, 9) {
        for m in [0u64, 1, 3, 10, 40, 120, 200] {
            let corner = corner_separation(&chain, m as f64, mode, 1e-13).unwrap();
            let direct = distance(&chain, &query, m as f64, 1e-13).unwrap();
            assert!(
                (corner - direct).abs() < 1e-9,
                "m={m}: {corner} vs {direct}"
            );
        }
    }
}

#[test]
fn discrete_distances_match_matrix_powers() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let n = rng.gen_range(2..=7);
        let chain = random_stochastic(&mut rng, n);
        let k = matrix_of(&chain);
        let pi = chain.stationary().to_vec();
        for m in [0u64, 1, 2, 5, 13] {
            let (tv, sep, dbar) = brute_distances(&power(&k, m), &pi);
            for (metric, want) in [(Metric::Tv, tv), (Metric::Sep, sep), (Metric::Dbar, dbar)] {
                let q = DistanceQuery::worst_case(TimeMode::Discrete, metric).unwrap();
                let got = distance(&chain, &q, m as f64, 1e-13).unwrap();
                assert!(
                    (got - want).abs() < 1e-12,
                    "{metric:?} m={m}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn continuous_distances_match_heat_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..30 {
        let n = rng.gen_range(2..=7);
        let chain = random_stochastic(&mut rng, n);
        let k = matrix_of(&chain);
        let pi = chain.stationary().to_vec();
        for t in [0.0, 0.3, 1.7, 6.0] {
            let (tv, sep, dbar) = brute_distances(&heat_kernel(&k, t), &pi);
            for (metric, want) in [(Metric::Tv, tv), (Metric::Sep, sep), (Metric::Dbar, dbar)] {
                let q = DistanceQuery::worst_case(TimeMode::Continuous, metric).unwrap();
                let got = distance(&chain, &q, t, 1e-13).unwrap();
                assert!(
                    (got - want).abs() < 1e-10,
                    "{metric:?} t={t}: {got} vs {want}"
                );
            }
        }
    }
}
