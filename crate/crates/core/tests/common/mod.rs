#![allow(dead_code)]

use cutoff_lab::family::{Family, RateLaw};
use cutoff_lab::Chain;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Matrix = Vec<Vec<f64>>;

pub fn random_bd(seed: u64, n: usize) -> Chain {
    Family::RandomBd {
        seed,
        law: RateLaw::Uniform,
    }
    .chain(n)
    .unwrap()
}

/// `count` random birth-death chains with sizes drawn from `2..=max_n`.
pub fn corpus(count: usize, max_n: usize, seed: u64) -> Vec<Chain> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            random_bd(
                seed.wrapping_mul(1000).wrapping_add(k as u64),
                rng.gen_range(2..=max_n),
            )
        })
        .collect()
}

pub fn ehrenfest(n: usize) -> Chain {
    Family::Ehrenfest.chain(n).unwrap()
}

pub fn matrix_of(chain: &Chain) -> Matrix {
    let n = chain.size();
    (0..n)
        .map(|x| (0..n).map(|y| chain.entry(x, y)).collect())
        .collect()
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn power(a: &Matrix, mut m: u64) -> Matrix {
    let mut result = identity(a.len());
    let mut base = a.clone();
    while m > 0 {
        if m & 1 == 1 {
            result = mul(&result, &base);
        }
        base = mul(&base, &base);
        m >>= 1;
    }
    result
}

pub fn lazy(a: &Matrix, delta: f64) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (1.0 - delta) * a[i][j] + if i == j { delta } else { 0.0 })
                .collect()
        })
        .collect()
}

/// `exp(-t(I - K))` by scaling and squaring a Taylor polynomial.
pub fn heat_kernel(k: &Matrix, t: f64) -> Matrix {
    let n = k.len();
    let squarings = (t.max(1.0).log2().ceil() as u32) + 4;
    let h = t / 2f64.powi(squarings as i32);
    let gen: Matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| h * (k[i][j] - if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    let mut sum = identity(n);
    let mut term = identity(n);
    for d in 1..=24 {
        term = mul(&term, &gen);
        let scale = 1.0 / d as f64;
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x *= scale;
            }
        }
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

pub fn row_tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Worst-case `(tv, sep, dbar)` over all rows of a transition matrix.
pub fn brute_distances(m: &Matrix, pi: &[f64]) -> (f64, f64, f64) {
    let tv = m.iter().map(|r| row_tv(r, pi)).fold(0.0, f64::max);
    let sep = m
        .iter()
        .flat_map(|r| r.iter().zip(pi).map(|(x, p)| 1.0 - x / p))
        .fold(0.0, f64::max);
    let mut dbar: f64 = 0.0;
    for a in m {
        for b in m {
            dbar = dbar.max(row_tv(a, b));
        }
    }
    (tv, sep, dbar)
}

/// Stationary law of a birth-death chain from the product formula.
pub fn product_stationary(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut w = vec![1.0];
    for i in 1..p.len() {
        let next = w[i - 1] * p[i - 1] / q[i];
        w.push(next);
    }
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}
