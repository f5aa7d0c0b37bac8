//! Finite Markov chains in discrete, δ-lazy, and continuous time.
//!
//! A [`Chain`] is either a dense row-stochastic matrix or a birth-death chain
//! stored as rate triples `(p_i, q_i, r_i)`. Construction validates the
//! kernel, checks irreducibility, and caches the stationary distribution.
//! Distributions are row vectors and evolve on the left: `μ ↦ μK`.

use std::collections::VecDeque;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::poisson::PoissonTerms;

/// Tolerance on row sums and on the normalization of probability vectors.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Tolerance on `πK = π` after construction.
pub const STATIONARY_TOL: f64 = 1e-10;
/// Loosest truncation tolerance accepted by the uniformization routines.
pub const MAX_UNIFORMIZATION_TOL: f64 = 1e-6;

/// A nonnegative vector summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        if let Some((i, x)) = entries
            .iter()
            .enumerate()
            .find(|(_, x)| !x.is_finite() || **x < 0.0)
        {
            return Err(Error::InvalidDistribution(format!("entry {i} is {x}")));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(ProbabilityVector(entries))
    }

    pub fn point_mass(len: usize, state: usize) -> Result<Self> {
        if state >= len {
            return Err(Error::BadShape(format!(
                "state {state} out of range for {len} states"
            )));
        }
        let mut v = vec![0.0; len];
        v[state] = 1.0;
        Ok(ProbabilityVector(v))
    }

    pub fn uniform(len: usize) -> Self {
        ProbabilityVector(vec![1.0 / len as f64; len])
    }

    /// Wraps the output of an evolution step: clears rounding-level negative
    /// entries and renormalizes.
    pub(crate) fn from_evolved(mut entries: Vec<f64>) -> Self {
        for x in entries.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let total: f64 = entries.iter().sum();
        if total > 0.0 && total != 1.0 {
            entries.iter_mut().for_each(|x| *x /= total);
        }
        ProbabilityVector(entries)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ProbabilityVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbabilityVector::new(v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(v: ProbabilityVector) -> Vec<f64> {
        v.0
    }
}

/// Birth, death, and holding rates of a chain on `{0, ..., n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathRates {
    p: Vec<f64>,
    q: Vec<f64>,
    r: Vec<f64>,
}

impl BirthDeathRates {
    pub fn birth(&self) -> &[f64] {
        &self.p
    }

    pub fn death(&self) -> &[f64] {
        &self.q
    }

    pub fn hold(&self) -> &[f64] {
        &self.r
    }

    /// Index of the top state `n`.
    pub fn top(&self) -> usize {
        self.p.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kernel {
    Dense { size: usize, entries: Vec<f64> },
    BirthDeath(BirthDeathRates),
}

/// Serialized chain description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChainSpec {
    Dense {
        matrix: Vec<Vec<f64>>,
    },
    BirthDeath {
        p: Vec<f64>,
        q: Vec<f64>,
        r: Vec<f64>,
    },
}

/// A validated irreducible chain with its stationary distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    kernel: Kernel,
    stationary: ProbabilityVector,
}

fn check_finite_nonneg(values: &[f64], what: &str) -> Result<()> {
    for (i, &x) in values.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::BadShape(format!("{what}[{i}] is not finite")));
        }
        if x < 0.0 {
            return Err(Error::NotStochastic(format!(
                "{what}[{i}] = {x} is negative"
            )));
        }
    }
    Ok(())
}

impl Chain {
    pub fn from_spec(spec: &ChainSpec) -> Result<Chain> {
        match spec {
            ChainSpec::Dense { matrix } => Chain::dense(matrix),
            ChainSpec::BirthDeath { p, q, r } => {
                Chain::birth_death(p.clone(), q.clone(), r.clone())
            }
        }
    }

    pub fn to_spec(&self) -> ChainSpec {
        match &self.kernel {
            Kernel::Dense { size, entries } => ChainSpec::Dense {
                matrix: entries.chunks(*size).map(<[f64]>::to_vec).collect(),
            },
            Kernel::BirthDeath(rates) => ChainSpec::BirthDeath {
                p: rates.p.clone(),
                q: rates.q.clone(),
                r: rates.r.clone(),
            },
        }
    }

    /// Validates a dense row-stochastic matrix.
    pub fn dense(matrix: &[Vec<f64>]) -> Result<Chain> {
        let size = matrix.len();
        if size < 2 {
            return Err(Error::BadShape(format!(
                "need at least 2 states, got {size}"
            )));
        }
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != size {
                return Err(Error::BadShape(format!(
                    "row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            check_finite_nonneg(row, &format!("K[{i}]"))?;
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotStochastic(format!("row {i} sums to {sum}")));
            }
            entries.extend_from_slice(row);
        }
        let kernel = Kernel::Dense { size, entries };
        check_irreducible(&kernel)?;
        let stationary = dense_stationary(&kernel)?;
        Chain::finish(kernel, stationary)
    }

    /// Validates a birth-death chain with `K(i,i+1) = p_i`, `K(i,i-1) = q_i`,
    /// `K(i,i) = r_i`.
    pub fn birth_death(p: Vec<f64>, q: Vec<f64>, r: Vec<f64>) -> Result<Chain> {
        let len = p.len();
        if len < 2 || q.len() != len || r.len() != len {
            return Err(Error::BadShape(format!(
                "rate arrays must share a length of at least 2, got {}, {}, {}",
                p.len(),
                q.len(),
                r.len()
            )));
        }
        check_finite_nonneg(&p, "p")?;
        check_finite_nonneg(&q, "q")?;
        check_finite_nonneg(&r, "r")?;
        let n = len - 1;
        if p[n] != 0.0 {
            return Err(Error::NotStochastic(format!(
                "p[{n}] must be 0, got {}",
                p[n]
            )));
        }
        if q[0] != 0.0 {
            return Err(Error::NotStochastic(format!(
                "q[0] must be 0, got {}",
                q[0]
            )));
        }
        for i in 0..len {
            let sum = p[i] + q[i] + r[i];
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotStochastic(format!("row {i} sums to {sum}")));
            }
        }
        for i in 0..n {
            if p[i] == 0.0 {
                return Err(Error::NotIrreducible {
                    from: i,
                    unreachable: i + 1,
                });
            }
            if q[i + 1] == 0.0 {
                return Err(Error::NotIrreducible {
                    from: i + 1,
                    unreachable: i,
                });
            }
        }
        let rates = BirthDeathRates { p, q, r };
        let stationary = birth_death_stationary(&rates)?;
        Chain::finish(Kernel::BirthDeath(rates), stationary)
    }

    fn finish(kernel: Kernel, stationary: ProbabilityVector) -> Result<Chain> {
        if let Some(i) = stationary.iter().position(|&x| x <= 0.0) {
            return Err(Error::Numerical(format!(
                "stationary mass of state {i} underflows to zero"
            )));
        }
        let chain = Chain { kernel, stationary };
        let mut image = vec![0.0; chain.size()];
        chain.apply(&chain.stationary, &mut image);
        let residual = image
            .iter()
            .zip(chain.stationary.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual > STATIONARY_TOL {
            return Err(Error::Numerical(format!(
                "stationary residual {residual:e} exceeds {STATIONARY_TOL:e}"
            )));
        }
        Ok(chain)
    }

    /// Number of states, `n + 1`.
    pub fn size(&self) -> usize {
        match &self.kernel {
            Kernel::Dense { size, .. } => *size,
            Kernel::BirthDeath(rates) => rates.p.len(),
        }
    }

    pub fn stationary(&self) -> &ProbabilityVector {
        &self.stationary
    }

    pub fn birth_death_rates(&self) -> Option<&BirthDeathRates> {
        match &self.kernel {
            Kernel::BirthDeath(rates) => Some(rates),
            Kernel::Dense { .. } => None,
        }
    }

    pub fn is_birth_death(&self) -> bool {
        self.birth_death_rates().is_some()
    }

    /// `K(x, y)`.
    pub fn entry(&self, x: usize, y: usize) -> f64 {
        match &self.kernel {
            Kernel::Dense { size, entries } => entries[x * size + y],
            Kernel::BirthDeath(rates) => {
                if y == x {
                    rates.r[x]
                } else if y == x + 1 {
                    rates.p[x]
                } else if y + 1 == x {
                    rates.q[x]
                } else {
                    0.0
                }
            }
        }
    }

    /// Row-major dense copy of the kernel.
    pub fn dense_matrix(&self) -> Vec<f64> {
        let n = self.size();
        let mut out = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                out[x * n + y] = self.entry(x, y);
            }
        }
        out
    }

    /// `out = v K`. Birth-death kernels cost O(n), dense ones O(n²).
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        match &self.kernel {
            Kernel::Dense { size, entries } => {
                out.iter_mut().for_each(|o| *o = 0.0);
                for (x, &vx) in v.iter().enumerate() {
                    if vx == 0.0 {
                        continue;
                    }
                    let row = &entries[x * size..(x + 1) * size];
                    for (o, k) in out.iter_mut().zip(row) {
                        *o += vx * k;
                    }
                }
            }
            Kernel::BirthDeath(BirthDeathRates { p, q, r }) => {
                let n = p.len() - 1;
                out[0] = v[0] * r[0] + v[1] * q[1];
                for y in 1..n {
                    out[y] = v[y] * r[y] + v[y - 1] * p[y - 1] + v[y + 1] * q[y + 1];
                }
                out[n] = v[n] * r[n] + v[n - 1] * p[n - 1];
            }
        }
    }

    /// The δ-lazy chain `δI + (1-δ)K`.
    pub fn lazy(&self, delta: f64) -> Result<Chain> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::BadDelta {
                value: delta,
                allowed: "(0,1)",
            });
        }
        let keep = 1.0 - delta;
        let kernel = match &self.kernel {
            Kernel::Dense { size, entries } => {
                let mut lazy: Vec<f64> = entries.iter().map(|k| keep * k).collect();
                for i in 0..*size {
                    lazy[i * size + i] += delta;
                }
                Kernel::Dense {
                    size: *size,
                    entries: lazy,
                }
            }
            Kernel::BirthDeath(rates) => Kernel::BirthDeath(BirthDeathRates {
                p: rates.p.iter().map(|x| keep * x).collect(),
                q: rates.q.iter().map(|x| keep * x).collect(),
                r: rates.r.iter().map(|x| delta + keep * x).collect(),
            }),
        };
        Ok(Chain {
            kernel,
            stationary: self.stationary.clone(),
        })
    }

    /// `start · K^m`.
    pub fn step_distribution(
        &self,
        start: &ProbabilityVector,
        steps: u64,
    ) -> Result<ProbabilityVector> {
        self.check_len(start)?;
        Ok(ProbabilityVector::from_evolved(
            self.propagate(start, steps),
        ))
    }

    /// `start · H_t` with `H_t = e^{-t(I-K)}`, by uniformization truncated
    /// once the Poisson(t) mass reaches `1 - tol`.
    pub fn continuous_distribution(
        &self,
        start: &ProbabilityVector,
        t: f64,
        tol: f64,
    ) -> Result<ProbabilityVector> {
        self.check_len(start)?;
        check_time(t)?;
        check_tol(tol)?;
        Ok(ProbabilityVector::from_evolved(
            self.semigroup(start, t, tol),
        ))
    }

    pub(crate) fn propagate(&self, start: &[f64], steps: u64) -> Vec<f64> {
        let mut v = start.to_vec();
        let mut scratch = vec![0.0; v.len()];
        for _ in 0..steps {
            self.apply(&v, &mut scratch);
            std::mem::swap(&mut v, &mut scratch);
        }
        v
    }

    pub(crate) fn semigroup(&self, start: &[f64], t: f64, tol: f64) -> Vec<f64> {
        if t == 0.0 {
            return start.to_vec();
        }
        let mut acc = vec![0.0; start.len()];
        let mut v = start.to_vec();
        let mut scratch = vec![0.0; v.len()];
        let mut terms = PoissonTerms::new(t, tol);
        let mut first = true;
        for (_, w) in terms.by_ref() {
            if !first {
                self.apply(&v, &mut scratch);
                std::mem::swap(&mut v, &mut scratch);
            }
            first = false;
            if w > 0.0 {
                for (a, x) in acc.iter_mut().zip(&v) {
                    *a += w * x;
                }
            }
        }
        let mass = terms.cumulative();
        acc.iter_mut().for_each(|a| *a /= mass);
        acc
    }

    fn check_len(&self, start: &[f64]) -> Result<()> {
        if start.len() != self.size() {
            return Err(Error::LengthMismatch {
                left: start.len(),
                right: self.size(),
            });
        }
        Ok(())
    }

    /// Largest detailed-balance violation `|π(x)K(x,y) - π(y)K(y,x)|`.
    pub fn detailed_balance_residual(&self) -> f64 {
        let pi = &self.stationary;
        match &self.kernel {
            Kernel::BirthDeath(rates) => (0..rates.top())
                .map(|i| (pi[i] * rates.p[i] - pi[i + 1] * rates.q[i + 1]).abs())
                .fold(0.0, f64::max),
            Kernel::Dense { size, entries } => {
                let mut worst: f64 = 0.0;
                for x in 0..*size {
                    for y in x + 1..*size {
                        let flow = pi[x] * entries[x * size + y] - pi[y] * entries[y * size + x];
                        worst = worst.max(flow.abs());
                    }
                }
                worst
            }
        }
    }

    /// Period of the chain: gcd of cycle lengths in the support digraph.
    pub fn period(&self) -> u64 {
        if let Kernel::BirthDeath(rates) = &self.kernel {
            return if rates.r.iter().any(|&x| x > 0.0) {
                1
            } else {
                2
            };
        }
        let n = self.size();
        let mut level = vec![u64::MAX; n];
        level[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        let mut g = 0u64;
        while let Some(x) = queue.pop_front() {
            for y in 0..n {
                if self.entry(x, y) > 0.0 {
                    if level[y] == u64::MAX {
                        level[y] = level[x] + 1;
                        queue.push_back(y);
                    } else {
                        g = gcd(g, (level[x] + 1).abs_diff(level[y]));
                    }
                }
            }
        }
        g.max(1)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::Numerical(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if tol > MAX_UNIFORMIZATION_TOL {
        return Err(Error::TolTooLoose(tol));
    }
    Ok(())
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::BadTime(t));
    }
    Ok(())
}

/// Strong connectivity of the support digraph: every state reachable from 0
/// both forwards and backwards.
fn check_irreducible(kernel: &Kernel) -> Result<()> {
    let Kernel::Dense { size, entries } = kernel else {
        return Ok(());
    };
    let n = *size;
    for reverse in [false, true] {
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for y in 0..n {
                let k = if reverse {
                    entries[y * n + x]
                } else {
                    entries[x * n + y]
                };
                if k > 0.0 && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            let (from, unreachable) = if reverse { (missing, 0) } else { (0, missing) };
            return Err(Error::NotIrreducible { from, unreachable });
        }
    }
    Ok(())
}

/// Solves `(Kᵀ - I)π = 0` with the last equation replaced by `Σπ = 1`.
fn dense_stationary(kernel: &Kernel) -> Result<ProbabilityVector> {
    let Kernel::Dense { size, entries } = kernel else {
        unreachable!("dense_stationary on birth-death kernel");
    };
    let n = *size;
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = entries[j * n + i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[(n - 1) * n + j] = 1.0;
    }
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let pi = linalg::solve(a, b)?;
    Ok(ProbabilityVector::from_evolved(pi))
}

/// `π(i) ∝ (p_0 ⋯ p_{i-1}) / (q_1 ⋯ q_i)`, accumulated in log space and
/// normalized once.
fn birth_death_stationary(rates: &BirthDeathRates) -> Result<ProbabilityVector> {
    let len = rates.p.len();
    let mut log_weights = Vec::with_capacity(len);
    let mut acc = 0.0;
    log_weights.push(acc);
    for i in 0..len - 1 {
        acc += rates.p[i].ln() - rates.q[i + 1].ln();
        log_weights.push(acc);
    }
    let top = log_weights
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_weights.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(ProbabilityVector(
        weights.into_iter().map(|w| w / total).collect(),
    ))
}
