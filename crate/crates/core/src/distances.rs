//! Total variation, separation, and `d̄` distances to stationarity in the
//! three time modes, and the mixing times they induce.
//!
//! Worst-case queries maximize over starting states. For birth-death chains
//! whose evolution is stochastically monotone (always in continuous time,
//! otherwise when `p_i + q_{i+1} ≤ 1` for the stepping kernel) the default
//! evaluates only the two endpoint states `0` and `n`; otherwise, and under
//! the `exhaustive` flag, every state is a start. Endpoint values never
//! exceed the true maximum, and for separation in lazy (`δ ≥ 1/2`) and
//! continuous time they equal it. For total variation and `d̄` an interior
//! start can be worse, e.g. total variation on chains with irregular rates
//! or `d̄` on the discrete biased path, so callers that need the true
//! maximum there must ask for `exhaustive`.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::chain::{check_time, check_tol, Chain, ProbabilityVector};
use crate::error::{Error, Result};

/// Time or step count beyond which a distance that is still above `ε` is
/// reported as [`Error::NoConvergence`].
pub const CONVERGENCE_CAP: f64 = 1e7;
/// Rounding allowance in the monotonicity test `p_i + q_{i+1} ≤ 1`.
const MONOTONE_SLACK: f64 = 1e-12;
/// A continuous search composes at most this many semigroup steps; each
/// gets this fraction of the uniformization tolerance.
const COMPOSITION_BUDGET: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeMode {
    Discrete,
    Lazy { delta: f64 },
    Continuous,
}

impl TimeMode {
    pub fn is_discrete(&self) -> bool {
        !matches!(self, TimeMode::Continuous)
    }
}

impl std::fmt::Display for TimeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TimeMode::Discrete => write!(f, "discrete"),
            TimeMode::Lazy { delta } => write!(f, "lazy({delta})"),
            TimeMode::Continuous => write!(f, "continuous"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Tv,
    Sep,
    Dbar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    WorstCase { exhaustive: bool },
    Fixed(ProbabilityVector),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceQuery {
    pub mode: TimeMode,
    pub metric: Metric,
    pub start: Start,
}

impl DistanceQuery {
    pub fn new(mode: TimeMode, metric: Metric, start: Start) -> Result<Self> {
        if let TimeMode::Lazy { delta } = mode {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::BadDelta {
                    value: delta,
                    allowed: "(0,1)",
                });
            }
        }
        if metric == Metric::Dbar && matches!(start, Start::Fixed(_)) {
            return Err(Error::InvalidQuery(
                "d-bar maximizes over pairs of starts and takes no fixed start".into(),
            ));
        }
        Ok(DistanceQuery {
            mode,
            metric,
            start,
        })
    }

    /// Worst-case start with the endpoint shortcut for birth-death chains.
    pub fn worst_case(mode: TimeMode, metric: Metric) -> Result<Self> {
        DistanceQuery::new(mode, metric, Start::WorstCase { exhaustive: false })
    }

    pub fn exhaustive(mode: TimeMode, metric: Metric) -> Result<Self> {
        DistanceQuery::new(mode, metric, Start::WorstCase { exhaustive: true })
    }
}

/// Sampled distance profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCurve {
    pub query: DistanceQuery,
    pub samples: Vec<(f64, f64)>,
}

/// The three worst-case distances at one time, from a common set of rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub tv: f64,
    pub sep: f64,
    pub dbar: f64,
}

/// Total variation `½ Σ |a - b|`.
pub fn tv(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(tv_unchecked(a, b))
}

fn tv_unchecked(a: &[f64], b: &[f64]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    (0.5 * s).clamp(0.0, 1.0)
}

/// `max_y (1 - μ(y)/π(y))`.
pub fn separation(mu: &[f64], pi: &[f64]) -> f64 {
    mu.iter()
        .zip(pi)
        .map(|(m, p)| 1.0 - m / p)
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0)
}

/// Evolution engine shared by the distance and mixing-time searches.
struct Probe<'a> {
    chain: Cow<'a, Chain>,
    continuous: bool,
    tol: f64,
    metric: Metric,
    rows: Vec<Vec<f64>>,
}

impl<'a> Probe<'a> {
    fn new(chain: &'a Chain, query: &DistanceQuery, tol: f64) -> Result<Self> {
        let chain = match query.mode {
            TimeMode::Lazy { delta } => Cow::Owned(chain.lazy(delta)?),
            _ => Cow::Borrowed(chain),
        };
        let continuous = query.mode == TimeMode::Continuous;
        if continuous {
            check_tol(tol)?;
        }
        let rows = start_rows(&chain, &query.start, continuous)?;
        Ok(Probe {
            chain,
            continuous,
            tol,
            metric: query.metric,
            rows,
        })
    }

    fn rows_at(&self, time: f64) -> Vec<Vec<f64>> {
        if self.continuous {
            self.rows
                .iter()
                .map(|r| self.chain.semigroup(r, time, self.tol))
                .collect()
        } else {
            self.advance(&self.rows, time as u64)
        }
    }

    fn advance(&self, rows: &[Vec<f64>], steps: u64) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| self.chain.propagate(r, steps))
            .collect()
    }

    fn measure(&self, rows: &[Vec<f64>]) -> f64 {
        measure(self.metric, rows, self.chain.stationary())
    }
}

fn measure(metric: Metric, rows: &[Vec<f64>], pi: &[f64]) -> f64 {
    match metric {
        Metric::Tv => rows.iter().map(|r| tv_unchecked(r, pi)).fold(0.0, f64::max),
        Metric::Sep => rows.iter().map(|r| separation(r, pi)).fold(0.0, f64::max),
        Metric::Dbar => {
            let mut worst: f64 = 0.0;
            for i in 0..rows.len() {
                for j in i + 1..rows.len() {
                    worst = worst.max(tv_unchecked(&rows[i], &rows[j]));
                }
            }
            worst
        }
    }
}

/// Whether worst-case queries default to the two endpoint starts.
fn endpoint_shortcut(chain: &Chain, continuous: bool) -> bool {
    chain.birth_death_rates().is_some_and(|r| {
        continuous || (0..r.top()).all(|i| r.birth()[i] + r.death()[i + 1] <= 1.0 + MONOTONE_SLACK)
    })
}

fn start_rows(chain: &Chain, start: &Start, continuous: bool) -> Result<Vec<Vec<f64>>> {
    let n = chain.size();
    let point = |i: usize| {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    };
    match start {
        Start::Fixed(mu) => {
            if mu.len() != n {
                return Err(Error::LengthMismatch {
                    left: mu.len(),
                    right: n,
                });
            }
            Ok(vec![mu.to_vec()])
        }
        Start::WorstCase { exhaustive } => {
            if !exhaustive && endpoint_shortcut(chain, continuous) {
                Ok(vec![point(0), point(n - 1)])
            } else {
                Ok((0..n).map(point).collect())
            }
        }
    }
}

fn check_query_time(mode: TimeMode, time: f64) -> Result<()> {
    check_time(time)?;
    if mode.is_discrete() && time.fract() != 0.0 {
        return Err(Error::NonIntegerTime(time));
    }
    Ok(())
}

/// Distance to stationarity at `time`. `tol` is the uniformization tolerance
/// and only matters in continuous mode.
pub fn distance(chain: &Chain, query: &DistanceQuery, time: f64, tol: f64) -> Result<f64> {
    check_query_time(query.mode, time)?;
    let probe = Probe::new(chain, query, tol)?;
    Ok(probe.measure(&probe.rows_at(time)))
}

/// Worst-case TV, separation, and `d̄` at one time.
pub fn distance_profile(
    chain: &Chain,
    mode: TimeMode,
    exhaustive: bool,
    time: f64,
    tol: f64,
) -> Result<DistanceProfile> {
    check_query_time(mode, time)?;
    let query = DistanceQuery::new(mode, Metric::Tv, Start::WorstCase { exhaustive })?;
    let probe = Probe::new(chain, &query, tol)?;
    let rows = probe.rows_at(time);
    let pi = probe.chain.stationary();
    Ok(DistanceProfile {
        tv: measure(Metric::Tv, &rows, pi),
        sep: measure(Metric::Sep, &rows, pi),
        dbar: measure(Metric::Dbar, &rows, pi),
    })
}

/// Samples the distance at each of `times` (sorted ascending in the output).
pub fn distance_curve(
    chain: &Chain,
    query: &DistanceQuery,
    times: &[f64],
    tol: f64,
) -> Result<DistanceCurve> {
    let mut sorted = times.to_vec();
    for &t in &sorted {
        check_query_time(query.mode, t)?;
    }
    sorted.sort_by(f64::total_cmp);
    let probe = Probe::new(chain, query, tol)?;
    let mut samples = Vec::with_capacity(sorted.len());
    if probe.continuous {
        for t in sorted {
            samples.push((t, probe.measure(&probe.rows_at(t))));
        }
    } else {
        let mut rows = probe.rows.clone();
        let mut at = 0u64;
        for t in sorted {
            let m = t as u64;
            rows = probe.advance(&rows, m - at);
            at = m;
            samples.push((t, probe.measure(&rows)));
        }
    }
    Ok(DistanceCurve {
        query: query.clone(),
        samples,
    })
}

/// Resolution of a continuous mixing-time bracket: the search stops once
/// `upper - lower ≤ max(absolute, relative · upper)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketPrecision {
    pub absolute: f64,
    pub relative: f64,
}

impl Default for BracketPrecision {
    fn default() -> Self {
        BracketPrecision {
            absolute: 1e-6,
            relative: 1e-4,
        }
    }
}

impl BracketPrecision {
    /// Near machine resolution; used where mixing times are compared
    /// against each other rather than reported.
    pub fn tight() -> Self {
        BracketPrecision {
            absolute: 1e-12,
            relative: 1e-12,
        }
    }
}

/// `distance(lower) > ε ≥ distance(upper)`; for discrete modes
/// `upper = lower + 1` unless the mixing time is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingBracket {
    pub lower: f64,
    pub upper: f64,
}

impl MixingBracket {
    /// The mixing time under the infimum convention.
    pub fn value(&self) -> f64 {
        self.upper
    }
}

/// `inf{t : distance(t) ≤ ε}` with the default bracket precision.
pub fn mixing_time(chain: &Chain, eps: f64, query: &DistanceQuery, tol: f64) -> Result<f64> {
    mixing_time_bracket(chain, eps, query, tol, BracketPrecision::default()).map(|b| b.value())
}

pub fn mixing_time_bracket(
    chain: &Chain,
    eps: f64,
    query: &DistanceQuery,
    tol: f64,
    precision: BracketPrecision,
) -> Result<MixingBracket> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadEpsilon(eps));
    }
    let probe = Probe::new(chain, query, tol)?;
    if probe.measure(&probe.rows) <= eps {
        return Ok(MixingBracket {
            lower: 0.0,
            upper: 0.0,
        });
    }
    if query.mode == TimeMode::Discrete && never_mixes(chain, query, eps) {
        return Err(Error::NoConvergence {
            eps,
            cap: CONVERGENCE_CAP,
        });
    }
    if probe.continuous {
        continuous_search(&probe, eps, precision)
    } else {
        discrete_search(&probe, eps)
    }
}

/// A periodic chain of period `d` started from a point mass keeps TV at
/// least `1 - 1/d`: the law sits on one cyclic class and every class has
/// stationary mass `1/d`. Separation dominates TV, and worst-case `d̄`
/// compares starts in different classes, so it stays at 1.
fn never_mixes(chain: &Chain, query: &DistanceQuery, eps: f64) -> bool {
    if matches!(query.start, Start::Fixed(_)) {
        return false;
    }
    let period = chain.period();
    if period == 1 {
        return false;
    }
    let floor = match query.metric {
        Metric::Tv | Metric::Sep => 1.0 - 1.0 / period as f64,
        Metric::Dbar => 1.0,
    };
    eps < floor
}

fn discrete_search(probe: &Probe<'_>, eps: f64) -> Result<MixingBracket> {
    let cap = CONVERGENCE_CAP as u64;
    let mut lo = 0u64;
    let mut rows_lo = probe.rows.clone();
    let mut hi = 1u64;
    let mut rows_hi = probe.advance(&rows_lo, 1);
    while probe.measure(&rows_hi) > eps {
        if hi >= cap {
            return Err(Error::NoConvergence {
                eps,
                cap: CONVERGENCE_CAP,
            });
        }
        let next = (2 * hi).min(cap);
        lo = hi;
        rows_lo = rows_hi.clone();
        rows_hi = probe.advance(&rows_hi, next - hi);
        hi = next;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let rows_mid = probe.advance(&rows_lo, mid - lo);
        if probe.measure(&rows_mid) <= eps {
            hi = mid;
        } else {
            lo = mid;
            rows_lo = rows_mid;
        }
    }
    Ok(MixingBracket {
        lower: lo as f64,
        upper: hi as f64,
    })
}

/// Doubling then bisection. Rows are carried forward from the lower end of
/// the bracket, so each probe only integrates the remaining gap.
fn continuous_search(
    probe: &Probe<'_>,
    eps: f64,
    precision: BracketPrecision,
) -> Result<MixingBracket> {
    let step_tol = probe.tol / COMPOSITION_BUDGET;
    let evolve = |rows: &[Vec<f64>], dt: f64| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| probe.chain.semigroup(r, dt, step_tol))
            .collect()
    };
    let mut lo = 0.0;
    let mut rows_lo = probe.rows.clone();
    let mut hi = 1.0;
    let mut rows_hi = evolve(&rows_lo, hi);
    while probe.measure(&rows_hi) > eps {
        if hi >= CONVERGENCE_CAP {
            return Err(Error::NoConvergence {
                eps,
                cap: CONVERGENCE_CAP,
            });
        }
        let next = (2.0 * hi).min(CONVERGENCE_CAP);
        let advanced = evolve(&rows_hi, next - hi);
        rows_lo = std::mem::replace(&mut rows_hi, advanced);
        lo = hi;
        hi = next;
    }
    while hi - lo > precision.absolute.max(precision.relative * hi) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let rows_mid = evolve(&rows_lo, mid - lo);
        if probe.measure(&rows_mid) <= eps {
            hi = mid;
        } else {
            lo = mid;
            rows_lo = rows_mid;
        }
    }
    Ok(MixingBracket {
        lower: lo,
        upper: hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flip() -> Chain {
        Chain::dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn ehrenfest2() -> Chain {
        Chain::birth_death(vec![1.0, 0.5, 0.0], vec![0.0, 0.5, 1.0], vec![0.0; 3]).unwrap()
    }

    fn half_half() -> Chain {
        Chain::birth_death(vec![0.5, 0.0], vec![0.0, 0.5], vec![0.5, 0.5]).unwrap()
    }

    const TOL: f64 = 1e-12;

    #[test]
    fn tv_examples() {
        assert_eq!(tv(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(tv(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(tv(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 0.5);
        assert!(matches!(
            tv(&[1.0], &[0.5, 0.5]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn ehrenfest_two_discrete_tv() {
        for exhaustive in [false, true] {
            let q = DistanceQuery::new(
                TimeMode::Discrete,
                Metric::Tv,
                Start::WorstCase { exhaustive },
            )
            .unwrap();
            assert!((distance(&ehrenfest2(), &q, 1.0, TOL).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn rank_one_chain_mixes_in_one_step() {
        let row = vec![0.2, 0.5, 0.3];
        let chain = Chain::dense(&[row.clone(), row.clone(), row]).unwrap();
        for metric in [Metric::Tv, Metric::Sep, Metric::Dbar] {
            let q = DistanceQuery::worst_case(TimeMode::Discrete, metric).unwrap();
            assert!(distance(&chain, &q, 1.0, TOL).unwrap() < 1e-15);
            assert!(distance(&chain, &q, 0.0, TOL).unwrap() > 0.4);
        }
        let q = DistanceQuery::worst_case(TimeMode::Discrete, Metric::Tv).unwrap();
        assert_eq!(mixing_time(&chain, 0.4, &q, TOL).unwrap(), 1.0);
        // d(0) = max_x (1 - π(x)) = 0.8 here; with ε above it nothing is needed.
        assert_eq!(mixing_time(&chain, 0.85, &q, TOL).unwrap(), 0.0);
    }

    #[test]
    fn flip_never_mixes() {
        let q = DistanceQuery::worst_case(TimeMode::Discrete, Metric::Tv).unwrap();
        for m in [0.0, 1.0, 2.0, 7.0] {
            assert_eq!(distance(&flip(), &q, m, TOL).unwrap(), 0.5);
        }
        assert!(matches!(
            mixing_time(&flip(), 0.3, &q, TOL),
            Err(Error::NoConvergence { .. })
        ));
        // The lazy version mixes at once: K_{1/2} is rank one.
        let lazy = DistanceQuery::worst_case(TimeMode::Lazy { delta: 0.5 }, Metric::Tv).unwrap();
        assert_eq!(mixing_time(&flip(), 0.3, &lazy, TOL).unwrap(), 1.0);
    }

    #[test]
    fn two_state_continuous_mixing_time() {
        let q = DistanceQuery::worst_case(TimeMode::Continuous, Metric::Tv).unwrap();
        for t in [0.0, 0.5, 2.0] {
            let d = distance(&half_half(), &q, t, TOL).unwrap();
            assert!((d - (-t).exp() / 2.0).abs() < 1e-11);
        }
        for eps in [0.05, 0.25, 0.4] {
            let t = mixing_time(&half_half(), eps, &q, TOL).unwrap();
            let exact = (1.0 / (2.0 * eps)).ln();
            assert!(
                t >= exact - 1e-9 && t - exact <= 1e-6f64.max(1e-4 * t),
                "{t} vs {exact}"
            );
        }
    }

    #[test]
    fn time_validation() {
        let q = DistanceQuery::worst_case(TimeMode::Discrete, Metric::Tv).unwrap();
        assert!(matches!(
            distance(&flip(), &q, 1.5, TOL),
            Err(Error::NonIntegerTime(_))
        ));
        let c = DistanceQuery::worst_case(TimeMode::Continuous, Metric::Tv).unwrap();
        assert!(matches!(
            distance(&flip(), &c, 1.0, 1e-3),
            Err(Error::TolTooLoose(_))
        ));
        assert!(matches!(
            distance(&flip(), &c, -1.0, TOL),
            Err(Error::BadTime(_))
        ));
        assert!(matches!(
            mixing_time(&flip(), 1.0, &c, TOL),
            Err(Error::BadEpsilon(_))
        ));
    }

    #[test]
    fn dbar_rejects_fixed_start() {
        let mu = ProbabilityVector::uniform(2);
        assert!(DistanceQuery::new(TimeMode::Continuous, Metric::Dbar, Start::Fixed(mu)).is_err());
        assert!(DistanceQuery::new(
            TimeMode::Lazy { delta: 1.0 },
            Metric::Tv,
            Start::WorstCase { exhaustive: true }
        )
        .is_err());
    }

    #[test]
    fn fixed_start_at_stationarity_is_zero() {
        let chain = ehrenfest2();
        let q = DistanceQuery::new(
            TimeMode::Continuous,
            Metric::Sep,
            Start::Fixed(chain.stationary().clone()),
        )
        .unwrap();
        assert!(distance(&chain, &q, 3.0, TOL).unwrap() < 1e-10);
    }

    #[test]
    fn curve_is_sorted_and_monotone() {
        let chain = ehrenfest2();
        let q = DistanceQuery::worst_case(TimeMode::Lazy { delta: 0.5 }, Metric::Sep).unwrap();
        let curve = distance_curve(&chain, &q, &[5.0, 0.0, 2.0, 1.0], TOL).unwrap();
        let times: Vec<f64> = curve.samples.iter().map(|s| s.0).collect();
        assert_eq!(times, vec![0.0, 1.0, 2.0, 5.0]);
        for w in curve.samples.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
        for &(t, d) in &curve.samples {
            assert!((d - distance(&chain, &q, t, TOL).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn discrete_search_matches_linear_scan() {
        let chain = Chain::birth_death(
            vec![0.3, 0.2, 0.4, 0.0],
            vec![0.0, 0.25, 0.35, 0.3],
            vec![0.7, 0.55, 0.25, 0.7],
        )
        .unwrap();
        let q = DistanceQuery::exhaustive(TimeMode::Discrete, Metric::Tv).unwrap();
        for eps in [0.01, 0.1, 0.3] {
            let m = mixing_time(&chain, eps, &q, TOL).unwrap() as u64;
            let linear = (0..)
                .find(|&k| distance(&chain, &q, k as f64, TOL).unwrap() <= eps)
                .unwrap();
            assert_eq!(m, linear);
        }
    }

    fn ehrenfest(n: usize) -> Chain {
        let nf = n as f64;
        let p = (0..=n).map(|i| 1.0 - i as f64 / nf).collect();
        let q = (0..=n).map(|i| i as f64 / nf).collect();
        Chain::birth_death(p, q, vec![0.0; n + 1]).unwrap()
    }

    #[test]
    fn non_monotone_kernels_use_every_start() {
        let chain = ehrenfest(4);
        for m in [1.0, 2.0, 5.0] {
            let ends = distance_profile(&chain, TimeMode::Discrete, false, m, 1e-12).unwrap();
            let full = distance_profile(&chain, TimeMode::Discrete, true, m, 1e-12).unwrap();
            assert_eq!(ends, full);
            assert_eq!(full.dbar, 1.0);
        }
    }

    #[test]
    fn interior_start_can_be_worst_for_tv() {
        // π ∝ (1, 1/3, 1/6, 1/3, 1): the light middle state starts farthest.
        let p = vec![0.25, 0.25, 0.5, 0.75, 0.0];
        let q = vec![0.0, 0.75, 0.5, 0.25, 0.25];
        let r = vec![0.75, 0.0, 0.0, 0.0, 0.75];
        let chain = Chain::birth_death(p, q, r).unwrap();
        for t in [0.0, 0.5] {
            let ends = distance_profile(&chain, TimeMode::Continuous, false, t, 1e-12).unwrap();
            let full = distance_profile(&chain, TimeMode::Continuous, true, t, 1e-12).unwrap();
            assert!(full.tv > ends.tv + 0.05, "t={t}: {full:?} vs {ends:?}");
            assert!((full.sep - ends.sep).abs() < 1e-12);
            assert!((full.dbar - ends.dbar).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_pair_can_be_worst_for_dbar() {
        let p = vec![0.3, 0.3, 0.3, 0.3, 0.0];
        let q = vec![0.0, 0.7, 0.7, 0.7, 0.7];
        let r = vec![0.7, 0.0, 0.0, 0.0, 0.3];
        let chain = Chain::birth_death(p, q, r).unwrap();
        let gap = (0..40)
            .map(|m| {
                let t = m as f64;
                let ends = distance_profile(&chain, TimeMode::Discrete, false, t, TOL).unwrap();
                let full = distance_profile(&chain, TimeMode::Discrete, true, t, TOL).unwrap();
                assert!(ends.dbar <= full.dbar + 1e-14);
                full.dbar - ends.dbar
            })
            .fold(0.0, f64::max);
        assert!(gap > 0.01, "{gap}");
    }

    #[test]
    fn continuous_bracket_straddles_threshold() {
        let chain = ehrenfest(12);
        for metric in [Metric::Tv, Metric::Sep, Metric::Dbar] {
            let q = DistanceQuery::worst_case(TimeMode::Continuous, metric).unwrap();
            for eps in [0.05, 0.25, 0.6] {
                let b = mixing_time_bracket(&chain, eps, &q, 1e-12, BracketPrecision::default())
                    .unwrap();
                assert!(distance(&chain, &q, b.lower, 1e-12).unwrap() > eps);
                assert!(distance(&chain, &q, b.upper, 1e-12).unwrap() <= eps);
                assert!(b.upper - b.lower <= 1e-4 * b.upper);
            }
        }
    }
}
