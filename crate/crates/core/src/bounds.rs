//! Numerical verification of the mixing-time inequalities on one chain.
//!
//! Every distance here maximizes over all starting states. Mixing times are
//! computed to near machine resolution, and each comparison uses the side of
//! the bracket that the true value is known to lie beyond, so a true
//! inequality can only fail through rounding.

use serde::{Deserialize, Serialize};

use crate::bd::{sep_bounds, sst_distribution, t_bound};
use crate::chain::Chain;
use crate::distances::{
    distance_profile, mixing_time_bracket, BracketPrecision, DistanceProfile, DistanceQuery,
    Metric, MixingBracket, TimeMode,
};
use crate::error::{Error, Result};
use crate::poisson::poisson_cdf;
use crate::spectral::{beta_delta, eigen_summary, SpectralSummary, REVERSIBILITY_TOL};

/// Smallest margin still counted as a pass.
pub const MARGIN_TOL: f64 = -1e-9;
pub const DEFAULT_EPS_GRID: [f64; 4] = [0.05, 0.1, 0.2, 0.4];
const UNIFORMIZATION_TOL: f64 = 1e-12;
const DELTA_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub id: String,
    pub point: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedBound {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub entries: Vec<BoundEntry>,
    pub skipped: Vec<SkippedBound>,
    pub pass: bool,
}

impl BoundReport {
    fn check(&mut self, id: &str, point: String, lhs: f64, rhs: f64) {
        self.entries.push(BoundEntry {
            id: id.into(),
            point,
            lhs,
            rhs,
            margin: rhs - lhs,
        });
    }

    fn skip(&mut self, id: &str, reason: &str) {
        self.skipped.push(SkippedBound {
            id: id.into(),
            reason: reason.into(),
        });
    }

    pub fn entries_for<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a BoundEntry> + 'a {
        self.entries.iter().filter(move |e| e.id == id)
    }

    pub fn worst(&self) -> Option<&BoundEntry> {
        self.entries
            .iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundEntry> {
        self.entries.iter().filter(|e| e.margin < MARGIN_TOL)
    }
}

/// A time grid on the scale of the chain: multiples of the spectral sum for
/// reversible chains, powers of two otherwise.
pub fn default_time_grid(chain: &Chain) -> Vec<f64> {
    let scale = eigen_summary(chain)
        .map(|s| s.spectral_sum.max(1.0))
        .unwrap_or(1.0);
    [0.125, 0.25, 0.5, 1.0, 2.0]
        .iter()
        .map(|f| (f * scale).max(1.0).round())
        .collect()
}

struct Evaluator<'a> {
    chain: &'a Chain,
    brackets: Vec<(TimeMode, Metric, f64, MixingBracket)>,
    profiles: Vec<(TimeMode, f64, DistanceProfile)>,
}

impl<'a> Evaluator<'a> {
    fn bracket(&mut self, mode: TimeMode, metric: Metric, eps: f64) -> Result<MixingBracket> {
        if let Some(b) = self
            .brackets
            .iter()
            .find(|b| b.0 == mode && b.1 == metric && b.2 == eps)
        {
            return Ok(b.3);
        }
        let query = DistanceQuery::exhaustive(mode, metric)?;
        let b = mixing_time_bracket(
            self.chain,
            eps,
            &query,
            UNIFORMIZATION_TOL,
            BracketPrecision::tight(),
        )?;
        self.brackets.push((mode, metric, eps, b));
        Ok(b)
    }

    /// Value known to be at most the mixing time.
    fn below(&mut self, mode: TimeMode, metric: Metric, eps: f64) -> Result<f64> {
        let b = self.bracket(mode, metric, eps)?;
        Ok(if mode.is_discrete() { b.upper } else { b.lower })
    }

    /// Value known to be at least the mixing time.
    fn above(&mut self, mode: TimeMode, metric: Metric, eps: f64) -> Result<f64> {
        Ok(self.bracket(mode, metric, eps)?.upper)
    }

    fn profile(&mut self, mode: TimeMode, t: f64) -> Result<DistanceProfile> {
        if let Some(p) = self.profiles.iter().find(|p| p.0 == mode && p.1 == t) {
            return Ok(p.2);
        }
        let p = distance_profile(self.chain, mode, true, t, UNIFORMIZATION_TOL)?;
        self.profiles.push((mode, t, p));
        Ok(p)
    }
}

fn mode_time(mode: TimeMode, t: f64) -> f64 {
    if mode.is_discrete() {
        t.round()
    } else {
        t
    }
}

/// `(√(1-ε) - √ε)/√(1-ε)`.
fn lower_constant(eps: f64) -> f64 {
    ((1.0 - eps).sqrt() - eps.sqrt()) / (1.0 - eps).sqrt()
}

/// `(√ε + √(1-ε))/√ε`.
fn upper_constant(eps: f64) -> f64 {
    (eps.sqrt() + (1.0 - eps).sqrt()) / eps.sqrt()
}

/// Instantiates every applicable inequality on the given grids.
/// Inapplicable ones are listed in `skipped`.
pub fn verify_bounds(
    chain: &Chain,
    delta: f64,
    eps_grid: &[f64],
    time_grid: &[f64],
) -> Result<BoundReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadDelta {
            value: delta,
            allowed: "(0,1)",
        });
    }
    if let Some(&e) = eps_grid.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::BadEpsilon(e));
    }
    if let Some(&t) = time_grid.iter().find(|&&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::BadTime(t));
    }
    let mut report = BoundReport::default();
    let mut eval = Evaluator {
        chain,
        brackets: Vec::new(),
        profiles: Vec::new(),
    };
    let reversible = chain.detailed_balance_residual() <= REVERSIBILITY_TOL;
    let lazy = TimeMode::Lazy { delta };
    let mut modes = vec![lazy, TimeMode::Continuous];
    if chain.period() == 1 {
        modes.insert(0, TimeMode::Discrete);
    } else {
        report.skip("discrete-time", "non-mixing");
    }
    if !reversible {
        for id in ["sep-doubling", "sep-tv-mixing", "spectral", "birth-death"] {
            report.skip(id, "non-reversible");
        }
    }

    for &mode in &modes {
        for &t in time_grid {
            let t = mode_time(mode, t);
            let now = eval.profile(mode, t)?;
            let point = format!("{mode} t={t}");
            report.check("distance-sandwich", point.clone(), now.tv, now.dbar);
            report.check("distance-sandwich", point.clone(), now.dbar, 2.0 * now.tv);
            report.check("dbar-le-sep", point.clone(), now.dbar, now.sep);
            if reversible {
                let later = eval.profile(mode, 2.0 * t)?;
                let rhs = 1.0 - (1.0 - now.dbar).powi(2);
                report.check("sep-doubling", point, later.sep, rhs);
            }
        }
        for &eps in eps_grid {
            let point = format!("{mode} eps={eps}");
            let lhs = eval.below(mode, Metric::Tv, eps)?;
            let rhs = eval.above(mode, Metric::Sep, eps)?;
            report.check("tv-le-sep-mixing", point.clone(), lhs, rhs);
            if reversible {
                let lhs = eval.below(mode, Metric::Sep, eps)?;
                let rhs = 2.0 * eval.above(mode, Metric::Tv, eps / 4.0)?;
                report.check("sep-tv-mixing", point, lhs, rhs);
            }
        }
    }

    for &t in time_grid {
        let mean = t / (1.0 - delta);
        let mut steps = vec![mean.floor(), (mean + 2.0 * mean.sqrt()).ceil()];
        steps.dedup();
        let lhs = eval.profile(TimeMode::Continuous, t)?.tv;
        for m in steps {
            let rhs = poisson_cdf(m as u64, mean) + eval.profile(lazy, m)?.tv;
            report.check(
                "poisson-comparison",
                format!("t={t} m={m} delta={delta}"),
                lhs,
                rhs,
            );
        }
    }

    if reversible {
        let summary = eigen_summary(chain)?;
        spectral_entries(
            &mut report,
            &mut eval,
            &summary,
            delta,
            eps_grid,
            time_grid,
            &modes,
        )?;
        if chain.is_birth_death() {
            birth_death_entries(&mut report, &mut eval, eps_grid)?;
        } else {
            report.skip("birth-death", "not a birth-death chain");
        }
    }

    report.pass = report.entries.iter().all(|e| e.margin >= MARGIN_TOL);
    Ok(report)
}

fn spectral_entries(
    report: &mut BoundReport,
    eval: &mut Evaluator,
    summary: &SpectralSummary,
    delta: f64,
    eps_grid: &[f64],
    time_grid: &[f64],
    modes: &[TimeMode],
) -> Result<()> {
    let gap = summary.gap;
    report.check("trace-nonnegative", "K".into(), 0.0, summary.kernel_trace());

    let mut deltas = DELTA_GRID.to_vec();
    if !deltas.contains(&delta) {
        deltas.push(delta);
    }
    for d in deltas {
        let beta = beta_delta(summary, d)?;
        let reflected = 1.0 - (1.0 - (1.0 - d) * gap).abs();
        let point = format!("delta={d}");
        report.check(
            "lazy-gap-sandwich",
            point.clone(),
            d.min(1.0 - d) * gap,
            1.0 - beta,
        );
        report.check("lazy-gap-sandwich", point.clone(), 1.0 - beta, reflected);
        report.check("lazy-gap-sandwich", point, reflected, (1.0 - d) * gap);
    }

    let beta = beta_delta(summary, delta)?;
    let lazy = TimeMode::Lazy { delta };
    for &eps in eps_grid.iter().filter(|&&e| e < 0.5) {
        let point = format!("eps={eps}");
        let log2e = (2.0 * eps).ln();
        let tc = eval.above(TimeMode::Continuous, Metric::Tv, eps)?;
        report.check("continuous-gap-lower", point.clone(), -log2e / gap, tc);
        let by_beta = if beta > 0.0 {
            (log2e / beta.ln()).floor()
        } else {
            0.0
        };
        let tl = eval.above(lazy, Metric::Tv, eps)?;
        report.check(
            "lazy-beta-lower",
            format!("{point} delta={delta}"),
            by_beta,
            tl,
        );
        if eval.chain.size() as f64 >= 2.0 / delta {
            let scale = 2.0 * (1.0 - delta).max((2.0 / delta).ln()) * gap;
            let by_gap = (-log2e / scale).floor();
            report.check(
                "lazy-gap-lower",
                format!("{point} delta={delta}"),
                by_gap,
                by_beta,
            );
        }
    }
    if eval.chain.size() as f64 * delta < 2.0 {
        report.skip("lazy-gap-lower", "fewer than 2/delta states");
    }

    for &mode in modes {
        let rate = match mode {
            TimeMode::Continuous => None,
            TimeMode::Lazy { delta } => Some(beta_delta(summary, delta)?),
            TimeMode::Discrete => Some(
                summary.kernel_spectrum[1..]
                    .iter()
                    .map(|t| t.abs())
                    .fold(0.0, f64::max),
            ),
        };
        for &t in time_grid {
            let t = mode_time(mode, t);
            let decay = match rate {
                None => (-gap * t).exp(),
                Some(b) => b.powf(t),
            };
            let tv = eval.profile(mode, t)?.tv;
            report.check("spectral-decay", format!("{mode} t={t}"), 0.5 * decay, tv);
        }
    }
    Ok(())
}

fn birth_death_entries(
    report: &mut BoundReport,
    eval: &mut Evaluator,
    eps_grid: &[f64],
) -> Result<()> {
    let chain = eval.chain;
    let sst = sst_distribution(chain)?;
    let s = sst.mean;
    let tb = t_bound(chain)?.value;
    report.check("spectral-sum-le-t-bound", "chain".into(), s, tb);
    let c = TimeMode::Continuous;
    for &eps in eps_grid {
        let point = format!("eps={eps}");
        let bounds = sep_bounds(&sst, eps)?;
        let sep_lo = eval.below(c, Metric::Sep, eps)?;
        let sep_hi = eval.above(c, Metric::Sep, eps)?;
        report.check("sep-chebyshev", point.clone(), bounds.lower, sep_hi);
        report.check("sep-chebyshev", point.clone(), sep_lo, bounds.upper);
        report.check("sep-mean", point.clone(), bounds.lower_sep_es, sep_hi);
        report.check("sep-mean", point.clone(), sep_lo, bounds.upper_sep_es);
        report.check(
            "sep-t-bound",
            point.clone(),
            sep_lo,
            upper_constant(eps) * tb,
        );
        if eps < 0.125 {
            let tv_lo = eval.below(c, Metric::Tv, eps)?;
            let tv_hi = eval.above(c, Metric::Tv, eps)?;
            let lower = 0.5 * lower_constant(4.0 * eps) * s;
            report.check("tv-spectral-sum", point.clone(), lower, tv_hi);
            report.check("tv-spectral-sum", point, tv_lo, upper_constant(eps) * s);
        }
    }
    Ok(())
}
