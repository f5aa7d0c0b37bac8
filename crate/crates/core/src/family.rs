//! Chain families indexed by size and finite-size cutoff diagnostics.
//!
//! Cutoff is an asymptotic property and cannot be decided from finitely many
//! sizes. The scans here report the quantities the theory is about (the
//! spectral product `s_n λ_n`, the continuous/lazy mixing-time ratio, window
//! widths) and classify the trend with fixed, explicit thresholds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::distances::{mixing_time, DistanceQuery, Metric, TimeMode};
use crate::error::{Error, Result};
use crate::spectral::eigen_summary;

/// Product growth, smallest to largest size, required for a cutoff trend.
pub const CUTOFF_GROWTH: f64 = 1.5;
/// A product may dip below its running maximum by this fraction.
pub const DIP_ALLOWANCE: f64 = 0.10;
/// Largest max/min product ratio still read as bounded.
pub const BOUNDED_RATIO: f64 = 1.3;
/// Default ε-grid for mixing-time columns.
pub const DEFAULT_EPS_GRID: [f64; 5] = [0.05, 0.1, 0.25, 0.5, 0.75];

/// Random birth-death rates: `p_i, q_i ~ U[0.1, 0.45]`, so `p_i q_{i+1} ≥ 0.01`
/// and the holding rate is at least 0.1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateLaw {
    Uniform,
}

const RATE_FLOOR: f64 = 0.1;
const RATE_CEIL: f64 = 0.45;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Family {
    Ehrenfest,
    PathSymmetric,
    PathBiased { rho: f64 },
    RandomBd { seed: u64, law: RateLaw },
}

impl Family {
    pub fn label(&self) -> String {
        match self {
            Family::Ehrenfest => "ehrenfest".into(),
            Family::PathSymmetric => "path_symmetric".into(),
            Family::PathBiased { rho } => format!("path_biased({rho})"),
            Family::RandomBd { seed, .. } => format!("random_bd({seed})"),
        }
    }

    /// Member on `{0, …, n}`.
    pub fn chain(&self, n: usize) -> Result<Chain> {
        if n < 1 {
            return Err(Error::BadFamily(format!("size {n} must be at least 1")));
        }
        let nf = n as f64;
        match self {
            Family::Ehrenfest => {
                let p = (0..=n).map(|i| 1.0 - i as f64 / nf).collect();
                let q = (0..=n).map(|i| i as f64 / nf).collect();
                Chain::birth_death(p, q, vec![0.0; n + 1])
            }
            Family::PathSymmetric => path(n, 0.5),
            Family::PathBiased { rho } => {
                check_rho(*rho)?;
                path(n, *rho)
            }
            Family::RandomBd {
                seed,
                law: RateLaw::Uniform,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(n as u64);
                let mut p = vec![0.0; n + 1];
                let mut q = vec![0.0; n + 1];
                for i in 0..=n {
                    if i < n {
                        p[i] = rng.gen_range(RATE_FLOOR..RATE_CEIL);
                    }
                    if i > 0 {
                        q[i] = rng.gen_range(RATE_FLOOR..RATE_CEIL);
                    }
                }
                let r = p.iter().zip(&q).map(|(a, b)| 1.0 - a - b).collect();
                Chain::birth_death(p, q, r)
            }
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) || rho == 0.5 {
        return Err(Error::BadFamily(format!(
            "rho must lie in (0,1) without 1/2, got {rho}"
        )));
    }
    Ok(())
}

/// Walk with up-rate `up` and down-rate `1 - up` in the interior, holding the
/// rejected move at each end.
fn path(n: usize, up: f64) -> Result<Chain> {
    let down = 1.0 - up;
    let mut p = vec![up; n + 1];
    let mut q = vec![down; n + 1];
    let mut r = vec![0.0; n + 1];
    p[n] = 0.0;
    q[0] = 0.0;
    r[0] = down;
    r[n] = up;
    Chain::birth_death(p, q, r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub sizes: Vec<usize>,
}

impl FamilySpec {
    pub fn new(family: Family, sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::BadFamily("no sizes given".into()));
        }
        if let Some(&n) = sizes.iter().find(|&&n| n < 2) {
            return Err(Error::BadFamily(format!("size {n} is below 2")));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadFamily("sizes must be strictly increasing".into()));
        }
        if let Family::PathBiased { rho } = family {
            check_rho(rho)?;
        }
        Ok(FamilySpec { family, sizes })
    }
}

/// On-disk family description, e.g.
/// `{"family":"ehrenfest","sizes":[16,32,64]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub family: String,
    pub sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
}

impl FamilyFile {
    pub fn spec(&self) -> Result<FamilySpec> {
        let family = match self.family.as_str() {
            "ehrenfest" => Family::Ehrenfest,
            "path_symmetric" => Family::PathSymmetric,
            "path_biased" => Family::PathBiased {
                rho: self
                    .rho
                    .ok_or_else(|| Error::BadFamily("path_biased needs \"rho\"".into()))?,
            },
            "random_bd" => Family::RandomBd {
                seed: self.seed.unwrap_or(0),
                law: RateLaw::Uniform,
            },
            other => return Err(Error::BadFamily(format!("unknown family \"{other}\""))),
        };
        FamilySpec::new(family, self.sizes.clone())
    }
}

pub fn generate(spec: &FamilySpec, n: usize) -> Result<Chain> {
    spec.family.chain(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CutoffTrend,
    NoCutoffTrend,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::CutoffTrend => "cutoff-trend",
            Verdict::NoCutoffTrend => "no-cutoff-trend",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Classifies the spectral products `s_n λ_n` listed by increasing size.
    pub fn classify(products: &[f64]) -> Verdict {
        if products.len() < 2 {
            return Verdict::Inconclusive;
        }
        let first = products[0];
        let last = products[products.len() - 1];
        let mut running = first;
        let mut monotone = true;
        for &p in &products[1..] {
            if p < (1.0 - DIP_ALLOWANCE) * running {
                monotone = false;
            }
            running = running.max(p);
        }
        if last >= CUTOFF_GROWTH * first && monotone {
            return Verdict::CutoffTrend;
        }
        let max = products.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = products.iter().cloned().fold(f64::INFINITY, f64::min);
        if max / min <= BOUNDED_RATIO {
            Verdict::NoCutoffTrend
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRecord {
    pub n: usize,
    pub gap: f64,
    pub spectral_sum: f64,
    pub product: f64,
    /// `T^{(c)}_TV(ε)` over the report's ε-grid; empty when not computed.
    pub continuous_times: Vec<f64>,
    /// `T^{(δ)}_TV(ε)` over the report's ε-grid; empty when not computed.
    pub lazy_times: Vec<f64>,
    pub ratio: Option<f64>,
    pub window: Option<f64>,
    pub sqrt_t: Option<f64>,
}

impl SizeRecord {
    fn spectral(chain: &Chain, n: usize) -> Result<Self> {
        let s = eigen_summary(chain)?;
        Ok(SizeRecord {
            n,
            gap: s.gap,
            spectral_sum: s.spectral_sum,
            product: s.gap * s.spectral_sum,
            continuous_times: Vec::new(),
            lazy_times: Vec::new(),
            ratio: None,
            window: None,
            sqrt_t: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub family: String,
    pub eps_grid: Vec<f64>,
    pub delta: Option<f64>,
    pub records: Vec<SizeRecord>,
    pub verdict: Verdict,
    /// `1 - δ` for ratio scans.
    pub ratio_target: Option<f64>,
    /// `|ratio - (1-δ)|` at the largest size.
    pub ratio_deviation: Option<f64>,
    /// `(ε, η)` for window scans.
    pub window_pair: Option<(f64, f64)>,
    pub notes: Vec<String>,
}

impl FamilyReport {
    fn from_records(spec: &FamilySpec, records: Vec<SizeRecord>) -> Self {
        let products: Vec<f64> = records.iter().map(|r| r.product).collect();
        FamilyReport {
            family: spec.family.label(),
            eps_grid: Vec::new(),
            delta: None,
            verdict: Verdict::classify(&products),
            records,
            ratio_target: None,
            ratio_deviation: None,
            window_pair: None,
            notes: Vec::new(),
        }
    }

    /// An empty report, e.g. as the CSV schema carrier.
    pub fn empty(family: &str, eps_grid: Vec<f64>) -> Self {
        FamilyReport {
            family: family.into(),
            eps_grid,
            delta: None,
            records: Vec::new(),
            verdict: Verdict::Inconclusive,
            ratio_target: None,
            ratio_deviation: None,
            window_pair: None,
            notes: Vec::new(),
        }
    }

    /// `window / √T(1/4)` per size.
    pub fn window_over_sqrt_t(&self) -> Vec<Option<f64>> {
        self.records
            .iter()
            .map(|r| Some(r.window? / r.sqrt_t?))
            .collect()
    }

    /// `window / n` per size.
    pub fn window_over_n(&self) -> Vec<Option<f64>> {
        self.records
            .iter()
            .map(|r| Some(r.window? / r.n as f64))
            .collect()
    }

    pub fn ratios(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.ratio).collect()
    }
}

/// Options of the combined scan behind the CLI's `family` verb.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub delta: f64,
    pub eps_grid: Vec<f64>,
    pub ratio_eps: f64,
    pub window: (f64, f64),
    pub tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            delta: 0.5,
            eps_grid: DEFAULT_EPS_GRID.to_vec(),
            ratio_eps: 0.25,
            window: (0.1, 0.9),
            tol: 1e-10,
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadEpsilon(eps));
    }
    Ok(())
}

fn check_pair(eps: f64, eta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < eta && eta < 1.0) {
        return Err(Error::BadEpsilonPair(eps, eta));
    }
    Ok(())
}

fn tv_time(chain: &Chain, mode: TimeMode, eps: f64, tol: f64) -> Result<f64> {
    mixing_time(
        chain,
        eps,
        &DistanceQuery::worst_case(mode, Metric::Tv)?,
        tol,
    )
}

/// Spectral gap, spectral sum, and their product per size.
pub fn criterion_scan(spec: &FamilySpec) -> Result<FamilyReport> {
    let records = spec
        .sizes
        .iter()
        .map(|&n| SizeRecord::spectral(&generate(spec, n)?, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(FamilyReport::from_records(spec, records))
}

/// `T^{(c)}_TV(ε) / T^{(δ)}_TV(ε)` per size against the limit `1 - δ`.
pub fn ratio_scan(spec: &FamilySpec, delta: f64, eps: f64, tol: f64) -> Result<FamilyReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadDelta {
            value: delta,
            allowed: "(0,1)",
        });
    }
    check_eps(eps)?;
    let lazy = TimeMode::Lazy { delta };
    let mut records = Vec::with_capacity(spec.sizes.len());
    for &n in &spec.sizes {
        let chain = generate(spec, n)?;
        let mut rec = SizeRecord::spectral(&chain, n)?;
        let tc = tv_time(&chain, TimeMode::Continuous, eps, tol)?;
        let tl = tv_time(&chain, lazy, eps, tol)?;
        rec.continuous_times = vec![tc];
        rec.lazy_times = vec![tl];
        rec.ratio = (tl > 0.0).then(|| tc / tl);
        records.push(rec);
    }
    let mut report = FamilyReport::from_records(spec, records);
    report.eps_grid = vec![eps];
    report.delta = Some(delta);
    report.ratio_target = Some(1.0 - delta);
    report.ratio_deviation = report
        .records
        .last()
        .and_then(|r| r.ratio)
        .map(|r| (r - (1.0 - delta)).abs());
    if !(0.01..=0.99).contains(&eps) {
        report.notes.push(format!(
            "eps = {eps} is in an extreme tail; finite-size ratios need not approach {}",
            1.0 - delta
        ));
    }
    Ok(report)
}

/// `|T^{(c)}(ε) - T^{(c)}(η)|` and `√T^{(c)}(1/4)` per size.
pub fn window_scan(spec: &FamilySpec, eps: f64, eta: f64, tol: f64) -> Result<FamilyReport> {
    check_pair(eps, eta)?;
    let mut records = Vec::with_capacity(spec.sizes.len());
    for &n in &spec.sizes {
        let chain = generate(spec, n)?;
        let mut rec = SizeRecord::spectral(&chain, n)?;
        let (t_eps, t_eta, t_quarter) = window_times(&chain, eps, eta, tol)?;
        rec.window = Some((t_eps - t_eta).abs());
        rec.sqrt_t = Some(t_quarter.sqrt());
        records.push(rec);
    }
    let mut report = FamilyReport::from_records(spec, records);
    report.window_pair = Some((eps, eta));
    Ok(report)
}

fn window_times(chain: &Chain, eps: f64, eta: f64, tol: f64) -> Result<(f64, f64, f64)> {
    let c = TimeMode::Continuous;
    Ok((
        tv_time(chain, c, eps, tol)?,
        tv_time(chain, c, eta, tol)?,
        tv_time(chain, c, 0.25, tol)?,
    ))
}

/// Every column at once: spectral products, continuous and lazy TV mixing
/// times over the ε-grid, the ratio at `ratio_eps`, and the window.
pub fn full_scan(spec: &FamilySpec, options: &ScanOptions) -> Result<FamilyReport> {
    let ScanOptions {
        delta,
        ref eps_grid,
        ratio_eps,
        window: (eps, eta),
        tol,
    } = *options;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadDelta {
            value: delta,
            allowed: "(0,1)",
        });
    }
    eps_grid.iter().try_for_each(|&e| check_eps(e))?;
    check_eps(ratio_eps)?;
    check_pair(eps, eta)?;
    let lazy = TimeMode::Lazy { delta };
    let mut records = Vec::with_capacity(spec.sizes.len());
    for &n in &spec.sizes {
        let chain = generate(spec, n)?;
        let mut rec = SizeRecord::spectral(&chain, n)?;
        rec.continuous_times = eps_grid
            .iter()
            .map(|&e| tv_time(&chain, TimeMode::Continuous, e, tol))
            .collect::<Result<_>>()?;
        rec.lazy_times = eps_grid
            .iter()
            .map(|&e| tv_time(&chain, lazy, e, tol))
            .collect::<Result<_>>()?;
        let lookup = |times: &[f64], mode: TimeMode| -> Result<f64> {
            match eps_grid.iter().position(|&e| e == ratio_eps) {
                Some(i) => Ok(times[i]),
                None => tv_time(&chain, mode, ratio_eps, tol),
            }
        };
        let tc = lookup(&rec.continuous_times, TimeMode::Continuous)?;
        let tl = lookup(&rec.lazy_times, lazy)?;
        rec.ratio = (tl > 0.0).then(|| tc / tl);
        let (t_eps, t_eta, t_quarter) = window_times(&chain, eps, eta, tol)?;
        rec.window = Some((t_eps - t_eta).abs());
        rec.sqrt_t = Some(t_quarter.sqrt());
        records.push(rec);
    }
    let mut report = FamilyReport::from_records(spec, records);
    report.eps_grid = eps_grid.clone();
    report.delta = Some(delta);
    report.ratio_target = Some(1.0 - delta);
    report.ratio_deviation = report
        .records
        .last()
        .and_then(|r| r.ratio)
        .map(|r| (r - (1.0 - delta)).abs());
    report.window_pair = Some((eps, eta));
    Ok(report)
}
