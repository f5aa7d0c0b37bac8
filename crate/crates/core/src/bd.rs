//! Birth-death specializations: passage times, the strong stationary time
//! from an endpoint, corner separation, and the spectral bounds on the
//! separation mixing time.

use serde::{Deserialize, Serialize};

use crate::chain::{check_time, check_tol, BirthDeathRates, Chain};
use crate::distances::TimeMode;
use crate::error::{Error, Result};
use crate::poisson::PoissonTerms;
use crate::spectral::{self, eigen_summary};

/// Closest allowed spacing between consecutive rates, relative to `λ_1`,
/// before the alternating-sign tail formula is abandoned.
pub const SPACING_THRESHOLD: f64 = 1e-6;
/// Largest tolerated rounding error of the alternating-sign tail formula.
const CANCELLATION_BUDGET: f64 = 1e-11;

fn rates_of(chain: &Chain) -> Result<&BirthDeathRates> {
    chain.birth_death_rates().ok_or(Error::NotBirthDeath)
}

/// Both sides of `E_0 τ_n = Σ_j 1/θ_j = Σ_k π([0,k]) / (π(k) p_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassageReport {
    pub mean_by_rates: f64,
    pub mean_by_spectrum: f64,
    pub residual: f64,
}

pub fn passage_time(chain: &Chain) -> Result<PassageReport> {
    let rates = rates_of(chain)?;
    let n = rates.top();
    let ascending = HittingSums::new(chain, rates);
    let mean_by_rates = ascending.up[n];
    let theta = spectral::birth_death_block_eigenvalues(rates, 0..n);
    if theta.iter().any(|&x| x <= 0.0) {
        return Err(Error::Numerical(
            "non-positive eigenvalue of the killed block".into(),
        ));
    }
    let mean_by_spectrum = theta.iter().map(|x| 1.0 / x).sum::<f64>();
    let residual = (mean_by_rates - mean_by_spectrum).abs() / mean_by_rates.abs();
    Ok(PassageReport {
        mean_by_rates,
        mean_by_spectrum,
        residual,
    })
}

/// Prefix sums of the one-sided hitting-time terms.
struct HittingSums {
    /// `up[i] = Σ_{k<i} π([0,k]) / (π(k) p_k)`, i.e. `E_0 τ_i`.
    up: Vec<f64>,
    /// `down[i] = Σ_{k>i} π([k,n]) / (π(k) q_k)`, i.e. `E_n τ_i`.
    down: Vec<f64>,
}

impl HittingSums {
    fn new(chain: &Chain, rates: &BirthDeathRates) -> Self {
        let pi = chain.stationary();
        let (p, q) = (rates.birth(), rates.death());
        let len = pi.len();
        let mut up = vec![0.0; len];
        let mut mass = 0.0;
        for k in 0..len - 1 {
            mass += pi[k];
            up[k + 1] = up[k] + mass / (pi[k] * p[k]);
        }
        let mut down = vec![0.0; len];
        let mut mass = 0.0;
        for k in (1..len).rev() {
            mass += pi[k];
            down[k - 1] = down[k] + mass / (pi[k] * q[k]);
        }
        HittingSums { up, down }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TBound {
    pub value: f64,
    /// First state attaining the minimum.
    pub argmin: usize,
}

/// `min_i { E_0 τ_i + E_n τ_i }` written in the rates.
pub fn t_bound(chain: &Chain) -> Result<TBound> {
    let rates = rates_of(chain)?;
    let sums = HittingSums::new(chain, rates);
    let (argmin, value) = sums
        .up
        .iter()
        .zip(&sums.down)
        .map(|(a, b)| a + b)
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |best, (i, v)| if v < best.1 { (i, v) } else { best },
        );
    Ok(TBound { value, argmin })
}

/// Law of `S = Σ_i Exp(λ_i)` over the nonzero eigenvalues of `I - K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SstDistribution {
    /// Ascending.
    pub rates: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub min_spacing: f64,
}

impl SstDistribution {
    pub fn from_rates(mut rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() || rates.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Numerical("rates must be positive and finite".into()));
        }
        rates.sort_by(f64::total_cmp);
        let mean = rates.iter().map(|l| 1.0 / l).sum();
        let variance = rates.iter().map(|l| 1.0 / (l * l)).sum();
        let min_spacing = rates
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        Ok(SstDistribution {
            rates,
            mean,
            variance,
            min_spacing,
        })
    }

    /// `P(S > t)`. Uses the alternating product formula when it is well
    /// conditioned and the phase-type uniformization otherwise.
    pub fn tail(&self, t: f64, tol: f64) -> Result<f64> {
        check_time(t)?;
        check_tol(tol)?;
        if t == 0.0 {
            return Ok(1.0);
        }
        let clustered = self.min_spacing < SPACING_THRESHOLD * self.rates[0];
        if !clustered {
            if let Some(value) = self.product_formula_tail(t) {
                return Ok(value);
            }
        }
        Ok(self.phase_type_tail(t, tol))
    }

    /// `Σ_j (Π_{k≠j} λ_k/(λ_k-λ_j)) e^{-λ_j t}`; `None` when the predicted
    /// rounding error exceeds the cancellation budget.
    pub fn product_formula_tail(&self, t: f64) -> Option<f64> {
        let n = self.rates.len();
        let logs: Vec<f64> = self.rates.iter().map(|l| l.ln()).collect();
        let mut sum = 0.0f64;
        let mut compensation = 0.0f64;
        let mut magnitude = 0.0f64;
        for (j, &lj) in self.rates.iter().enumerate() {
            let mut log_coeff = 0.0;
            for (k, &lk) in self.rates.iter().enumerate() {
                if k != j {
                    log_coeff += logs[k] - (lk - lj).abs().ln();
                }
            }
            // λ_k - λ_j < 0 exactly for the j rates below λ_j.
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let size = (log_coeff - lj * t).exp();
            magnitude += size;
            let y = sign * size - compensation;
            let s = sum + y;
            compensation = (s - sum) - y;
            sum = s;
        }
        let rounding = magnitude * (n as f64) * 16.0 * f64::EPSILON;
        if !rounding.is_finite() || rounding > CANCELLATION_BUDGET {
            return None;
        }
        Some(sum.clamp(0.0, 1.0))
    }

    /// `S` as the absorption time of the pure-birth chain through phases
    /// with rates `λ_1, …, λ_n`, uniformized at rate `max λ`.
    pub fn phase_type_tail(&self, t: f64, tol: f64) -> f64 {
        let n = self.rates.len();
        let top = self.rates[n - 1];
        let advance: Vec<f64> = self.rates.iter().map(|l| l / top).collect();
        // mass[i] for transient phases only; absorbed mass leaves the vector.
        let mut mass = vec![0.0; n];
        mass[0] = 1.0;
        let mut alive = 1.0;
        let mut total = 0.0;
        let mut terms = PoissonTerms::new(top * t, tol);
        let mut first = true;
        for (_, w) in terms.by_ref() {
            if !first {
                let mut carry = 0.0;
                for i in 0..n {
                    let moved = mass[i] * advance[i];
                    mass[i] = mass[i] - moved + carry;
                    carry = moved;
                }
                alive = mass.iter().sum();
            }
            first = false;
            total += w * alive;
        }
        let tail_mass = (1.0 - terms.cumulative()).max(0.0);
        (total + tail_mass * alive).clamp(0.0, 1.0)
    }

    /// `T_sep(ε) = inf{t : P(S > t) ≤ ε}` by bisection on the tail.
    pub fn separation_mixing_time(&self, eps: f64, tol: f64, rel: f64) -> Result<f64> {
        let bounds = sep_bounds(self, eps)?;
        let (mut lo, mut hi) = (0.0, bounds.upper.max(bounds.upper_sep_es));
        while self.tail(hi, tol)? > eps {
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > rel * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.tail(mid, tol)? <= eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

pub fn sst_distribution(chain: &Chain) -> Result<SstDistribution> {
    rates_of(chain)?;
    SstDistribution::from_rates(eigen_summary(chain)?.eigenvalues)
}

/// `P(S > t)`, equal to the continuous-time separation from an endpoint.
pub fn sst_tail(chain: &Chain, t: f64, tol: f64) -> Result<f64> {
    sst_distribution(chain)?.tail(t, tol)
}

/// `1 - P^t(0,n)/π(n)`, which is the worst-case separation in continuous
/// time and for δ-lazy walks with `δ ≥ 1/2`.
pub fn corner_separation(chain: &Chain, time: f64, mode: TimeMode, tol: f64) -> Result<f64> {
    let rates = rates_of(chain)?;
    let n = rates.top();
    check_time(time)?;
    let mut start = vec![0.0; n + 1];
    start[0] = 1.0;
    let law = match mode {
        TimeMode::Discrete => {
            return Err(Error::InvalidQuery(
                "corner separation applies to lazy (δ ≥ 1/2) and continuous modes".into(),
            ))
        }
        TimeMode::Lazy { delta } => {
            if !(delta >= 0.5 && delta < 1.0) {
                return Err(Error::BadDelta {
                    value: delta,
                    allowed: "[1/2,1)",
                });
            }
            if time.fract() != 0.0 {
                return Err(Error::NonIntegerTime(time));
            }
            chain.lazy(delta)?.propagate(&start, time as u64)
        }
        TimeMode::Continuous => {
            check_tol(tol)?;
            chain.semigroup(&start, time, tol)
        }
    };
    Ok((1.0 - law[n] / chain.stationary()[n]).clamp(0.0, 1.0))
}

/// Chebyshev and mean-only brackets on the continuous separation mixing time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SepBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_sep_es: f64,
    pub upper_sep_es: f64,
}

pub fn sep_bounds(sst: &SstDistribution, eps: f64) -> Result<SepBounds> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadEpsilon(eps));
    }
    let odds = 1.0 / eps - 1.0;
    let (es, var) = (sst.mean, sst.variance);
    let (se, sc) = (eps.sqrt(), (1.0 - eps).sqrt());
    Ok(SepBounds {
        lower: (es - (var / odds).sqrt()).max(0.0),
        upper: es + (odds * var).sqrt(),
        lower_sep_es: ((sc - se) * es / sc).max(0.0),
        upper_sep_es: (se + sc) * es / se,
    })
}
