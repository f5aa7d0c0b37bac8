//! Spectra of reversible chains.
//!
//! A reversible kernel is similar to the symmetric matrix `D^{1/2} K D^{-1/2}`
//! with `D = diag(π)`. Birth-death kernels symmetrize to a tridiagonal matrix
//! with off-diagonal `√(p_i q_{i+1})` whose eigenvalues come straight from
//! Sturm bisection; dense kernels are first reduced to tridiagonal form with
//! Householder reflections.
//!
//! The minimizing `δ` at which `β_δ` switches to `1 - (1-δ)λ` is never formed
//! explicitly: [`beta_delta`] evaluates the lazy spectrum directly.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::chain::{BirthDeathRates, Chain};
use crate::error::{Error, Result};
use crate::linalg;

/// Detailed-balance residual above which a chain counts as non-reversible.
pub const REVERSIBILITY_TOL: f64 = 1e-10;
/// Eigenvalues of `I - K` this close to zero are snapped to exactly zero.
pub const ZERO_SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// Nonzero eigenvalues `0 < λ_1 ≤ … ≤ λ_n` of `I - K`.
    pub eigenvalues: Vec<f64>,
    /// Spectral gap `λ_1`.
    pub gap: f64,
    /// `Σ 1/λ_i`.
    pub spectral_sum: f64,
    /// Eigenvalues of `K`, descending, starting with the trivial `1`.
    pub kernel_spectrum: Vec<f64>,
}

impl SpectralSummary {
    /// Builds a summary from the full spectrum of `I - K` (zero included).
    pub fn from_laplacian_spectrum(mut spectrum: Vec<f64>) -> Result<Self> {
        spectrum.sort_by(f64::total_cmp);
        let zero = spectrum
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .ok_or_else(|| Error::Numerical("empty spectrum".into()))?;
        if spectrum[zero].abs() > ZERO_SNAP_TOL {
            return Err(Error::Numerical(format!(
                "no eigenvalue of I-K within {ZERO_SNAP_TOL:e} of zero (closest {:e})",
                spectrum[zero]
            )));
        }
        spectrum.remove(zero);
        if let Some(bad) = spectrum.iter().find(|&&x| x <= 0.0) {
            return Err(Error::Numerical(format!(
                "second non-positive eigenvalue {bad:e} of I-K"
            )));
        }
        let gap = spectrum.first().copied().unwrap_or(f64::INFINITY);
        let spectral_sum = spectrum.iter().map(|l| 1.0 / l).sum();
        let mut kernel_spectrum = vec![1.0];
        kernel_spectrum.extend(spectrum.iter().map(|l| 1.0 - l));
        Ok(SpectralSummary {
            eigenvalues: spectrum,
            gap,
            spectral_sum,
            kernel_spectrum,
        })
    }

    /// Smallest difference between consecutive nonzero eigenvalues.
    pub fn min_spacing(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `Σ θ_i`, the trace of `K`.
    pub fn kernel_trace(&self) -> f64 {
        self.kernel_spectrum.iter().sum()
    }
}

/// Spectrum of a reversible chain.
pub fn eigen_summary(chain: &Chain) -> Result<SpectralSummary> {
    let residual = chain.detailed_balance_residual();
    if residual > REVERSIBILITY_TOL {
        return Err(Error::NotReversible(residual));
    }
    let spectrum = match chain.birth_death_rates() {
        Some(rates) => birth_death_block_eigenvalues(rates, 0..rates.top() + 1),
        None => dense_laplacian_spectrum(chain),
    };
    SpectralSummary::from_laplacian_spectrum(spectrum)
}

/// Eigenvalues of the principal submatrix of `I - K` on the states in
/// `block`, ascending.
pub fn birth_death_block_eigenvalues(rates: &BirthDeathRates, block: Range<usize>) -> Vec<f64> {
    let (p, q, r) = (rates.birth(), rates.death(), rates.hold());
    let diag: Vec<f64> = block.clone().map(|i| 1.0 - r[i]).collect();
    let off: Vec<f64> = block
        .clone()
        .skip(1)
        .map(|i| (p[i - 1] * q[i]).sqrt())
        .collect();
    if diag.is_empty() {
        return Vec::new();
    }
    linalg::tridiagonal_eigenvalues(&diag, &off)
}

fn dense_laplacian_spectrum(chain: &Chain) -> Vec<f64> {
    let n = chain.size();
    let root: Vec<f64> = chain.stationary().iter().map(|x| x.sqrt()).collect();
    let mut sym = vec![0.0; n * n];
    for x in 0..n {
        for y in 0..n {
            let forward = root[x] * chain.entry(x, y) / root[y];
            let backward = root[y] * chain.entry(y, x) / root[x];
            let s = 0.5 * (forward + backward);
            sym[x * n + y] = if x == y { 1.0 - s } else { -s };
        }
    }
    linalg::symmetric_eigenvalues(sym, n)
}

/// `β_δ`: largest `|δ + (1-δ)θ|` over the nontrivial eigenvalues `θ` of `K`.
pub fn beta_delta(summary: &SpectralSummary, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadDelta {
            value: delta,
            allowed: "(0,1)",
        });
    }
    Ok(summary
        .kernel_spectrum
        .iter()
        .skip(1)
        .map(|theta| (delta + (1.0 - delta) * theta).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ehrenfest(n: usize) -> Chain {
        let nf = n as f64;
        let p = (0..=n).map(|i| 1.0 - i as f64 / nf).collect();
        let q = (0..=n).map(|i| i as f64 / nf).collect();
        Chain::birth_death(p, q, vec![0.0; n + 1]).unwrap()
    }

    #[test]
    fn ehrenfest_eigenvalues() {
        for n in [2, 5, 16] {
            let s = eigen_summary(&ehrenfest(n)).unwrap();
            assert_eq!(s.eigenvalues.len(), n);
            for (i, l) in s.eigenvalues.iter().enumerate() {
                let exact = 2.0 * (i + 1) as f64 / n as f64;
                assert!((l - exact).abs() < 1e-12, "n={n}: {l} vs {exact}");
            }
            assert!((s.gap - 2.0 / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn two_state_nonzero_eigenvalue_is_p_plus_q() {
        let (p, q) = (0.3, 0.45);
        let chain = Chain::birth_death(vec![p, 0.0], vec![0.0, q], vec![1.0 - p, 1.0 - q]).unwrap();
        let s = eigen_summary(&chain).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert!((s.gap - (p + q)).abs() < 1e-14);
        assert!((s.spectral_sum - 1.0 / (p + q)).abs() < 1e-12);
    }

    #[test]
    fn dense_and_tridiagonal_routes_agree() {
        let chain = ehrenfest(6);
        let dense = Chain::dense(
            &chain
                .dense_matrix()
                .chunks(7)
                .map(<[f64]>::to_vec)
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let a = eigen_summary(&chain).unwrap();
        let b = eigen_summary(&dense).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_delta_cases() {
        let flip = Chain::dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = eigen_summary(&flip).unwrap();
        for delta in [0.1, 0.3, 0.5, 0.8] {
            let b = beta_delta(&s, delta).unwrap();
            assert!((b - (2.0 * delta - 1.0).abs()).abs() < 1e-14);
        }
        let s = eigen_summary(&ehrenfest(2)).unwrap();
        assert!((beta_delta(&s, 0.5).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(beta_delta(&s, 1.5), Err(Error::BadDelta { .. })));
    }

    #[test]
    fn beta_half_with_nonnegative_spectrum() {
        let chain = ehrenfest(6).lazy(0.5).unwrap();
        let s = eigen_summary(&chain).unwrap();
        assert!(s.kernel_spectrum.iter().all(|&t| t >= -1e-15));
        let b = beta_delta(&s, 0.5).unwrap();
        assert!((b - (1.0 - s.gap / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn non_reversible_refused() {
        let k = [
            vec![0.1, 0.6, 0.3],
            vec![0.3, 0.1, 0.6],
            vec![0.6, 0.3, 0.1],
        ];
        let chain = Chain::dense(&k).unwrap();
        assert!(matches!(
            eigen_summary(&chain),
            Err(Error::NotReversible(_))
        ));
    }

    #[test]
    fn snapping_requires_a_near_zero_eigenvalue() {
        assert!(SpectralSummary::from_laplacian_spectrum(vec![0.1, 0.5]).is_err());
        let s = SpectralSummary::from_laplacian_spectrum(vec![0.5, 3e-10, 1.0]).unwrap();
        assert_eq!(s.eigenvalues, vec![0.5, 1.0]);
        assert_eq!(s.kernel_spectrum[0], 1.0);
    }
}
