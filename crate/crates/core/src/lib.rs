//! Exact mixing-time and cutoff diagnostics for finite Markov chains.
//!
//! The crate compares continuous-time semigroups `H_t = e^{-t(I-K)}` with
//! δ-lazy walks `δI + (1-δ)K`, specializes to birth-death chains, and checks
//! spectral cutoff criteria and mixing-time inequalities numerically.

pub mod bd;
pub mod bounds;
pub mod chain;
pub mod cli;
pub mod distances;
pub mod error;
pub mod family;
pub mod linalg;
pub mod poisson;
pub mod report;
pub mod spectral;

pub use chain::{BirthDeathRates, Chain, ChainSpec, ProbabilityVector};
pub use distances::{DistanceQuery, Metric, Start, TimeMode};
pub use error::{Error, Result};
pub use spectral::{eigen_summary, SpectralSummary};
