//! Poisson weights for uniformization of `e^{-t(I-K)}`.

/// Above this mean `e^{-t}` underflows, so weights are generated in log space.
const LOG_SPACE_THRESHOLD: f64 = 700.0;

/// Streams the Poisson(`mean`) probabilities `w_0, w_1, ...` and stops once
/// the cumulative mass reaches `1 - tol`.
///
/// Weights follow the recurrence `w_{i+1} = w_i * mean / (i + 1)`, carried in
/// log space when `mean > 700`. The stream also ends when the cumulative mass
/// stalls below `1 - tol` because of rounding: past the mode, once a term no
/// longer changes the sum there is nothing left to add.
#[derive(Debug, Clone)]
pub struct PoissonTerms {
    mean: f64,
    tol: f64,
    index: u64,
    weight: f64,
    log_weight: f64,
    log_mean: f64,
    cumulative: f64,
    log_space: bool,
    done: bool,
}

impl PoissonTerms {
    pub fn new(mean: f64, tol: f64) -> Self {
        let log_space = mean > LOG_SPACE_THRESHOLD;
        PoissonTerms {
            mean,
            tol,
            index: 0,
            weight: (-mean).exp(),
            log_weight: -mean,
            log_mean: mean.ln(),
            cumulative: 0.0,
            log_space,
            done: false,
        }
    }

    /// Mass accumulated over the terms yielded so far.
    pub fn cumulative(&self) -> f64 {
        self.cumulative
    }
}

impl Iterator for PoissonTerms {
    /// `(i, w_i)`.
    type Item = (u64, f64);

    fn next(&mut self) -> Option<(u64, f64)> {
        if self.done {
            return None;
        }
        let i = self.index;
        let w = if self.log_space {
            self.log_weight.exp()
        } else {
            self.weight
        };
        let before = self.cumulative;
        self.cumulative += w;
        if self.cumulative >= 1.0 - self.tol
            || ((i as f64) > self.mean && self.cumulative == before)
        {
            self.done = true;
        }
        self.index += 1;
        let next = self.index as f64;
        if self.log_space {
            self.log_weight += self.log_mean - next.ln();
        } else {
            self.weight *= self.mean / next;
        }
        Some((i, w))
    }
}

/// `P(N <= m)` for `N ~ Poisson(mean)`.
pub fn poisson_cdf(m: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return 1.0;
    }
    let mut total = 0.0;
    for (i, w) in PoissonTerms::new(mean, 0.0) {
        if i > m {
            break;
        }
        total += w;
    }
    total.min(1.0)
}
