//! Reference Gibbs sampler for the posterior `∝ e^{−τH(x)}`.
//!
//! Each conditional `x_j | x₋ⱼ` is the one-dimensional posterior with linear
//! term `a_j = w_j − Σ_{k≠j} C_kj x_k`: a two-sided mixture of truncated
//! normals with weight `α = P(x_j ≥ 0)` on the positive piece.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact_1d::OneDimProblem;
use crate::linalg::Matrix;
use crate::problem::PenalizedProblem;
use crate::scalar::{norm_inf, Real};
use crate::special::{sample_truncated_normal, RngStream, Side};

/// Exact draw from `∝ e^{−τ(cx² − 2ax + 2μ|x|)}`.
pub fn sample_conditional_1d<T: Real>(c: T, a: T, mu: T, tau: T, rng: &mut RngStream) -> T {
    let alpha = OneDimProblem { c, w: a, mu, tau }.alpha();
    let sd = (T::lit(2.0) * tau * c).sqrt().recip();
    if T::lit(rng.uniform()) < alpha {
        sample_truncated_normal((a - mu) / c, sd, Side::NonNegative, rng)
    } else {
        sample_truncated_normal((a + mu) / c, sd, Side::NonPositive, rng)
    }
}

/// Sweeps between checks of the incremental `w − Cx` against a direct product.
const DRIFT_CHECK_EVERY: usize = 100;

/// Retained samples of a Gibbs run, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsChain<T> {
    pub samples: Matrix<T>,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Largest deviation seen by the drift check.
    pub max_drift: T,
}

impl<T: Real> GibbsChain<T> {
    pub fn len(&self) -> usize {
        self.samples.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.samples.column(j)
    }

    pub fn means(&self) -> Vec<T> {
        let n = T::from_count(self.len());
        (0..self.samples.cols()).map(|j| self.column(j).into_iter().sum::<T>() / n).collect()
    }

    /// Batch-means standard error of each column mean.
    pub fn standard_errors(&self, batches: usize) -> Vec<T> {
        (0..self.samples.cols()).map(|j| batch_means_se(&self.column(j), batches)).collect()
    }

    /// Samples of `aᵀx`.
    pub fn project(&self, a: &[T]) -> Result<Vec<T>> {
        if a.len() != self.samples.cols() {
            return Err(Error::DimensionMismatch { expected: self.samples.cols(), found: a.len() });
        }
        Ok(self.samples.mul_vec(a))
    }
}

/// Standard error of the mean of a correlated series from `batches`
/// non-overlapping batch means (the tail beyond a whole number of batches is
/// dropped).
pub fn batch_means_se<T: Real>(series: &[T], batches: usize) -> T {
    let b = batches.max(2);
    let size = series.len() / b;
    if size == 0 {
        return T::nan();
    }
    let means: Vec<T> = series
        .chunks_exact(size)
        .take(b)
        .map(|c| c.iter().copied().sum::<T>() / T::from_count(size))
        .collect();
    let k = T::from_count(b);
    let grand = means.iter().copied().sum::<T>() / k;
    let var = means.iter().map(|&m| (m - grand) * (m - grand)).sum::<T>() / (k - T::one());
    (var / k).sqrt()
}

/// Runs `sweeps` cyclic sweeps from `init`, discarding the first `burn_in`
/// and keeping every `thin`-th sweep after that.
pub fn run_gibbs<T: Real>(
    problem: &PenalizedProblem<T>,
    init: &[T],
    sweeps: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
) -> Result<GibbsChain<T>> {
    let p = problem.dim();
    if init.len() != p {
        return Err(Error::DimensionMismatch { expected: p, found: init.len() });
    }
    if sweeps <= burn_in {
        return Err(Error::InvalidParameter(format!("sweeps ({sweeps}) must exceed burn-in ({burn_in})")));
    }
    if thin == 0 {
        return Err(Error::InvalidParameter("thin must be at least 1".into()));
    }
    let (mu, tau) = (problem.mu(), problem.tau());
    let c = problem.c();
    let mut rng = RngStream::new(seed);
    let mut x = init.to_vec();
    let mut r = problem.dual(&x);
    let kept = (sweeps - burn_in) / thin;
    let mut samples = Vec::with_capacity(kept * p);
    let mut max_drift = T::zero();
    for sweep in 1..=sweeps {
        for j in 0..p {
            let cjj = c[(j, j)];
            let a = r[j] + cjj * x[j];
            let new = sample_conditional_1d(cjj, a, mu, tau, &mut rng);
            let delta = new - x[j];
            x[j] = new;
            for (rk, &ckj) in r.iter_mut().zip(c.row(j)) {
                *rk = *rk - ckj * delta;
            }
        }
        if sweep % DRIFT_CHECK_EVERY == 0 {
            let direct = problem.dual(&x);
            let drift: Vec<T> = direct.iter().zip(&r).map(|(&d, &i)| d - i).collect();
            max_drift = max_drift.max(norm_inf(&drift));
            r = direct;
        }
        if sweep > burn_in && (sweep - burn_in) % thin == 0 {
            samples.extend_from_slice(&x);
        }
    }
    Ok(GibbsChain {
        samples: Matrix::from_row_major(kept, p, samples)?,
        burn_in,
        thin,
        seed,
        max_drift,
    })
}

/// Independent chains, one per seed, run concurrently.
pub fn run_chains<T: Real>(
    problem: &PenalizedProblem<T>,
    init: &[T],
    sweeps: usize,
    burn_in: usize,
    thin: usize,
    seeds: &[u64],
) -> Result<Vec<GibbsChain<T>>> {
    seeds.par_iter().map(|&s| run_gibbs(problem, init, sweeps, burn_in, thin, s)).collect()
}

/// Default burn-in: a tenth of the sweeps.
pub fn default_burn_in(sweeps: usize) -> usize {
    sweeps / 10
}
