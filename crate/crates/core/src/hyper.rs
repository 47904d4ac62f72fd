//! Hyperparameter grids, the MAP estimate of `τ`, and cross-validation.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::ml::{MlSolution, MlSolver};
use crate::problem::{Dataset, PenalizedProblem, Standardization};
use crate::saddle::{tau_path, SaddleSolver};
use crate::scalar::{dot, norm_inf, norm_l1, Real};
use crate::special::RngStream;

/// `μ_max = max_j |w_j|`, the smallest `μ` whose ML solution is all zero.
pub fn mu_max<T: Real>(w: &[T]) -> Result<T> {
    let m = norm_inf(w);
    if m > T::zero() {
        Ok(m)
    } else {
        Err(Error::AllZeroW)
    }
}

/// `μ_n = μ_max · r^{(N+1−n)/N}` for `n = 1..N` (ascending).
pub fn mu_grid<T: Real>(mu_max: T, n: usize, r: T) -> Result<Vec<T>> {
    if n < 1 || !(r > T::zero() && r < T::one()) || !(mu_max > T::zero()) {
        return Err(Error::InvalidParameter(format!("mu grid needs N >= 1 and 0 < r < 1 (N={n}, r={r})")));
    }
    let big_n = T::from_count(n);
    Ok((1..=n).map(|k| mu_max * r.powf(T::from_count(n + 1 - k) / big_n)).collect())
}

/// `τ_m = 10^{(m + M − 1)/4}` for `m = 1..count` (ascending).
pub fn tau_grid<T: Real>(big_m: usize, count: usize) -> Result<Vec<T>> {
    if big_m < 1 || count < 1 {
        return Err(Error::InvalidParameter(format!("tau grid needs M >= 1 and count >= 1 (M={big_m}, count={count})")));
    }
    let ten = T::lit(10.0);
    Ok((1..=count).map(|m| ten.powf(T::lit(0.25) * T::from_count(m + big_m - 1))).collect())
}

/// Hyperparameter values searched by cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperGrid<T> {
    /// Strictly decreasing.
    pub mus: Vec<T>,
    /// Strictly increasing.
    pub taus: Vec<T>,
    pub lambda: T,
}

impl<T: Real> HyperGrid<T> {
    pub fn new(mut mus: Vec<T>, mut taus: Vec<T>, lambda: T) -> Result<Self> {
        mus.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        taus.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let strict = |v: &[T]| v.windows(2).all(|w| w[0] != w[1]);
        if mus.is_empty() || taus.is_empty() || !strict(&mus) || !strict(&taus) {
            return Err(Error::InvalidParameter("grid values must be non-empty and distinct".into()));
        }
        if mus.iter().chain(&taus).any(|&v| !(v > T::zero()) || !v.is_finite()) || !(lambda >= T::zero()) {
            return Err(Error::InvalidParameter("grid values must be positive".into()));
        }
        Ok(Self { mus, taus, lambda })
    }

    /// The closed-form grids with `μ_max` taken from the standardized data.
    pub fn from_data(data: &Dataset<T>, lambda: T, n_mu: usize, r: T, big_m: usize, n_tau: usize) -> Result<Self> {
        let std = if data.is_standardized() { data.clone() } else { data.standardize()? };
        let two_n = T::lit(2.0) * T::from_count(std.n_samples());
        let w: Vec<T> = std.predictors().tr_mul_vec(std.responses()).into_iter().map(|v| v / two_n).collect();
        let mus = mu_grid(mu_max(&w)?, n_mu, r)?;
        Self::new(mus, tau_grid(big_m, n_tau)?, lambda)
    }
}

/// The four pieces of the MAP denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapTauTerms<T> {
    pub numerator: T,
    /// `‖y − Ax̂‖²/(2n)`
    pub residual: T,
    /// `λ‖x̂‖²`
    pub ridge: T,
    /// `2μ‖x̂‖₁`
    pub lasso: T,
}

impl<T: Real> MapTauTerms<T> {
    pub fn tau(&self) -> Result<T> {
        let den = self.residual + self.ridge + self.lasso;
        if !(den > T::min_positive_value()) || !(self.numerator / den).is_finite() {
            return Err(Error::DegenerateDenominator);
        }
        Ok(self.numerator / den)
    }
}

pub fn map_tau_terms<T: Real>(data: &Dataset<T>, lambda: T, mu: T, ml: &MlSolution<T>) -> Result<MapTauTerms<T>> {
    if !data.is_standardized() {
        return Err(Error::InvalidData("MAP tau needs standardized data".into()));
    }
    let (n, p) = (data.n_samples(), data.n_predictors());
    if ml.x_hat.len() != p {
        return Err(Error::DimensionMismatch { expected: p, found: ml.x_hat.len() });
    }
    let fitted = data.predictors().mul_vec(&ml.x_hat);
    let rss: T = data.responses().iter().zip(&fitted).map(|(&y, &f)| (y - f) * (y - f)).sum();
    let two = T::lit(2.0);
    Ok(MapTauTerms {
        numerator: T::from_count(p) + T::from_count(n) / two,
        residual: rss / (two * T::from_count(n)),
        ridge: lambda * dot(&ml.x_hat, &ml.x_hat),
        lasso: two * mu * norm_l1(&ml.x_hat),
    })
}

/// `τ = (p + n/2) / (‖y − Ax̂‖²/(2n) + λ‖x̂‖² + 2μ‖x̂‖₁)`
pub fn map_tau<T: Real>(data: &Dataset<T>, lambda: T, mu: T, ml: &MlSolution<T>) -> Result<T> {
    map_tau_terms(data, lambda, mu, ml)?.tau()
}

/// Random partition of `0..n` into `folds` test sets whose sizes differ by at
/// most one. Each set is sorted.
pub fn fold_split(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 || n < folds {
        return Err(Error::InvalidParameter(format!("need 2 <= folds <= n (folds={folds}, n={n})")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut RngStream::new(seed));
    let mut out = vec![Vec::with_capacity(n / folds + 1); folds];
    for (pos, i) in order.into_iter().enumerate() {
        out[pos % folds].push(i);
    }
    out.iter_mut().for_each(|f| f.sort_unstable());
    Ok(out)
}

/// Pearson correlation; `None` when either series is constant.
pub fn pearson<T: Real>(a: &[T], b: &[T]) -> Option<T> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = T::from_count(a.len());
    let ma = a.iter().copied().sum::<T>() / n;
    let mb = b.iter().copied().sum::<T>() / n;
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        sab = sab + (x - ma) * (y - mb);
        saa = saa + (x - ma) * (x - ma);
        sbb = sbb + (y - mb) * (y - mb);
    }
    let den = (saa * sbb).sqrt();
    (den > T::zero()).then(|| sab / den)
}

/// Training and held-out rows of one fold. Held-out predictors are mapped
/// with the training statistics; held-out responses stay in original units.
#[derive(Debug, Clone)]
pub struct FoldData<T> {
    pub train: Dataset<T>,
    pub stats: Standardization<T>,
    pub columns: Vec<usize>,
    pub test_predictors: Matrix<T>,
    pub test_responses: Vec<T>,
}

impl<T: Real> FoldData<T> {
    /// Splits raw `data`, optionally keeping only the `screen_top` predictors
    /// most correlated with the training response.
    pub fn new(data: &Dataset<T>, test_rows: &[usize], screen_top: Option<usize>) -> Result<Self> {
        let train_rows: Vec<usize> = (0..data.n_samples()).filter(|i| test_rows.binary_search(i).is_err()).collect();
        let raw_train = data.select_rows(&train_rows)?;
        let columns = match screen_top {
            Some(k) if k < data.n_predictors() => screen(&raw_train.standardize()?, k),
            _ => (0..data.n_predictors()).collect(),
        };
        let (train, stats) = raw_train.select_columns(&columns).standardize_with_stats()?;
        let test = data.predictors().select_rows(test_rows).select_columns(&columns);
        Ok(Self {
            train,
            test_predictors: stats.apply_predictors(&test),
            test_responses: test_rows.iter().map(|&i| data.responses()[i]).collect(),
            stats,
            columns,
        })
    }

    /// Pearson correlation between held-out responses and the predictions of
    /// `x` (standardized scale) mapped back to response units.
    pub fn score(&self, x: &[T]) -> Option<T> {
        let pred: Vec<T> = self
            .test_predictors
            .mul_vec(x)
            .into_iter()
            .map(|v| self.stats.unapply_response(v))
            .collect();
        pearson(&pred, &self.test_responses)
    }
}

/// Indices of the `k` columns with largest `|Σ_i a_ij y_i|`, ascending.
fn screen<T: Real>(std: &Dataset<T>, k: usize) -> Vec<usize> {
    let score = std.predictors().tr_mul_vec(std.responses());
    let mut idx: Vec<usize> = (0..score.len()).collect();
    idx.sort_by(|&a, &b| score[b].abs().partial_cmp(&score[a].abs()).unwrap_or(std::cmp::Ordering::Equal));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Settings for [`cross_validate_with`].
#[derive(Debug, Clone, Copy)]
pub struct CvOptions<T> {
    /// Keep only this many predictors per training fold (by correlation).
    pub screen_top: Option<usize>,
    pub ml: MlSolver<T>,
    pub saddle: SaddleSolver<T>,
}

impl<T: Real> Default for CvOptions<T> {
    fn default() -> Self {
        Self { screen_top: None, ml: MlSolver::default(), saddle: SaddleSolver::default() }
    }
}

/// Scores of one fold. `None` marks a failed solve or a constant prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldReport {
    pub test_rows: Vec<usize>,
    /// `scores[mu][tau]`, in grid order.
    pub scores: Vec<Vec<Option<f64>>>,
    /// Maximum-likelihood elastic net, one per `mu`.
    pub ml_scores: Vec<Option<f64>>,
    /// Ridge regression (`mu = 0`).
    pub ridge_score: Option<f64>,
    /// Solver failures as `"mu=…, tau=…: message"`.
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestCell {
    pub mu: f64,
    pub tau: Option<f64>,
    pub median_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub mus: Vec<f64>,
    pub taus: Vec<f64>,
    pub lambda: f64,
}

/// Outcome of cross-validation over a [`HyperGrid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub folds: Vec<FoldReport>,
    pub grid: GridReport,
    /// Median over folds, `scores[mu][tau]`.
    pub scores: Vec<Vec<Option<f64>>>,
    pub best: Option<BestCell>,
    pub ml_scores: Vec<Option<f64>>,
    pub best_ml: Option<BestCell>,
    pub ridge_median: Option<f64>,
}

/// Median of the available values.
pub fn median(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().flatten().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// K-fold cross-validation of the posterior expectation over `grid`.
pub fn cross_validate<T: Real>(data: &Dataset<T>, grid: &HyperGrid<T>, folds: usize, seed: u64) -> Result<CvReport> {
    cross_validate_with(data, grid, folds, seed, &CvOptions::default())
}

pub fn cross_validate_with<T: Real>(
    data: &Dataset<T>,
    grid: &HyperGrid<T>,
    folds: usize,
    seed: u64,
    options: &CvOptions<T>,
) -> Result<CvReport> {
    let raw = if data.is_standardized() {
        return Err(Error::InvalidData("cross-validation needs raw data (folds are standardized separately)".into()));
    } else {
        data
    };
    let split = fold_split(raw.n_samples(), folds, seed)?;
    let reports: Vec<FoldReport> = split
        .par_iter()
        .map(|test| run_fold(raw, test, grid, options))
        .collect::<Result<_>>()?;
    let (nm, nt) = (grid.mus.len(), grid.taus.len());
    let scores: Vec<Vec<Option<f64>>> = (0..nm)
        .map(|i| (0..nt).map(|k| median(reports.iter().map(|r| r.scores[i][k]))).collect())
        .collect();
    let ml_scores: Vec<Option<f64>> = (0..nm).map(|i| median(reports.iter().map(|r| r.ml_scores[i]))).collect();
    let mut best: Option<BestCell> = None;
    for (i, row) in scores.iter().enumerate() {
        for (k, s) in row.iter().enumerate() {
            if let Some(s) = *s {
                if best.is_none_or(|b| s > b.median_r) {
                    best = Some(BestCell { mu: grid.mus[i].as_f64(), tau: Some(grid.taus[k].as_f64()), median_r: s });
                }
            }
        }
    }
    let mut best_ml: Option<BestCell> = None;
    for (i, s) in ml_scores.iter().enumerate() {
        if let Some(s) = *s {
            if best_ml.is_none_or(|b| s > b.median_r) {
                best_ml = Some(BestCell { mu: grid.mus[i].as_f64(), tau: None, median_r: s });
            }
        }
    }
    Ok(CvReport {
        ridge_median: median(reports.iter().map(|r| r.ridge_score)),
        folds: reports,
        grid: GridReport {
            mus: grid.mus.iter().map(|v| v.as_f64()).collect(),
            taus: grid.taus.iter().map(|v| v.as_f64()).collect(),
            lambda: grid.lambda.as_f64(),
        },
        scores,
        best,
        ml_scores,
        best_ml,
    })
}

fn run_fold<T: Real>(data: &Dataset<T>, test: &[usize], grid: &HyperGrid<T>, options: &CvOptions<T>) -> Result<FoldReport> {
    let fold = FoldData::new(data, test, options.screen_top)?;
    let score = |x: &[T]| fold.score(x).map(|r| r.as_f64());
    let mut taus_desc = grid.taus.clone();
    taus_desc.reverse();
    let nt = taus_desc.len();
    let cells: Vec<(Vec<Option<f64>>, Option<f64>, Vec<String>)> = grid
        .mus
        .par_iter()
        .map(|&mu| {
            let mut errors = Vec::new();
            let mut row = vec![None; nt];
            let prob = match PenalizedProblem::from_data(&fold.train, grid.lambda, mu, taus_desc[0]) {
                Ok(p) => p,
                Err(e) => return (row, None, vec![format!("mu={mu}: {e}")]),
            };
            let ml = match options.ml.solve(&prob, None).and_then(MlSolution::ensure_converged) {
                Ok(ml) => ml,
                Err(e) => return (row, None, vec![format!("mu={mu}: {e}")]),
            };
            match tau_path(&prob, &taus_desc, &ml.x_hat, &options.saddle) {
                Ok(path) => {
                    // path runs from the largest tau down; rows are stored ascending
                    for (k, sol) in path.iter().enumerate() {
                        row[nt - 1 - k] = score(&sol.x_tau);
                    }
                }
                Err(e) => errors.push(format!("mu={mu}: {e}")),
            }
            (row, score(&ml.x_hat), errors)
        })
        .collect();
    let ridge_score = PenalizedProblem::from_data(&fold.train, grid.lambda, T::one(), T::one())
        .ok()
        .and_then(|p| score(&p.cholesky().solve(p.w())));
    let mut report = FoldReport {
        test_rows: test.to_vec(),
        scores: Vec::with_capacity(cells.len()),
        ml_scores: Vec::with_capacity(cells.len()),
        ridge_score,
        errors: Vec::new(),
    };
    for (row, ml, errors) in cells {
        report.scores.push(row);
        report.ml_scores.push(ml);
        report.errors.extend(errors);
    }
    Ok(report)
}
