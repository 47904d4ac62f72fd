//! Regression data and the penalized quadratic problem built from it.
//!
//! The cost function is `H(x) = xᵀCx − 2wᵀx + 2μ‖x‖₁` with `C` positive
//! definite. From data, `C = AᵀA/(2n) + λI` and `w = Aᵀy/(2n)` after the
//! response and predictors have been centred and scaled to sum of squares `n`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::{dot, norm_l1, Real};

/// Responses and predictors of a linear regression.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    responses: Vec<T>,
    predictors: Matrix<T>,
    standardized: bool,
}

/// Column means and scales used to standardize a dataset, kept so that the
/// same affine map can be applied to held-out rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization<T> {
    pub predictor_means: Vec<T>,
    pub predictor_scales: Vec<T>,
    pub response_mean: T,
    pub response_scale: T,
}

impl<T: Real> Dataset<T> {
    /// Raw (unstandardized) data. Requires `n ≥ 2`, `p ≥ 1` and finite values.
    pub fn new(responses: Vec<T>, predictors: Matrix<T>) -> Result<Self> {
        let n = responses.len();
        if predictors.rows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: predictors.rows() });
        }
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 samples, got {n}")));
        }
        if predictors.cols() < 1 {
            return Err(Error::InvalidData("need at least one predictor".into()));
        }
        if responses.iter().chain(predictors.as_slice()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite value".into()));
        }
        Ok(Self { responses, predictors, standardized: false })
    }

    /// Data already centred and scaled to sum of squares `n`. Fails with
    /// `InvalidData` if any column deviates from that by more than `tol · n`.
    pub fn prestandardized(responses: Vec<T>, predictors: Matrix<T>, tol: T) -> Result<Self> {
        let mut data = Self::new(responses, predictors)?;
        let err = data.standardization_error();
        if !(err <= tol * T::from_count(data.n_samples())) {
            return Err(Error::InvalidData(format!("data is not standardized (deviation {err})")));
        }
        data.standardized = true;
        Ok(data)
    }

    pub fn n_samples(&self) -> usize {
        self.responses.len()
    }

    pub fn n_predictors(&self) -> usize {
        self.predictors.cols()
    }

    pub fn responses(&self) -> &[T] {
        &self.responses
    }

    pub fn predictors(&self) -> &Matrix<T> {
        &self.predictors
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Subset of rows, in the given order. The result is marked raw.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let y = idx.iter().map(|&i| self.responses[i]).collect();
        Self::new(y, self.predictors.select_rows(idx))
    }

    /// Subset of predictor columns; keeps the standardized flag.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self {
            responses: self.responses.clone(),
            predictors: self.predictors.select_columns(idx),
            standardized: self.standardized,
        }
    }

    /// Centres every column and scales it to sum of squares `n`.
    pub fn standardize(&self) -> Result<Self> {
        self.standardize_with_stats().map(|(d, _)| d)
    }

    /// As [`standardize`](Self::standardize), also returning the statistics.
    /// Column index `p` in a `ZeroVarianceColumn` error refers to the response.
    pub fn standardize_with_stats(&self) -> Result<(Self, Standardization<T>)> {
        let n = self.n_samples();
        let p = self.n_predictors();
        let mut means = Vec::with_capacity(p);
        let mut scales = Vec::with_capacity(p);
        for j in 0..p {
            let (m, s) = column_stats(&self.predictors.column(j)).ok_or(Error::ZeroVarianceColumn(j))?;
            means.push(m);
            scales.push(s);
        }
        let (ym, ys) = column_stats(&self.responses).ok_or(Error::ZeroVarianceColumn(p))?;
        let stats = Standardization {
            predictor_means: means,
            predictor_scales: scales,
            response_mean: ym,
            response_scale: ys,
        };
        let predictors = stats.apply_predictors(&self.predictors);
        let responses = self.responses.iter().map(|&y| (y - ym) / ys).collect();
        debug_assert_eq!(predictors.rows(), n);
        Ok((Self { responses, predictors, standardized: true }, stats))
    }

    /// Maximum deviation from the centred, sum-of-squares-`n` convention over
    /// all columns including the response.
    pub fn standardization_error(&self) -> T {
        let n = T::from_count(self.n_samples());
        let check = |col: &[T]| {
            let s: T = col.iter().copied().sum();
            let ss: T = col.iter().map(|&v| v * v).sum();
            s.abs().max((ss - n).abs())
        };
        (0..self.n_predictors())
            .map(|j| check(&self.predictors.column(j)))
            .fold(check(&self.responses), T::max)
    }
}

/// Mean and root-mean-square deviation; `None` for a constant column.
fn column_stats<T: Real>(col: &[T]) -> Option<(T, T)> {
    let n = T::from_count(col.len());
    let mean = col.iter().copied().sum::<T>() / n;
    let ss: T = col.iter().map(|&v| (v - mean) * (v - mean)).sum();
    let scale = (ss / n).sqrt();
    let tiny = T::epsilon() * (mean.abs() + T::one());
    if !(scale > tiny) {
        return None;
    }
    Some((mean, scale))
}

impl<T: Real> Standardization<T> {
    pub fn apply_predictors(&self, a: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(a.rows(), a.cols(), |i, j| {
            (a[(i, j)] - self.predictor_means[j]) / self.predictor_scales[j]
        })
    }

    pub fn apply_response(&self, y: T) -> T {
        (y - self.response_mean) / self.response_scale
    }

    /// Maps a prediction on the standardized scale back to response units.
    pub fn unapply_response(&self, y: T) -> T {
        self.response_mean + self.response_scale * y
    }
}

#[derive(Debug)]
struct Quadratic<T> {
    c: Matrix<T>,
    chol: Cholesky<T>,
    design: Option<Matrix<T>>,
}

/// The problem `H(x | C, w, μ)` at inverse temperature `τ`.
///
/// `C`, its Cholesky factor and the optional design matrix are shared
/// between copies, so [`with_tau`](Self::with_tau) and friends are cheap.
#[derive(Debug, Clone)]
pub struct PenalizedProblem<T> {
    quad: Arc<Quadratic<T>>,
    w: Vec<T>,
    mu: T,
    lambda: T,
    tau: T,
    n_samples: Option<usize>,
}

fn check_hyper<T: Real>(lambda: T, mu: T, tau: T) -> Result<()> {
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    if !(tau > T::zero()) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be non-negative, got {lambda}")));
    }
    Ok(())
}

impl<T: Real> PenalizedProblem<T> {
    /// Builds the problem from standardized data.
    pub fn from_data(data: &Dataset<T>, lambda: T, mu: T, tau: T) -> Result<Self> {
        check_hyper(lambda, mu, tau)?;
        if !data.is_standardized() {
            return Err(Error::InvalidData("dataset must be standardized".into()));
        }
        let n = data.n_samples();
        let p = data.n_predictors();
        let a = data.predictors();
        let two_n = T::lit(2.0) * T::from_count(n);
        let mut c = a.gram();
        c.scale(two_n.recip());
        c.add_diagonal(&vec![lambda; p]);
        let w: Vec<T> = a.tr_mul_vec(data.responses()).into_iter().map(|v| v / two_n).collect();
        let chol = c.cholesky().map_err(|_| Error::SingularC)?;
        let design = (p > n).then(|| a.clone());
        Ok(Self {
            quad: Arc::new(Quadratic { c, chol, design }),
            w,
            mu,
            lambda,
            tau,
            n_samples: Some(n),
        })
    }

    /// Direct `(C, w)` input, e.g. for the non-naive elastic net. `lambda`
    /// is recorded but not added to `C`.
    pub fn from_parts(c: Matrix<T>, w: Vec<T>, lambda: T, mu: T, tau: T) -> Result<Self> {
        check_hyper(lambda, mu, tau)?;
        if !c.is_square() {
            return Err(Error::DimensionMismatch { expected: c.rows(), found: c.cols() });
        }
        if w.len() != c.rows() {
            return Err(Error::DimensionMismatch { expected: c.rows(), found: w.len() });
        }
        if c.rows() == 0 {
            return Err(Error::InvalidData("empty problem".into()));
        }
        if c.as_slice().iter().chain(&w).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite entry in C or w".into()));
        }
        if c.asymmetry() > T::lit(1e-12) {
            return Err(Error::InvalidData("C is not symmetric".into()));
        }
        let chol = c.cholesky().map_err(|_| Error::SingularC)?;
        Ok(Self {
            quad: Arc::new(Quadratic { c, chol, design: None }),
            w,
            mu,
            lambda,
            tau,
            n_samples: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn c(&self) -> &Matrix<T> {
        &self.quad.c
    }

    pub fn cholesky(&self) -> &Cholesky<T> {
        &self.quad.chol
    }

    pub fn w(&self) -> &[T] {
        &self.w
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn n_samples(&self) -> Option<usize> {
        self.n_samples
    }

    /// The design matrix `A`, retained only when built from data with `p > n`.
    pub fn low_rank_factor(&self) -> Option<&Matrix<T>> {
        self.quad.design.as_ref()
    }

    pub fn with_tau(&self, tau: T) -> Result<Self> {
        check_hyper(self.lambda, self.mu, tau)?;
        Ok(Self { tau, ..self.clone() })
    }

    pub fn with_mu(&self, mu: T) -> Result<Self> {
        check_hyper(self.lambda, mu, self.tau)?;
        Ok(Self { mu, ..self.clone() })
    }

    /// Same `C`, new linear term.
    pub fn with_w(&self, w: Vec<T>) -> Result<Self> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: w.len() });
        }
        Ok(Self { w, ..self.clone() })
    }

    /// Keeps the design matrix even when `p ≤ n` so that the low-rank
    /// determinant route can be exercised. No effect on direct-input problems.
    pub fn retaining_design(data: &Dataset<T>, lambda: T, mu: T, tau: T) -> Result<Self> {
        let mut prob = Self::from_data(data, lambda, mu, tau)?;
        let quad = Arc::get_mut(&mut prob.quad).expect("freshly built");
        quad.design = Some(data.predictors().clone());
        Ok(prob)
    }

    /// `(Cx)_j`
    pub fn c_row_dot(&self, j: usize, x: &[T]) -> T {
        dot(self.quad.c.row(j), x)
    }

    /// `w − Cx`
    pub fn dual(&self, x: &[T]) -> Vec<T> {
        let cx = self.quad.c.mul_vec(x);
        self.w.iter().zip(cx).map(|(&w, cx)| w - cx).collect()
    }

    /// `H(x) = xᵀCx − 2wᵀx + 2μ‖x‖₁`
    pub fn cost(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let two = T::lit(2.0);
        let cx = self.quad.c.mul_vec(x);
        Ok(dot(x, &cx) - two * dot(&self.w, x) + two * self.mu * norm_l1(x))
    }

    /// Problem over the coordinates `rest` with `x_fixed` held at the given
    /// values: `C_rest`, `w_rest − C_{rest,fixed} x_fixed`. The design matrix is
    /// carried over (restricted to `rest`) when present.
    pub fn condition_on(&self, fixed: &[usize], x_fixed: &[T]) -> Result<Self> {
        if fixed.len() != x_fixed.len() {
            return Err(Error::DimensionMismatch { expected: fixed.len(), found: x_fixed.len() });
        }
        let p = self.dim();
        if let Some(&bad) = fixed.iter().find(|&&j| j >= p) {
            return Err(Error::InvalidParameter(format!("coordinate {bad} out of range")));
        }
        let rest: Vec<usize> = (0..p).filter(|j| !fixed.contains(j)).collect();
        if rest.is_empty() {
            return Err(Error::InvalidParameter("conditioning on every coordinate".into()));
        }
        let c = self.quad.c.principal(&rest);
        let chol = c.cholesky().map_err(|_| Error::SingularC)?;
        let design = self.quad.design.as_ref().map(|a| a.select_columns(&rest));
        Ok(Self {
            quad: Arc::new(Quadratic { c, chol, design }),
            w: self.conditioned_w(&rest, fixed, x_fixed),
            mu: self.mu,
            lambda: self.lambda,
            tau: self.tau,
            n_samples: self.n_samples,
        })
    }

    /// `w_rest − C_{rest,fixed} x_fixed`
    pub fn conditioned_w(&self, rest: &[usize], fixed: &[usize], x_fixed: &[T]) -> Vec<T> {
        rest.iter()
            .map(|&k| {
                let shift: T = fixed.iter().zip(x_fixed).map(|(&j, &v)| self.quad.c[(k, j)] * v).sum();
                self.w[k] - shift
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_column_standardizes_by_hand() {
        let a = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let d = Dataset::new(vec![1.0, 0.0, 2.0], a).unwrap();
        let s = d.standardize().unwrap();
        let col = s.predictors().column(0);
        let r = 1.5_f64.sqrt();
        assert!((col[0] + r).abs() < 1e-15 && col[1].abs() < 1e-15 && (col[2] - r).abs() < 1e-15);
        assert!(s.standardization_error() < 1e-12);
    }

    #[test]
    fn constant_column_is_rejected() {
        let a = Matrix::from_rows(&[vec![1.0, 4.0], vec![2.0, 4.0], vec![3.0, 4.0]]).unwrap();
        let d = Dataset::new(vec![1.0, 0.0, 2.0], a).unwrap();
        assert_eq!(d.standardize().unwrap_err(), Error::ZeroVarianceColumn(1));
        let a = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let d = Dataset::new(vec![5.0, 5.0, 5.0], a).unwrap();
        assert_eq!(d.standardize().unwrap_err(), Error::ZeroVarianceColumn(1));
    }

    #[test]
    fn cost_hand_value() {
        let c = Matrix::from_rows(&[vec![1.0f64]]).unwrap();
        let prob = PenalizedProblem::from_parts(c, vec![0.5], 0.0, 0.1, 1.0).unwrap();
        assert_eq!(prob.cost(&[0.0]).unwrap(), 0.0);
        assert!((prob.cost(&[0.4]).unwrap() + 0.16).abs() < 1e-15);
        assert!(matches!(prob.cost(&[0.4, 1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn direct_input_validation() {
        let c = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(PenalizedProblem::from_parts(c, vec![0.0, 0.0], 0.0, 0.1, 1.0).unwrap_err(), Error::SingularC);
        let c = Matrix::from_rows(&[vec![1.0, 0.2], vec![0.1, 1.0]]).unwrap();
        assert!(PenalizedProblem::from_parts(c, vec![0.0, 0.0], 0.0, 0.1, 1.0).is_err());
        let c = Matrix::<f64>::identity(2);
        assert!(PenalizedProblem::from_parts(c.clone(), vec![0.0, 0.0], 0.0, 0.0, 1.0).is_err());
        assert!(PenalizedProblem::from_parts(c.clone(), vec![0.0, 0.0], -1.0, 0.1, 1.0).is_err());
        assert!(PenalizedProblem::from_parts(c, vec![0.0, 0.0], 0.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn lasso_with_more_predictors_than_samples_is_singular() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0, 2.0], vec![0.0, 1.0, 1.0], vec![2.0, 1.0, 0.0]]).unwrap();
        let d = Dataset::new(vec![1.0, 2.0, 0.5], a).unwrap().standardize().unwrap();
        // three centred rows span at most two dimensions
        assert_eq!(PenalizedProblem::from_data(&d, 0.0, 0.1, 1.0).unwrap_err(), Error::SingularC);
        assert!(PenalizedProblem::from_data(&d, 0.1, 0.1, 1.0).unwrap().low_rank_factor().is_none());
    }

    #[test]
    fn conditioning_shifts_w() {
        let c = Matrix::from_rows(&[vec![1.0f64, 0.3, 0.1], vec![0.3, 1.0, 0.2], vec![0.1, 0.2, 1.0]]).unwrap();
        let prob = PenalizedProblem::from_parts(c, vec![0.5, -0.2, 0.1], 0.0, 0.1, 10.0).unwrap();
        let sub = prob.condition_on(&[1], &[2.0]).unwrap();
        assert_eq!(sub.dim(), 2);
        assert!((sub.w()[0] - (0.5 - 0.3 * 2.0)).abs() < 1e-15);
        assert!((sub.w()[1] - (0.1 - 0.2 * 2.0)).abs() < 1e-15);
        assert_eq!(sub.c()[(0, 1)], 0.1);
    }
}
