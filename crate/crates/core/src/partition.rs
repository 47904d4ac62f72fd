//! Leading-order log partition function at the saddle point.

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Matrix};
use crate::ml::MlSolution;
use crate::problem::PenalizedProblem;
use crate::saddle::SaddleSolution;
use crate::scalar::{dot, sgn, Real};

/// `log Z` split into its three factors. `log_z` is always their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPartition<T> {
    pub log_z: T,
    /// `τ(w − u)ᵀC⁻¹(w − u)`
    pub exp_term: T,
    /// `−½ log det(C + D_τ)`
    pub log_det_term: T,
    /// `p log(μ/√τ) − ½ Σ log(μ² + u_j²)`
    pub prefactor_term: T,
    /// Diagonal of `D_τ`.
    pub d_tau: Vec<T>,
}

/// `D_τ,jj = τ(μ² − u_j²)²/(μ² + u_j²)`
pub fn d_tau<T: Real>(u: &[T], mu: T, tau: T) -> Vec<T> {
    u.iter()
        .map(|&u| {
            let gap = (mu - u) * (mu + u);
            tau * gap * gap / (mu * mu + u * u)
        })
        .collect()
}

/// Which factorization evaluates `log det(C + D_τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogDetRoute {
    /// Cholesky of the `p × p` matrix.
    Direct,
    /// Determinant lemma through the `n × n` matrix `I + A(D_τ + λI)⁻¹Aᵀ/(2n)`.
    LowRank,
}

/// `log det(C + D_τ)`, through the `n × n` route when the problem keeps its
/// design matrix and `λ > 0`, otherwise directly.
pub fn log_det_c_plus_d<T: Real>(problem: &PenalizedProblem<T>, d_tau: &[T]) -> Result<T> {
    let route = match problem.low_rank_factor() {
        Some(_) if problem.lambda() > T::zero() => LogDetRoute::LowRank,
        _ => LogDetRoute::Direct,
    };
    log_det_c_plus_d_with(problem, d_tau, route)
}

pub fn log_det_c_plus_d_with<T: Real>(problem: &PenalizedProblem<T>, d_tau: &[T], route: LogDetRoute) -> Result<T> {
    let p = problem.dim();
    if d_tau.len() != p {
        return Err(Error::DimensionMismatch { expected: p, found: d_tau.len() });
    }
    if d_tau.iter().any(|&d| !(d >= T::zero())) {
        return Err(Error::InvalidParameter("D_tau entries must be non-negative".into()));
    }
    match route {
        LogDetRoute::Direct => {
            let mut m = problem.c().clone();
            m.add_diagonal(d_tau);
            Ok(m.cholesky()?.log_det())
        }
        LogDetRoute::LowRank => {
            let a = problem
                .low_rank_factor()
                .ok_or_else(|| Error::InvalidParameter("low-rank route needs the design matrix".into()))?;
            let lambda = problem.lambda();
            if !(lambda > T::zero()) {
                return Err(Error::InvalidParameter("low-rank route needs lambda > 0".into()));
            }
            let shifted: Vec<T> = d_tau.iter().map(|&d| d + lambda).collect();
            let n = a.rows();
            let two_n = T::lit(2.0) * T::from_count(n);
            let mut k = Matrix::from_fn(n, n, |i, l| {
                let s: T = (0..p).map(|j| a[(i, j)] * a[(l, j)] / shifted[j]).sum();
                s / two_n
            });
            k.add_diagonal(&vec![T::one(); n]);
            let eig = symmetric_eigenvalues(&k)?;
            if eig.iter().any(|&e| !(e > T::zero())) {
                return Err(Error::SingularMatrix);
            }
            let diag: T = shifted.iter().map(|d| d.ln()).sum();
            Ok(diag + eig.iter().map(|e| e.ln()).sum::<T>())
        }
    }
}

/// Leading-order `log Z` at a converged saddle point.
pub fn log_partition<T: Real>(problem: &PenalizedProblem<T>, saddle: &SaddleSolution<T>) -> Result<LogPartition<T>> {
    let p = problem.dim();
    if saddle.u_tau.len() != p {
        return Err(Error::DimensionMismatch { expected: p, found: saddle.u_tau.len() });
    }
    let (mu, tau) = (problem.mu(), problem.tau());
    let u = &saddle.u_tau;
    let w_minus_u: Vec<T> = problem.w().iter().zip(u).map(|(&w, &u)| w - u).collect();
    let exp_term = tau * dot(&w_minus_u, &saddle.x_tau);
    if !exp_term.is_finite() {
        return Err(Error::NumericalOverflow("exponential factor of the partition function"));
    }
    let d = d_tau(u, mu, tau);
    let log_det_term = -T::lit(0.5) * log_det_c_plus_d(problem, &d)?;
    let half = T::lit(0.5);
    let prefactor_term = T::from_count(p) * (mu.ln() - half * tau.ln())
        - half * u.iter().map(|&u| (mu * mu + u * u).ln()).sum::<T>();
    Ok(LogPartition {
        log_z: exp_term + log_det_term + prefactor_term,
        exp_term,
        log_det_term,
        prefactor_term,
        d_tau: d,
    })
}

/// `log Z[Q]` for a weight function with `Q(u_τ) > 0`; only the saddle value
/// enters at leading order.
pub fn log_partition_generalized<T: Real>(
    problem: &PenalizedProblem<T>,
    saddle: &SaddleSolution<T>,
    q_at_saddle: T,
) -> Result<LogPartition<T>> {
    if !(q_at_saddle > T::zero()) {
        return Err(Error::NonPositiveQ(q_at_saddle.as_f64()));
    }
    let mut out = log_partition(problem, saddle)?;
    out.log_z = out.log_z + q_at_saddle.ln();
    Ok(out)
}

/// Distance below which a coordinate counts as sitting on a transition.
const TRANSITION_TOL: f64 = 1e-8;

/// Zero-temperature limit of `log Z`: a Gaussian block over the active set
/// times shifted-Laplace factors over the inactive coordinates.
pub fn log_partition_zero_temp<T: Real>(
    problem: &PenalizedProblem<T>,
    ml: &MlSolution<T>,
    u_limit: &[T],
) -> Result<T> {
    let p = problem.dim();
    if u_limit.len() != p || ml.x_hat.len() != p {
        return Err(Error::DimensionMismatch { expected: p, found: u_limit.len() });
    }
    let (mu, tau) = (problem.mu(), problem.tau());
    let eps = T::lit(TRANSITION_TOL);
    let active: Vec<usize> = (0..p).filter(|&j| ml.x_hat[j] != T::zero()).collect();
    for j in 0..p {
        let on_boundary = mu - u_limit[j].abs() < eps;
        let is_zero = ml.x_hat[j].abs() < eps;
        if on_boundary == is_zero {
            return Err(Error::TransitionValue(j));
        }
    }
    let n_active = T::from_count(active.len());
    let n_inactive = T::from_count(p - active.len());
    let half = T::lit(0.5);
    let mut log_z = -(half * n_active + n_inactive) * tau.ln() - half * n_active * T::LN_2();
    if !active.is_empty() {
        let c_i = problem.c().principal(&active);
        let chol = c_i.cholesky()?;
        let b: Vec<T> = active.iter().map(|&j| problem.w()[j] - mu * sgn(u_limit[j])).collect();
        let sol = chol.solve(&b);
        log_z = log_z + tau * dot(&b, &sol) - half * chol.log_det();
    }
    for j in (0..p).filter(|j| !active.contains(j)) {
        let u = u_limit[j];
        log_z = log_z + (mu / ((mu - u) * (mu + u))).ln();
    }
    Ok(log_z)
}
