//! Maximum-likelihood elastic net by cyclic coordinate descent.

use crate::error::{Error, Result};
use crate::problem::PenalizedProblem;
use crate::scalar::{norm_inf, sgn, Real};

/// Minimizer `x̂` of `H(x | C, w, μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlSolution<T> {
    pub x_hat: Vec<T>,
    /// Dual vector `û = w − Cx̂`; `|û_j| ≤ μ` at the optimum.
    pub u_hat: Vec<T>,
    /// Indices of the nonzero coefficients, ascending.
    pub active_set: Vec<usize>,
    pub h_min: T,
    pub cycles: usize,
    pub converged: bool,
}

impl<T: Real> MlSolution<T> {
    /// Largest violation of the optimality conditions.
    pub fn kkt_residual(&self, problem: &PenalizedProblem<T>) -> T {
        let mu = problem.mu();
        self.x_hat
            .iter()
            .zip(&self.u_hat)
            .map(|(&x, &u)| {
                if x != T::zero() {
                    (u - mu * sgn(x)).abs()
                } else {
                    (u.abs() - mu).max(T::zero())
                }
            })
            .fold(T::zero(), T::max)
    }

    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged { cycles: self.cycles, residual: f64::NAN })
        }
    }
}

/// Coordinate-descent settings.
#[derive(Debug, Clone, Copy)]
pub struct MlSolver<T> {
    /// Stop when the largest coordinate change in a cycle is below
    /// `tol · max(1, ‖x‖∞)`.
    pub tol: T,
    pub max_cycles: usize,
}

impl<T: Real> Default for MlSolver<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-10), max_cycles: 100_000 }
    }
}

/// Cycles between full recomputations of `w − Cx`.
const REFRESH_EVERY: usize = 16;

impl<T: Real> MlSolver<T> {
    pub fn new(tol: T, max_cycles: usize) -> Self {
        Self { tol, max_cycles }
    }

    /// Runs coordinate descent from `init` (zero when `None`). The returned
    /// solution has `converged = false` if `max_cycles` ran out.
    pub fn solve(&self, problem: &PenalizedProblem<T>, init: Option<&[T]>) -> Result<MlSolution<T>> {
        let order: Vec<usize> = (0..problem.dim()).collect();
        self.solve_ordered(problem, init, &order)
    }

    /// As [`solve`](Self::solve) with an explicit coordinate sweep order.
    pub fn solve_ordered(
        &self,
        problem: &PenalizedProblem<T>,
        init: Option<&[T]>,
        order: &[usize],
    ) -> Result<MlSolution<T>> {
        let p = problem.dim();
        let mut x = match init {
            Some(v) if v.len() != p => return Err(Error::DimensionMismatch { expected: p, found: v.len() }),
            Some(v) => v.to_vec(),
            None => vec![T::zero(); p],
        };
        let c = problem.c();
        let mu = problem.mu();
        // residual r = w − Cx; for coordinate j, a_j = r_j + C_jj x_j
        let mut r = problem.dual(&x);
        let mut cycles = 0;
        let mut converged = false;
        while cycles < self.max_cycles {
            cycles += 1;
            let mut max_delta = T::zero();
            for &j in order {
                let cjj = c[(j, j)];
                let a = r[j] + cjj * x[j];
                let new = soft_threshold(a, mu) / cjj;
                let delta = new - x[j];
                if delta != T::zero() {
                    x[j] = new;
                    for (rk, &ckj) in r.iter_mut().zip(c.row(j)) {
                        *rk = *rk - ckj * delta;
                    }
                    max_delta = max_delta.max(delta.abs());
                }
            }
            if cycles % REFRESH_EVERY == 0 {
                r = problem.dual(&x);
            }
            if max_delta < self.tol * norm_inf(&x).max(T::one()) {
                converged = true;
                break;
            }
        }
        let u_hat = problem.dual(&x);
        let h_min = problem.cost(&x)?;
        let active_set = (0..p).filter(|&j| x[j] != T::zero()).collect();
        Ok(MlSolution { x_hat: x, u_hat, active_set, h_min, cycles, converged })
    }
}

#[inline]
fn soft_threshold<T: Real>(a: T, mu: T) -> T {
    if a > mu {
        a - mu
    } else if a < -mu {
        a + mu
    } else {
        T::zero()
    }
}

/// Solves the maximum-likelihood problem from a zero start, failing with
/// `NotConverged` when `max_cycles` is exhausted.
pub fn solve_ml<T: Real>(problem: &PenalizedProblem<T>, tol: T, max_cycles: usize) -> Result<MlSolution<T>> {
    MlSolver::new(tol, max_cycles).solve(problem, None)?.ensure_converged()
}

/// Solutions along a strictly decreasing `mus` grid, each warm-started from
/// the previous one.
pub fn ml_path<T: Real>(
    problem: &PenalizedProblem<T>,
    mus: &[T],
    solver: &MlSolver<T>,
) -> Result<Vec<MlSolution<T>>> {
    if mus.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("mu grid must be strictly decreasing".into()));
    }
    let mut out: Vec<MlSolution<T>> = Vec::with_capacity(mus.len());
    for &mu in mus {
        let prob = problem.with_mu(mu)?;
        let init = out.last().map(|s| s.x_hat.as_slice());
        out.push(solver.solve(&prob, init)?.ensure_converged()?);
    }
    Ok(out)
}
