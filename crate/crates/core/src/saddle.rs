//! Saddle point of the temperature-dependent exponent.
//!
//! The saddle point `u_τ` is the unique solution inside the box `|u_j| < μ` of
//!
//! ```text
//! (μ² − u_j²)·[C⁻¹(w − u)]_j − u_j/τ = 0,   j = 1..p.
//! ```
//!
//! The solver iterates on `x = C⁻¹(w − u)` so that `C` is never inverted.
//! Writing `a_j = w_j − Σ_{k≠j} C_kj x_k`, each coordinate update is the root
//! of the cubic
//!
//! ```text
//! C_jj² x³ − 2 a_j C_jj x² + (a_j² − μ² − C_jj/τ) x + a_j/τ = 0
//! ```
//!
//! for which `u_j = a_j − C_jj x_j` lies in `(−μ, μ)`.

use crate::cubic::real_roots;
use crate::error::{Error, Result};
use crate::problem::PenalizedProblem;
use crate::scalar::{norm_inf, sgn, Real};

/// Converged saddle point together with the posterior expectation `x_τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution<T> {
    pub u_tau: Vec<T>,
    /// `C⁻¹(w − u_τ)`, the posterior expectation at leading order.
    pub x_tau: Vec<T>,
    pub tau: T,
    pub cycles: usize,
    /// ℓ∞ norm of the saddle-point equations at the returned iterate.
    pub residual: T,
    pub converged: bool,
}

impl<T: Real> SaddleSolution<T> {
    /// `max_j |u_j|`; strictly below `μ` for every valid solution.
    pub fn max_abs_u(&self) -> T {
        norm_inf(&self.u_tau)
    }

    pub fn signs_consistent(&self) -> bool {
        self.x_tau.iter().zip(&self.u_tau).all(|(&x, &u)| sgn(x) == sgn(u))
    }
}

/// Relative interior margin used to accept a cubic root.
const INTERIOR_MARGIN: f64 = 1e-14;

/// `x(μ² − u²) − u/τ` written in the cancellation-friendly factored form,
/// with `u = a − c x`.
#[inline]
fn coordinate_equation<T: Real>(x: T, a: T, c: T, mu: T, tau: T) -> T {
    let u = a - c * x;
    x * (mu - u) * (mu + u) - u / tau
}

#[inline]
fn coordinate_slope<T: Real>(x: T, a: T, c: T, mu: T, tau: T) -> T {
    let u = a - c * x;
    (mu - u) * (mu + u) + T::lit(2.0) * c * u * x + c / tau
}

fn polish<T: Real>(mut x: T, a: T, c: T, mu: T, tau: T) -> T {
    let mut f = coordinate_equation(x, a, c, mu, tau).abs();
    for _ in 0..4 {
        let slope = coordinate_slope(x, a, c, mu, tau);
        if slope == T::zero() || !slope.is_finite() {
            break;
        }
        let next = x - coordinate_equation(x, a, c, mu, tau) / slope;
        let fn_next = coordinate_equation(next, a, c, mu, tau).abs();
        if !(fn_next < f) {
            break;
        }
        x = next;
        f = fn_next;
    }
    x
}

fn admissible<T: Real>(x: T, a: T, c: T, mu: T) -> bool {
    let u = a - c * x;
    x.is_finite() && u.abs() < mu * (T::one() - T::lit(INTERIOR_MARGIN)) && sgn(x) == sgn(a)
}

/// Root of the per-coordinate cubic whose dual `u = a − c·x` lies strictly
/// inside `(−μ, μ)`.
pub fn coordinate_cubic<T: Real>(a: T, c: T, mu: T, tau: T) -> Result<T> {
    if !(c > T::zero() && mu > T::zero() && tau > T::zero()) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("coordinate cubic with a={a}, c={c}, mu={mu}, tau={tau}")));
    }
    if a == T::zero() {
        return Ok(T::zero());
    }
    let roots = real_roots(c * c, -T::lit(2.0) * a * c, a * a - mu * mu - c / tau, a / tau);
    let best = roots
        .into_iter()
        .map(|r| polish(r, a, c, mu, tau))
        .filter(|&x| admissible(x, a, c, mu))
        .map(|x| (coordinate_equation(x, a, c, mu, tau).abs(), x))
        .min_by(|l, r| l.0.partial_cmp(&r.0).unwrap_or(std::cmp::Ordering::Equal));
    if let Some((_, x)) = best {
        return Ok(x);
    }
    // The closed form lost the admissible root to rounding (nearly coincident
    // roots). The dual lies between 0 and μ·sgn(a); bracket it there.
    let x = bracketed_root(a, c, mu, tau);
    if admissible(x, a, c, mu) {
        Ok(x)
    } else {
        Err(Error::NoAdmissibleRoot { a: a.as_f64(), c: c.as_f64(), mu: mu.as_f64(), tau: tau.as_f64() })
    }
}

/// Bisection on `g(u) = (μ² − u²)(a − u) − c·u/τ`, which is positive at
/// `u = 0` and negative at `u = μ` for `a > 0` (mirror image for `a < 0`).
fn bracketed_root<T: Real>(a: T, c: T, mu: T, tau: T) -> T {
    let s = sgn(a);
    let g = |u: T| (mu - u) * (mu + u) * (a - u) - c * u / tau;
    let (mut lo, mut hi) = (T::zero(), mu * s);
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) * s > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = (lo + hi) * T::lit(0.5);
    polish((a - u) / c, a, c, mu, tau)
}

/// ℓ∞ norm of `(μ² − u_j²)·x_j − u_j/τ` for a pair `(x, u)`.
pub fn saddle_residual<T: Real>(x: &[T], u: &[T], mu: T, tau: T) -> T {
    x.iter()
        .zip(u)
        .map(|(&x, &u)| (x * (mu - u) * (mu + u) - u / tau).abs())
        .fold(T::zero(), T::max)
}

/// Coordinate-descent settings for the saddle-point equations.
#[derive(Debug, Clone, Copy)]
pub struct SaddleSolver<T> {
    /// Convergence threshold on the ℓ∞ residual of the saddle equations.
    pub tol: T,
    pub max_cycles: usize,
}

impl<T: Real> Default for SaddleSolver<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-10), max_cycles: 10_000 }
    }
}

impl<T: Real> SaddleSolver<T> {
    pub fn new(tol: T, max_cycles: usize) -> Self {
        Self { tol, max_cycles }
    }

    /// Solves from `init` (typically the maximum-likelihood solution).
    pub fn solve(&self, problem: &PenalizedProblem<T>, init: &[T]) -> Result<SaddleSolution<T>> {
        let p = problem.dim();
        if init.len() != p {
            return Err(Error::DimensionMismatch { expected: p, found: init.len() });
        }
        let (mu, tau) = (problem.mu(), problem.tau());
        let c = problem.c();
        let mut x = init.to_vec();
        let mut u = problem.dual(&x);
        let interior = |u: &[T]| norm_inf(u) < mu;
        let mut residual = saddle_residual(&x, &u, mu, tau);
        let mut cycles = 0;
        // a warm start may already solve the equations
        let mut converged = interior(&u) && residual < self.tol;
        while !converged && cycles < self.max_cycles {
            cycles += 1;
            for j in 0..p {
                let cjj = c[(j, j)];
                let a = u[j] + cjj * x[j];
                let new = coordinate_cubic(a, cjj, mu, tau)?;
                let delta = new - x[j];
                if delta != T::zero() {
                    x[j] = new;
                    for (uk, &ckj) in u.iter_mut().zip(c.row(j)) {
                        *uk = *uk - ckj * delta;
                    }
                }
            }
            u = problem.dual(&x);
            residual = saddle_residual(&x, &u, mu, tau);
            converged = interior(&u) && residual < self.tol;
        }
        if !converged {
            return Err(Error::NotConverged { cycles, residual: residual.as_f64() });
        }
        Ok(SaddleSolution { u_tau: u, x_tau: x, tau, cycles, residual, converged })
    }
}

/// Solves the saddle-point equations from `init`.
pub fn solve_saddle<T: Real>(
    problem: &PenalizedProblem<T>,
    init: &[T],
    tol: T,
    max_cycles: usize,
) -> Result<SaddleSolution<T>> {
    SaddleSolver::new(tol, max_cycles).solve(problem, init)
}

/// Solutions along a strictly decreasing sequence of `taus`, each used as
/// the starting point of the next.
pub fn tau_path<T: Real>(
    problem: &PenalizedProblem<T>,
    taus: &[T],
    init: &[T],
    solver: &SaddleSolver<T>,
) -> Result<Vec<SaddleSolution<T>>> {
    if taus.iter().any(|&t| !(t > T::zero())) || taus.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("tau path must be positive and strictly decreasing".into()));
    }
    let mut out: Vec<SaddleSolution<T>> = Vec::with_capacity(taus.len());
    for &tau in taus {
        let prob = problem.with_tau(tau)?;
        let start = out.last().map_or(init, |s| s.x_tau.as_slice());
        out.push(solver.solve(&prob, start)?);
    }
    Ok(out)
}

/// Geometric grid from `tau_max` down to (at least) `tau_min` with ratio
/// `10^{1/4}`.
pub fn default_tau_path<T: Real>(tau_max: T, tau_min: T) -> Vec<T> {
    let ratio = T::lit(10f64.powf(0.25));
    let mut out = vec![tau_max];
    let mut t = tau_max;
    while t > tau_min * (T::one() + T::lit(1e-12)) {
        t = t / ratio;
        out.push(t);
    }
    out
}
