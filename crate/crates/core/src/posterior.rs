//! Posterior expectations, predictive means and single-coefficient marginals.
//!
//! The marginal of `x_j` is a ratio of partition functions,
//!
//! ```text
//! p(x_j) = e^{−τ(C_jj x_j² − 2w_j x_j + 2μ|x_j|)} · Z(C₋ⱼ, w₋ⱼ − x_j C₋ⱼ,ⱼ, μ) / Z(C, w, μ),
//! ```
//!
//! where `₋ⱼ` removes coordinate `j`. Each `Z` is replaced by its leading-order
//! stationary-phase value, and the curve is renormalized on its grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_1d::OneDimProblem;
use crate::ml::{MlSolution, MlSolver};
use crate::partition::{d_tau, log_partition};
use crate::problem::PenalizedProblem;
use crate::saddle::{SaddleSolution, SaddleSolver};
use crate::scalar::{dot, Real};

/// Posterior expectation `E(x) ≈ x_τ = C⁻¹(w − u_τ)`.
pub fn expectation<T: Real>(saddle: &SaddleSolution<T>) -> Vec<T> {
    saddle.x_tau.clone()
}

/// `E(y) = aᵀE(x)` for a new predictor row `a`.
pub fn predictive_mean<T: Real>(saddle: &SaddleSolution<T>, a: &[T]) -> Result<T> {
    if a.len() != saddle.x_tau.len() {
        return Err(Error::DimensionMismatch { expected: saddle.x_tau.len(), found: a.len() });
    }
    Ok(dot(a, &saddle.x_tau))
}

/// How the evaluation points of a marginal curve are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec<T> {
    /// Ascending points supplied by the caller.
    Explicit(Vec<T>),
    /// `points` equally spaced values within `half_width` posterior standard
    /// deviations of the centre.
    Centered { half_width: T, points: usize },
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        GridSpec::Centered { half_width: T::lit(6.0), points: 201 }
    }
}

impl<T: Real> GridSpec<T> {
    pub fn resolve(&self, center: T, sd: T) -> Result<Vec<T>> {
        let grid = match self {
            GridSpec::Explicit(v) => v.clone(),
            GridSpec::Centered { half_width, points } => {
                if *points < 2 {
                    return Err(Error::GridTooSmall);
                }
                let step = T::lit(2.0) * *half_width * sd / T::from_count(points - 1);
                let start = center - *half_width * sd;
                (0..*points).map(|i| start + step * T::from_count(i)).collect()
            }
        };
        if grid.len() < 2 {
            return Err(Error::GridTooSmall);
        }
        if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("marginal grid must be finite and strictly ascending".into()));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalMethod {
    StationaryPhase,
    MlApprox,
}

/// Marginal density of one coefficient tabulated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalCurve<T> {
    pub coordinate: usize,
    pub grid: Vec<T>,
    pub log_density_unnorm: Vec<T>,
    /// Normalized so that the trapezoid integral over `grid` is one.
    pub density: Vec<T>,
    pub method: MarginalMethod,
}

impl<T: Real> MarginalCurve<T> {
    fn from_log(coordinate: usize, grid: Vec<T>, log_density_unnorm: Vec<T>, method: MarginalMethod) -> Result<Self> {
        let peak = log_density_unnorm.iter().copied().fold(T::neg_infinity(), T::max);
        if !peak.is_finite() {
            return Err(Error::NumericalOverflow("marginal log density"));
        }
        let shifted: Vec<T> = log_density_unnorm.iter().map(|&l| (l - peak).exp()).collect();
        let mass = trapezoid(&grid, &shifted);
        let density = shifted.into_iter().map(|v| v / mass).collect();
        Ok(Self { coordinate, grid, log_density_unnorm, density, method })
    }

    /// Trapezoid integral of the normalized density.
    pub fn total_mass(&self) -> T {
        trapezoid(&self.grid, &self.density)
    }

    /// Trapezoid estimate of the mean.
    pub fn mean(&self) -> T {
        let xf: Vec<T> = self.grid.iter().zip(&self.density).map(|(&x, &f)| x * f).collect();
        trapezoid(&self.grid, &xf)
    }

    /// Grid point with the largest density.
    pub fn mode(&self) -> T {
        let (i, _) = self
            .density
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
        self.grid[i]
    }

    /// Cumulative trapezoid integral at each grid point.
    pub fn cumulative(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.grid.len());
        let mut acc = T::zero();
        out.push(acc);
        for i in 1..self.grid.len() {
            acc = acc + T::lit(0.5) * (self.grid[i] - self.grid[i - 1]) * (self.density[i] + self.density[i - 1]);
            out.push(acc);
        }
        out
    }

    /// Distribution function at `x`, integrating the piecewise-linear density
    /// exactly; 0 left of the grid and 1 right of it.
    pub fn cdf(&self, x: T) -> T {
        let g = &self.grid;
        if x <= g[0] {
            return T::zero();
        }
        if x >= g[g.len() - 1] {
            return T::one();
        }
        let cum = self.cumulative();
        let i = g.partition_point(|&v| v <= x) - 1;
        let h = x - g[i];
        let slope = (self.density[i + 1] - self.density[i]) / (g[i + 1] - g[i]);
        let partial = h * (self.density[i] + T::lit(0.5) * slope * h);
        (cum[i] + partial).min(T::one())
    }
}

fn trapezoid<T: Real>(x: &[T], f: &[T]) -> T {
    x.windows(2)
        .zip(f.windows(2))
        .map(|(x, f)| T::lit(0.5) * (x[1] - x[0]) * (f[0] + f[1]))
        .sum()
}

/// Gaussian-factor estimate of the posterior standard deviation of each
/// coordinate, `√([(C + D_τ)⁻¹]_jj / (2τ))`.
pub fn posterior_sd<T: Real>(problem: &PenalizedProblem<T>, saddle: &SaddleSolution<T>) -> Result<Vec<T>> {
    let mut m = problem.c().clone();
    m.add_diagonal(&d_tau(&saddle.u_tau, problem.mu(), problem.tau()));
    let two_tau = T::lit(2.0) * problem.tau();
    Ok(m.cholesky()?.inverse_diagonal().into_iter().map(|v| (v / two_tau).sqrt()).collect())
}

/// `−τ(C_jj v² − 2w_j v + 2μ|v|)`
fn own_term<T: Real>(problem: &PenalizedProblem<T>, j: usize, v: T) -> T {
    let two = T::lit(2.0);
    let h = problem.c()[(j, j)] * v * v - two * problem.w()[j] * v + two * problem.mu() * v.abs();
    -problem.tau() * h
}

/// The problem over all coordinates but `j` with `x_j = 0`, plus the column
/// `C₋ⱼ,ⱼ` used to shift its linear term.
struct Conditioned<T: Real> {
    sub: PenalizedProblem<T>,
    w_rest: Vec<T>,
    column: Vec<T>,
    rest: Vec<usize>,
}

impl<T: Real> Conditioned<T> {
    fn new(problem: &PenalizedProblem<T>, j: usize) -> Result<Self> {
        let p = problem.dim();
        if j >= p {
            return Err(Error::InvalidParameter(format!("coordinate {j} out of range for p = {p}")));
        }
        let sub = problem.condition_on(&[j], &[T::zero()])?;
        let rest: Vec<usize> = (0..p).filter(|&k| k != j).collect();
        let column = rest.iter().map(|&k| problem.c()[(k, j)]).collect();
        Ok(Self { w_rest: sub.w().to_vec(), sub, column, rest })
    }

    fn at(&self, v: T) -> Result<PenalizedProblem<T>> {
        let w = self.w_rest.iter().zip(&self.column).map(|(&w, &c)| w - v * c).collect();
        self.sub.with_w(w)
    }
}

/// Evaluates `f` over the grid outward from index `start` in both directions,
/// passing each call the state returned at its neighbour closer to `start`.
fn sweep_outward<T, S, F>(grid: &[T], start: usize, seed: S, f: F) -> Result<Vec<T>>
where
    T: Real,
    S: Clone + Send + Sync,
    F: Fn(T, &S) -> Result<(T, S)> + Sync,
{
    let (value0, state0) = f(grid[start], &seed)?;
    let run = |indices: Vec<usize>| -> Result<Vec<(usize, T)>> {
        let mut state = state0.clone();
        let mut out = Vec::with_capacity(indices.len());
        for i in indices {
            let (v, s) = f(grid[i], &state)?;
            out.push((i, v));
            state = s;
        }
        Ok(out)
    };
    let (right, left) = rayon::join(
        || run(((start + 1)..grid.len()).collect()),
        || run((0..start).rev().collect()),
    );
    let mut values = vec![T::zero(); grid.len()];
    values[start] = value0;
    for (i, v) in right?.into_iter().chain(left?) {
        values[i] = v;
    }
    Ok(values)
}

fn nearest_index<T: Real>(grid: &[T], x: T) -> usize {
    (0..grid.len())
        .min_by(|&a, &b| {
            let (da, db) = ((grid[a] - x).abs(), (grid[b] - x).abs());
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0)
}

/// Stationary-phase marginal of coordinate `j`. For `p = 1` the exact
/// one-dimensional density is tabulated instead.
pub fn marginal_sp<T: Real>(
    problem: &PenalizedProblem<T>,
    saddle: &SaddleSolution<T>,
    j: usize,
    grid_spec: &GridSpec<T>,
) -> Result<MarginalCurve<T>> {
    marginal_sp_with(problem, saddle, j, grid_spec, &SaddleSolver::default())
}

pub fn marginal_sp_with<T: Real>(
    problem: &PenalizedProblem<T>,
    saddle: &SaddleSolution<T>,
    j: usize,
    grid_spec: &GridSpec<T>,
    solver: &SaddleSolver<T>,
) -> Result<MarginalCurve<T>> {
    if j >= problem.dim() {
        return Err(Error::InvalidParameter(format!("coordinate {j} out of range for p = {}", problem.dim())));
    }
    let sd = posterior_sd(problem, saddle)?[j];
    let grid = grid_spec.resolve(saddle.x_tau[j], sd)?;
    if problem.dim() == 1 && j == 0 {
        let exact = OneDimProblem::new(problem.c()[(0, 0)], problem.w()[0], problem.mu(), problem.tau())?;
        let log_density = grid.iter().map(|&v| exact.log_density(v)).collect();
        return MarginalCurve::from_log(0, grid, log_density, MarginalMethod::StationaryPhase);
    }
    let cond = Conditioned::new(problem, j)?;
    let log_z_full = log_partition(problem, saddle)?.log_z;
    let start = nearest_index(&grid, saddle.x_tau[j]);
    // at x_j = x_τ,j the inner saddle is the outer one restricted to the rest
    let seed: Vec<T> = cond.rest.iter().map(|&k| saddle.x_tau[k]).collect();
    let eval = |v: T, init: &Vec<T>| -> Result<(T, Vec<T>)> {
        let sub = cond.at(v)?;
        let inner = solver.solve(&sub, init).or_else(|_| {
            let ml = MlSolver::default().solve(&sub, None)?;
            solver.solve(&sub, &ml.x_hat)
        });
        let inner = inner.map_err(|e| Error::MarginalPoint { coordinate: j, x: v.as_f64(), source: Box::new(e) })?;
        let log_z = log_partition(&sub, &inner)?.log_z;
        Ok((own_term(problem, j, v) + log_z - log_z_full, inner.x_tau))
    };
    let log_density = sweep_outward(&grid, start, seed, eval)?;
    MarginalCurve::from_log(j, grid, log_density, MarginalMethod::StationaryPhase)
}

/// Marginal of coordinate `j` with each partition function replaced by its
/// minimum energy, `p(x_j) ∝ e^{−τ(C_jj x_j² − 2w_j x_j + 2μ|x_j|)}·e^{−τ[H_min(x_j) − H_min]}`.
/// With a centred grid spec the curve is centred on `x̂_j`.
pub fn marginal_ml_approx<T: Real>(
    problem: &PenalizedProblem<T>,
    ml: &MlSolution<T>,
    j: usize,
    grid_spec: &GridSpec<T>,
) -> Result<MarginalCurve<T>> {
    let tau = problem.tau();
    if j >= problem.dim() {
        return Err(Error::InvalidParameter(format!("coordinate {j} out of range for p = {}", problem.dim())));
    }
    let sd = (problem.cholesky().inverse_diagonal()[j] / (T::lit(2.0) * tau)).sqrt();
    let grid = grid_spec.resolve(ml.x_hat[j], sd)?;
    if problem.dim() == 1 {
        let log_density = grid.iter().map(|&v| own_term(problem, 0, v) + tau * ml.h_min).collect();
        return MarginalCurve::from_log(0, grid, log_density, MarginalMethod::MlApprox);
    }
    let cond = Conditioned::new(problem, j)?;
    let start = nearest_index(&grid, ml.x_hat[j]);
    let seed: Vec<T> = cond.rest.iter().map(|&k| ml.x_hat[k]).collect();
    let solver = MlSolver::default();
    let eval = |v: T, init: &Vec<T>| -> Result<(T, Vec<T>)> {
        let sub = cond.at(v)?;
        let inner = solver
            .solve(&sub, Some(init))
            .and_then(MlSolution::ensure_converged)
            .map_err(|e| Error::MarginalPoint { coordinate: j, x: v.as_f64(), source: Box::new(e) })?;
        Ok((own_term(problem, j, v) - tau * (inner.h_min - ml.h_min), inner.x_hat))
    };
    let log_density = sweep_outward(&grid, start, seed, eval)?;
    MarginalCurve::from_log(j, grid, log_density, MarginalMethod::MlApprox)
}

/// Stationary-phase marginals of several coordinates, computed concurrently.
pub fn marginals_sp<T: Real>(
    problem: &PenalizedProblem<T>,
    saddle: &SaddleSolution<T>,
    coords: &[usize],
    grid_spec: &GridSpec<T>,
) -> Result<Vec<MarginalCurve<T>>> {
    coords.par_iter().map(|&j| marginal_sp(problem, saddle, j, grid_spec)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn two_dim(tau: f64) -> (PenalizedProblem<f64>, SaddleSolution<f64>) {
        let c = Matrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let prob = PenalizedProblem::from_parts(c, vec![0.4, 0.05], 0.0, 0.1, tau).unwrap();
        let ml = MlSolver::default().solve(&prob, None).unwrap();
        let s = SaddleSolver::default().solve(&prob, &ml.x_hat).unwrap();
        (prob, s)
    }

    #[test]
    fn predictive_mean_of_basis_vector() {
        let (_, s) = two_dim(100.0);
        assert_eq!(predictive_mean(&s, &[0.0, 1.0]).unwrap(), s.x_tau[1]);
        assert_eq!(predictive_mean(&s, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(predictive_mean(&s, &[1.0]).is_err());
    }

    #[test]
    fn curves_are_normalized() {
        let (prob, s) = two_dim(100.0);
        for j in 0..2 {
            let curve = marginal_sp(&prob, &s, j, &GridSpec::default()).unwrap();
            assert!((curve.total_mass() - 1.0).abs() < 1e-12);
            assert!(curve.density.iter().all(|&d| d >= 0.0));
            assert_eq!(curve.grid.len(), 201);
            assert!((curve.cdf(curve.grid[200]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_point_grid_is_rejected() {
        let (prob, s) = two_dim(100.0);
        let ml = MlSolver::default().solve(&prob, None).unwrap();
        let spec = GridSpec::Explicit(vec![0.1]);
        assert_eq!(marginal_ml_approx(&prob, &ml, 0, &spec).unwrap_err(), Error::GridTooSmall);
        assert_eq!(marginal_sp(&prob, &s, 0, &spec).unwrap_err(), Error::GridTooSmall);
    }

    #[test]
    fn ml_curve_peaks_at_ml_value() {
        let (prob, _) = two_dim(100.0);
        let ml = MlSolver::default().solve(&prob, None).unwrap();
        let curve = marginal_ml_approx(&prob, &ml, 0, &GridSpec::default()).unwrap();
        let step = curve.grid[1] - curve.grid[0];
        assert!((curve.mode() - ml.x_hat[0]).abs() <= step);
    }
}
