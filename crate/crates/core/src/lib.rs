//! Bayesian elastic net regression through the stationary-phase
//! approximation to the posterior partition function.
//!
//! The posterior of the coefficients is `p(x) ∝ e^{−τH(x)}` with
//! `H(x) = xᵀCx − 2wᵀx + 2μ‖x‖₁`. The partition function, expectations and
//! marginals follow from the unique saddle point `u_τ` of a cubic system, so
//! no sampling is needed. A Gibbs sampler and exact one-dimensional formulas
//! are provided as references.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`.
//!
//! ```
//! use bayonet::{Matrix, MlSolver, Problem, SaddleSolver};
//!
//! let c = Matrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 1.0]]).unwrap();
//! let problem = Problem::from_parts(c, vec![0.5, -0.05], 0.0, 0.1, 100.0).unwrap();
//! let ml = MlSolver::default().solve(&problem, None).unwrap();
//! let saddle = SaddleSolver::default().solve(&problem, &ml.x_hat).unwrap();
//! let log_z = bayonet::partition::log_partition(&problem, &saddle).unwrap().log_z;
//! assert!(log_z.is_finite());
//! assert!(saddle.u_tau.iter().all(|u| u.abs() < 0.1));
//! ```

pub mod cubic;
pub mod error;
pub mod exact_1d;
pub mod gibbs;
pub mod hyper;
pub mod linalg;
pub mod ml;
pub mod partition;
pub mod posterior;
pub mod problem;
pub mod saddle;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use exact_1d::OneDimProblem;
pub use gibbs::{run_gibbs, GibbsChain};
pub use hyper::{cross_validate, map_tau, CvReport, HyperGrid};
pub use linalg::{Cholesky, Matrix};
pub use ml::{MlSolution, MlSolver};
pub use partition::{log_partition, LogPartition};
pub use posterior::{marginal_ml_approx, marginal_sp, GridSpec, MarginalCurve};
pub use problem::{Dataset, PenalizedProblem, Standardization};
pub use saddle::{solve_saddle, SaddleSolution, SaddleSolver};
pub use scalar::Real;

pub type Problem = PenalizedProblem<f64>;
pub type Data = Dataset<f64>;
pub type Saddle = SaddleSolution<f64>;
pub type Ml = MlSolution<f64>;
pub type Curve = MarginalCurve<f64>;
pub type Chain = GibbsChain<f64>;
pub type Partition = LogPartition<f64>;
pub type OneDim = OneDimProblem<f64>;
