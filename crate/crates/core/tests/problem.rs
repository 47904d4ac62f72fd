mod common;

use bayonet::linalg::Matrix;
use bayonet::ml::MlSolver;
use bayonet::problem::{Dataset, PenalizedProblem};
use bayonet::Error;
use proptest::prelude::*;

fn column_checks(data: &Dataset<f64>) {
    let n = data.n_samples() as f64;
    let a = data.predictors();
    let cols = (0..a.cols()).map(|j| a.column(j)).chain(std::iter::once(data.responses().to_vec()));
    for col in cols {
        let sum: f64 = col.iter().sum();
        let ss: f64 = col.iter().map(|v| v * v).sum();
        assert!(sum.abs() < 1e-10, "column sum {sum}");
        assert!((ss - n).abs() < 1e-10, "column sum of squares {ss}");
    }
}

#[test]
fn diabetes_columns_standardize() {
    let Some(raw) = common::diabetes() else {
        eprintln!("diabetes.csv absent; skipping");
        return;
    };
    assert_eq!((raw.n_samples(), raw.n_predictors()), (442, 10));
    let data = raw.standardize().unwrap();
    column_checks(&data);
    assert!(!raw.is_standardized());
}

#[test]
fn standardize_is_idempotent() {
    let data = common::planted_data(3, 25, &[1.0, -1.0, 0.0], 0.2, 0.5).standardize().unwrap();
    let again = data.standardize().unwrap();
    for (a, b) in data.predictors().as_slice().iter().zip(again.predictors().as_slice()) {
        assert!((a - b).abs() < 1e-12);
    }
    for (a, b) in data.responses().iter().zip(again.responses()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn prestandardized_data_is_checked() {
    let std = common::planted_data(3, 40, &[0.5, -0.2], 0.3, 1.0).standardize().unwrap();
    let again = Dataset::prestandardized(std.responses().to_vec(), std.predictors().clone(), 1e-10).unwrap();
    assert!(again.is_standardized());
    assert_eq!(again, std);
    let raw = common::planted_data(3, 40, &[0.5, -0.2], 0.3, 1.0);
    assert!(Dataset::prestandardized(raw.responses().to_vec(), raw.predictors().clone(), 1e-10).is_err());
}

#[test]
fn constant_column_is_rejected() {
    let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 2.0], vec![3.0, 2.0]]).unwrap();
    let data = Dataset::new(vec![1.0, 0.0, 2.0], a).unwrap();
    assert!(matches!(data.standardize(), Err(Error::ZeroVarianceColumn(1))));
}

#[test]
fn gram_matches_independent_product() {
    let data = common::planted_data(17, 10, &[0.3, 0.1, -0.2], 0.1, 1.0).standardize().unwrap();
    let prob = PenalizedProblem::from_data(&data, 0.1, 0.05, 1.0).unwrap();
    let a = data.predictors();
    let y = data.responses();
    for j in 0..3 {
        let wj: f64 = (0..10).map(|i| a[(i, j)] * y[i]).sum::<f64>() / 20.0;
        assert!((prob.w()[j] - wj).abs() < 1e-12);
        for k in 0..3 {
            let mut ckj: f64 = (0..10).map(|i| a[(i, j)] * a[(i, k)]).sum::<f64>() / 20.0;
            if j == k {
                ckj += 0.1;
            }
            assert!((prob.c()[(j, k)] - ckj).abs() < 1e-12);
        }
        assert!((prob.c()[(j, j)] - 0.6).abs() < 1e-12);
    }
}

#[test]
fn zero_design_gives_ridge_identity() {
    let c = Matrix::diagonal(&[0.1f64, 0.1]);
    let prob = PenalizedProblem::from_parts(c, vec![0.0, 0.0], 0.1, 0.2, 1.0).unwrap();
    assert_eq!(prob.cost(&[0.0, 0.0]).unwrap(), 0.0);
    assert!(prob.low_rank_factor().is_none());
}

#[test]
fn hand_evaluated_cost() {
    let prob = PenalizedProblem::from_parts(Matrix::from_rows(&[vec![1.0f64]]).unwrap(), vec![0.5], 0.0, 0.1, 1.0).unwrap();
    assert!((prob.cost(&[0.4]).unwrap() + 0.16).abs() < 1e-15);
    assert!(matches!(prob.cost(&[0.4, 0.0]), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn lasso_with_too_few_samples_is_singular() {
    let data = common::planted_data(4, 3, &[1.0, 0.5, 0.0, -0.3, 0.2], 0.0, 1.0).standardize().unwrap();
    assert!(matches!(PenalizedProblem::from_data(&data, 0.0, 0.1, 1.0), Err(Error::SingularC)));
    let ridge = PenalizedProblem::from_data(&data, 0.1, 0.1, 1.0).unwrap();
    assert!(ridge.low_rank_factor().is_some());
}

#[test]
fn invalid_hyperparameters() {
    let data = common::suite_data();
    assert!(PenalizedProblem::from_data(&data, -0.1, 0.1, 1.0).is_err());
    assert!(PenalizedProblem::from_data(&data, 0.1, 0.0, 1.0).is_err());
    assert!(PenalizedProblem::from_data(&data, 0.1, 0.1, 0.0).is_err());
    let raw = common::planted_data(1, 10, &[1.0], 0.0, 1.0);
    assert!(PenalizedProblem::from_data(&raw, 0.1, 0.1, 1.0).is_err());
}

#[test]
fn cost_at_ml_solution_is_minimal() {
    let prob = common::random_problem(8, 40, 6, 0.1, 0.3, 1.0);
    let ml = MlSolver::default().solve(&prob, None).unwrap();
    let mut g = common::Normals::new(1);
    for _ in 0..100 {
        let x: Vec<f64> = ml.x_hat.iter().map(|v| v + 0.5 * g.next()).collect();
        assert!(prob.cost(&x).unwrap() >= ml.h_min);
    }
}

#[test]
fn single_precision_problem() {
    let c = Matrix::from_rows(&[vec![0.6f32, 0.1], vec![0.1, 0.6]]).unwrap();
    let prob = PenalizedProblem::from_parts(c, vec![0.3f32, -0.05], 0.1, 0.1, 10.0).unwrap();
    let ml = MlSolver::new(1e-6f32, 1000).solve(&prob, None).unwrap();
    assert!(ml.converged);
    assert!(ml.kkt_residual(&prob) < 1e-5);
}

proptest! {
    #[test]
    fn cost_is_convex(seed in 0u64..1000, t in 0.0f64..1.0) {
        let prob = common::random_problem(seed, 15, 4, 0.05, 0.5, 1.0);
        let mut g = common::Normals::new(seed);
        let x1: Vec<f64> = (0..4).map(|_| g.next()).collect();
        let x2: Vec<f64> = (0..4).map(|_| g.next()).collect();
        let mix: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let lhs = prob.cost(&mix).unwrap();
        let rhs = t * prob.cost(&x1).unwrap() + (1.0 - t) * prob.cost(&x2).unwrap();
        prop_assert!(lhs <= rhs + 1e-10);
    }

    #[test]
    fn cost_matches_penalized_least_squares(seed in 0u64..1000) {
        let lambda = 0.2;
        let mu = 0.07;
        let data = common::planted_data(seed, 12, &[0.5, 0.0, -1.0], 0.4, 1.0).standardize().unwrap();
        let prob = PenalizedProblem::from_data(&data, lambda, mu, 1.0).unwrap();
        let mut g = common::Normals::new(seed + 1);
        let x: Vec<f64> = (0..3).map(|_| g.next()).collect();
        let fitted = data.predictors().mul_vec(&x);
        let y = data.responses();
        let rss: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        let l2: f64 = x.iter().map(|v| v * v).sum();
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        let direct = rss / 24.0 + lambda * l2 + 2.0 * mu * l1 - yy / 24.0;
        prop_assert!((prob.cost(&x).unwrap() - direct).abs() < 1e-10);
    }
}
