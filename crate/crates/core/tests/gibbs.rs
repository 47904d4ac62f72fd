mod common;

use bayonet::exact_1d::OneDimProblem;
use bayonet::gibbs::{batch_means_se, default_burn_in, run_chains, run_gibbs, sample_conditional_1d};
use bayonet::linalg::Matrix;
use bayonet::problem::PenalizedProblem;
use bayonet::special::RngStream;

fn draws(c: f64, a: f64, mu: f64, tau: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed);
    (0..n).map(|_| sample_conditional_1d(c, a, mu, tau, &mut rng)).collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[test]
fn conditional_draws_match_exact_moments() {
    let (c, a, mu, tau) = (1.0, 0.5, 0.25, 50.0);
    let xs = draws(c, a, mu, tau, 100_000, 1);
    let exact = OneDimProblem::new(c, a, mu, tau).unwrap();
    let se = sd(&xs) / (xs.len() as f64).sqrt();
    assert!((mean(&xs) - exact.expectation_exact()).abs() < 3.0 * se);
    let alpha = exact.alpha();
    let frac = xs.iter().filter(|&&x| x >= 0.0).count() as f64 / xs.len() as f64;
    let binom = (alpha * (1.0 - alpha) / xs.len() as f64).sqrt();
    assert!((frac - alpha).abs() < 3.0 * binom.max(1e-12), "{frac} vs {alpha}");
}

#[test]
fn symmetric_conditional_is_balanced() {
    let xs = draws(1.3, 0.0, 0.2, 20.0, 100_000, 2);
    let frac = xs.iter().filter(|&&x| x >= 0.0).count() as f64 / xs.len() as f64;
    assert!((frac - 0.5).abs() < 3.0 * (0.25 / xs.len() as f64).sqrt());
}

#[test]
fn one_dimensional_chain_reproduces_exact_density() {
    let prob = PenalizedProblem::from_parts(Matrix::from_rows(&[vec![1.0]]).unwrap(), vec![0.5], 0.0, 0.05, 100.0).unwrap();
    let chain = run_gibbs(&prob, &[0.0], 11_000, 1_000, 1, 4).unwrap();
    assert_eq!(chain.len(), 10_000);
    let exact = OneDimProblem::new(1.0, 0.5, 0.05, 100.0).unwrap();
    let ks = common::ks_distance(&chain.column(0), |x| exact.cdf_exact(x));
    assert!(ks < 0.02, "{ks}");
}

#[test]
fn two_dimensional_moments_match_quadrature() {
    let (c01, w, mu, tau) = (0.4, [0.3, -0.1], 0.1, 30.0);
    let c = Matrix::from_rows(&[vec![1.0, c01], vec![c01, 1.0]]).unwrap();
    let prob = PenalizedProblem::from_parts(c, w.to_vec(), 0.0, mu, tau).unwrap();
    let density = |x0: f64, x1: f64| {
        let h = x0 * x0 + x1 * x1 + 2.0 * c01 * x0 * x1 - 2.0 * (w[0] * x0 + w[1] * x1) + 2.0 * mu * (x0.abs() + x1.abs());
        (-tau * h).exp()
    };
    let cuts = [-2.0, -0.2, 0.0, 0.2, 2.0];
    let moment = |g: &dyn Fn(f64, f64) -> f64| {
        common::integrate_pieces(|x0| common::integrate_pieces(|x1| g(x0, x1) * density(x0, x1), &cuts, 1e-11), &cuts, 1e-11)
    };
    let z = moment(&|_, _| 1.0);
    let m0 = moment(&|a, _| a) / z;
    let m1 = moment(&|_, b| b) / z;
    let v0 = moment(&|a, _| (a - m0) * (a - m0)) / z;
    let cov = moment(&|a, b| (a - m0) * (b - m1)) / z;

    let chain = run_gibbs(&prob, &[0.0, 0.0], 101_000, 1_000, 1, 5).unwrap();
    let x0 = chain.column(0);
    let x1 = chain.column(1);
    let se = chain.standard_errors(50);
    let means = chain.means();
    assert!((means[0] - m0).abs() < 3.0 * se[0], "mean 0: {} vs {m0}", means[0]);
    assert!((means[1] - m1).abs() < 3.0 * se[1], "mean 1: {} vs {m1}", means[1]);
    let sq: Vec<f64> = x0.iter().map(|a| (a - m0) * (a - m0)).collect();
    assert!((mean(&sq) - v0).abs() < 3.0 * batch_means_se(&sq, 50), "variance");
    let cross: Vec<f64> = x0.iter().zip(&x1).map(|(a, b)| (a - m0) * (b - m1)).collect();
    assert!((mean(&cross) - cov).abs() < 3.0 * batch_means_se(&cross, 50), "covariance");
}

#[test]
fn overwhelming_penalty_pins_samples_to_zero() {
    let prob = common::random_problem(7, 30, 4, 0.1, 1e3, 100.0);
    let chain = run_gibbs(&prob, &[0.0; 4], 2_000, 200, 1, 6).unwrap();
    let largest = chain.samples.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(largest < 1e-2, "{largest}");
}

#[test]
fn incremental_residual_does_not_drift() {
    let (prob, ml) = common::suite_problem();
    let chain = run_gibbs(&prob, &ml.x_hat, 5_000, 500, 1, 8).unwrap();
    assert!(chain.max_drift < 1e-10, "{}", chain.max_drift);
}

#[test]
fn chains_are_seed_deterministic() {
    let (prob, ml) = common::suite_problem();
    let a = run_chains(&prob, &ml.x_hat, 1_000, 100, 3, &[1, 2]).unwrap();
    let b = run_chains(&prob, &ml.x_hat, 1_000, 100, 3, &[1, 2]).unwrap();
    assert_eq!(a, b);
    assert_ne!(a[0].samples, a[1].samples);
    assert_eq!(a[0].len(), 300);
    assert_eq!(default_burn_in(10_000), 1_000);
}
