mod common;

use bayonet::exact_1d::OneDimProblem;
use proptest::prelude::*;

fn prob(c: f64, w: f64, mu: f64, tau: f64) -> OneDimProblem<f64> {
    OneDimProblem::new(c, w, mu, tau).unwrap()
}

#[test]
fn log_z_matches_quadrature_on_grid() {
    for (c, w, mu, tau) in common::one_dim_grid() {
        let exact = prob(c, w, mu, tau).log_z_exact();
        let quad = common::log_z_quadrature(c, w, mu, tau);
        // |Δ log Z| is the relative error of Z itself
        assert!((exact - quad).abs() < 1e-10, "(c,w,mu,tau)=({c},{w},{mu},{tau}): {exact} vs {quad}");
    }
}

#[test]
fn transition_example_matches_quadrature() {
    let exact = prob(1.0, 0.5, 0.5, 10.0).log_z_exact();
    let z_quad = common::integrate(|x: f64| (-10.0 * (x * x - x + x.abs())).exp(), -3.0, 0.0, 1e-13)
        + common::integrate(|x: f64| (-10.0 * (x * x - x + x.abs())).exp(), 0.0, 3.0, 1e-13);
    assert!((exact.exp() - z_quad).abs() / z_quad < 1e-10);
}

#[test]
fn free_energy_reaches_minimum() {
    let p = prob(1.0, 0.5, 0.05, 1e6);
    let gap = -p.log_z_exact() / p.tau - p.h_min();
    assert!(gap > 0.0 && gap < 1e-5, "{gap}");
}

#[test]
fn expectation_is_a_log_partition_derivative() {
    for &(c, w, mu, tau) in &[(1.0, 0.5, 0.25, 50.0), (2.0, -0.3, 0.1, 5.0), (0.7, 0.05, 0.5, 100.0)] {
        let h = 1e-6;
        let fd = (prob(c, w + h, mu, tau).log_z_exact() - prob(c, w - h, mu, tau).log_z_exact()) / (2.0 * h);
        let e = prob(c, w, mu, tau).expectation_exact();
        assert!((fd / (2.0 * tau) - e).abs() < 1e-6, "({c},{w},{mu},{tau})");
    }
}

#[test]
fn expectation_matches_quadrature_mean() {
    let p = prob(1.0, 0.5, 0.25, 10.0);
    let num = common::integrate(|x| x * p.density_exact(x), -4.0, 0.0, 1e-13)
        + common::integrate(|x| x * p.density_exact(x), 0.0, 4.0, 1e-13);
    assert!((num - p.expectation_exact()).abs() < 1e-12);
}

#[test]
fn expectation_reaches_soft_threshold() {
    let p = prob(1.5, -0.8, 0.3, 1e8);
    assert!((p.expectation_exact() - (-0.5 / 1.5)).abs() < 1e-7);
}

#[test]
fn density_is_normalized_and_matches_quadrature() {
    for &(c, w, mu, tau) in &[(1.0, 0.5, 0.25, 50.0), (1.0, 0.0, 0.3, 10.0), (2.0, -1.0, 0.05, 1e3)] {
        let p = prob(c, w, mu, tau);
        let sd = 1.0 / (2.0 * tau * c).sqrt();
        let (lo, hi) = (-w.abs() / c - 8.0 * sd, w.abs() / c + 8.0 * sd);
        let n = 20_001;
        let step = (hi - lo) / (n - 1) as f64;
        let ys: Vec<f64> = (0..n).map(|i| p.density_exact(lo + step * i as f64)).collect();
        let trap = step * (ys.iter().sum::<f64>() - 0.5 * (ys[0] + ys[n - 1]));
        assert!((trap - 1.0).abs() < 1e-6, "mass {trap}");
        let log_z_q = common::log_z_quadrature(c, w, mu, tau);
        for x in [lo / 2.0, -0.01, 0.0, 0.02, hi / 3.0] {
            let q = (-tau * p.energy(x) - log_z_q).exp();
            assert!((p.density_exact(x) - q).abs() <= 1e-10 * q.max(1.0));
        }
    }
    let even = prob(1.0, 0.0, 0.2, 30.0);
    assert_eq!(even.density_exact(0.13), even.density_exact(-0.13));
}

#[test]
fn cdf_matches_quadrature() {
    let p = prob(1.0, 0.5, 0.05, 100.0);
    for x in [-0.1f64, 0.0, 0.2, 0.45, 0.6] {
        let q = common::integrate(|t| p.density_exact(t), -2.0, x.min(0.0), 1e-13)
            + if x > 0.0 { common::integrate(|t| p.density_exact(t), 0.0, x, 1e-13) } else { 0.0 };
        assert!((p.cdf_exact(x) - q).abs() < 1e-10, "x {x}");
    }
}

proptest! {
    #[test]
    fn alpha_is_a_probability_on_the_side_of_w(
        c in 0.1f64..5.0, w in -3.0f64..3.0, mu in 0.01f64..3.0, log_tau in -1.0f64..6.0,
    ) {
        let a = prob(c, w, mu, 10f64.powf(log_tau)).alpha();
        prop_assert!(a > 0.0 && a < 1.0 || (a == 1.0 && w > 0.0) || (a == 0.0 && w < 0.0));
        prop_assert_eq!(a > 0.5, w > 0.0);
    }

    #[test]
    fn log_z_is_even_in_w(c in 0.1f64..5.0, w in -3.0f64..3.0, mu in 0.01f64..3.0, tau in 0.1f64..1e4) {
        prop_assert_eq!(prob(c, w, mu, tau).log_z_exact(), prob(c, -w, mu, tau).log_z_exact());
    }

    #[test]
    fn expectation_increases_with_w(
        c in 0.1f64..5.0, w in -2.0f64..2.0, dw in 1e-3f64..1.0, mu in 0.01f64..3.0, tau in 0.1f64..1e3,
    ) {
        prop_assert!(prob(c, w + dw, mu, tau).expectation_exact() > prob(c, w, mu, tau).expectation_exact());
    }
}
