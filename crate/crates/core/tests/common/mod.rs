//! Shared oracles and problem generators for the integration tests.
#![allow(dead_code)]

use bayonet::linalg::Matrix;
use bayonet::ml::{MlSolution, MlSolver};
use bayonet::problem::{Dataset, PenalizedProblem};
use bayonet::special::RngStream;

// 15-point Kronrod nodes and weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Bisects `[a, b]` until each piece's error estimate is below its share
/// of `abs_tol` (shares are proportional to length within `span`).
fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, span: f64) -> f64 {
    let mut stack = vec![(a, b, gk15(f, a, b))];
    let mut total = 0.0;
    let mut evals = 0;
    while let Some((lo, hi, (est, err))) = stack.pop() {
        evals += 1;
        if err <= abs_tol * (hi - lo) / span || evals > 100_000 || hi - lo < 1e-15 * span {
            total += est;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        stack.push((lo, mid, gk15(f, lo, mid)));
        stack.push((mid, hi, gk15(f, mid, hi)));
    }
    total
}

/// Rough integral from a fixed 16-way split, used to turn a relative
/// tolerance into an absolute one.
fn rough(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let h = (b - a) / 16.0;
    (0..16).map(|i| gk15(f, a + h * f64::from(i), a + h * f64::from(i + 1)).0).sum()
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]` to relative
/// tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    integrate_pieces(f, &[a, b], tol)
}

/// Integral over `[points[0], points[last]]`, with the sorted breakpoints
/// forcing subdivision at known features of `f`.
pub fn integrate_pieces(f: impl Fn(f64) -> f64, points: &[f64], tol: f64) -> f64 {
    let pieces: Vec<(f64, f64)> = points.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect();
    let scale: f64 = pieces.iter().map(|&(a, b)| rough(&f, a, b)).sum::<f64>().abs();
    let span = points[points.len() - 1] - points[0];
    pieces.iter().map(|&(a, b)| adaptive(&f, a, b, tol * scale, span)).sum()
}

/// `log ∫ e^{−τ(cx² − 2wx + 2μ|x|)} dx` by quadrature, split at the kink.
/// Breakpoints are graded towards zero and placed around each half-line
/// mode so that no piece hides a peak narrower than its nodes.
pub fn log_z_quadrature(c: f64, w: f64, mu: f64, tau: f64) -> f64 {
    let h = |x: f64| c * x * x - 2.0 * w * x + 2.0 * mu * x.abs();
    let shrunk = (w.abs() - mu).max(0.0);
    let h_min = -shrunk * shrunk / c;
    let f = |x: f64| (-tau * (h(x) - h_min)).exp();
    let l = w.abs() / c + 10.0 / (tau * c).sqrt();
    let sd = 1.0 / (2.0 * tau * c).sqrt();
    let mut points = vec![-l, 0.0, l];
    for k in 0..12 {
        let t = l * 0.1f64.powi(k);
        points.extend([-t, t]);
    }
    for mode in [(w - mu) / c, (w + mu) / c] {
        points.extend((-10..=10).map(|j| mode + f64::from(j) * sd).filter(|x| x.abs() < l));
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    integrate_pieces(f, &points, 1e-13).ln() - tau * h_min
}

/// Standard normal draws by the Box–Muller transform.
pub struct Normals {
    rng: RngStream,
    spare: Option<f64>,
}

impl Normals {
    pub fn new(seed: u64) -> Self {
        Self { rng: RngStream::new(seed), spare: None }
    }

    pub fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let r = (-2.0 * self.rng.uniform_pos().ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * self.rng.uniform();
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.uniform()
    }
}

/// Raw regression data with equicorrelated Gaussian predictors and a
/// planted coefficient vector.
pub fn planted_data(seed: u64, n: usize, beta: &[f64], rho: f64, noise: f64) -> Dataset<f64> {
    let p = beta.len();
    let mut g = Normals::new(seed);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let shared = g.next();
        let row: Vec<f64> = (0..p).map(|_| rho.sqrt() * shared + (1.0 - rho).sqrt() * g.next()).collect();
        y.push(row.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>() + noise * g.next());
        rows.push(row);
    }
    Dataset::new(y, Matrix::from_rows(&rows).unwrap()).unwrap()
}

/// A standardized random problem with `μ = mu_frac · μ_max`.
pub fn random_problem(seed: u64, n: usize, p: usize, lambda: f64, mu_frac: f64, tau: f64) -> PenalizedProblem<f64> {
    let mut g = Normals::new(seed ^ 0x5eed);
    let beta: Vec<f64> = (0..p).map(|j| if j % 2 == 0 { g.next() } else { 0.0 }).collect();
    let data = planted_data(seed, n, &beta, 0.3, 1.0).standardize().unwrap();
    let prob = PenalizedProblem::from_data(&data, lambda, 1.0, tau).unwrap();
    let mu_max = prob.w().iter().fold(0.0f64, |m, w| m.max(w.abs()));
    prob.with_mu(mu_frac * mu_max).unwrap()
}

/// Standardized data of the five-predictor suite shared by the posterior,
/// Gibbs and acceptance tests: 442 samples, as in the diabetes data.
pub fn suite_data() -> Dataset<f64> {
    planted_data(2024, 442, &[0.8, 0.0, -0.5, 0.0, 0.15], 0.3, 1.0).standardize().unwrap()
}

pub const SUITE_LAMBDA: f64 = 0.1;
/// At this weight predictors 1 and 3 have zero ML coefficients.
pub const SUITE_MU: f64 = 0.05;
/// The suite predictor that enters the ML model as `μ` decreases below 0.03.
pub const SUITE_LATE_ENTRANT: usize = 3;

/// The suite problem at its MAP inverse temperature, with its ML solution.
pub fn suite_at(mu: f64) -> (PenalizedProblem<f64>, MlSolution<f64>) {
    let data = suite_data();
    let prob = PenalizedProblem::from_data(&data, SUITE_LAMBDA, mu, 1.0).unwrap();
    let ml = MlSolver::default().solve(&prob, None).unwrap();
    let tau = bayonet::hyper::map_tau(&data, SUITE_LAMBDA, mu, &ml).unwrap();
    (prob.with_tau(tau).unwrap(), ml)
}

pub fn suite_problem() -> (PenalizedProblem<f64>, MlSolution<f64>) {
    suite_at(SUITE_MU)
}

/// The suite one percent above the weight at which the late entrant joins
/// the ML model, so that it sits just outside the inclusion boundary.
pub fn near_transition_problem() -> (PenalizedProblem<f64>, MlSolution<f64>) {
    let data = suite_data();
    let base = PenalizedProblem::from_data(&data, SUITE_LAMBDA, SUITE_MU, 1.0).unwrap();
    let (mut lo, mut hi) = (0.01, SUITE_MU);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        let ml = MlSolver::default().solve(&base.with_mu(mid).unwrap(), None).unwrap();
        if ml.x_hat[SUITE_LATE_ENTRANT] == 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    suite_at(1.01 * hi)
}

/// `∫|x| p(x) dx` of a tabulated density by the trapezoid rule.
pub fn abs_mean(grid: &[f64], density: &[f64]) -> f64 {
    grid.windows(2)
        .zip(density.windows(2))
        .map(|(g, d)| 0.5 * (g[1] - g[0]) * (d[0] * g[0].abs() + d[1] * g[1].abs()))
        .sum()
}

/// Kolmogorov–Smirnov distance between a sample and a distribution function.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Relative difference with a floor of one on the scale.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// The diabetes data (442 × 10, response in the last column) when the CSV
/// is present in the workspace `data/` directory.
pub fn diabetes() -> Option<Dataset<f64>> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/diabetes.csv");
    let text = std::fs::read_to_string(path).ok()?;
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let mut vals: Vec<f64> = line.split(',').map(|v| v.trim().parse().unwrap()).collect();
        y.push(vals.pop().unwrap());
        rows.push(vals);
    }
    Some(Dataset::new(y, Matrix::from_rows(&rows).unwrap()).unwrap())
}

/// The 3×3×3×3 `(c, w, μ, τ)` grid spanning `τ ∈ [1, 10⁴]`.
pub fn one_dim_grid() -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::with_capacity(81);
    for &c in &[0.5, 1.0, 2.0] {
        for &w in &[-0.5, 0.1, 1.0] {
            for &mu in &[0.05, 0.5, 5.0] {
                for &tau in &[1.0, 100.0, 1e4] {
                    out.push((c, w, mu, tau));
                }
            }
        }
    }
    out
}
