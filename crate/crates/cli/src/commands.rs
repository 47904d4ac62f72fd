use bayonet::exact_1d::OneDimProblem;
use bayonet::hyper::{cross_validate_with, map_tau_terms, mu_grid, mu_max, tau_grid, CvOptions};
use bayonet::partition::log_partition;
use bayonet::posterior::marginal_sp_with;
use bayonet::saddle::tau_path;
use bayonet::{marginal_ml_approx, run_gibbs, CvReport, GridSpec, HyperGrid, Ml, MlSolver, Problem, SaddleSolver};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{
    ConvergenceArgs, CvArgs, FitArgs, Format, GibbsArgs, MaptauArgs, MarginalArgs, SamplerArgs, TauArg,
};
use crate::error::{CliError, CliResult};
use crate::input::Input;
use crate::output::{csv_table, emit, json, num};

/// Batches for the batch-means standard errors in Gibbs output.
const SE_BATCHES: usize = 20;

struct Prepared {
    problem: Problem,
    ml: Ml,
    map_tau: Option<f64>,
}

fn saddle_solver(tol: Option<f64>) -> CliResult<SaddleSolver<f64>> {
    match tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(CliError::Config(format!("--tol must be positive, got {t}"))),
        Some(t) => Ok(SaddleSolver::new(t, SaddleSolver::<f64>::default().max_cycles)),
        None => Ok(SaddleSolver::default()),
    }
}

/// ML fit and the inverse temperature, resolving `--tau map`.
fn prepare(input: &Input, args: &FitArgs) -> CliResult<Prepared> {
    let lambda = args.input.lambda;
    let base = input.problem(lambda, args.mu, 1.0)?;
    let ml = MlSolver::default().solve(&base, None)?.ensure_converged()?;
    let map_tau = input.data().map(|d| bayonet::map_tau(d, base.lambda(), args.mu, &ml));
    let tau = match args.tau {
        TauArg::Value(t) => t,
        TauArg::Map => match &map_tau {
            Some(t) => t.clone()?,
            None => return Err(CliError::Config("--tau map needs CSV data".into())),
        },
    };
    Ok(Prepared { problem: base.with_tau(tau)?, ml, map_tau: map_tau.and_then(Result::ok) })
}

#[derive(Serialize)]
struct FitReport<'a> {
    predictors: &'a [String],
    lambda: f64,
    mu: f64,
    tau: f64,
    x_ml: &'a [f64],
    x_tau: &'a [f64],
    u_tau: &'a [f64],
    active_set: &'a [usize],
    h_min: f64,
    log_z: f64,
    map_tau: Option<f64>,
    cycles: usize,
    ml_cycles: usize,
    residual: f64,
}

pub fn fit(args: &FitArgs) -> CliResult<()> {
    let input = Input::load(&args.input)?;
    let prep = prepare(&input, args)?;
    let saddle = saddle_solver(args.tol)?.solve(&prep.problem, &prep.ml.x_hat)?;
    let log_z = log_partition(&prep.problem, &saddle)?.log_z;
    let names = input.names();
    let bytes = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json(&FitReport {
            predictors: &names,
            lambda: prep.problem.lambda(),
            mu: prep.problem.mu(),
            tau: prep.problem.tau(),
            x_ml: &prep.ml.x_hat,
            x_tau: &saddle.x_tau,
            u_tau: &saddle.u_tau,
            active_set: &prep.ml.active_set,
            h_min: prep.ml.h_min,
            log_z,
            map_tau: prep.map_tau,
            cycles: saddle.cycles,
            ml_cycles: prep.ml.cycles,
            residual: saddle.residual,
        })?,
        Format::Csv => csv_table(
            &["predictor", "x_ml", "x_tau", "u_tau"],
            names.iter().enumerate().map(|(j, n)| {
                vec![n.clone(), num(prep.ml.x_hat[j]), num(saddle.x_tau[j]), num(saddle.u_tau[j])]
            }),
        )?,
    };
    emit(args.output.out.as_deref(), &bytes)
}

/// Indices selected by `all` or a comma list of indices or names.
fn parse_coords(spec: &str, names: &[String]) -> CliResult<Vec<usize>> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok((0..names.len()).collect());
    }
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let j = match item.parse::<usize>() {
            Ok(j) => j,
            Err(_) => names
                .iter()
                .position(|n| n == item)
                .ok_or_else(|| CliError::Config(format!("unknown coordinate {item:?}")))?,
        };
        if j >= names.len() {
            return Err(CliError::Config(format!("coordinate {j} out of range for p = {}", names.len())));
        }
        if !out.contains(&j) {
            out.push(j);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("--coords selects no coordinate".into()));
    }
    Ok(out)
}

fn burn_in(s: &SamplerArgs) -> usize {
    s.burn_in.unwrap_or_else(|| bayonet::gibbs::default_burn_in(s.gibbs_sweeps))
}

/// Histogram density of `samples` on the bins between consecutive `edges`,
/// normalized by the total sample count.
fn histogram(samples: &[f64], edges: &[f64]) -> Vec<f64> {
    let mut counts = vec![0usize; edges.len() - 1];
    for &s in samples {
        if s < edges[0] || s > edges[edges.len() - 1] {
            continue;
        }
        let k = edges.partition_point(|&e| e <= s).clamp(1, edges.len() - 1) - 1;
        counts[k] += 1;
    }
    let n = samples.len() as f64;
    counts.iter().zip(edges.windows(2)).map(|(&c, e)| c as f64 / (n * (e[1] - e[0]))).collect()
}

#[derive(Serialize)]
struct CurveFile<'a> {
    coordinate: usize,
    predictor: &'a str,
    x: &'a [f64],
    density_sp: &'a [f64],
    density_ml: Option<&'a [f64]>,
}

pub fn marginal(args: &MarginalArgs) -> CliResult<()> {
    let dir = args
        .fit
        .output
        .out
        .as_deref()
        .ok_or_else(|| CliError::Config("marginal needs --out <directory>".into()))?;
    if args.grid_points < 2 || !(args.half_width > 0.0) {
        return Err(CliError::Config("grid needs at least 2 points and a positive half-width".into()));
    }
    let input = Input::load(&args.fit.input)?;
    let names = input.names();
    let coords = parse_coords(&args.coords, &names)?;
    let prep = prepare(&input, &args.fit)?;
    let solver = saddle_solver(args.fit.tol)?;
    let saddle = solver.solve(&prep.problem, &prep.ml.x_hat)?;
    let spec = GridSpec::Centered { half_width: args.half_width, points: args.grid_points };
    let curves = coords
        .par_iter()
        .map(|&j| {
            let sp = marginal_sp_with(&prep.problem, &saddle, j, &spec, &solver)?;
            let ml = if args.ml {
                Some(marginal_ml_approx(&prep.problem, &prep.ml, j, &GridSpec::Explicit(sp.grid.clone()))?)
            } else {
                None
            };
            Ok((sp, ml))
        })
        .collect::<Result<Vec<_>, bayonet::Error>>()?;
    let chain = if args.gibbs {
        let s = &args.sampler;
        Some(run_gibbs(&prep.problem, &prep.ml.x_hat, s.gibbs_sweeps, burn_in(s), s.thin, s.seed)?)
    } else {
        None
    };
    std::fs::create_dir_all(dir)?;
    let format = args.fit.output.format.unwrap_or(Format::Csv);
    for (sp, ml) in &curves {
        let j = sp.coordinate;
        let density_ml = ml.as_ref().map(|c| c.density.as_slice());
        let bytes = match format {
            Format::Json => json(&CurveFile {
                coordinate: j,
                predictor: &names[j],
                x: &sp.grid,
                density_sp: &sp.density,
                density_ml,
            })?,
            Format::Csv => {
                let header: &[&str] = if ml.is_some() { &["x", "density_sp", "density_ml"] } else { &["x", "density_sp"] };
                csv_table(
                    header,
                    sp.grid.iter().enumerate().map(|(i, &x)| {
                        let mut row = vec![num(x), num(sp.density[i])];
                        if let Some(d) = density_ml {
                            row.push(num(d[i]));
                        }
                        row
                    }),
                )?
            }
        };
        let ext = if format == Format::Json { "json" } else { "csv" };
        emit(Some(&dir.join(format!("marginal_{j}.{ext}"))), &bytes)?;
        if let Some(chain) = &chain {
            let hist = histogram(&chain.column(j), &sp.grid);
            let bytes = csv_table(
                &["bin_left", "bin_right", "density"],
                sp.grid.windows(2).zip(&hist).map(|(e, &d)| vec![num(e[0]), num(e[1]), num(d)]),
            )?;
            emit(Some(&dir.join(format!("marginal_{j}_gibbs.csv"))), &bytes)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ConvergenceRow {
    tau: f64,
    mu: f64,
    gap: f64,
    xdiff: f64,
}

pub fn convergence(args: &ConvergenceArgs) -> CliResult<()> {
    let input = Input::load(&args.input)?;
    let probe = input.problem(args.input.lambda, 1.0, 1.0)?;
    let mus = match (&args.mu_grid, args.mu.is_empty()) {
        (Some(g), _) => mu_grid(mu_max(probe.w())?, g.n, g.r)?,
        (None, false) => args.mu.clone(),
        (None, true) => return Err(CliError::Config("convergence needs --mu or --mu-grid".into())),
    };
    let taus = tau_grid::<f64>(args.tau_grid.m, args.tau_grid.count)?;
    if args.exact && probe.dim() != 1 {
        return Err(CliError::Config("--exact needs a one-dimensional problem".into()));
    }
    let solver = saddle_solver(args.tol)?;
    let p = probe.dim() as f64;
    let per_mu = mus
        .par_iter()
        .map(|&mu| -> CliResult<Vec<ConvergenceRow>> {
            let prob = probe.with_mu(mu)?;
            let ml = MlSolver::default().solve(&prob, None)?.ensure_converged()?;
            let xdiff = |x: &[f64]| x.iter().zip(&ml.x_hat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let mut rows = Vec::with_capacity(taus.len());
            if args.exact {
                for &tau in &taus {
                    let one = OneDimProblem::new(prob.c()[(0, 0)], prob.w()[0], mu, tau)?;
                    let gap = (-one.log_z_exact() / tau - ml.h_min) / p;
                    rows.push(ConvergenceRow { tau, mu, gap, xdiff: xdiff(&[one.expectation_exact()]) });
                }
            } else {
                let descending: Vec<f64> = taus.iter().rev().copied().collect();
                let path = tau_path(&prob, &descending, &ml.x_hat, &solver)?;
                for (sol, &tau) in path.iter().zip(&descending).rev() {
                    let log_z = log_partition(&prob.with_tau(tau)?, sol)?.log_z;
                    let gap = (-log_z / tau - ml.h_min) / p;
                    rows.push(ConvergenceRow { tau, mu, gap, xdiff: xdiff(&sol.x_tau) });
                }
            }
            Ok(rows)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let rows: Vec<ConvergenceRow> = per_mu.into_iter().flatten().collect();
    let bytes = match args.output.format.unwrap_or(Format::Csv) {
        Format::Json => json(&rows)?,
        Format::Csv => csv_table(
            &["tau", "mu", "gap", "xdiff"],
            rows.iter().map(|r| vec![num(r.tau), num(r.mu), num(r.gap), num(r.xdiff)]),
        )?,
    };
    emit(args.output.out.as_deref(), &bytes)
}

#[derive(Serialize)]
struct GibbsReport<'a> {
    predictors: &'a [String],
    seed: u64,
    sweeps: usize,
    burn_in: usize,
    thin: usize,
    tau: f64,
    means: Vec<f64>,
    standard_errors: Vec<f64>,
    max_drift: f64,
    samples: Vec<&'a [f64]>,
}

pub fn gibbs(args: &GibbsArgs) -> CliResult<()> {
    let input = Input::load(&args.fit.input)?;
    let prep = prepare(&input, &args.fit)?;
    let s = &args.sampler;
    let burn = burn_in(s);
    let chain = run_gibbs(&prep.problem, &prep.ml.x_hat, s.gibbs_sweeps, burn, s.thin, s.seed)?;
    let names = input.names();
    let p = names.len();
    let rows = (0..chain.len()).map(|i| chain.samples.row(i));
    let bytes = match args.fit.output.format.unwrap_or(Format::Csv) {
        Format::Json => json(&GibbsReport {
            predictors: &names,
            seed: s.seed,
            sweeps: s.gibbs_sweeps,
            burn_in: burn,
            thin: s.thin,
            tau: prep.problem.tau(),
            means: chain.means(),
            standard_errors: chain.standard_errors(SE_BATCHES),
            max_drift: chain.max_drift,
            samples: rows.collect(),
        })?,
        Format::Csv => {
            let header: Vec<&str> = names.iter().map(String::as_str).collect();
            csv_table(&header, rows.map(|r| (0..p).map(|j| num(r[j])).collect()))?
        }
    };
    emit(args.fit.output.out.as_deref(), &bytes)
}

#[derive(Serialize)]
struct CvOutput<'a> {
    predictors: &'a [String],
    seed: u64,
    screen_top: Option<usize>,
    #[serde(flatten)]
    report: &'a CvReport,
}

pub fn cv(args: &CvArgs) -> CliResult<()> {
    if args.input.no_standardize {
        return Err(CliError::Config("cross-validation standardizes each fold; drop --no-standardize".into()));
    }
    let input = Input::load_raw(&args.input)?;
    let data = input.data().ok_or_else(|| CliError::Config("cv needs CSV data".into()))?;
    let lambda = args.input.lambda.ok_or_else(|| CliError::Config("--lambda is required for CSV input".into()))?;
    let grid = HyperGrid::from_data(data, lambda, args.mu_grid.n, args.mu_grid.r, args.tau_grid.m, args.tau_grid.count)?;
    let options = CvOptions { screen_top: args.screen_top, saddle: saddle_solver(args.tol)?, ..CvOptions::default() };
    let report = cross_validate_with(data, &grid, args.folds, args.seed, &options)?;
    let names = input.names();
    let bytes = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json(&CvOutput { predictors: &names, seed: args.seed, screen_top: args.screen_top, report: &report })?,
        Format::Csv => {
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            let mut rows = Vec::new();
            for (i, &mu) in report.grid.mus.iter().enumerate() {
                for (k, &tau) in report.grid.taus.iter().enumerate() {
                    rows.push(vec![num(mu), num(tau), opt(report.scores[i][k])]);
                }
                rows.push(vec![num(mu), String::new(), opt(report.ml_scores[i])]);
            }
            csv_table(&["mu", "tau", "median_r"], rows)?
        }
    };
    emit(args.output.out.as_deref(), &bytes)
}

#[derive(Serialize)]
struct MaptauReport<'a> {
    lambda: f64,
    mu: f64,
    map_tau: f64,
    numerator: f64,
    residual: f64,
    ridge: f64,
    lasso: f64,
    active_set: &'a [usize],
}

pub fn maptau(args: &MaptauArgs) -> CliResult<()> {
    let input = Input::load(&args.input)?;
    let data = input.data().ok_or_else(|| CliError::Config("maptau needs CSV data".into()))?;
    let prob = input.problem(args.input.lambda, args.mu, 1.0)?;
    let ml = MlSolver::default().solve(&prob, None)?.ensure_converged()?;
    let terms = map_tau_terms(data, prob.lambda(), args.mu, &ml)?;
    let report = MaptauReport {
        lambda: prob.lambda(),
        mu: args.mu,
        map_tau: terms.tau()?,
        numerator: terms.numerator,
        residual: terms.residual,
        ridge: terms.ridge,
        lasso: terms.lasso,
        active_set: &ml.active_set,
    };
    let bytes = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json(&report)?,
        Format::Csv => csv_table(
            &["lambda", "mu", "map_tau", "numerator", "residual", "ridge", "lasso"],
            [vec![
                num(report.lambda),
                num(report.mu),
                num(report.map_tau),
                num(report.numerator),
                num(report.residual),
                num(report.ridge),
                num(report.lasso),
            ]],
        )?,
    };
    emit(args.output.out.as_deref(), &bytes)
}

/// Caps the global worker pool at `BAYONET_THREADS` when set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("BAYONET_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("BAYONET_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

