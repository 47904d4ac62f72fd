//! Problem input: a CSV data file or a JSON `(C, w)` pair.

use std::path::Path;

use bayonet::{Data, Matrix, Problem};
use serde::Deserialize;

use crate::args::InputArgs;
use crate::error::{CliError, CliResult};

/// Deviation from the standardization convention tolerated by
/// `--no-standardize`, per sample.
const PRESTANDARDIZED_TOL: f64 = 1e-8;

#[derive(Debug, Deserialize)]
struct PartsFile {
    c: Vec<Vec<f64>>,
    w: Vec<f64>,
}

pub enum Input {
    /// Standardized unless the command asked for raw data.
    Data { names: Vec<String>, data: Data },
    Parts { c: Matrix<f64>, w: Vec<f64> },
}

impl Input {
    pub fn load(args: &InputArgs) -> CliResult<Self> {
        let mut input = Self::load_raw(args)?;
        if let Input::Data { data, .. } = &mut input {
            if !data.is_standardized() {
                *data = data.standardize()?;
            }
        }
        Ok(input)
    }

    /// Loads without standardizing CSV data (unless `--no-standardize` was
    /// given, in which case the data is checked and marked standardized).
    pub fn load_raw(args: &InputArgs) -> CliResult<Self> {
        let is_json = args.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            let text = std::fs::read_to_string(&args.input)
                .map_err(|e| CliError::Input(format!("{}: {e}", args.input.display())))?;
            let parts: PartsFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", args.input.display())))?;
            let c = Matrix::from_rows(&parts.c).map_err(|e| CliError::Input(format!("c: {e}")))?;
            return Ok(Input::Parts { c, w: parts.w });
        }
        let response = args
            .response
            .as_deref()
            .ok_or_else(|| CliError::Config("--response is required for CSV input".into()))?;
        let (names, y, rows) = read_csv(&args.input, response)?;
        let a = Matrix::from_rows(&rows).map_err(|e| CliError::Input(e.to_string()))?;
        let data = if args.no_standardize {
            Data::prestandardized(y, a, PRESTANDARDIZED_TOL)?
        } else {
            Data::new(y, a)?
        };
        Ok(Input::Data { names, data })
    }

    pub fn names(&self) -> Vec<String> {
        match self {
            Input::Data { names, .. } => names.clone(),
            Input::Parts { w, .. } => (0..w.len()).map(|j| format!("x{j}")).collect(),
        }
    }

    pub fn data(&self) -> Option<&Data> {
        match self {
            Input::Data { data, .. } => Some(data),
            Input::Parts { .. } => None,
        }
    }

    /// The penalized problem. CSV input requires `lambda`; for JSON input
    /// it is only recorded.
    pub fn problem(&self, lambda: Option<f64>, mu: f64, tau: f64) -> CliResult<Problem> {
        match self {
            Input::Data { data, .. } => {
                let lambda = lambda.ok_or_else(|| CliError::Config("--lambda is required for CSV input".into()))?;
                Ok(Problem::from_data(data, lambda, mu, tau)?)
            }
            Input::Parts { c, w } => Ok(Problem::from_parts(c.clone(), w.clone(), lambda.unwrap_or(0.0), mu, tau)?),
        }
    }
}

/// Header names of the predictors, the response column and the predictor
/// rows. Every field must parse as a finite number.
fn read_csv(path: &Path, response: &str) -> CliResult<(Vec<String>, Vec<f64>, Vec<Vec<f64>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: header: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let y_col = header
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| CliError::Input(format!("response column {response:?} not found in header")))?;
    let names: Vec<String> = header.iter().enumerate().filter(|&(k, _)| k != y_col).map(|(_, h)| h.clone()).collect();
    let mut y = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Input(format!("{}: line {line}: {e}", path.display()))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(names.len());
        for (k, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| CliError::Input(format!("{}: line {line}: column {:?}: not a number: {field:?}", path.display(), header[k])))?;
            if k == y_col {
                y.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    Ok((names, y, rows))
}
