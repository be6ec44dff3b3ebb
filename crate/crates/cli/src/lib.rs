//! Sweeps and single-state checks behind the `polygamy` binary.
//!
//! Every command renders its CSV into memory first. Rows are produced in
//! sample order whatever order the worker pool finishes them in, and every
//! float is printed with 17 significant digits, so identical configurations
//! give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use polygamy_core::concurrence::tau_a;
use polygamy_core::oracle::{optimize_coa_lower_bound, OracleParams};
use polygamy_core::polygamy::{
    format_dims, format_float, polygamy_report, subspace_sum_diagnostic, Mode, PolygamyReport, SubspaceDiagnostic,
};
use polygamy_core::states::{haar_random_pure_with, random_mixed_state_with, rng_for, Bipartition, Ket, State};

/// Slack below `-SLACK_TOL` is an inequality violation.
pub const SLACK_TOL: f64 = 1e-9;
/// τᵃ − oracle below `-GAP_TOL` contradicts the upper bound.
pub const GAP_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] polygamy_core::error::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    GeneralTau,
    MultiQubitCoa,
    OracleCompare,
    Diagnostic,
}

impl FromStr for SweepMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general-tau" => Ok(SweepMode::GeneralTau),
            "multi-qubit-coa" => Ok(SweepMode::MultiQubitCoa),
            "oracle-compare" => Ok(SweepMode::OracleCompare),
            "diagnostic" => Ok(SweepMode::Diagnostic),
            other => Err(CliError::Input(format!(
                "unknown mode {other:?} (expected general-tau, multi-qubit-coa, oracle-compare or diagnostic)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub mode: SweepMode,
    pub focus: usize,
    pub oracle_budget: usize,
    /// Rank of the random mixed states in oracle comparisons; full rank if unset.
    pub rank: Option<usize>,
    pub output_path: Option<PathBuf>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(CliError::Input("--samples must be at least 1".into()));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return Err(CliError::Input(format!("every dimension must be at least 2, got {:?}", self.dims)));
        }
        if self.focus >= self.dims.len() {
            return Err(CliError::Input(format!(
                "--focus {} out of range for {} subsystems",
                self.focus,
                self.dims.len()
            )));
        }
        if self.mode == SweepMode::OracleCompare && self.dims.len() != 2 {
            return Err(CliError::Input("oracle-compare needs bipartite --dims, e.g. 3,3".into()));
        }
        if self.mode == SweepMode::OracleCompare && self.oracle_budget == 0 {
            return Err(CliError::Input("--budget must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn parse_dims(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("bad dimension {part:?} in --dims {text:?}")))
        })
        .collect()
}

/// Rendered command output.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub csv: String,
    /// Offending samples, dumped next to the output when nonempty.
    pub violations: Vec<serde_json::Value>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            0
        } else {
            2
        }
    }
}

fn sample_state(config: &SweepConfig, k: usize) -> Result<Ket> {
    let mut rng = rng_for(config.seed, k as u64);
    Ok(haar_random_pure_with(&config.dims, &mut rng)?)
}

fn state_id(k: usize) -> String {
    format!("s{k:06}")
}

fn violation_record(id: &str, state: &Ket, report: serde_json::Value) -> serde_json::Value {
    json!({ "state_id": id, "state": state.to_json(), "report": report })
}

/// Polygamy report for a single state, as a header line plus one row.
pub fn run_check(state: &Ket, focus: usize, mode: Mode) -> Result<(PolygamyReport, Outcome)> {
    let report = polygamy_report(state, focus, mode)?;
    let mut csv = String::new();
    writeln!(csv, "{}", report.csv_header()).unwrap();
    writeln!(csv, "{}", report.csv_row("input")).unwrap();
    let violations = if report.is_violation(SLACK_TOL) {
        vec![violation_record("input", state, json!(report))]
    } else {
        Vec::new()
    };
    Ok((report, Outcome { csv, violations }))
}

pub fn load_state(path: &Path) -> Result<State> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(State::from_json_str(&text)?)
}

pub fn run(config: &SweepConfig) -> Result<Outcome> {
    config.validate()?;
    match config.mode {
        SweepMode::GeneralTau => run_polygamy_sweep(config, Mode::GeneralTau),
        SweepMode::MultiQubitCoa => run_polygamy_sweep(config, Mode::MultiQubitCoa),
        SweepMode::OracleCompare => run_oracle_compare(config),
        SweepMode::Diagnostic => run_diagnostic(config),
    }
}

fn summary(label: &str, samples: usize, values: &[f64], violations: usize) -> String {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    format!(
        "# summary,samples={samples},min_{label}={},mean_{label}={},violations={violations}",
        format_float(min),
        format_float(mean)
    )
}

pub fn run_polygamy_sweep(config: &SweepConfig, mode: Mode) -> Result<Outcome> {
    config.validate()?;
    let results: Vec<(Ket, PolygamyReport)> = (0..config.samples)
        .into_par_iter()
        .map(|k| {
            let psi = sample_state(config, k)?;
            let report = polygamy_report(&psi, config.focus, mode)?;
            Ok((psi, report))
        })
        .collect::<Result<_>>()?;

    let mut csv = String::new();
    writeln!(csv, "{}", results[0].1.csv_header()).unwrap();
    let mut violations = Vec::new();
    for (k, (psi, report)) in results.iter().enumerate() {
        let id = state_id(k);
        writeln!(csv, "{}", report.csv_row(&id)).unwrap();
        if report.is_violation(SLACK_TOL) {
            violations.push(violation_record(&id, psi, json!(report)));
        }
    }
    let slacks: Vec<f64> = results.iter().map(|(_, r)| r.slack).collect();
    writeln!(csv, "{}", summary("slack", config.samples, &slacks, violations.len())).unwrap();
    Ok(Outcome { csv, violations })
}

pub fn run_oracle_compare(config: &SweepConfig) -> Result<Outcome> {
    let mut config = config.clone();
    config.mode = SweepMode::OracleCompare;
    config.validate()?;
    let (d1, d2) = (config.dims[0], config.dims[1]);
    let rank = config.rank.unwrap_or(d1 * d2);
    let cut = Bipartition::single(2, 0)?;
    struct Row {
        rank: usize,
        tau: f64,
        lower: f64,
        converged: bool,
        rho: polygamy_core::states::DensityMatrix,
    }
    let rows: Vec<Row> = (0..config.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(config.seed, k as u64);
            let rho = random_mixed_state_with(&config.dims, rank, &mut rng)?;
            let oracle_seed = rand::Rng::gen::<u64>(&mut rng);
            let tau = tau_a(&rho)?.tau;
            let params = OracleParams { ensemble_size: None, budget: config.oracle_budget, seed: oracle_seed };
            let oracle = optimize_coa_lower_bound(&rho, &cut, params)?;
            Ok(Row { rank: rho.rank()?, tau, lower: oracle.best_average, converged: oracle.converged, rho })
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from("state_id,d1,d2,rank,tau,oracle_lower,gap,converged\n");
    let mut violations = Vec::new();
    let mut gaps = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        let id = state_id(k);
        let gap = row.tau - row.lower;
        gaps.push(gap);
        writeln!(
            csv,
            "{id},{d1},{d2},{},{},{},{},{}",
            row.rank,
            format_float(row.tau),
            format_float(row.lower),
            format_float(gap),
            row.converged
        )
        .unwrap();
        if gap < -GAP_TOL {
            violations.push(json!({
                "state_id": id,
                "state": row.rho.to_json(),
                "tau": row.tau,
                "oracle_lower": row.lower,
            }));
        }
    }
    let max_gap = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    writeln!(
        csv,
        "{},max_gap={}",
        summary("gap", config.samples, &gaps, violations.len()),
        format_float(max_gap)
    )
    .unwrap();
    Ok(Outcome { csv, violations })
}

pub fn run_diagnostic(config: &SweepConfig) -> Result<Outcome> {
    config.validate()?;
    let results: Vec<(Ket, SubspaceDiagnostic)> = (0..config.samples)
        .into_par_iter()
        .map(|k| {
            let psi = sample_state(config, k)?;
            let d = subspace_sum_diagnostic(&psi, config.focus)?;
            Ok((psi, d))
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("state_id,dims,focus,cut_concurrence_sq,subspace_sum_sq,excess,tuples\n");
    let mut violations = Vec::new();
    for (k, (psi, d)) in results.iter().enumerate() {
        let id = state_id(k);
        writeln!(
            csv,
            "{id},{},{},{},{},{},{}",
            format_dims(&config.dims),
            config.focus,
            format_float(d.cut_concurrence_sq),
            format_float(d.subspace_sum_sq),
            format_float(d.excess()),
            d.tuples
        )
        .unwrap();
        if d.excess() < -SLACK_TOL {
            violations.push(violation_record(&id, psi, json!(d)));
        }
    }
    let excess: Vec<f64> = results.iter().map(|(_, d)| d.excess()).collect();
    let tight = excess.iter().filter(|x| x.abs() <= 1e-12).count();
    writeln!(csv, "{},tight={tight}", summary("excess", config.samples, &excess, violations.len())).unwrap();
    Ok(Outcome { csv, violations })
}

/// `<output>.violation.json`.
pub fn violation_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".violation.json");
    PathBuf::from(name)
}

/// Writes the CSV (to `output` or stdout) and any violations next to `anchor`.
pub fn emit(outcome: &Outcome, output: Option<&Path>, anchor: &Path) -> Result<()> {
    match output {
        Some(path) => fs::write(path, &outcome.csv).map_err(|source| CliError::Io { path: path.into(), source })?,
        None => print!("{}", outcome.csv),
    }
    if !outcome.violations.is_empty() {
        let path = violation_path(anchor);
        let text = serde_json::to_string_pretty(&outcome.violations).expect("violations serialize");
        fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
    }
    Ok(())
}
