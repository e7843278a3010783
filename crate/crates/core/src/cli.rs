//! Command-line front end: model evaluation, Monte Carlo runs, verification
//! suites, bound checks and period sweeps, written as CSV or JSON tables.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::measure::{build_orthogonal_measure, check_bounds, DiscreteMeasure, RandomProfile};
use crate::model::{closed_form_pn, make_model, ModelKind, ModelSpec, SpectralDifference};
use crate::rng::{Domain, StreamRng};
use crate::sampling::{run_monte_carlo, EstimateReport, Geometry, MonteCarloConfig, SamplingDistribution};
use crate::spectral::{
    amplitudes_continuous_with, amplitudes_periodic, tilde_index, AmplitudeSeries, TransformMode,
    DEFAULT_TAIL_TARGET,
};
use crate::verify::{run_suite, Suite, DEFAULT_SEED};

/// Largest |error| between the pipeline and the closed form accepted by `model`.
pub const MODEL_TOLERANCE: f64 = 1e-10;
/// Largest |z| accepted by `sample` and `sweep`.
pub const Z_LIMIT: f64 = 5.0;
/// Slack below zero tolerated by `bound`.
pub const BOUND_TOLERANCE: f64 = 1e-9;
/// Cell count used by continuous models when `--cells` is absent.
pub const DEFAULT_MODEL_CELLS: usize = 16;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "anticip", version, about = "Anticipation statistics of orthogonal quantum evolutions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    /// Sampling law: uniform, two-point:<y0> or table:<path>.
    #[arg(long, default_value = "uniform")]
    pub dist: String,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Indices n for p_n.
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<i64>,
    /// Cuts N for p_N.
    #[arg(long = "N", value_delimiter = ',')]
    pub cut: Vec<usize>,
    /// Orders r for the moment observable.
    #[arg(long = "r", value_delimiter = ',')]
    pub r: Vec<f64>,
    /// Threshold for the near-zero count.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "ANTICIP_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a model state through the transform and its closed form.
    Model {
        #[arg(long)]
        kind: ModelKind,
        #[arg(long, conflicts_with = "cells")]
        period: Option<usize>,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        y: f64,
        /// Continuous window [1 - n_max, n_max]; defaults to a tail bound below 1e-6.
        #[arg(long)]
        n_max: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo estimates paired with closed forms.
    Sample {
        #[arg(long, conflicts_with = "cells", required_unless_present = "cells")]
        period: Option<usize>,
        #[arg(long)]
        cells: Option<usize>,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Frequency-bound checks on random or given orthogonal measures.
    Bound {
        #[arg(long, default_value_t = 2)]
        period: usize,
        /// Number of random measures.
        #[arg(long, default_value_t = 100)]
        measures: u64,
        /// Largest integer shift in the random profiles.
        #[arg(long, default_value_t = 3)]
        radius: i64,
        /// Explicit support points (standard scale); replaces the random measures.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "weights")]
        points: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        weights: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Repeat `sample` over a list of periods or cell counts.
    Sweep {
        #[arg(long, value_delimiter = ',', conflicts_with = "cells", required_unless_present = "cells")]
        period: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        cells: Vec<usize>,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// The reader went away, as in `anticip ... | head`.
    fn is_broken_pipe(&self) -> bool {
        let io = match self {
            CliError::Io(e) => Some(e.kind()),
            CliError::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e.kind()),
                _ => None,
            },
            CliError::Json(e) => e.io_error_kind(),
            _ => None,
        };
        io == Some(io::ErrorKind::BrokenPipe)
    }
}

/// One output cell.
#[derive(Debug, Clone)]
enum Cell {
    Int(i64),
    UInt(u64),
    Float(f64),
    Missing,
    Text(String),
    Bool(bool),
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Missing => String::new(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::UInt(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Missing => Value::Null,
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

/// 17 significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(headers: Vec<&'static str>) -> Self {
        Self {
            headers,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

fn emit(table: &Table, config: Value, output: &OutputArgs) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match &output.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match output.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            w.write_record(&table.headers)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::csv))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let results: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = table
                        .headers
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.to_string(), c.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            serde_json::to_writer_pretty(&mut sink, &json!({ "config": config, "results": results }))?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}

/// Parses the process arguments and runs the chosen subcommand.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.is_broken_pipe() => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Model {
            kind,
            period,
            cells,
            y,
            n_max,
            output,
        } => cmd_model(kind, period, cells, y, n_max, &output),
        Command::Sample {
            period,
            cells,
            sampling,
            output,
        } => cmd_sample(geometry(period, cells)?, &sampling, &output),
        Command::Verify { suite, seed, output } => cmd_verify(&suite, seed, &output),
        Command::Bound {
            period,
            measures,
            radius,
            points,
            weights,
            seed,
            output,
        } => cmd_bound(period, measures, radius, points, weights, seed, &output),
        Command::Sweep {
            period,
            cells,
            sampling,
            output,
        } => cmd_sweep(period, cells, &sampling, &output),
    }
}

fn geometry(period: Option<usize>, cells: Option<usize>) -> Result<Geometry, CliError> {
    match (period, cells) {
        (Some(period), None) => Ok(Geometry::Periodic { period }),
        (None, Some(cells)) => Ok(Geometry::Continuous { cells }),
        _ => Err(CliError::Usage("give exactly one of --period or --cells".into())),
    }
}

fn cmd_model(
    kind: ModelKind,
    period: Option<usize>,
    cells: Option<usize>,
    y: f64,
    n_max: Option<u32>,
    output: &OutputArgs,
) -> Result<u8, CliError> {
    let size = if kind.is_periodic() {
        if cells.is_some() {
            return Err(CliError::Usage(format!("{kind} takes --period, not --cells")));
        }
        period.ok_or_else(|| CliError::Usage(format!("{kind} requires --period")))?
    } else {
        if period.is_some() {
            return Err(CliError::Usage(format!("{kind} takes --cells, not --period")));
        }
        cells.unwrap_or(DEFAULT_MODEL_CELLS)
    };
    let spec = ModelSpec::new(kind, size, y)?;
    let (amps, window): (AmplitudeSeries, Option<i64>) = match make_model(&spec)? {
        SpectralDifference::Periodic(sd) => {
            if n_max.is_some() {
                return Err(CliError::Usage("--n-max applies to continuous models only".into()));
            }
            (amplitudes_periodic(&sd, TransformMode::FastTransform), None)
        }
        SpectralDifference::Continuous(sd) => {
            let k = match n_max {
                Some(0) => return Err(CliError::Usage("--n-max must be at least 1".into())),
                Some(k) => k as i64,
                None => sd.default_window(DEFAULT_TAIL_TARGET),
            };
            (
                amplitudes_continuous_with(&sd, 1 - k, k, TransformMode::FastTransform)?,
                Some(k),
            )
        }
    };
    let period = amps.origin().period();
    let mut table = Table::new(vec![
        "n",
        "tilde_n",
        "re_alpha",
        "im_alpha",
        "p_n",
        "closed_form_p_n",
        "abs_err",
    ]);
    let mut worst: f64 = 0.0;
    for (n, a) in amps.iter() {
        let pn = a.norm_sqr();
        let closed = closed_form_pn(&spec, n)?;
        let err = (pn - closed).abs();
        worst = worst.max(err);
        table.push(vec![
            Cell::Int(n),
            Cell::UInt(tilde_index(n, period)),
            Cell::Float(a.re),
            Cell::Float(a.im),
            Cell::Float(pn),
            Cell::Float(closed),
            Cell::Float(err),
        ]);
    }
    let tail_bound = amps.tail_bound();
    if let Some(bound) = tail_bound {
        eprintln!("tail bound outside the window: {}", format_float(bound));
    }
    let config = json!({
        "command": "model",
        "kind": kind.as_str(),
        "size": size,
        "y": y,
        "n_max": window,
        "tail_bound": tail_bound,
        "max_abs_err": worst,
    });
    emit(&table, config, output)?;
    if worst <= MODEL_TOLERANCE {
        Ok(EXIT_OK)
    } else {
        eprintln!("closed-form mismatch: max abs error {}", format_float(worst));
        Ok(EXIT_FAILED)
    }
}

fn monte_carlo_config(geometry: Geometry, args: &SamplingArgs) -> Result<MonteCarloConfig, CliError> {
    let dist = SamplingDistribution::parse(&args.dist)?;
    let mut config = MonteCarloConfig::new(geometry, dist, args.trials, args.seed);
    config.n_list = args.n.clone();
    config.cut_list = args.cut.clone();
    config.r_list = args.r.clone();
    config.epsilon = args.epsilon;
    config.threads = args.threads;
    config.validate()?;
    Ok(config)
}

const ESTIMATE_HEADERS: [&str; 13] = [
    "size",
    "seed",
    "statistic",
    "trials",
    "mean",
    "variance",
    "std_error",
    "variance_std_error",
    "predicted_mean",
    "predicted_variance",
    "z_mean",
    "z_variance",
    "leading_order",
];

fn push_estimates(table: &mut Table, report: &EstimateReport) {
    let size = report.config.geometry.size() as u64;
    for e in &report.estimates {
        table.push(vec![
            Cell::UInt(size),
            Cell::UInt(report.config.seed),
            Cell::Text(e.statistic.clone()),
            Cell::UInt(e.trials),
            Cell::Float(e.mean),
            Cell::Float(e.variance),
            Cell::Float(e.std_error),
            Cell::Float(e.variance_std_error),
            e.predicted_mean.into(),
            e.predicted_variance.into(),
            e.z_mean.into(),
            e.z_variance.into(),
            e.leading_order.into(),
        ]);
    }
}

fn z_verdict(reports: &[EstimateReport]) -> u8 {
    let worst = reports.iter().map(EstimateReport::max_abs_z).fold(0.0, f64::max);
    if worst <= Z_LIMIT {
        EXIT_OK
    } else {
        eprintln!("z-score breach: max |z| = {worst:.3} > {Z_LIMIT}");
        EXIT_FAILED
    }
}

fn cmd_sample(geometry: Geometry, args: &SamplingArgs, output: &OutputArgs) -> Result<u8, CliError> {
    let config = monte_carlo_config(geometry, args)?;
    let report = run_monte_carlo(&config)?;
    let mut table = Table::new(ESTIMATE_HEADERS.to_vec());
    push_estimates(&mut table, &report);
    let mut echo = serde_json::to_value(&report.config)?;
    echo["command"] = json!("sample");
    emit(&table, echo, output)?;
    Ok(z_verdict(&[report]))
}

fn cmd_sweep(
    periods: Vec<usize>,
    cells: Vec<usize>,
    args: &SamplingArgs,
    output: &OutputArgs,
) -> Result<u8, CliError> {
    let geometries: Vec<Geometry> = match (periods.is_empty(), cells.is_empty()) {
        (false, true) => periods.into_iter().map(|period| Geometry::Periodic { period }).collect(),
        (true, false) => cells.into_iter().map(|cells| Geometry::Continuous { cells }).collect(),
        _ => return Err(CliError::Usage("give exactly one of --period or --cells".into())),
    };
    let configs = geometries
        .into_iter()
        .map(|g| monte_carlo_config(g, args))
        .collect::<Result<Vec<_>, _>>()?;
    let reports = configs
        .iter()
        .map(run_monte_carlo)
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(ESTIMATE_HEADERS.to_vec());
    for report in &reports {
        push_estimates(&mut table, report);
    }
    let sizes: Vec<usize> = configs.iter().map(|c| c.geometry.size()).collect();
    let mut echo = serde_json::to_value(&configs[0])?;
    echo["command"] = json!("sweep");
    echo["sizes"] = json!(sizes);
    emit(&table, echo, output)?;
    Ok(z_verdict(&reports))
}

fn cmd_verify(suite: &str, seed: u64, output: &OutputArgs) -> Result<u8, CliError> {
    let suite: Suite = suite.parse()?;
    let results = run_suite(suite, seed)?;
    let mut table = Table::new(vec!["criterion", "title", "result", "detail"]);
    for r in &results {
        eprintln!("{r}");
        table.push(vec![
            Cell::Text(r.id.clone()),
            Cell::Text(r.title.clone()),
            Cell::Text(if r.passed { "PASS" } else { "FAIL" }.into()),
            Cell::Text(r.detail.clone()),
        ]);
    }
    let config = json!({ "command": "verify", "suite": suite.to_string(), "seed": seed });
    emit(&table, config, output)?;
    Ok(if results.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

fn cmd_bound(
    period: usize,
    measures: u64,
    radius: i64,
    points: Vec<f64>,
    weights: Vec<f64>,
    seed: u64,
    output: &OutputArgs,
) -> Result<u8, CliError> {
    if radius < 0 {
        return Err(CliError::Usage("--radius must be nonnegative".into()));
    }
    let list: Vec<DiscreteMeasure> = if points.is_empty() {
        (0..measures)
            .map(|i| {
                let mut rng = StreamRng::new(seed, Domain::Measure, i);
                build_orthogonal_measure(period, &RandomProfile { radius }, &mut rng)
            })
            .collect::<Result<_, _>>()?
    } else {
        vec![DiscreteMeasure::new(points, weights)?]
    };
    let mut table = Table::new(vec![
        "period",
        "seed",
        "measure",
        "atoms",
        "orthogonality_error",
        "median",
        "min_abs_moment",
        "abs_moment_origin",
        "short_time_slack",
        "short_time_slack_median",
        "step_slack",
        "frequency_slack",
        "holds",
    ]);
    let mut all_hold = true;
    for (i, m) in list.iter().enumerate() {
        let r = check_bounds(m, period)?;
        let holds = r.short_time_holds() && r.step_holds() && r.frequency_holds(BOUND_TOLERANCE);
        all_hold &= holds;
        table.push(vec![
            Cell::UInt(period as u64),
            Cell::UInt(seed),
            Cell::UInt(i as u64),
            Cell::UInt(m.len() as u64),
            Cell::Float(r.orthogonality_error),
            Cell::Float(r.median),
            Cell::Float(r.min_abs_moment),
            Cell::Float(r.abs_moment_origin),
            Cell::Float(r.short_time_slack),
            Cell::Float(r.short_time_slack_median),
            Cell::Float(r.step_slack),
            Cell::Float(r.frequency_slack),
            Cell::Bool(holds),
        ]);
    }
    let config = json!({
        "command": "bound",
        "period": period,
        "measures": list.len(),
        "radius": radius,
        "seed": seed,
    });
    emit(&table, config, output)?;
    Ok(if all_hold { EXIT_OK } else { EXIT_FAILED })
}
