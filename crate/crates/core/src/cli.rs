//! Command-line front end. [`run`] parses arguments and returns the text and
//! exit code instead of touching the process, so it is testable in-process.

use std::collections::BTreeMap;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bounds::{
    consistent, h2_bounds, h3_bounds, lambda_curve, lambda_peak, BetaSolver, BoundsError, EntropyBound, H3Params,
    LogBeta, Target, MAX_DESK_POINTS,
};
use crate::matchcount::CountError;
use crate::oracle::{run_mutated_suite, run_suite, OracleError, MAX_ORACLE_POINTS};
use crate::record::{Consistency, CurvePoint, ResultRow, RunRecord, Status, Timings};
use crate::spectral::PowerOptions;
use crate::transfer::TransferError;

pub const EXIT_OK: i32 = 0;
/// Verification failures and unexpected errors.
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
/// A bracket was produced but did not reach the requested tolerance.
pub const EXIT_NOT_CONVERGED: i32 = 4;

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "MDENTROPY_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mdentropy", version, about = "Monomer-dimer and dimer entropy bounds from transfer matrices")]
pub struct Cli {
    /// Worker threads (defaults to all cores); results do not depend on it.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Include wall-clock timings in JSON output.
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bracket log beta for torus cross-sections.
    Beta(BetaArgs),
    /// Upper and lower entropy bounds.
    Bounds(BoundsArgs),
    /// Density-constrained entropy curve.
    Lambda(LambdaArgs),
    /// Run the brute-force verification suite.
    Verify(VerifyArgs),
    /// Reproduce a table of log beta values up to a size budget.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Relative bracket width at which the power method stops.
    #[arg(long = "tol", default_value_t = 1e-12)]
    pub tolerance: f64,
    /// Diagonal shift added before iterating.
    #[arg(long, default_value_t = 1.0)]
    pub shift: f64,
    /// Iteration cap; exceeding it reports an unconverged bracket.
    #[arg(long = "max-iters", default_value_t = 1_000_000)]
    pub max_iterations: u64,
}

impl SolverArgs {
    fn options(&self) -> Result<PowerOptions, CliError> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.tolerance) || !positive(self.shift) || self.max_iterations == 0 {
            return Err(CliError::Usage("--tol, --shift and --max-iters must be positive".into()));
        }
        Ok(PowerOptions { shift: self.shift, tolerance: self.tolerance, max_iterations: self.max_iterations })
    }
}

#[derive(Debug, Args)]
pub struct BetaArgs {
    /// Cross-section `m1[,m2]`; repeat for several shapes.
    #[arg(long, required = true)]
    pub dims: Vec<String>,
    /// Count dimer covers only (no monomers).
    #[arg(long)]
    pub dimer_only: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    H2,
    H2t,
    H3,
    H3t,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::H2 => Target::H2,
            TargetArg::H2t => Target::H2Dimer,
            TargetArg::H3 => Target::H3,
            TargetArg::H3t => Target::H3Dimer,
        }
    }
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub target: TargetArg,
    /// `r` for two dimensions, `r,t` for three.
    #[arg(long)]
    pub upper: String,
    /// `p,q` for two dimensions, `p,q,u,s,v` for three.
    #[arg(long)]
    pub lower: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct LambdaArgs {
    /// Lattice dimension; 1 gives the exact one-dimensional curve.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=3))]
    pub d: u32,
    /// Density step, in (0, 0.1].
    #[arg(long, default_value_t = 0.05)]
    pub grid: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = MAX_ORACLE_POINTS)]
    pub max_points: usize,
    /// Mispair the transfer identities; the run must fail.
    #[arg(long, hide = true)]
    pub corrupt: bool,
    /// Plain-text report unless `json` is requested.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Row list: 1 and 2 are one-dimensional, 3 and 4 two-dimensional; 2 and 4 are dimer-only.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub which: u8,
    /// Largest number of cross-section points to include.
    #[arg(long)]
    pub max_size: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Text and exit code of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Capacity(String),
    Failure(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Capacity(_) => EXIT_CAPACITY,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Capacity(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        let message = e.to_string();
        match e {
            BoundsError::Capacity { .. }
            | BoundsError::Transfer(TransferError::Capacity { .. })
            | BoundsError::Transfer(TransferError::Count(CountError::Capacity { .. })) => CliError::Capacity(message),
            BoundsError::Parameters(_) | BoundsError::Lattice(_) => CliError::Usage(message),
            _ => CliError::Failure(message),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Capacity { .. } => CliError::Capacity(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { stdout: String::new(), stderr: text, code: EXIT_USAGE }
            } else {
                Outcome { stdout: text, stderr: String::new(), code: EXIT_OK }
            };
        }
    };
    let pool = match cli.threads {
        Some(0) => {
            return Outcome { stdout: String::new(), stderr: "--threads must be at least 1\n".into(), code: EXIT_USAGE }
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(pool) => pool,
        Err(e) => return Outcome { stdout: String::new(), stderr: format!("{e}\n"), code: EXIT_FAILURE },
    };
    let started = Instant::now();
    let result = pool.install(|| dispatch(&cli.command));
    match result {
        Ok((mut record, format, plain)) => {
            if cli.timings {
                record.timings = Some(Timings { wall_seconds: started.elapsed().as_secs_f64() });
            }
            let code = match record.status {
                Status::Ok => EXIT_OK,
                Status::NotConverged => EXIT_NOT_CONVERGED,
                Status::Failed => EXIT_FAILURE,
            };
            let stdout = match (format, plain) {
                (Some(Format::Json), _) => record.to_json() + "\n",
                (_, Some(text)) => text,
                _ => csv_for(&record),
            };
            Outcome { stdout, stderr: String::new(), code }
        }
        Err(e) => Outcome { stdout: String::new(), stderr: format!("error: {}\n", e.message()), code: e.code() },
    }
}

type Dispatched = (RunRecord, Option<Format>, Option<String>);

fn dispatch(command: &Command) -> Result<Dispatched, CliError> {
    match command {
        Command::Beta(a) => cmd_beta(a).map(|r| (r, Some(a.format), None)),
        Command::Bounds(a) => cmd_bounds(a).map(|r| (r, Some(a.format), None)),
        Command::Lambda(a) => cmd_lambda(a).map(|r| (r, Some(a.format), None)),
        Command::Table(a) => cmd_table(a).map(|r| (r, Some(a.format), None)),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn parse_list(text: &str, flag: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("{flag}: expected comma-separated integers, got {text:?}")))
        })
        .collect()
}

fn beta_status(betas: &[LogBeta]) -> Status {
    if betas.iter().all(|b| b.converged) {
        Status::Ok
    } else {
        Status::NotConverged
    }
}

fn solver_parameters(s: &SolverArgs, params: &mut BTreeMap<String, serde_json::Value>) {
    params.insert("tol".into(), json!(s.tolerance));
    params.insert("shift".into(), json!(s.shift));
    params.insert("max_iters".into(), json!(s.max_iterations));
}

fn cmd_beta(a: &BetaArgs) -> Result<RunRecord, CliError> {
    let solver = BetaSolver::new(a.solver.options()?);
    let shapes: Vec<Vec<usize>> = a.dims.iter().map(|d| parse_list(d, "--dims")).collect::<Result<_, _>>()?;
    let mut params = BTreeMap::new();
    params.insert("dims".into(), json!(shapes));
    params.insert("dimer_only".into(), json!(a.dimer_only));
    solver_parameters(&a.solver, &mut params);
    let mut record = RunRecord::new("beta", params);
    let mut betas = Vec::new();
    for dims in &shapes {
        if dims.len() > 2 {
            return Err(CliError::Usage(format!("--dims takes one or two lengths, got {dims:?}")));
        }
        betas.push(solver.log_beta(dims, a.dimer_only)?);
    }
    record.status = beta_status(&betas);
    record.results = betas.into_iter().map(ResultRow::Beta).collect();
    Ok(record)
}

fn cmd_bounds(a: &BoundsArgs) -> Result<RunRecord, CliError> {
    let solver = BetaSolver::new(a.solver.options()?);
    let target = Target::from(a.target);
    let upper = parse_list(&a.upper, "--upper")?;
    let lower = parse_list(&a.lower, "--lower")?;
    let (up, low) = match (target.dimension(), upper.as_slice(), lower.as_slice()) {
        (2, &[r], &[p, q]) => h2_bounds(&solver, r, p, q, target.dimer_only())?,
        (3, &[r, t], &[p, q, u, s, v]) => h3_bounds(&solver, H3Params { r, t, p, q, u, s, v }, target.dimer_only())?,
        (2, _, _) => return Err(CliError::Usage(format!("{target} takes --upper r and --lower p,q"))),
        _ => return Err(CliError::Usage(format!("{target} takes --upper r,t and --lower p,q,u,s,v"))),
    };
    let mut params = BTreeMap::new();
    params.insert("target".into(), json!(target));
    params.insert("upper".into(), json!(upper));
    params.insert("lower".into(), json!(lower));
    solver_parameters(&a.solver, &mut params);
    let mut record = RunRecord::new("bounds", params);
    let betas = solver.computed();
    record.status = beta_status(&betas);
    let ok = consistent(&[up.clone(), low.clone()]);
    record.results.push(ResultRow::Bound(up));
    record.results.push(ResultRow::Bound(low));
    record.results.push(ResultRow::Consistency(Consistency { target, consistent: ok }));
    record.results.extend(betas.into_iter().map(ResultRow::Beta));
    Ok(record)
}

fn cmd_lambda(a: &LambdaArgs) -> Result<RunRecord, CliError> {
    if !(a.grid > 0.0 && a.grid <= 0.1) {
        return Err(CliError::Usage(format!("--grid must lie in (0, 0.1], got {}", a.grid)));
    }
    let mut params = BTreeMap::new();
    params.insert("d".into(), json!(a.d));
    params.insert("grid".into(), json!(a.grid));
    let mut record = RunRecord::new("lambda", params);
    for (p, value) in lambda_curve(a.d, a.grid) {
        record.results.push(ResultRow::Curve(CurvePoint { p, value, peak: false }));
    }
    let (p, value) = lambda_peak(a.d);
    record.results.push(ResultRow::Curve(CurvePoint { p, value, peak: true }));
    Ok(record)
}

fn cmd_verify(a: &VerifyArgs) -> Result<Dispatched, CliError> {
    let report = if a.corrupt { run_mutated_suite(a.max_points)? } else { run_suite(a.max_points)? };
    let mut params = BTreeMap::new();
    params.insert("max_points".into(), json!(report.max_points));
    let mut record = RunRecord::new("verify", params);
    record.status = if report.passed() { Status::Ok } else { Status::Failed };
    let text = report.render();
    record.results = report.checks.into_iter().map(ResultRow::Check).collect();
    match a.format {
        Some(Format::Json) => Ok((record, Some(Format::Json), None)),
        _ => Ok((record, None, Some(text))),
    }
}

/// Whether a table is dimer-only, and its rows in order.
pub fn table_rows(which: u8) -> (bool, Vec<Vec<usize>>) {
    const TWO_DIM: &[[usize; 2]] =
        &[[2, 2], [3, 2], [4, 2], [5, 2], [6, 2], [7, 2], [8, 2], [3, 3], [4, 3], [5, 3], [4, 4]];
    const TWO_DIM_DIMER: &[[usize; 2]] =
        &[[2, 2], [3, 2], [4, 2], [5, 2], [6, 2], [7, 2], [3, 3], [4, 3], [5, 3], [4, 4], [6, 3], [6, 4]];
    match which {
        1 => (false, (4..=17).map(|m| vec![m]).collect()),
        2 => (true, (4..=15).map(|m| vec![m]).collect()),
        3 => (false, TWO_DIM.iter().map(|d| d.to_vec()).collect()),
        _ => (true, TWO_DIM_DIMER.iter().map(|d| d.to_vec()).collect()),
    }
}

fn cmd_table(a: &TableArgs) -> Result<RunRecord, CliError> {
    if a.max_size > MAX_DESK_POINTS {
        return Err(CliError::Capacity(format!(
            "--max-size {} exceeds the limit of {MAX_DESK_POINTS} cross-section points",
            a.max_size
        )));
    }
    let solver = BetaSolver::new(a.solver.options()?);
    let (dimer_only, rows) = table_rows(a.which);
    let mut params = BTreeMap::new();
    params.insert("which".into(), json!(a.which));
    params.insert("max_size".into(), json!(a.max_size));
    solver_parameters(&a.solver, &mut params);
    let mut record = RunRecord::new("table", params);
    let mut betas = Vec::new();
    for dims in rows.iter().filter(|d| d.iter().product::<usize>() <= a.max_size) {
        betas.push(solver.log_beta(dims, dimer_only)?);
    }
    record.status = beta_status(&betas);
    record.results = betas.into_iter().map(ResultRow::Beta).collect();
    Ok(record)
}

fn dims_label(dims: &[usize]) -> String {
    dims.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("x")
}

fn write_rows(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

fn beta_row(b: &LogBeta) -> Vec<String> {
    vec![
        dims_label(&b.dims),
        b.dimer_only.to_string(),
        b.orbits.to_string(),
        b.estimate.to_string(),
        b.lower.to_string(),
        b.upper.to_string(),
        b.per_site().to_string(),
        b.iterations.to_string(),
        b.converged.to_string(),
    ]
}

fn bound_row(b: &EntropyBound, ok: bool) -> Vec<String> {
    let params: Vec<String> = b.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
    vec![
        b.target.to_string(),
        match b.direction {
            crate::bounds::Direction::Upper => "upper".into(),
            crate::bounds::Direction::Lower => "lower".into(),
        },
        b.value.to_string(),
        b.estimate.to_string(),
        params.join(";"),
        b.formula.clone(),
        ok.to_string(),
    ]
}

const BETA_HEADER: &[&str] =
    &["dims", "dimer_only", "orbits", "log_beta", "lower", "upper", "per_site", "iterations", "converged"];

fn csv_for(record: &RunRecord) -> String {
    match record.command.as_str() {
        "bounds" => {
            let ok = record.results.iter().all(|r| !matches!(r, ResultRow::Consistency(c) if !c.consistent));
            let rows = record
                .results
                .iter()
                .filter_map(|r| match r {
                    ResultRow::Bound(b) => Some(bound_row(b, ok)),
                    _ => None,
                })
                .collect();
            write_rows(&["target", "direction", "value", "estimate", "parameters", "formula", "consistent"], rows)
        }
        "lambda" => {
            let rows = record
                .results
                .iter()
                .filter_map(|r| match r {
                    ResultRow::Curve(c) => {
                        Some(vec![c.p.to_string(), c.value.to_string(), if c.peak { "peak" } else { "curve" }.into()])
                    }
                    _ => None,
                })
                .collect();
            write_rows(&["p", "value", "row"], rows)
        }
        _ => {
            let rows = record
                .results
                .iter()
                .filter_map(|r| match r {
                    ResultRow::Beta(b) => Some(beta_row(b)),
                    _ => None,
                })
                .collect();
            write_rows(BETA_HEADER, rows)
        }
    }
}
