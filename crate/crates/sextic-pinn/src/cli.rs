//! Command-line driver. Exit codes: 0 success, 1 usage or configuration
//! error, 2 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sextic_pinn_core::loss::{collocation_grid, loss_gradient};
use sextic_pinn_core::problem::BUILTIN_NAMES;
use sextic_pinn_core::report::{build_table, check_gradient, fd_check_derivatives, fd_loss_gradient, probe_network};
use sextic_pinn_core::trainer::train_problem;
use sextic_pinn_core::{BvpProblem, CombineMode, ErrorTable, MlpParams, TrainError};

use crate::checkpoint::Checkpoint;
use crate::config::{CliConfigFile, RunConfig};
use crate::parallel::Executor;
use crate::report::{export_history, export_table, write_table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

/// Points of the reporting grid, `{0, 0.1, …, 1}` on the unit interval.
pub const TABLE_POINTS: usize = 11;
/// Largest tolerated error in `gradcheck`.
pub const GRADCHECK_TOLERANCE: f64 = 1e-5;
/// Points of the derivative check in `gradcheck`.
pub const GRADCHECK_POINTS: usize = 10;

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const HISTORY_FILE: &str = "history.csv";
pub const TABLE_FILE: &str = "table.csv";

#[derive(Debug, Parser)]
#[command(name = "sextic-pinn", version, about = "Neural-network solver for sixth-order boundary value problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a network and write model.ckpt, history.csv and table.csv.
    Train(TrainArgs),
    /// Tabulate a checkpoint against the exact solution.
    Evaluate(EvaluateArgs),
    /// Check derivatives and loss gradient against finite differences.
    Gradcheck(GradcheckArgs),
    /// Print the builtin problem names.
    ListProblems,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// TOML file with run settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// Comma-separated hidden layer widths.
    #[arg(long, value_delimiter = ',')]
    hidden_sizes: Option<Vec<usize>>,
    #[arg(long)]
    activation: Option<String>,
    #[arg(long)]
    init_scheme: Option<String>,
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    combine_mode: Option<String>,
    #[arg(long)]
    stop_epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl TrainArgs {
    fn flags(&self) -> CliConfigFile {
        CliConfigFile {
            problem: self.problem.clone(),
            hidden_sizes: self.hidden_sizes.clone(),
            activation: self.activation.clone(),
            init_scheme: self.init_scheme.clone(),
            optimizer: self.optimizer.clone(),
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            grid_points: self.grid_points,
            combine_mode: self.combine_mode.clone(),
            stop_epsilon: self.stop_epsilon,
            seed: self.seed,
            output_dir: self.output_dir.clone(),
        }
    }
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Defaults to the problem recorded in the checkpoint.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, default_value_t = TABLE_POINTS)]
    grid_size: usize,
    /// Also write the table as CSV here.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "example1")]
    problem: String,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ =
                if e.use_stderr() { err.write_all(rendered.as_bytes()) } else { out.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(&a, out),
        Command::Evaluate(a) => cmd_evaluate(&a, out),
        Command::Gradcheck(a) => BvpProblem::builtin(&a.problem)
            .map_err(|e| Failure::usage(e.to_string()))
            .and_then(|problem| cmd_gradcheck(a.seed, &problem, &loss_gradient, out)),
        Command::ListProblems => {
            for name in BUILTIN_NAMES.split(", ") {
                let _ = writeln!(out, "{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERICAL, message: message.into() }
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

fn table_grid(problem: &BvpProblem, n: usize) -> Result<Vec<f64>, Failure> {
    let (a, b) = problem.domain();
    collocation_grid(a, b, n).map_err(|e| Failure::usage(e.to_string()))
}

fn write_outputs(
    run: &RunConfig,
    problem: &BvpProblem,
    params: &MlpParams,
    history: &[sextic_pinn_core::TrainRecord],
) -> Result<Option<ErrorTable>, Failure> {
    let dir = &run.output_dir;
    fs::create_dir_all(dir).map_err(|e| crate::Error::Io { path: dir.clone(), source: e })?;
    Checkpoint::new(Some(problem.name()), run.train.network_config(), params.clone())
        .save(&dir.join(CHECKPOINT_FILE))?;
    export_history(history, &dir.join(HISTORY_FILE))?;
    if !problem.has_exact() {
        return Ok(None);
    }
    let table =
        build_table(params, problem, &table_grid(problem, TABLE_POINTS)?).map_err(|e| Failure::usage(e.to_string()))?;
    export_table(&table, &dir.join(TABLE_FILE))?;
    Ok(Some(table))
}

fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let file = match &args.config {
        Some(path) => CliConfigFile::load(path)?,
        None => CliConfigFile::default(),
    };
    let run = file.overlay(args.flags()).resolve().map_err(Failure::usage)?;
    let problem = BvpProblem::builtin(&run.train.problem_name).map_err(|e| Failure::usage(e.to_string()))?;
    let executor = Executor::from_env().map_err(Failure::usage)?;
    writeln!(out, "{run}")?;

    match train_problem(&run.train, &problem, &executor) {
        Ok(outcome) => {
            let table = write_outputs(&run, &problem, &outcome.params, &outcome.history)?;
            let l = &outcome.final_loss;
            writeln!(out, "epochs_run = {}", outcome.epochs_run)?;
            writeln!(out, "interior_loss = {:e}", l.interior)?;
            writeln!(out, "boundary_loss = {:e}", l.boundary)?;
            writeln!(out, "total_loss = {:e}", l.total)?;
            if let Some(t) = table {
                writeln!(out, "max_abs_error = {:e}", t.max_abs_error)?;
            }
            Ok(())
        }
        Err(TrainError::Config(e)) => Err(Failure::usage(e.to_string())),
        Err(TrainError::NonFinite { epoch, last_good, history }) => {
            write_outputs(&run, &problem, &last_good, &history)?;
            Err(Failure::numerical(format!(
                "training diverged at epoch {epoch}; last good parameters saved to {}",
                run.output_dir.join(CHECKPOINT_FILE).display()
            )))
        }
    }
}

fn cmd_evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let ck = Checkpoint::load(&args.checkpoint)?;
    let name = match args.problem.as_deref().or(ck.problem.as_deref()) {
        Some(n) => n.to_owned(),
        None => return Err(Failure::usage("checkpoint names no problem; pass --problem")),
    };
    let problem = BvpProblem::builtin(&name).map_err(|e| Failure::usage(e.to_string()))?;
    let table = build_table(&ck.params, &problem, &table_grid(&problem, args.grid_size)?)
        .map_err(|e| Failure::usage(e.to_string()))?;
    write_table(&table, &mut *out).map_err(|e| Failure::usage(e.to_string()))?;
    writeln!(out, "max_abs_error = {:e}", table.max_abs_error)?;
    if let Some(path) = &args.output {
        export_table(&table, Path::new(path))?;
    }
    Ok(())
}

/// Analytic gradient under test, with the signature of [`loss_gradient`].
pub type GradientFn = dyn Fn(&MlpParams, &BvpProblem, &[f64], CombineMode) -> sextic_pinn_core::Result<Vec<f64>>;

/// Worst errors found by [`gradcheck_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct GradcheckReport {
    /// Entry `k − 1` belongs to derivative order `k`.
    pub derivative_errors: Vec<f64>,
    pub gradient_errors: Vec<(CombineMode, f64)>,
}

impl GradcheckReport {
    pub fn worst(&self) -> f64 {
        self.derivative_errors.iter().chain(self.gradient_errors.iter().map(|(_, e)| e)).fold(0.0, |a, &b| a.max(b))
    }

    pub fn passes(&self) -> bool {
        let worst = self.worst();
        worst.is_finite() && worst <= GRADCHECK_TOLERANCE
    }
}

/// Derivative orders 1–6 on ten points of the domain and the loss gradient in
/// both combine modes, all on the probe network for `seed`.
pub fn gradcheck_report(
    seed: u64,
    problem: &BvpProblem,
    gradient: &GradientFn,
) -> sextic_pinn_core::Result<GradcheckReport> {
    let params = probe_network(seed)?;
    let (a, b) = problem.domain();
    let xs = collocation_grid(a, b, GRADCHECK_POINTS)?;
    let derivative_errors = fd_check_derivatives(&params, &xs, 6)?;
    let points = collocation_grid(a, b, sextic_pinn_core::TrainConfig::default().grid_points)?;
    let mut gradient_errors = Vec::new();
    for mode in [CombineMode::Sum, CombineMode::SumOfSquares] {
        let analytic = gradient(&params, problem, &points, mode)?;
        let numeric = fd_loss_gradient(&params, problem, &points, mode)?;
        if analytic.len() != numeric.len() {
            return Err(sextic_pinn_core::Error::LengthMismatch { expected: numeric.len(), actual: analytic.len() });
        }
        gradient_errors.push((mode, check_gradient(analytic, numeric).worst_relative_error));
    }
    Ok(GradcheckReport { derivative_errors, gradient_errors })
}

/// Runs the check and prints it; the injectable gradient allows negative
/// controls.
fn cmd_gradcheck(seed: u64, problem: &BvpProblem, gradient: &GradientFn, out: &mut dyn Write) -> Result<(), Failure> {
    let report = gradcheck_report(seed, problem, gradient).map_err(|e| Failure::numerical(e.to_string()))?;
    writeln!(out, "problem = {}, seed = {seed}", problem.name())?;
    for (i, e) in report.derivative_errors.iter().enumerate() {
        writeln!(out, "derivative order {} worst relative error = {e:e}", i + 1)?;
    }
    for (mode, e) in &report.gradient_errors {
        writeln!(out, "loss gradient ({}) worst relative error = {e:e}", mode.name())?;
    }
    if report.passes() {
        writeln!(out, "ok")?;
        Ok(())
    } else {
        Err(Failure::numerical(format!("worst error {:e} exceeds {GRADCHECK_TOLERANCE:e}", report.worst())))
    }
}

/// Like [`run`]'s `gradcheck` command but with a caller-supplied gradient.
pub fn run_gradcheck_with(
    seed: u64,
    problem: &str,
    gradient: &GradientFn,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let result = BvpProblem::builtin(problem)
        .map_err(|e| Failure::usage(e.to_string()))
        .and_then(|p| cmd_gradcheck(seed, &p, gradient, out));
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
