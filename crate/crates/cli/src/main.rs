use std::path::PathBuf;
use std::process::ExitCode;

use banach_rep_cli::config::{RunConfig, Settings, Task};
use banach_rep_cli::run;
use clap::{Args, Parser, Subcommand};

/// Regularized regression with kernel, sparse-dictionary and spline solvers.
#[derive(Parser)]
#[command(name = "banach-rep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel ridge regression with a single kernel.
    FitKernel(FitArgs),
    /// Several kernels under a weighted-l2 or l1 outer norm.
    FitMultikernel(FitArgs),
    /// Sparse recovery over a union of transforms.
    FitDict(FitArgs),
    /// Grid spline with a total-variation or quadratic penalty.
    FitSpline(FitArgs),
    /// Sparse plus smooth two-component model.
    FitMixed(FitArgs),
    /// Norms, dual norms and duality maps of the rows of a CSV file.
    Dual(FitArgs),
    /// Randomized invariant suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Input CSV (header row required).
    input: Option<PathBuf>,
    /// Output JSON document.
    output: Option<PathBuf>,
    /// TOML file with settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Measurement matrix CSV for fit-dict and fit-mixed.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    /// Per-kernel weights of the weighted-l2 outer norm.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// gaussian:W, laplacian:S, polynomial:D:C or linear.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, value_delimiter = ',')]
    kernels: Option<Vec<String>>,
    /// Outer norm of fit-multikernel: l2 or l1.
    #[arg(long)]
    outer: Option<String>,
    /// Spline operator: D or D2.
    #[arg(long)]
    operator: Option<String>,
    /// Spline penalty: tv, quadratic or hilbert.
    #[arg(long)]
    penalty: Option<String>,
    /// Spline grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// identity, diff or file:PATH, comma separated.
    #[arg(long, value_delimiter = ',')]
    transforms: Option<Vec<String>>,
    /// Norm for the dual task, e.g. lp:3 or composite(l1; 2 l2; 2 lp:3).
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Also write predictions on a regular grid to this CSV.
    #[arg(long)]
    grid_output: Option<PathBuf>,
    /// Leave timing_ms empty so repeated runs give identical files.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name or all.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Optional JSON report.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

impl FitArgs {
    fn into_settings(self) -> (Option<PathBuf>, Settings) {
        let settings = Settings {
            input: self.input,
            output: self.output,
            matrix: self.matrix,
            lambda: self.lambda,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            lambdas: self.lambdas,
            kernel: self.kernel,
            kernels: self.kernels,
            outer: self.outer,
            operator: self.operator,
            penalty: self.penalty,
            grid: self.grid,
            transforms: self.transforms,
            norm: self.norm,
            seed: self.seed,
            max_iter: self.max_iter,
            tol: self.tol,
            grid_output: self.grid_output,
            no_timing: self.no_timing.then_some(true),
            ..Settings::default()
        };
        (self.config, settings)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, config, flags) = match cli.command {
        Command::FitKernel(a) => with_task(Task::FitKernel, a),
        Command::FitMultikernel(a) => with_task(Task::FitMultikernel, a),
        Command::FitDict(a) => with_task(Task::FitDict, a),
        Command::FitSpline(a) => with_task(Task::FitSpline, a),
        Command::FitMixed(a) => with_task(Task::FitMixed, a),
        Command::Dual(a) => with_task(Task::Dual, a),
        Command::Verify(a) => {
            let flags = Settings {
                suite: a.suite,
                trials: a.trials,
                seed: a.seed,
                output: a.output,
                ..Settings::default()
            };
            (Task::Verify, a.config, flags)
        }
    };
    let result = RunConfig::resolve(task, config.as_deref(), flags).and_then(|cfg| run(&cfg));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn with_task(task: Task, args: FitArgs) -> (Task, Option<PathBuf>, Settings) {
    let (config, settings) = args.into_settings();
    (task, config, settings)
}
