use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use accel_kit::bench::{
    compare_methods, rfactor_sweep, run_experiment, single_method, BenchError, ExperimentConfig,
    CSV_HEADER,
};
use accel_kit::krylov::is_symmetric;
use accel_kit::problems::read_matrix_market_file;

#[derive(Debug, Parser)]
#[command(
    name = "accel-kit",
    version,
    about = "Anderson / CROP fixed-point acceleration experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress the summary printed to stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides `output` in the config. Defaults to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Seed for random starting points; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single method and write its residual trace.
    Solve(RunArgs),
    /// Run several methods on one problem and rank them.
    Compare(RunArgs),
    /// Sample starting directions of a 2-D problem and record r-factors.
    RfactorSweep(RunArgs),
    /// Print the header information of a Matrix Market file.
    MmInfo { path: PathBuf },
}

fn load(args: &RunArgs) -> Result<(ExperimentConfig, Option<PathBuf>), BenchError> {
    let config = ExperimentConfig::from_file(&args.config)?;
    let output = args.output.clone().or_else(|| config.output.clone());
    Ok((config, output))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), BenchError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Writes a header-only CSV and reports the empty method list.
fn reject_empty(output: Option<&Path>) -> Result<ExitCode, BenchError> {
    emit(output, &format!("{CSV_HEADER}\n"))?;
    Err(BenchError::Config("methods list is empty".into()))
}

fn run(cli: &Cli) -> Result<ExitCode, BenchError> {
    let say = |line: &str| {
        if !cli.quiet {
            eprintln!("{line}");
        }
    };
    match &cli.command {
        Command::Solve(args) => {
            let (config, output) = load(args)?;
            if config.methods.is_empty() {
                return reject_empty(output.as_deref());
            }
            single_method(&config)?;
            let out = run_experiment(&config, args.seed)?;
            emit(output.as_deref(), &out.csv)?;
            say(&out.summaries[0].line());
            Ok(if out.any_converged() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Compare(args) => {
            let (config, output) = load(args)?;
            if config.methods.is_empty() {
                return reject_empty(output.as_deref());
            }
            let ranking = compare_methods(&config, args.seed)?;
            emit(output.as_deref(), &ranking.output.csv)?;
            for line in ranking.lines() {
                say(&line);
            }
            Ok(if ranking.output.any_converged() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::RfactorSweep(args) => {
            let (config, output) = load(args)?;
            let out = rfactor_sweep(&config, args.seed)?;
            emit(output.as_deref(), &out.csv)?;
            if let Some(p) = &output {
                std::fs::write(p.with_extension("gamma.csv"), &out.gamma_csv)?;
            }
            say(&format!("{} runs", out.rows.len()));
            Ok(ExitCode::SUCCESS)
        }
        Command::MmInfo { path } => {
            let m = read_matrix_market_file(path)?;
            let (rows, cols, symmetry) = (m.rows, m.cols, m.symmetry);
            let (stored, expanded) = (m.entries.len(), m.expanded_nnz());
            println!("size: {rows}x{cols}");
            println!("symmetry: {symmetry:?}");
            println!("stored entries: {stored}");
            println!("nonzeros after expansion: {expanded}");
            if rows == cols {
                let op = m.into_operator()?;
                println!("numerically symmetric: {}", is_symmetric(&op));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
