//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{parse_seeds, ExperimentConfig, Setting};
use super::{build_problem, emit_plot_data, exit_code, resolve_batch_size, resolve_sigma_sq, run_experiment, PlotMode};
use crate::data::read_run_record;
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "ssag", version, about = "Stochastic smoothing accelerated gradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every seed of an experiment and write records and a summary.
    Solve(RunArgs),
    /// Like `solve`, but deterministic: no timing columns, no time caps.
    Bench(RunArgs),
    /// Run the batch-size pilots and print the chosen batch size.
    SelectBatch(RunArgs),
    /// Estimate the stochastic-gradient variance and print it.
    EstimateSigma(RunArgs),
    /// Average run records into a plot-ready CSV.
    PlotData(PlotArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Run a single seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Half-open seed range `A..B` or a comma list.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CPU-time budget per run in seconds.
    #[arg(long)]
    budget_time: Option<f64>,
    /// SFO budget per run.
    #[arg(long)]
    budget_sfo: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Record files or directories containing them.
    #[arg(long, required = true, num_args = 1..)]
    records: Vec<PathBuf>,
    /// `obj_vs_time`, `obj_vs_sfo` or `acc_vs_time`.
    #[arg(long)]
    mode: String,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        c.seeds = vec![s];
    }
    if let Some(s) = &args.seeds {
        c.seeds = parse_seeds(s).map_err(|e| Error::Config(format!("--seeds: {e}")))?;
    }
    if let Some(o) = &args.out {
        c.out = o.clone();
    }
    if let Some(t) = args.budget_time {
        c.max_time = Some(t);
    }
    if let Some(s) = args.budget_sfo {
        c.max_sfo = Setting::Value(s);
    }
    if let Some(e) = args.epsilon {
        c.epsilon = e;
    }
    c.validate()?;
    Ok(c)
}

fn collect_records(paths: &[PathBuf]) -> Result<Vec<crate::solver::RunRecord>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::Data(format!("cannot list {}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            entries.sort();
            files.extend(entries);
        } else if p.exists() {
            files.push(p.clone());
        } else {
            return Err(Error::Data(format!("no such record {}", p.display())));
        }
    }
    files.iter().map(read_run_record).collect()
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(a) => {
            let report = run_experiment(&load(&a)?)?;
            print!("{}", report.summary.to_csv());
        }
        Command::Bench(a) => {
            let mut c = load(&a)?;
            c.deterministic = true;
            c.validate()?;
            let report = run_experiment(&c)?;
            print!("{}", report.summary.to_csv());
        }
        Command::SelectBatch(a) => {
            let c = load(&a)?;
            let p = build_problem(&c)?;
            println!("{}", resolve_batch_size(&c, p.as_ref())?);
        }
        Command::EstimateSigma(a) => {
            let c = load(&a)?;
            let p = build_problem(&c)?;
            println!("{:?}", resolve_sigma_sq(&c, p.as_ref())?);
        }
        Command::PlotData(a) => {
            let mode: PlotMode = a.mode.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
            let records = collect_records(&a.records)?;
            write_or_print(a.out.as_deref(), &emit_plot_data(&records, mode)?)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
