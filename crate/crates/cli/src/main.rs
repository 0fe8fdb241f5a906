use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qmetro_cli::emit::{fmt_f64, SWEEP_HEADER};
use qmetro_cli::run::{designs, qfi_sweep, VERSION};
use qmetro_cli::{emit, parse_scenario, run, CliError};
use qmetro_core::DesignKind;

#[derive(Debug, Parser)]
#[command(name = "qmetro", about = "Constrained quantum metrology experiment design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every (gamma, mode) cell and write all artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print one design per (gamma, mode) as JSON.
    Design {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        objective: Objective,
    },
    /// Print the QFI against the input angle as CSV.
    QfiSweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the tool version.
    Version,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Objective {
    Avg,
    Worst,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QMETRO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Scenario(format!("QMETRO_THREADS must be a non-negative integer, got {raw:?}")))?;
    if n > 0 {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn cmd_run(config: &Path, out: &Path) -> Result<(), CliError> {
    let scenario = parse_scenario(config)?;
    let report = run(&scenario)?;
    for w in report.warnings() {
        eprintln!("warning: {w}");
    }
    let written = emit(&report, out)?;
    eprintln!("wrote {} files to {}", written.len(), out.display());
    Ok(())
}

fn cmd_design(config: &Path, objective: Objective) -> Result<(), CliError> {
    let scenario = parse_scenario(config)?;
    let kind = match objective {
        Objective::Avg => DesignKind::AverageCase,
        Objective::Worst => DesignKind::WorstCase,
    };
    let out: Vec<_> = designs(&scenario, kind)?
        .into_iter()
        .map(|(gamma, mode, _, design)| json!({ "gamma": gamma, "mode": mode, "design": design }))
        .collect();
    println!("{}", serde_json::to_string_pretty(&out).expect("json values always serialize"));
    Ok(())
}

fn cmd_qfi_sweep(config: &Path) -> Result<(), CliError> {
    let scenario = parse_scenario(config)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let _ = writeln!(out, "gamma,{SWEEP_HEADER}");
    for &gamma in &scenario.gammas {
        let sweep = qfi_sweep(&scenario, gamma)?;
        for (b, v) in sweep.betas.iter().zip(&sweep.values) {
            let _ = writeln!(out, "{gamma},{},{}", fmt_f64(*b), fmt_f64(*v));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Run { config, out } => cmd_run(config, out),
        Command::Design { config, objective } => cmd_design(config, *objective),
        Command::QfiSweep { config } => cmd_qfi_sweep(config),
        Command::Version => {
            println!("qmetro {VERSION}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
