use std::process::ExitCode;

use clap::{Parser, Subcommand};
use collapse_lab_cli::config::{ConfigLayer, ExperimentConfig};
use collapse_lab_cli::error::CliError;
use collapse_lab_cli::figure::{run_figure, FigureKind, Mode};
use collapse_lab_cli::{run_single, selftest, thread_count};

#[derive(Parser)]
#[command(name = "collapse-lab", version, about = "Risk of ridge and min-norm interpolation trained on mixed real/synthetic labels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Limiting risk along a w, lambda or t grid.
    Theory(#[command(flatten)] ConfigLayer),
    /// Replicated finite-sample runs beside plug-in theory.
    Simulate(#[command(flatten)] ConfigLayer),
    /// Optimal mixing weight over a lambda grid.
    OptimalW(#[command(flatten)] ConfigLayer),
    /// Data for a set of figure panels.
    Figure {
        #[arg(value_enum)]
        kind: FigureKind,
        #[command(flatten)]
        layer: ConfigLayer,
    },
    /// Quick closed-form checks.
    Selftest,
}

fn configure_threads(layer: &ConfigLayer) -> Result<(), CliError> {
    let env = std::env::var("COLLAPSE_LAB_THREADS").ok();
    if let Some(n) = thread_count(layer.threads, env.as_deref())? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), CliError> {
    let (mode, layer) = match command {
        Command::Selftest => {
            let checks = selftest::run();
            for c in &checks {
                println!("{} {}{}", if c.passed { "ok  " } else { "FAIL" }, c.name, if c.detail.is_empty() { String::new() } else { format!(" ({})", c.detail) });
            }
            return if checks.iter().all(|c| c.passed) { Ok(()) } else { Err(CliError::Other("selftest failed".into())) };
        }
        Command::Figure { kind, layer } => {
            let layer = layer.with_file()?;
            configure_threads(&layer)?;
            let out = layer.out.clone().unwrap_or_else(|| "out".into());
            run_figure(kind, &layer, &out)?;
            println!("wrote {}", out.join("manifest.txt").display());
            return Ok(());
        }
        Command::Theory(l) => (Mode::Theory, l),
        Command::Simulate(l) => (Mode::Simulate, l),
        Command::OptimalW(l) => (Mode::OptimalW, l),
    };
    let layer = layer.with_file()?;
    let cfg = ExperimentConfig::resolve(&layer)?;
    configure_threads(&layer)?;
    run_single(mode, &cfg, &cfg.out)?;
    println!("wrote {}", cfg.out.join(format!("{}.csv", mode.name())).display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("collapse-lab: {e}");
            if let Some(r) = e.residual() {
                eprintln!("collapse-lab: last solver residual {r:e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
