//! `equiflow` — batch experiment runner. Reads a TOML config, runs the
//! requested experiment, and writes deterministic CSV (and optional SVG)
//! artifacts.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical or I/O failure.

mod config;
mod plot;
mod runners;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, FileConfig};
use runners::{run_chain, run_estimate, run_spring, run_truss, RunError, Table};

#[derive(Parser)]
#[command(name = "equiflow", about = "Equilibria of nonlinear spring systems via lifted linear flows", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the TOML experiment configuration.
    config: PathBuf,
    /// Output directory (overrides [output] directory).
    #[arg(long = "out")]
    out: Option<PathBuf>,
    /// Also write SVG plots next to the CSVs.
    #[arg(long)]
    svg: bool,
    /// Truncation order override (overrides [method] order).
    #[arg(long)]
    p: Option<usize>,
    /// Pivot override for the pivot closure (overrides [method] pivot).
    #[arg(long)]
    pivot: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Single cubic spring: load sweep comparing both closures to the exact root.
    Spring(CommonArgs),
    /// Periodic mass chain: load sweep against nonlinear and linear oracles.
    Chain(CommonArgs),
    /// 2D truss load cases against nonlinear and linear oracles.
    Truss(CommonArgs),
    /// Lifted-system size and norm-bound table for quantum resource estimates.
    Estimate(CommonArgs),
}

fn load(args: &CommonArgs) -> Result<FileConfig, ConfigError> {
    let mut cfg = FileConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        cfg.output.directory = out.clone();
    }
    if args.svg {
        cfg.output.svg = true;
    }
    if let Some(p) = args.p {
        cfg.method.order = p;
    }
    if let Some(pivot) = args.pivot {
        cfg.method.pivot = pivot;
    }
    if cfg.method.order < 2 && cfg.model.a > 0.0 {
        return Err(ConfigError(format!(
            "--p must be at least 2 for a cubic model (got {})",
            cfg.method.order
        )));
    }
    Ok(cfg)
}

fn write_tables(cfg: &FileConfig, tables: &[Table]) -> std::io::Result<Vec<PathBuf>> {
    let dir = &cfg.output.directory;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for table in tables {
        if cfg.output.csv {
            let path = dir.join(format!("{}.csv", table.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&table.header)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
            written.push(path);
        }
        if cfg.output.svg {
            if let Some(svg) = &table.svg {
                let path = dir.join(format!("{}.svg", table.name));
                std::fs::write(&path, svg)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

fn run(args: &CommonArgs, runner: fn(&FileConfig) -> Result<Vec<Table>, RunError>) -> ExitCode {
    let cfg = match load(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let tables = match runner(&cfg) {
        Ok(tables) => tables,
        Err(RunError::Config(e)) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(3);
        }
    };
    match write_tables(&cfg, &tables) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cannot write output: {e}");
            ExitCode::from(3)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Spring(args) => run(args, run_spring),
        Command::Chain(args) => run(args, run_chain),
        Command::Truss(args) => run(args, run_truss),
        Command::Estimate(args) => run(args, run_estimate),
    }
}
