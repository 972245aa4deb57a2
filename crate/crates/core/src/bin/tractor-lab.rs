use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conformal_tractor::experiment::{emit_json, emit_report, run_all, suite, ConfigFile, ExperimentConfig};

#[derive(Parser)]
#[command(name = "tractor-lab", about = "Run tractor-bundle experiments and print a report")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML or JSON file listing experiments; replaces the subcommand's default list.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// RK4 steps per unit parameter.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Print only JSON records, one per line.
    #[arg(long, global = true)]
    json: bool,
    /// Record wall time in each record (breaks byte-stable output).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    CheckGroups,
    Curvature,
    Transport,
    Holonomy,
    QuadricDemo,
    AmbientCheck,
    All,
}

impl Command {
    fn group(self) -> &'static str {
        match self {
            Command::CheckGroups => "check-groups",
            Command::Curvature => "curvature",
            Command::Transport => "transport",
            Command::Holonomy => "holonomy",
            Command::QuadricDemo => "quadric-demo",
            Command::AmbientCheck => "ambient-check",
            Command::All => "all",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfgs = match &cli.config {
        Some(path) => match ConfigFile::load(path) {
            Ok(file) => file.resolved(),
            Err(e) => {
                eprintln!("tractor-lab: {e}");
                return ExitCode::from(2);
            }
        },
        None => suite(cli.command.group())
            .expect("every subcommand has a suite")
            .into_iter()
            .map(ExperimentConfig::new)
            .collect(),
    };
    for c in &mut cfgs {
        c.seed = cli.seed.or(c.seed);
        c.steps = cli.steps.or(c.steps);
    }
    let records = match run_all(&cfgs, cli.timing) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("tractor-lab: {e}");
            return ExitCode::from(2);
        }
    };
    print!("{}", if cli.json { emit_json(&records) } else { emit_report(&records) });
    if records.iter().all(|r| r.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
