use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use toruspot::commands::{run, RunContext};
use toruspot::config::{Command, ExperimentConfig, VerifyParams};
use toruspot::{AppError, AppResult};

#[derive(Parser)]
#[command(name = "toruspot", version, about = "Transport distances, Riesz potentials and particle flows on the flat torus")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Wasserstein-infinity distance of atomic instances or oracle fixtures.
    Dinfty(Flags),
    /// 1D discrepancy and the transport enclosure of a density.
    Discrepancy(Flags),
    /// Periodized Riesz potential of a density and its norms.
    Potential(Flags),
    /// Interaction energies, perturbed-coefficient scans and stability tables.
    Energy(Flags),
    /// Scaling sweeps with fitted log-log slopes.
    Scaling(Flags),
    /// Particle gradient flow panels.
    Flow(Flags),
    /// Invariant suites and the set-constant calibration.
    Verify(Flags),
    /// Brute-force bottleneck fixtures.
    Oracle(Flags),
}

#[derive(clap::Args)]
struct Flags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Full-size runs (1000 flow particles).
    #[arg(long)]
    full: bool,
}

impl Sub {
    fn parts(self) -> (&'static str, Flags) {
        match self {
            Sub::Dinfty(f) => ("dinfty", f),
            Sub::Discrepancy(f) => ("discrepancy", f),
            Sub::Potential(f) => ("potential", f),
            Sub::Energy(f) => ("energy", f),
            Sub::Scaling(f) => ("scaling", f),
            Sub::Flow(f) => ("flow", f),
            Sub::Verify(f) => ("verify", f),
            Sub::Oracle(f) => ("oracle", f),
        }
    }
}

fn execute(sub: Sub) -> AppResult<()> {
    let (name, flags) = sub.parts();
    let (mut cfg, base) = match flags.config {
        Some(path) => {
                        let base = path.parent().map(PathBuf::from).unwrap_or_default();
            (ExperimentConfig::load(&path)?, base)
        }
        // verify is the only command with usable defaults
        None if name == "verify" => {
            (ExperimentConfig { command: Command::Verify(VerifyParams::default()), seed: None }, PathBuf::from("."))
        }
        None => return Err(AppError::Config(format!("{name} needs --config"))),
    };
    if cfg.command.name() != name {
        return Err(AppError::Config(format!("config describes `{}`, not `{name}`", cfg.command.name())));
    }
    let seed = match flags.seed.or(cfg.seed) {
        Some(s) => s,
        None => {
            let s = rand::random::<u64>();
            eprintln!("no seed given; using generated seed {s}");
            s
        }
    };
    let ctx = RunContext::new(&mut cfg, flags.out, base, seed, flags.full);
    let doc = run(&cfg, &ctx)?;
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
