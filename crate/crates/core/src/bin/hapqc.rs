use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hapqc::cli::{self, AvghamKind, Outcome};
use hapqc::config::{OutputFormat, RunConfig};
use hapqc::Error;

#[derive(Parser)]
#[command(
    name = "hapqc",
    version,
    about = "Plane-qubit spin simulation and device planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Report directory; overrides output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report formats; overrides output.format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Reserved: no command uses randomness yet.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sequence {
    Lg,
    Mrev8,
    Recouple,
}

#[derive(Subcommand)]
enum Command {
    /// Coupling table for the configured cluster.
    Couplings(Common),
    /// Device resource plan and overlap check.
    Plan(Common),
    /// Average Hamiltonian of a built-in sequence.
    Avgham {
        #[arg(value_enum)]
        sequence: Sequence,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the sequence file named by simulation.sequence.
    Simulate(Common),
    /// CNOT synthesis and fidelities between two planes.
    Gate {
        /// Control plane; defaults to simulation.plane_a.
        #[arg(long)]
        plane_a: Option<usize>,
        /// Target plane; defaults to simulation.plane_b.
        #[arg(long)]
        plane_b: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

fn write_reports(dir: &Path, outcome: &Outcome) -> Result<(), Error> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    for (name, body) in &outcome.files {
        let path = dir.join(name);
        std::fs::write(&path, body)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

type Job = Box<dyn FnOnce(&RunConfig, OutputFormat) -> Result<Outcome, Error>>;

fn run(command: Command) -> Result<Outcome, Error> {
    let (common, job): (Common, Job) = match command {
        Command::Couplings(c) => (c, Box::new(cli::cmd_couplings)),
        Command::Plan(c) => (c, Box::new(cli::cmd_plan)),
        Command::Simulate(c) => (c, Box::new(cli::cmd_simulate)),
        Command::Avgham { sequence, common } => {
            let kind = match sequence {
                Sequence::Lg => AvghamKind::Lg,
                Sequence::Mrev8 => AvghamKind::Mrev8,
                Sequence::Recouple => AvghamKind::Recouple,
            };
            (
                common,
                Box::new(move |cfg, f| cli::cmd_avgham(cfg, kind, f)),
            )
        }
        Command::Gate {
            plane_a,
            plane_b,
            common,
        } => (
            common,
            Box::new(move |cfg: &RunConfig, f| {
                let a = plane_a.unwrap_or(cfg.simulation.plane_a);
                let b = plane_b.unwrap_or(cfg.simulation.plane_b);
                cli::cmd_gate(cfg, a, b, f)
            }),
        ),
    };
    let cfg = RunConfig::from_path(&common.config)?;
    if let Some(seed) = common.seed {
        log::debug!("seed {seed} ignored: no stochastic paths");
    }
    let format = match common.format {
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Json) => OutputFormat::Json,
        Some(Format::Both) => OutputFormat::Both,
        None => cfg.output.format,
    };
    let outcome = job(&cfg, format)?;
    let dir = common
        .out
        .or_else(|| cfg.output.dir.as_ref().map(|d| cfg.base_dir.join(d)));
    if let Some(dir) = dir {
        write_reports(&dir, &outcome)?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::from(outcome.exit as u8)
        }
        Err(e) => {
            eprintln!("hapqc: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
