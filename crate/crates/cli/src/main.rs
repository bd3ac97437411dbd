use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relaxnsf::harness::{self, RunConfig, StudyKind};

/// Studies for the one-dimensional relaxed Navier-Stokes-Fourier system.
#[derive(Parser)]
#[command(name = "relaxnsf", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration
    #[arg(long, short)]
    config: PathBuf,
    /// output directory, overriding `out.dir`
    #[arg(long, short, env = "RELAXNSF_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write snapshots
    Simulate(Common),
    /// Sweep tau and compare with the classical solver
    RelaxStudy(Common),
    /// Sweep the boundary-weight epsilon
    EpsStudy(Common),
    /// Grid-convergence check against a manufactured solution
    MmsVerify(Common),
    /// Check the boundary condition on random boundary states
    BcAnalyze(Common),
    /// Record entropy and energy functionals over time
    EntropyReport(Common),
}

impl Command {
    fn split(self) -> (StudyKind, Common) {
        match self {
            Command::Simulate(c) => (StudyKind::Simulate, c),
            Command::RelaxStudy(c) => (StudyKind::RelaxStudy, c),
            Command::EpsStudy(c) => (StudyKind::EpsStudy, c),
            Command::MmsVerify(c) => (StudyKind::MmsVerify, c),
            Command::BcAnalyze(c) => (StudyKind::BcAnalyze, c),
            Command::EntropyReport(c) => (StudyKind::EntropyReport, c),
        }
    }
}

fn main() -> ExitCode {
    let (kind, common) = Cli::parse().command.split();
    let result = RunConfig::load(&common.config).and_then(|cfg| harness::run(&cfg, kind, common.out));
    let code = match result {
        Ok(outcome) => {
            match &outcome.stdout {
                Some(json) => {
                    println!("{}", serde_json::to_string_pretty(json).unwrap_or_default());
                    eprint!("{}", outcome.table.summary_text());
                }
                None => print!("{}", outcome.table.summary_text()),
            }
            eprintln!("artifacts in {}", outcome.out_dir.display());
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            harness::exit_code_for(&e)
        }
    };
    ExitCode::from(code as u8)
}
