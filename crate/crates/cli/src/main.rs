use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cayley_entropy::Error;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "cayley-entropy", version, about = "Entropy of tree-shifts and neural networks on Cayley trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Markov tree-shifts of finite type.
    #[command(subcommand)]
    Tsft(TsftCommand),
    /// Nearest-neighbor neural networks on Cayley trees.
    #[command(subcommand)]
    Ctnn(CtnnCommand),
}

#[derive(Subcommand, Debug)]
enum TsftCommand {
    /// Exact entropy via reduced recursive systems.
    Entropy {
        file: PathBuf,
        #[command(flatten)]
        cap: CapArg,
    },
    /// Block counts at level n.
    Blocks {
        file: PathBuf,
        #[arg(short = 'n', value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_enum)]
        mode: Option<BlockMode>,
        /// Shorthand for `--mode exact`.
        #[arg(long, conflicts_with_all = ["mode", "log", "enumerate"])]
        exact: bool,
        /// Shorthand for `--mode log`.
        #[arg(long, conflicts_with_all = ["mode", "enumerate"])]
        log: bool,
        /// Shorthand for `--mode enumerate`.
        #[arg(long, conflicts_with = "mode")]
        enumerate: bool,
        #[command(flatten)]
        cap: CapArg,
    },
    /// All entropy values of tree-shifts with d children over k symbols.
    Spectrum {
        #[arg(short = 'd', value_parser = clap::value_parser!(u64).range(1..))]
        d: u64,
        #[arg(short = 'k', value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[command(flatten)]
        cap: CapArg,
    },
}

#[derive(Subcommand, Debug)]
enum CtnnCommand {
    /// Admissible local patterns of a template.
    Patterns { template: PathBuf },
    /// Entropy and region code of a template.
    Entropy { template: PathBuf },
    /// Distance to the critical curve, with a sampling check.
    Critical {
        template: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Radius of the sampled disc.
        #[arg(long, default_value_t = 0.05)]
        radius: f64,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Find a template producing a given basic set.
    Realize { basic_set: PathBuf },
    /// Entropy over a grid of (a, z).
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(short = 'o')]
        output: Option<PathBuf>,
        /// Criticality tolerance (overrides the config).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check a finite pattern tree against a template.
    VerifyMosaic { template: PathBuf, tree: PathBuf },
}

#[derive(Args, Debug, Clone, Copy)]
struct CapArg {
    /// Enumeration cap (default from CAYLEY_ENTROPY_CAP).
    #[arg(long)]
    cap: Option<u128>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum BlockMode {
    Exact,
    Log,
    Enumerate,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Svg,
    Text,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Parse(_) | Error::InvalidInput(_) | Error::Io(_)) => 2,
        Some(Error::CapExceeded { .. } | Error::DigitBudget { .. }) => 3,
        Some(Error::BoundaryParameter(_)) => 4,
        Some(Error::InternalInconsistency(_)) => 5,
        Some(Error::NumericalFailure(_)) | None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
