use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ilw_limits::cli::{error_failures, failure_document, output_prefix, parse_config, run, Command};
use ilw_limits::experiments::SweepKind;
use ilw_limits::Error;

#[derive(Debug, Parser)]
#[command(name = "ilw-limits", version, about = "Deep- and shallow-water limits of the intermediate long wave family")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output path prefix (overrides `output` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepArg {
    Deep,
    Shallow,
    ShallowTruncated,
    VaryingData,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Symbol table and symbol-lemma measurements.
    Symbols(Common),
    /// Brute-force resonance lower bounds.
    Resonance(Common),
    /// One evolution with diagnostics.
    Evolve(Common),
    /// A δ-sweep against the limiting equation.
    Converge {
        sweep: SweepArg,
        #[command(flatten)]
        common: Common,
    },
    /// The full invariant suite; exits nonzero on a hard failure.
    Check(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Symbols(c) => (Command::Symbols, c),
        Cmd::Resonance(c) => (Command::Resonance, c),
        Cmd::Evolve(c) => (Command::Evolve, c),
        Cmd::Converge { sweep, common } => {
            let kind = match sweep {
                SweepArg::Deep => SweepKind::Deep,
                SweepArg::Shallow => SweepKind::Shallow,
                SweepArg::ShallowTruncated => SweepKind::ShallowTruncated,
                SweepArg::VaryingData => SweepKind::DeepVaryingData,
            };
            (Command::Converge(kind), common)
        }
        Cmd::Check(c) => (Command::Check, c),
    };
    match execute(command, &common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", failure_document(Some(&command), &error_failures(&e)));
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command, common: &Common) -> Result<bool, Error> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Error::Config {
                path: "--threads".into(),
                message: "must be >= 1".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config {
                path: "--threads".into(),
                message: e.to_string(),
            })?;
    }
    let text = std::fs::read_to_string(&common.config).map_err(|e| Error::Config {
        path: String::new(),
        message: format!("cannot read {}: {e}", common.config.display()),
    })?;
    let config = parse_config(&text)?;
    let prefix = output_prefix(&command, &config, common.out.as_deref());
    let outcome = run(command, &config, &prefix)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    if !outcome.success() {
        eprintln!("{}", failure_document(Some(&command), &outcome.failures));
    }
    Ok(outcome.success())
}
