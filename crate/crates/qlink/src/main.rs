use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qlink::{load_config, render, run_experiment, write_atomic, CliError, ExperimentKind, Format, Metadata};

#[derive(Parser)]
#[command(name = "qlink", version, about = "Zero-error coding experiments over a dual-rail spin-chain link")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify classical and quantum zero-error codes.
    CodeBuild(Common),
    /// Run the dual-rail protocol and report branch statistics.
    Protocol(Common),
    /// Spectral analysis of the receiver map.
    Mixing(Common),
    /// Protocol metrics over a parameter grid.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file (stdout if absent and not set in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn execute(kind: ExperimentKind, args: Common) -> Result<Vec<String>, CliError> {
    let started = Instant::now();
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(format) = args.format {
        cfg.output.format = format;
    }
    let cfg = cfg.resolve(kind)?;
    let outcome = run_experiment(&cfg, args.workers)?;
    let metadata = Metadata {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        elapsed_seconds: started.elapsed().as_secs_f64(),
        workers: args.workers,
    };
    let text = render(&outcome.records, &metadata, cfg.output.format)?;
    match args.out.or_else(|| cfg.output.path.as_ref().map(PathBuf::from)) {
        Some(path) => write_atomic(&path, &text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(outcome.violations)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::CodeBuild(a) => (ExperimentKind::CodeBuild, a),
        Command::Protocol(a) => (ExperimentKind::Protocol, a),
        Command::Mixing(a) => (ExperimentKind::Mixing, a),
        Command::Sweep(a) => (ExperimentKind::Sweep, a),
    };
    let result =
        execute(kind, args).and_then(
            |violations| {
                if violations.is_empty() {
                    Ok(())
                } else {
                    Err(CliError::Invariant(violations))
                }
            },
        );
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qlink: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
