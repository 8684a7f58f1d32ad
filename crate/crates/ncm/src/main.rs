use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ncm::config::{Overrides, RunConfig};
use ncm::trace::TraceFormat;
use ncm::{commands, Outcome, ERROR_EXIT};

#[derive(Parser)]
#[command(name = "ncm", version, about = "Negative-curvature line search for equality-constrained problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solve and print its certificate.
    Solve(RunArgs),
    /// Run derivative, Taylor and projection checks.
    Check(RunArgs),
    /// Run seeded restarts and print summary statistics.
    Bench(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    config: PathBuf,
    /// Trace output path (overrides `output.trace`).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Trace format, csv or jsonl (overrides `output.format`).
    #[arg(long)]
    format: Option<TraceFormat>,
    /// Seed for start points and eigensolver streams (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

type Handler = fn(&RunConfig, &mut dyn io::Write) -> ncm::Result<Outcome>;

fn run(command: Command) -> ncm::Result<Outcome> {
    let (args, cmd): (RunArgs, Handler) = match command {
        Command::Solve(a) => (a, commands::solve),
        Command::Check(a) => (a, commands::check),
        Command::Bench(a) => (a, commands::bench),
    };
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.apply(&Overrides { trace: args.trace, format: args.format, seed: args.seed });
    cmd(&cfg, &mut io::stdout().lock())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NCM_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ERROR_EXIT as u8 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ERROR_EXIT as u8)
        }
    }
}
