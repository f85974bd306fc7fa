use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// One-dimensional Burgers-Vlasov laboratory.
#[derive(Parser)]
#[command(name = "bvlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides, `key=value`; these beat the config file.
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write diagnostics and snapshots.
    Run(Common),
    /// Run the epsilon sweep and write the convergence tables.
    Sweep(Common),
    /// Run the acceptance suite.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run a single criterion.
        #[arg(long)]
        only: Option<u32>,
    },
    /// Summarize a run or sweep directory.
    Report { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Run(c) => bvlab_cli::cmd_run(c.config.as_deref(), &c.overrides),
        Command::Sweep(c) => bvlab_cli::cmd_sweep(c.config.as_deref(), &c.overrides),
        Command::Verify { common, only } => bvlab_cli::cmd_verify(common.config.as_deref(), &common.overrides, only),
        Command::Report { dir } => bvlab_cli::cmd_report(&dir),
    };
    ExitCode::from(code as u8)
}
