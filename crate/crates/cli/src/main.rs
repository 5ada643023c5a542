use clap::Parser;
use rydfm_cli::{run, Invocation, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Rydberg RF electrometry with FM readout: simulations and analyses driven
/// by a scenario file.
#[derive(Parser)]
#[command(name = "rydfm", version)]
struct Args {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// Scenario file; all defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `[noise] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides RYDFM_OUT_DIR and `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let inv = Invocation { command: args.subcommand, config: args.config, seed: args.seed, out: args.out };
    match run(&inv) {
        Ok(m) => {
            for f in &m.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rydfm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
