use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qspan::{run_to_dir, Command, Format, Options};

/// Hilbert-space span of time-evolving spin-lattice states.
#[derive(Debug, Parser)]
#[command(name = "qspan", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Seed for randomised integrals (default 0, or the config's `seed`).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = Options {
        seed: args.seed,
        threads: args.threads,
    };
    match run_to_dir(args.command, &args.config, &args.out, args.format, &opts) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
