//! Command-line front end for `qspan-core`: reads a TOML run configuration,
//! evaluates the requested grid and writes versioned CSV or JSON tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod hamiltonian;
pub mod table;

use std::path::Path;

use config::Loaded;
pub use error::{CliError, Result};
pub use table::{Cell, Format, Table};

/// Options shared by every command.
#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    /// Overrides the config seed; the default seed is 0.
    pub seed: Option<u64>,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
}

impl Options {
    /// Runs `f` inside a pool of the configured size. Results never depend on
    /// the pool: parallel maps are collected in input order.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match self.threads {
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
            None => f(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Asymptotics,
    Ising,
    Ed,
    Distribution,
    Rank,
}

pub fn run_command(cmd: Command, config: &Path, opts: &Options) -> Result<Vec<Table>> {
    match cmd {
        Command::Asymptotics => commands::asymptotics::run(&Loaded::read(config)?, opts),
        Command::Ising => commands::ising::run(&Loaded::read(config)?, opts),
        Command::Ed => commands::ed::run(&Loaded::read(config)?, opts),
        Command::Distribution => commands::distribution::run(&Loaded::read(config)?, opts),
        Command::Rank => commands::rank::run(&Loaded::read(config)?, opts),
    }
}

/// Runs a command and writes its tables into `out`, creating the directory.
pub fn run_to_dir(
    cmd: Command,
    config: &Path,
    out: &Path,
    format: Format,
    opts: &Options,
) -> Result<Vec<std::path::PathBuf>> {
    let tables = run_command(cmd, config, opts)?;
    std::fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    tables.iter().map(|t| t.write(out, format)).collect()
}
