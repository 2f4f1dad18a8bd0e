//! Report commands behind the CLI: each turns a [`RunConfig`] into a table
//! that renders as CSV or JSON.

pub mod commands;
pub mod config;
pub mod output;

use std::str::FromStr;

pub use config::{Format, RunConfig};
pub use output::Cell;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Penalty,
    Table1,
    PeCurves,
    DimRatio,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Penalty => "penalty",
            Command::Table1 => "table1",
            Command::PeCurves => "pe-curves",
            Command::DimRatio => "dim-ratio",
            Command::Validate => "validate",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Command::Penalty, Command::Table1, Command::PeCurves, Command::DimRatio, Command::Validate]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command {s:?}")))
    }
}

/// How a command finished, beyond hard errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// At least one validation check failed.
    ValidationFailed,
    /// At least one row's solver found no root.
    NoRoot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub outcome: Outcome,
}

impl Report {
    pub fn render(&self, config: &RunConfig) -> String {
        match config.format {
            Format::Csv => output::render_csv(self),
            Format::Json => output::render_json(self, config),
        }
    }

    /// Column values by name, for callers inspecting results in code.
    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }
}

/// Runs `command` on a pool of `config.threads` workers.
pub fn run(command: Command, config: &RunConfig) -> Result<Report> {
    config.check()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", config.threads)))?;
    pool.install(|| match command {
        Command::Penalty => commands::cmd_penalty(config),
        Command::Table1 => commands::cmd_table1(config),
        Command::PeCurves => commands::cmd_pe_curves(config),
        Command::DimRatio => commands::cmd_dim_ratio(config),
        Command::Validate => commands::cmd_validate(config),
    })
}
