//! `grappa`: command-line front end for exact graph Kummer computations.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{run, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Oracle {
    Ode,
    ChengKatz,
    All,
}

#[derive(Debug, Parser)]
#[command(name = "grappa", version, about = "Exact harmonic analysis and Kummer maps on metrized reduction graphs")]
pub struct RunConfig {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Maximal weight. Falls back to GRAPPA_DEPTH, then 4.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// Graph arguments are file paths, or `bundled:NAME` for a shipped example.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a graph and report its stability.
    Validate { graph: PathBuf },
    /// First Betti number, total genus and Euler characteristic.
    Invariants { graph: PathBuf },
    /// The measure μ_n in the basis of gr^W_{−n} V.
    Measure {
        graph: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Kummer values j_{=1..n} at a point.
    Kummer {
        graph: PathBuf,
        /// Basepoint (defaults to the first vertex).
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        point: String,
        #[arg(long)]
        n: usize,
    },
    /// Collision census of j_{≤2} and j_{≤n} on a rational grid.
    Injectivity {
        graph: PathBuf,
        #[arg(long, default_value_t = 6)]
        denominator: u32,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Zhang's canonical measure.
    CanonicalMeasure { graph: PathBuf },
    /// The measure μ_F of an endomorphism file.
    MuF {
        graph: PathBuf,
        #[arg(long)]
        endo: PathBuf,
    },
    /// μ_Z for a graph with exactly one half-edge.
    MuZ { graph: PathBuf },
    /// Half-edge elimination or resistance reduction.
    Reduce {
        graph: PathBuf,
        #[arg(long, conflicts_with = "contract", required_unless_present = "contract")]
        half_edge: Option<String>,
        /// Comma-separated edge ids of the subgraph to contract.
        #[arg(long)]
        contract: Option<String>,
        /// Attachment vertices `w0,w1`, when they cannot be inferred.
        #[arg(long, requires = "contract")]
        ends: Option<String>,
    },
    /// Run the differential-equation and/or path oracles.
    Verify {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Oracle::All)]
        oracle: Oracle,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Basepoint for the differential-equation oracle.
        #[arg(long)]
        base: Option<String>,
    },
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(&config) {
        Ok(report) => {
            print!("{}", report.render(config.format));
            match report.status {
                Status::Ok => ExitCode::SUCCESS,
                Status::Invalid => ExitCode::from(1),
                Status::Mismatch => ExitCode::from(2),
            }
        }
        Err(e) => {
            match config.format {
                Format::Text => eprintln!("error: {e}"),
                Format::Json => println!("{}", render::error_document(&e)),
            }
            ExitCode::from(1)
        }
    }
}
