//! Command-line front end for `k3lattice`: record ingestion, reports and tables.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use k3lattice::groups::DEFAULT_H3_CAP;
use k3lattice::AdeConfig;

pub mod commands;
pub mod selfcheck;
pub mod table;

use commands::{CliError, DiscSource, Outcome};

/// Default seed for randomized checks.
pub const DEFAULT_SEED: u64 = 20_070_611;

#[derive(Debug, Parser)]
#[command(name = "k3lat", version, about = "Lattice invariants of symplectic group actions on K3 surfaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Emit JSON instead of text tables.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the discriminant chain on action records.
    Invariants {
        /// Record file (JSON array); defaults to the bundled records.
        #[arg(long)]
        records: Option<PathBuf>,
        /// Only the record with this name.
        #[arg(long)]
        name: Option<String>,
    },
    /// Check Xiao's formula, both rank formulas, the fixed-point profile and table disjointness.
    Verify {
        /// Record file (JSON array); defaults to the bundled records.
        #[arg(long)]
        records: Option<PathBuf>,
        /// Random cases per self-check.
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
    /// Count classes of even positive-definite lattices of rank <= 3 in a genus.
    Genus {
        /// Lattice rank, 1 to 3.
        #[arg(long)]
        rank: usize,
        /// Determinant of the Gram matrix.
        #[arg(long)]
        det: u64,
        /// Target form is minus the discriminant form of this ADE configuration.
        #[arg(long, conflicts_with = "disc_from_gram")]
        disc_from_config: Option<AdeConfig>,
        /// Target form is minus the discriminant form of the Gram matrix in this JSON file.
        #[arg(long)]
        disc_from_gram: Option<PathBuf>,
    },
    /// Compute H^3(G, Z) of a small group from its bar resolution.
    H3 {
        /// Group file with `cayley` or `perm_generators`.
        group: PathBuf,
        /// Largest group order accepted.
        #[arg(long, default_value_t = DEFAULT_H3_CAP)]
        cap: usize,
    },
    /// Print the torus-quotient and perfect-group singularity tables.
    Tables,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Invariants { records, name } => {
            let recs = commands::load_records(records.as_deref())?;
            commands::cmd_invariants(&recs, name.as_deref())
        }
        Command::Verify { records, cases } => {
            let recs = commands::load_records(records.as_deref())?;
            commands::cmd_verify(&recs, cli.global.seed, *cases)
        }
        Command::Genus { rank, det, disc_from_config, disc_from_gram } => {
            let source = match (disc_from_config, disc_from_gram) {
                (Some(c), _) => DiscSource::Config(c.clone()),
                (None, Some(p)) => DiscSource::Gram(p.clone()),
                (None, None) => DiscSource::None,
            };
            commands::cmd_genus(*rank, *det, source)
        }
        Command::H3 { group, cap } => commands::cmd_h3(group, *cap),
        Command::Tables => Ok(commands::cmd_tables()),
    }
}
