//! `btlab`: build, play, and certify BT-model knapsack lower-bound constructions.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "btlab", version, about = "BT-model lower-bound laboratory for Simple Knapsack")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GameArgs {
    /// Number of items
    #[arg(long)]
    pub n: usize,

    /// Construction slack ε as `p/q`, in (0, 1/2]
    #[arg(long)]
    pub eps: String,

    /// Knapsack capacity N as a decimal string; defaults to ⌈(1+ε)/ε⌉·n·3ⁿ
    #[arg(long)]
    pub capacity: Option<String>,

    /// Step-1 solver: largest-live, smallest-live or seeded-random
    #[arg(long, default_value = "largest-live")]
    pub solver: String,

    /// Seed for the seeded-random solver
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Play step 1 and build every completion; write the record and instances
    Construct {
        #[command(flatten)]
        game: GameArgs,
        /// Output directory (record goes to stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify indispensability, or re-check a record or instance file
    Verify {
        #[arg(long, requires = "eps")]
        n: Option<usize>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        capacity: Option<String>,
        #[arg(long, default_value = "largest-live")]
        solver: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Construction record to re-check instead of building one
        #[arg(long, conflicts_with_all = ["instance", "n"])]
        record: Option<PathBuf>,
        /// Instance file (`-` for stdin): optimum must equal the capacity, uniquely
        /// With --n/--eps it must also be one of that construction's completions
        #[arg(long, conflicts_with = "record")]
        instance: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate C(n/2, n/4) against C((2−ε)n/3, (2−ε)n/6)
    Bounds {
        /// Comma-separated item counts
        #[arg(long, default_value = "")]
        n: String,
        #[arg(long, default_value = "1/2")]
        eps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Approximation exponents, plus the width-cap ratio experiment when --n is given
    Approx {
        /// Comma-separated δ values (`p/q` or decimals)
        #[arg(long, value_delimiter = ',', default_value = "1/2")]
        deltas: Vec<String>,
        #[arg(long, requires = "eps")]
        n: Option<usize>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        capacity: Option<String>,
        #[arg(long, default_value = "largest-live")]
        solver: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Comma-separated width caps
        #[arg(long, default_value = "")]
        caps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play one game and trace the BT tree on one completion
    Play {
        #[command(flatten)]
        game: GameArgs,
        /// Indices of Q within the step-1 items (defaults to the first q_size)
        #[arg(long)]
        q: Option<String>,
        /// Width cap for the traced BT run (first value used)
        #[arg(long, default_value = "")]
        caps: String,
        /// Also write the full tree as JSON
        #[arg(long)]
        dump_tree: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Construct { game, out } => commands::construct(&game, out.as_deref()),
        Command::Verify { n, eps, capacity, solver, seed, record, instance, out } => {
            let game = n.map(|n| GameArgs { n, eps: eps.unwrap_or_default(), capacity, solver, seed });
            commands::verify(game.as_ref(), record.as_deref(), instance.as_deref(), out.as_deref())
        }
        Command::Bounds { n, eps, out } => commands::bounds(&n, &eps, out.as_deref()),
        Command::Approx { deltas, n, eps, capacity, solver, seed, caps, out } => {
            let game = n.map(|n| GameArgs { n, eps: eps.unwrap_or_default(), capacity, solver, seed });
            commands::approx(&deltas, game.as_ref(), &caps, out.as_deref())
        }
        Command::Play { game, q, caps, dump_tree, out } => {
            commands::play(&game, q.as_deref(), &caps, dump_tree, out.as_deref())
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
