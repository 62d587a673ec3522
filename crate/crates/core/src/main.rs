//! Command-line entry point.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use tsp_mcts::cli::{
    cmd_eval, cmd_generate, cmd_plot, cmd_solve, cmd_train, EvalMethod, GenKind, StartSpec,
};

#[derive(Parser)]
#[command(
    name = "tsp-mcts",
    about = "Self-learning TSP solver: MCTS guided by a graph-embedding value network",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate instance files (native format) into a directory.
    Generate {
        /// Instance kind: random | clustered.
        #[arg(long)]
        kind: GenKind,
        /// Cities per instance.
        #[arg(long)]
        n: usize,
        /// Number of instances.
        #[arg(long)]
        count: usize,
        /// Master seed; per-file seeds are derived from it.
        #[arg(long)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train a value network on a directory of instances.
    Train {
        /// Optional key=value config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory of training instances (.inst or .tsp).
        #[arg(long)]
        dataset_dir: PathBuf,
        /// Output checkpoint path.
        #[arg(long)]
        out: PathBuf,
        /// Training seed.
        #[arg(long)]
        seed: u64,
        /// Training log path (default: checkpoint path with .log).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Solve one instance with a trained checkpoint.
    Solve {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        /// Start cities: all | one | comma-separated indices.
        #[arg(long, default_value = "one")]
        starts: StartSpec,
        /// Playouts per move (default 400).
        #[arg(long)]
        playouts: Option<usize>,
        /// Tour output path (default: instance path with .tour).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional per-move trace log.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Evaluate methods over an instance directory and write a report.
    Eval {
        /// Checkpoint (required when methods include mcts).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        instance_dir: PathBuf,
        /// Comma-separated: mcts,held_karp,brute_force,nearest_neighbor,two_opt.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<EvalMethod>,
        /// Report output path.
        #[arg(long)]
        out: PathBuf,
        /// Playouts per move for the mcts method.
        #[arg(long)]
        playouts: Option<usize>,
    },
    /// Render an instance and tour to SVG.
    Plot {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        tour: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate {
            kind,
            n,
            count,
            seed,
            out_dir,
        } => {
            let paths = cmd_generate(kind, n, count, seed, &out_dir)?;
            println!("wrote {} instances to {}", paths.len(), out_dir.display());
        }
        Command::Train {
            config,
            dataset_dir,
            out,
            seed,
            log,
        } => cmd_train(config.as_deref(), &dataset_dir, &out, seed, log.as_deref())?,
        Command::Solve {
            checkpoint,
            instance,
            starts,
            playouts,
            out,
            trace,
        } => {
            cmd_solve(
                &checkpoint,
                &instance,
                &starts,
                playouts,
                out.as_deref(),
                trace.as_deref(),
            )?;
        }
        Command::Eval {
            checkpoint,
            instance_dir,
            methods,
            out,
            playouts,
        } => cmd_eval(
            checkpoint.as_deref(),
            &instance_dir,
            &methods,
            &out,
            playouts,
        )?,
        Command::Plot {
            instance,
            tour,
            out,
        } => cmd_plot(&instance, &tour, &out)?,
    }
    Ok(())
}
