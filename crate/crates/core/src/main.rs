use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fwexplore::games::game_from_file;
use fwexplore::harness::{
    cli_eval, cli_reproduce_experiment, cli_run, read_strategy, run_sweep, GridSpec,
    ReproduceOptions, RunConfig,
};

/// Frank-Wolfe learning with exploration for potential, Markov, and
/// congestion games.
#[derive(Parser)]
#[command(name = "fwexplore", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one learning run from a JSON config.
    Run {
        /// Run configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: config's `out`, else `.`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the two-state facility experiment: FW with exploration vs
    /// projected SGD over several seeds.
    ReproduceExperiment {
        /// Number of seeds per algorithm.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Read "stops with probability 0.99" literally instead of as a
        /// continuation probability.
        #[arg(long)]
        literal_stopping: bool,
    },
    /// Run a grid of learning runs on random potential games.
    Sweep {
        /// Grid specification file.
        #[arg(long)]
        grid: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Parallel jobs (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Evaluate a stored strategy: Nash gap, FW gap, expected costs.
    Eval {
        /// Game definition file.
        #[arg(long)]
        game: PathBuf,
        /// Strategy file (as written by `run`).
        #[arg(long)]
        strategy: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, seed, out } => run_command(&config, seed, out),
        Command::ReproduceExperiment {
            seeds,
            out,
            literal_stopping,
        } => {
            let options = ReproduceOptions {
                seeds,
                literal_stopping,
                ..ReproduceOptions::default()
            };
            cli_reproduce_experiment(&options, &out).map(|_| 0)
        }
        Command::Sweep { grid, out, jobs } => sweep_command(&grid, &out, jobs),
        Command::Eval { game, strategy } => eval_command(&game, &strategy),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run_command(
    config_path: &Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> fwexplore::Result<u8> {
    let mut config = RunConfig::from_file(config_path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let base_dir = config_path
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    let out_dir = out
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    cli_run(&config, &base_dir, &out_dir)?;
    Ok(0)
}

fn sweep_command(
    grid_path: &Path,
    out: &Path,
    jobs: Option<usize>,
) -> fwexplore::Result<u8> {
    let spec = GridSpec::from_file(grid_path)?;
    let (outcomes, any_failed) = run_sweep(&spec, out, jobs)?;
    eprintln!(
        "sweep: {} cells, {} failed",
        outcomes.len(),
        outcomes.iter().filter(|o| o.status != "ok").count()
    );
    Ok(if any_failed { 4 } else { 0 })
}

fn eval_command(game_path: &Path, strategy_path: &Path) -> fwexplore::Result<u8> {
    let game = game_from_file(game_path)?;
    let profile = read_strategy(strategy_path)?;
    print!("{}", cli_eval(&game, &profile)?);
    Ok(0)
}
