//! CLI harness: config ingestion, run orchestration, CSV emission,
//! experiment reproduction, parameter sweeps, and regret-slope analysis.

mod config;
mod csvlog;
mod reproduce;
mod slope;
mod sweep;

pub use config::{GameSource, RunConfig};
pub use csvlog::{
    parse_csv, parse_strategy, read_strategy, render_csv, strategy_json, write_csv,
    write_strategy, ParsedCsv,
};
pub use reproduce::{
    cli_reproduce_experiment, fw_experiment_schedule, reproduce_experiment,
    sgd_experiment_schedule, AlgoSummary, ExperimentSummary, ReproduceOptions,
};
pub use slope::fit_regret_slope;
pub use sweep::{run_sweep, Cell, CellOutcome, GridSpec};

use std::path::Path;

use crate::error::Result;
use crate::games::Game;
use crate::learners::{evaluate_profile, run_learning, RunLog};
use crate::strategies::Profile;

/// Executes one configured run and writes `run_log.csv` plus
/// `final_strategy.json` into the output directory.
pub fn cli_run(config: &RunConfig, base_dir: &Path, out_dir: &Path) -> Result<RunLog> {
    let game = config.load_game(base_dir)?;
    let params = config.run_params();
    let log = run_learning(&game, &params)?;
    std::fs::create_dir_all(out_dir)?;
    write_csv(&log, &out_dir.join("run_log.csv"))?;
    write_strategy(&log.final_strategy, &out_dir.join("final_strategy.json"))?;
    eprintln!(
        "run: {} iterations on a {} game in {:.2}s, final nash gap {:.6}",
        params.t_max,
        log.game_kind,
        log.elapsed.as_secs_f64(),
        log.rows.last().map_or(f64::NAN, |r| r.nash_gap),
    );
    Ok(log)
}

/// Evaluates a stored strategy against a game: Nash gap, Frank-Wolfe gap,
/// and per-player expected costs.
pub fn cli_eval(game: &Game, profile: &Profile) -> Result<String> {
    let metrics = evaluate_profile(game, profile)?;
    let mut out = String::new();
    out.push_str(&format!("nash_gap: {}\n", metrics.nash_gap));
    out.push_str(&format!("fw_gap: {}\n", metrics.fw_gap));
    for (i, c) in metrics.expected_costs.iter().enumerate() {
        out.push_str(&format!("expected_cost_{i}: {c}\n"));
    }
    Ok(out)
}
