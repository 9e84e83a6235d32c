//! Parameter sweeps over random potential games: a cartesian grid of
//! (players, actions, horizon, schedule family, seed) cells with a summary
//! of final regrets and fitted log-log slopes.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{random_potential_game, Game, NoiseModel};
use crate::harness::csvlog;
use crate::harness::slope::fit_regret_slope;
use crate::learners::{
    run_learning, FeedbackKind, LearnerKind, RunParams, ScheduleConfig, ScheduleFamily,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub t_max: Vec<usize>,
    pub families: Vec<ScheduleFamily>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_learner")]
    pub learner: LearnerKind,
    #[serde(default = "default_noise")]
    pub noise: NoiseModel,
    /// Seed for drawing the random game of each (n, m) pair.
    #[serde(default)]
    pub game_seed: u64,
}

fn default_learner() -> LearnerKind {
    LearnerKind::FwExplore
}

fn default_noise() -> NoiseModel {
    NoiseModel::Bernoulli
}

impl GridSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn cells(&self) -> Result<Vec<Cell>> {
        if self.n.is_empty()
            || self.m.is_empty()
            || self.t_max.is_empty()
            || self.families.is_empty()
            || self.seeds.is_empty()
        {
            return Err(Error::Config("sweep grid has an empty dimension".to_string()));
        }
        let mut cells = Vec::new();
        for &n in &self.n {
            for &m in &self.m {
                for &t_max in &self.t_max {
                    for &family in &self.families {
                        for &seed in &self.seeds {
                            cells.push(Cell {
                                n,
                                m,
                                t_max,
                                family,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        Ok(cells)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub m: usize,
    pub t_max: usize,
    pub family: ScheduleFamily,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellOutcome {
    pub cell: Cell,
    pub status: String,
    pub final_nash_regret: f64,
    pub final_max_individual_regret: f64,
    pub slope_nash: f64,
    pub slope_max_individual: f64,
}

fn run_cell(spec: &GridSpec, cell: &Cell, out_dir: &Path) -> Result<CellOutcome> {
    let mut game_rng = crate::rng::stream(spec.game_seed, (cell.n * 1000 + cell.m) as u64);
    let game = Game::NormalForm(random_potential_game(
        &vec![cell.m; cell.n],
        spec.noise.clone(),
        &mut game_rng,
    )?);
    let params = RunParams {
        learner: spec.learner,
        feedback: FeedbackKind::FullBandit,
        schedule: ScheduleConfig::preset(cell.family),
        t_max: cell.t_max,
        seed: cell.seed,
        eval_every: 1,
        trajectories_per_update: 1,
        explore_coef: None,
        init: crate::learners::InitKind::Uniform,
        trajectory_credit: crate::learners::TrajectoryCredit::RewardToGo,
    };
    let log = run_learning(&game, &params)?;
    let file = out_dir.join(format!(
        "cell_n{}_m{}_t{}_{:?}_seed{}.csv",
        cell.n, cell.m, cell.t_max, cell.family, cell.seed
    ));
    csvlog::write_csv(&log, &file)?;

    // Played rows only (the final row repeats the last cumulative value).
    let nash_series: Vec<f64> = log
        .rows
        .iter()
        .filter(|r| r.t <= cell.t_max)
        .map(|r| r.cum_nash_regret)
        .collect();
    let individual_series: Vec<f64> = log
        .rows
        .iter()
        .filter(|r| r.t <= cell.t_max)
        .map(|r| {
            r.cum_individual_regret
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let window = ((cell.t_max / 10).max(1), nash_series.len());
    let slope_nash = fit_regret_slope(&nash_series, window)?;
    let slope_ind = fit_regret_slope(&individual_series, window)?;
    Ok(CellOutcome {
        cell: *cell,
        status: "ok".to_string(),
        final_nash_regret: *nash_series.last().unwrap_or(&0.0),
        final_max_individual_regret: *individual_series.last().unwrap_or(&0.0),
        slope_nash,
        slope_max_individual: slope_ind,
    })
}

fn render_summary(outcomes: &[CellOutcome]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "n,m,t_max,family,seed,status,final_nash_regret,final_max_individual_regret,slope_nash,slope_max_individual"
    )
    .unwrap();
    for o in outcomes {
        writeln!(
            out,
            "{},{},{},{:?},{},{},{},{},{},{}",
            o.cell.n,
            o.cell.m,
            o.cell.t_max,
            o.cell.family,
            o.cell.seed,
            o.status,
            o.final_nash_regret,
            o.final_max_individual_regret,
            o.slope_nash,
            o.slope_max_individual
        )
        .unwrap();
    }
    out
}

/// Runs every cell (in parallel), never letting one failed cell poison the
/// others. Returns the outcomes and whether any cell failed.
pub fn run_sweep(spec: &GridSpec, out_dir: &Path, jobs: Option<usize>) -> Result<(Vec<CellOutcome>, bool)> {
    let cells = spec.cells()?;
    std::fs::create_dir_all(out_dir)?;
    let runner = |cell: &Cell| -> CellOutcome {
        match std::panic::catch_unwind(|| run_cell(spec, cell, out_dir)) {
            Ok(Ok(outcome)) => outcome,
            Ok(Err(err)) => CellOutcome {
                cell: *cell,
                status: format!("error: {err}"),
                final_nash_regret: f64::NAN,
                final_max_individual_regret: f64::NAN,
                slope_nash: f64::NAN,
                slope_max_individual: f64::NAN,
            },
            Err(_) => CellOutcome {
                cell: *cell,
                status: "panic".to_string(),
                final_nash_regret: f64::NAN,
                final_max_individual_regret: f64::NAN,
                slope_nash: f64::NAN,
                slope_max_individual: f64::NAN,
            },
        }
    };
    let outcomes: Vec<CellOutcome> = match jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| cells.par_iter().map(runner).collect())
        }
        None => cells.par_iter().map(runner).collect(),
    };
    std::fs::write(out_dir.join("sweep_summary.csv"), render_summary(&outcomes))?;
    let any_failed = outcomes.iter().any(|o| o.status != "ok");
    Ok((outcomes, any_failed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid_is_config_error() {
        let spec = GridSpec {
            n: vec![],
            m: vec![2],
            t_max: vec![10],
            families: vec![ScheduleFamily::PotentialGame],
            seeds: vec![0],
            learner: LearnerKind::FwExplore,
            noise: NoiseModel::Bernoulli,
            game_seed: 0,
        };
        assert!(matches!(spec.cells(), Err(Error::Config(_))));
    }

    #[test]
    fn singleton_grid_runs_one_cell() {
        let spec = GridSpec {
            n: vec![2],
            m: vec![2],
            t_max: vec![20],
            families: vec![ScheduleFamily::PotentialGame],
            seeds: vec![7],
            learner: LearnerKind::FwExplore,
            noise: NoiseModel::Bernoulli,
            game_seed: 1,
        };
        let dir = std::env::temp_dir().join("fwexplore_sweep_test");
        let _ = std::fs::remove_dir_all(&dir);
        let (outcomes, failed) = run_sweep(&spec, &dir, Some(1)).unwrap();
        assert_eq!(outcomes.len(), 1);
        assert!(!failed);
        assert!(dir.join("sweep_summary.csv").exists());
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 2);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
