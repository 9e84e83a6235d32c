//! Run configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{build_experiment_game, game_from_file, ExperimentConfig, Game};
use crate::learners::{FeedbackKind, InitKind, LearnerKind, RunParams, ScheduleConfig, TrajectoryCredit};

/// Where the game comes from: a definition file or a builtin name.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GameSource {
    File { file: PathBuf },
    Builtin { builtin: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub game: GameSource,
    pub learner: LearnerKind,
    pub feedback: FeedbackKind,
    pub schedule: ScheduleConfig,
    pub t_max: usize,
    #[serde(default = "default_one")]
    pub trajectories_per_update: usize,
    #[serde(default)]
    pub horizon_cap: Option<usize>,
    #[serde(default = "default_one")]
    pub eval_every: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub explore_coef: Option<f64>,
    #[serde(default)]
    pub init: InitKind,
    #[serde(default)]
    pub trajectory_credit: TrajectoryCredit,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_one() -> usize {
    1
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text)?;
        Ok(config)
    }

    /// Loads the referenced game, honoring the horizon-cap override.
    pub fn load_game(&self, base_dir: &Path) -> Result<Game> {
        let game = match &self.game {
            GameSource::File { file } => {
                let path = if file.is_absolute() {
                    file.clone()
                } else {
                    base_dir.join(file)
                };
                if !path.exists() {
                    return Err(Error::Config(format!(
                        "game file {} does not exist",
                        path.display()
                    )));
                }
                game_from_file(&path)?
            }
            GameSource::Builtin { builtin } => match builtin.as_str() {
                "markov_congestion_experiment" => {
                    Game::Markov(build_experiment_game(&ExperimentConfig::default())?)
                }
                "markov_congestion_experiment_literal" => Game::Markov(build_experiment_game(
                    &ExperimentConfig::default().literal_stopping(),
                )?),
                other => {
                    return Err(Error::Config(format!("unknown builtin game '{other}'")))
                }
            },
        };
        Ok(match (game, self.horizon_cap) {
            (Game::Markov(g), Some(cap)) => Game::Markov(g.with_horizon_cap(Some(cap))),
            (game, _) => game,
        })
    }

    pub fn run_params(&self) -> RunParams {
        RunParams {
            learner: self.learner,
            feedback: self.feedback,
            schedule: self.schedule.clone(),
            t_max: self.t_max,
            seed: self.seed,
            eval_every: self.eval_every,
            trajectories_per_update: self.trajectories_per_update,
            explore_coef: self.explore_coef,
            init: self.init,
            trajectory_credit: self.trajectory_credit,
        }
    }
}
