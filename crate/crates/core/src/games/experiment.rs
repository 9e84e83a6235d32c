//! Builtin two-state Markov congestion game: n players choose one of four
//! facilities; crowding a facility triggers a distancing state where all
//! costs are scaled up by a penalty factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::markov::MarkovGame;
use crate::games::noise::NoiseModel;
use crate::games::tensor::{joint_size, JointIter};

pub const SAFE: usize = 0;
pub const DISTANCING: usize = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Player count; also fixes the crowding thresholds n/2 and n/4.
    pub n: usize,
    /// Base cost weight per facility, highest first so the last facility is
    /// the preferred one.
    pub facility_weights: Vec<f64>,
    /// The distancing state adds a constant penalty of
    /// `penalty_multiplier * max(facility_weights)` to every cost before the
    /// global rescale into [0, 1], making each distancing step roughly this
    /// many times dearer than any safe step.
    pub penalty_multiplier: f64,
    /// Stopping probability per step. The episode continues with probability
    /// `1 - stop_prob`.
    pub stop_prob: f64,
    pub horizon_cap: Option<usize>,
    pub noise: NoiseModel,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 8,
            facility_weights: vec![0.8, 0.6, 0.4, 0.2],
            penalty_multiplier: 100.0,
            // The game nominally stops each step with probability 0.99; read
            // literally that makes a 20-step cap vacuous, so the default uses
            // it as a continuation probability. `literal_stopping` restores
            // the literal reading.
            stop_prob: 0.01,
            horizon_cap: Some(20),
            noise: NoiseModel::Deterministic,
        }
    }
}

impl ExperimentConfig {
    pub fn literal_stopping(mut self) -> Self {
        self.stop_prob = 0.99;
        self
    }
}

/// Builds the two-state facility game. Sharing a facility lowers its cost:
/// under load `l` facility `e` costs `w_e * (n + 1 - l) / n`; the distancing
/// state adds a constant penalty on top, and the whole table is rescaled so
/// the maximum cost is 1. Crowding is punished through the dynamics: from
/// the safe state, play moves to distancing when some facility holds
/// strictly more than n/2 players; from distancing it returns to safe when
/// no facility holds more than n/4 players. The cheapest two facilities
/// split 4/4 is then the stable safe-state optimum, and spreading out evenly
/// is the fastest way back out of distancing.
pub fn build_experiment_game(config: &ExperimentConfig) -> Result<MarkovGame> {
    let n = config.n;
    let facilities = config.facility_weights.len();
    if n == 0 || facilities == 0 {
        return Err(Error::Config(
            "experiment needs players and facilities".to_string(),
        ));
    }
    if config.facility_weights.iter().any(|w| *w <= 0.0) {
        return Err(Error::Config("facility weights must be positive".to_string()));
    }
    if config.penalty_multiplier < 1.0 {
        return Err(Error::Config("penalty multiplier must be >= 1".to_string()));
    }
    if !(config.stop_prob > 0.0 && config.stop_prob <= 1.0) {
        return Err(Error::Config("stop probability must lie in (0, 1]".to_string()));
    }

    let action_counts = vec![facilities; n];
    let joint = joint_size(&action_counts)? as usize;
    let crowd_threshold = n / 2; // distancing when load > n/2
    let relax_threshold = n / 4; // safe again when all loads <= n/4

    let w_max = config
        .facility_weights
        .iter()
        .fold(0.0f64, |m, w| m.max(*w));
    let penalty = config.penalty_multiplier * w_max;
    let scale = 1.0 / (penalty + w_max);

    let mut costs = vec![vec![vec![0.0; joint]; 2]; n];
    let mut transitions = vec![vec![vec![0.0; 2]; joint]; 2];
    let stop_prob = vec![vec![config.stop_prob; joint]; 2];

    for (flat, joint_action) in JointIter::new(&action_counts).enumerate() {
        let mut loads = vec![0usize; facilities];
        for &a in &joint_action {
            loads[a] += 1;
        }
        for (i, &a) in joint_action.iter().enumerate() {
            let base =
                config.facility_weights[a] * (n + 1 - loads[a]) as f64 / n as f64;
            costs[i][SAFE][flat] = base * scale;
            costs[i][DISTANCING][flat] = (base + penalty) * scale;
        }
        let max_load = *loads.iter().max().unwrap();
        let next_from_safe = if max_load > crowd_threshold {
            DISTANCING
        } else {
            SAFE
        };
        let next_from_distancing = if max_load <= relax_threshold {
            SAFE
        } else {
            DISTANCING
        };
        transitions[SAFE][flat][next_from_safe] = 1.0;
        transitions[DISTANCING][flat][next_from_distancing] = 1.0;
    }

    MarkovGame::new(
        2,
        action_counts,
        costs,
        transitions,
        stop_prob,
        // Episodes start in the safe state.
        vec![1.0, 0.0],
        config.horizon_cap,
        config.noise.clone(),
    )
}
