//! The three game families, their cost sampling under a noise model, and
//! their potential functions.

mod congestion;
mod experiment;
mod io;
mod markov;
mod noise;
mod normal_form;
mod tensor;

pub use congestion::{random_congestion_game, CongestionGame};
pub use experiment::{build_experiment_game, ExperimentConfig, DISTANCING, SAFE};
pub use io::{game_from_file, game_from_json};
pub use markov::{sample_episode, Episode, EpisodeStep, MarkovGame};
pub use noise::NoiseModel;
pub use normal_form::{
    random_potential_game, NormalFormPotentialGame, PotentialReport, POTENTIAL_TOL,
};
pub use tensor::{flat_index, joint_size, unflatten, JointIter, JointTensor, ENUMERATION_CAP};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Any of the three supported game families.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Game {
    NormalForm(NormalFormPotentialGame),
    Congestion(CongestionGame),
    Markov(MarkovGame),
}

impl Game {
    pub fn num_players(&self) -> usize {
        match self {
            Game::NormalForm(g) => g.num_players(),
            Game::Congestion(g) => g.num_players(),
            Game::Markov(g) => g.num_players(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Game::NormalForm(_) => "normal_form",
            Game::Congestion(_) => "congestion",
            Game::Markov(_) => "markov",
        }
    }

    /// One noisy cost observation per player at a joint pure action. For
    /// Markov games the one-shot signature does not apply; use
    /// [`MarkovGame::sample_cost`] with an explicit state.
    pub fn sample_cost(&self, joint: &[usize], rng: &mut impl Rng) -> Result<Vec<f64>> {
        match self {
            Game::NormalForm(g) => g.sample_cost(joint, rng),
            Game::Congestion(g) => g.sample_cost(joint, rng),
            Game::Markov(g) => g.sample_cost(0, joint, rng),
        }
    }
}
