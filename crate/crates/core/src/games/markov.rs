//! Finite stochastic games with per-(state, action) stopping probabilities.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::noise::NoiseModel;
use crate::games::tensor::{flat_index, joint_size};
use crate::strategies::PolicyTable;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkovGame {
    s_count: usize,
    n: usize,
    action_counts: Vec<usize>,
    /// `costs[i][s][flat joint]` in [0, 1].
    costs: Vec<Vec<Vec<f64>>>,
    /// `transitions[s][flat joint][s']`, each row summing to one.
    transitions: Vec<Vec<Vec<f64>>>,
    /// `stop_prob[s][flat joint]` in (0, 1].
    stop_prob: Vec<Vec<f64>>,
    init_dist: Vec<f64>,
    horizon_cap: Option<usize>,
    noise: NoiseModel,
}

pub const STOCHASTIC_TOL: f64 = 1e-12;

impl MarkovGame {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        s_count: usize,
        action_counts: Vec<usize>,
        costs: Vec<Vec<Vec<f64>>>,
        transitions: Vec<Vec<Vec<f64>>>,
        stop_prob: Vec<Vec<f64>>,
        init_dist: Vec<f64>,
        horizon_cap: Option<usize>,
        noise: NoiseModel,
    ) -> Result<Self> {
        let n = action_counts.len();
        if n == 0 || s_count == 0 {
            return Err(Error::Config(
                "markov game needs players and states".to_string(),
            ));
        }
        let joint = joint_size(&action_counts)? as usize;
        if costs.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} cost tables for {} players",
                costs.len(),
                n
            )));
        }
        for (i, per_state) in costs.iter().enumerate() {
            if per_state.len() != s_count || per_state.iter().any(|row| row.len() != joint) {
                return Err(Error::ShapeMismatch(format!(
                    "cost table of player {i} has wrong shape"
                )));
            }
            if per_state
                .iter()
                .flatten()
                .any(|v| !(0.0..=1.0).contains(v))
            {
                return Err(Error::ParameterOutOfRange(format!(
                    "costs of player {i} outside [0, 1]"
                )));
            }
        }
        if transitions.len() != s_count
            || transitions.iter().any(|per_a| per_a.len() != joint)
        {
            return Err(Error::ShapeMismatch("transition table shape".to_string()));
        }
        for per_a in &transitions {
            for row in per_a {
                if row.len() != s_count {
                    return Err(Error::ShapeMismatch("transition row length".to_string()));
                }
                let sum: f64 = row.iter().sum();
                if row.iter().any(|p| *p < -STOCHASTIC_TOL)
                    || (sum - 1.0).abs() > STOCHASTIC_TOL
                {
                    return Err(Error::ParameterOutOfRange(format!(
                        "transition row sums to {sum}, expected 1"
                    )));
                }
            }
        }
        if stop_prob.len() != s_count || stop_prob.iter().any(|row| row.len() != joint) {
            return Err(Error::ShapeMismatch("stop probability shape".to_string()));
        }
        if stop_prob
            .iter()
            .flatten()
            .any(|k| !(*k > 0.0 && *k <= 1.0))
        {
            return Err(Error::ParameterOutOfRange(
                "stopping probabilities must lie in (0, 1]".to_string(),
            ));
        }
        if init_dist.len() != s_count {
            return Err(Error::ShapeMismatch("initial distribution length".to_string()));
        }
        let mu_sum: f64 = init_dist.iter().sum();
        if init_dist.iter().any(|p| *p < 0.0) || (mu_sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::ParameterOutOfRange(format!(
                "initial distribution sums to {mu_sum}, expected 1"
            )));
        }
        Ok(MarkovGame {
            s_count,
            n,
            action_counts,
            costs,
            transitions,
            stop_prob,
            init_dist,
            horizon_cap,
            noise,
        })
    }

    pub fn num_states(&self) -> usize {
        self.s_count
    }

    pub fn num_players(&self) -> usize {
        self.n
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn max_actions(&self) -> usize {
        *self.action_counts.iter().max().unwrap()
    }

    pub fn init_dist(&self) -> &[f64] {
        &self.init_dist
    }

    pub fn horizon_cap(&self) -> Option<usize> {
        self.horizon_cap
    }

    pub fn with_horizon_cap(mut self, cap: Option<usize>) -> Self {
        self.horizon_cap = cap;
        self
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn joint_count(&self) -> usize {
        self.action_counts.iter().product()
    }

    pub fn flat_joint(&self, joint: &[usize]) -> usize {
        flat_index(&self.action_counts, joint)
    }

    pub fn cost(&self, i: usize, s: usize, flat_joint: usize) -> f64 {
        self.costs[i][s][flat_joint]
    }

    pub fn transition_row(&self, s: usize, flat_joint: usize) -> &[f64] {
        &self.transitions[s][flat_joint]
    }

    pub fn stop_prob(&self, s: usize, flat_joint: usize) -> f64 {
        self.stop_prob[s][flat_joint]
    }

    /// The minimum stopping probability, strictly positive by construction.
    pub fn kappa_min(&self) -> f64 {
        self.stop_prob
            .iter()
            .flatten()
            .fold(f64::INFINITY, |m, &k| m.min(k))
    }

    pub fn validate_joint(&self, joint: &[usize]) -> Result<()> {
        if joint.len() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "joint action has {} entries for {} players",
                joint.len(),
                self.n
            )));
        }
        for (player, (&a, &m)) in joint.iter().zip(&self.action_counts).enumerate() {
            if a >= m {
                return Err(Error::InvalidAction { player, index: a });
            }
        }
        Ok(())
    }

    /// One noisy cost observation per player at `(s, a)`.
    pub fn sample_cost(&self, s: usize, joint: &[usize], rng: &mut impl Rng) -> Result<Vec<f64>> {
        self.validate_joint(joint)?;
        let flat = self.flat_joint(joint);
        Ok((0..self.n)
            .map(|i| self.noise.sample(self.cost(i, s, flat), rng))
            .collect())
    }

    pub fn check_policies(&self, policies: &[PolicyTable]) -> Result<()> {
        if policies.len() != self.n
            || policies.iter().zip(&self.action_counts).any(|(p, &m)| {
                p.states() != self.s_count || p.actions() != m
            })
        {
            return Err(Error::ShapeMismatch(
                "policies do not match game shape".to_string(),
            ));
        }
        Ok(())
    }
}

/// One sampled episode: (state, joint action, per-player sampled costs) per
/// step. The stopping draw happens after the step's costs are received; the
/// optional cap truncates the episode.
#[derive(Clone, Debug)]
pub struct Episode {
    pub steps: Vec<EpisodeStep>,
}

#[derive(Clone, Debug)]
pub struct EpisodeStep {
    pub state: usize,
    pub joint: Vec<usize>,
    pub costs: Vec<f64>,
}

/// Samples one episode under per-player policies. Player `i` draws actions
/// and cost noise from `player_rngs[i]`; the environment stream drives the
/// initial state, transitions, and stopping.
pub fn sample_episode(
    game: &MarkovGame,
    policies: &[PolicyTable],
    player_rngs: &mut [impl Rng],
    env_rng: &mut impl Rng,
) -> Result<Episode> {
    game.check_policies(policies)?;
    let mut steps = Vec::new();
    let mut state = crate::strategies::sample_categorical(game.init_dist(), env_rng);
    loop {
        let joint: Vec<usize> = policies
            .iter()
            .zip(player_rngs.iter_mut())
            .map(|(p, rng)| p.row(state).sample(rng))
            .collect();
        let flat = game.flat_joint(&joint);
        let costs: Vec<f64> = (0..game.num_players())
            .map(|i| {
                game.noise()
                    .sample(game.cost(i, state, flat), &mut player_rngs[i])
            })
            .collect();
        steps.push(EpisodeStep {
            state,
            joint,
            costs,
        });
        if let Some(cap) = game.horizon_cap() {
            if steps.len() >= cap {
                break;
            }
        }
        let kappa = game.stop_prob(state, flat);
        if kappa >= 1.0 || env_rng.gen::<f64>() < kappa {
            break;
        }
        state = crate::strategies::sample_categorical(game.transition_row(state, flat), env_rng);
    }
    Ok(Episode { steps })
}
