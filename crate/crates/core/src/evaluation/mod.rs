//! Exact evaluation: expected costs, potential gradients, Nash and
//! Frank-Wolfe gaps, Markov value machinery, the fractional congestion
//! potential, and regret accumulation.

pub mod congestion_eval;
pub mod markov_eval;
pub mod normal_form;
pub mod regret;

pub use congestion_eval::{
    fractional_potential, grad_fractional_potential, poisson_binomial_pmf,
};
pub use markov_eval::{
    best_response_value, exact_policy_gradient, induced_mdp, induced_policy_value,
    occupancy_measure, value_function, InducedMdp, OccupancyMeasure, ValueTable,
    VALUE_ITERATION_CAP, VALUE_ITERATION_TOL,
};
pub use regret::{regret_accumulators, RegretSeries};

use rand::Rng;

use crate::error::Result;
use crate::games::NormalFormPotentialGame;
use crate::strategies::Simplex;

/// Numerical estimate of the potential's smoothness constant: the largest
/// observed ratio of gradient distance to strategy distance over random
/// profile pairs. Diagnostic only; the exact constant is never asserted.
pub fn estimate_smoothness(
    game: &NormalFormPotentialGame,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    let counts = game.action_counts().to_vec();
    let sample_profile = |rng: &mut dyn rand::RngCore| -> Vec<Simplex> {
        counts
            .iter()
            .map(|&m| {
                let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..1.0f64)).collect();
                let sum: f64 = raw.iter().sum();
                Simplex::new(raw.iter().map(|v| v / sum).collect()).unwrap()
            })
            .collect()
    };
    let mut best = 0.0f64;
    for _ in 0..trials {
        let a = sample_profile(rng);
        let b = sample_profile(rng);
        let mut grad_dist_sq = 0.0;
        let mut point_dist_sq = 0.0;
        for i in 0..game.num_players() {
            let ga = normal_form::grad_potential(game, &a, i)?;
            let gb = normal_form::grad_potential(game, &b, i)?;
            grad_dist_sq += ga
                .iter()
                .zip(&gb)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>();
            point_dist_sq += a[i]
                .probs()
                .iter()
                .zip(b[i].probs())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>();
        }
        if point_dist_sq > 1e-12 {
            best = best.max((grad_dist_sq / point_dist_sq).sqrt());
        }
    }
    Ok(best)
}
