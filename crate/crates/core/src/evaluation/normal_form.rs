//! Exact enumeration oracles for normal-form potential games.

use crate::error::Result;
use crate::games::{JointIter, NormalFormPotentialGame};
use crate::strategies::Simplex;

/// Exact expected cost of player `i` under a product profile.
pub fn expected_cost(
    game: &NormalFormPotentialGame,
    profile: &[Simplex],
    i: usize,
) -> Result<f64> {
    let grad = grad_potential(game, profile, i)?;
    Ok(inner(profile[i].probs(), &grad))
}

/// The exact gradient of the potential in player `i`'s strategy: the vector
/// `a_i -> c_i(a_i, pi_{-i})`.
pub fn grad_potential(
    game: &NormalFormPotentialGame,
    profile: &[Simplex],
    i: usize,
) -> Result<Vec<f64>> {
    game.check_profile(profile)?;
    let counts = game.action_counts();
    let mut opp_dims = counts.to_vec();
    opp_dims[i] = 1;
    let mut grad = vec![0.0; counts[i]];
    for opp in JointIter::new(&opp_dims) {
        let w: f64 = opp
            .iter()
            .zip(profile)
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (&a, p))| p.prob(a))
            .product();
        if w == 0.0 {
            continue;
        }
        let mut joint = opp.clone();
        for (a_i, g) in grad.iter_mut().enumerate() {
            joint[i] = a_i;
            *g += w * game.cost(i, &joint);
        }
    }
    Ok(grad)
}

/// Per-player gap to the best unilateral response and the maximum over
/// players. The inner minimum is attained at a vertex by linearity.
pub fn nash_gap(game: &NormalFormPotentialGame, profile: &[Simplex]) -> Result<(f64, Vec<f64>)> {
    let mut gaps = Vec::with_capacity(game.num_players());
    for i in 0..game.num_players() {
        let grad = grad_potential(game, profile, i)?;
        let current = inner(profile[i].probs(), &grad);
        let best = grad.iter().cloned().fold(f64::INFINITY, f64::min);
        gaps.push(current - best);
    }
    let max = gaps.iter().cloned().fold(0.0f64, f64::max);
    Ok((max, gaps))
}

/// The Frank-Wolfe gap: the maximum over the product simplex decomposes
/// into a per-player sum.
pub fn fw_gap(game: &NormalFormPotentialGame, profile: &[Simplex]) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..game.num_players() {
        let grad = grad_potential(game, profile, i)?;
        let current = inner(profile[i].probs(), &grad);
        let best = grad.iter().cloned().fold(f64::INFINITY, f64::min);
        total += current - best;
    }
    Ok(total)
}

pub(crate) fn inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
