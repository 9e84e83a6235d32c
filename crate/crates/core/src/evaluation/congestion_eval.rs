//! Factored evaluation for congestion games: the Poisson-binomial load
//! distribution, the fractional potential, and its gradient.

use crate::error::{Error, Result};
use crate::games::CongestionGame;

/// Exact pmf of a sum of independent Bernoulli variables by dynamic
/// programming. `pmf[l]` is the probability of `l` successes.
pub fn poisson_binomial_pmf(probs: &[f64]) -> Vec<f64> {
    let mut pmf = vec![1.0];
    for &p in probs {
        let mut next = vec![0.0; pmf.len() + 1];
        for (l, &mass) in pmf.iter().enumerate() {
            next[l] += mass * (1.0 - p);
            next[l + 1] += mass * p;
        }
        pmf = next;
    }
    pmf
}

/// The fractional potential: for each resource, the expected cumulative cost
/// `sum_{j=0}^{L_e} u(e, j)` where `L_e` is the Poisson-binomial load under
/// the players' marginals. The `j = 0` terms are included, so this differs
/// from the expected Rosenthal potential by the constant `sum_e u(e, 0)`.
pub fn fractional_potential(game: &CongestionGame, marginals: &[Vec<f64>]) -> Result<f64> {
    check_marginals(game, marginals)?;
    let n = game.num_players();
    let mut psi = 0.0;
    for e in 0..game.num_resources() {
        let probs: Vec<f64> = (0..n).map(|i| marginals[i][e]).collect();
        let pmf = poisson_binomial_pmf(&probs);
        let mut cumulative = 0.0;
        for (l, &mass) in pmf.iter().enumerate() {
            cumulative += game.facility_cost(e, l);
            psi += mass * cumulative;
        }
    }
    Ok(psi)
}

/// `d psi / d x_{i,e} = E[u(e, L_e^{-i} + 1)]` with the load taken over the
/// other players only.
pub fn grad_fractional_potential(
    game: &CongestionGame,
    marginals: &[Vec<f64>],
    i: usize,
) -> Result<Vec<f64>> {
    check_marginals(game, marginals)?;
    let n = game.num_players();
    let mut grad = vec![0.0; game.num_resources()];
    for (e, g) in grad.iter_mut().enumerate() {
        let probs: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| marginals[j][e])
            .collect();
        let pmf = poisson_binomial_pmf(&probs);
        *g = pmf
            .iter()
            .enumerate()
            .map(|(l, &mass)| mass * game.facility_cost(e, l + 1))
            .sum();
    }
    Ok(grad)
}

/// Exact expected cost of player `i`: `<x_i, grad_i psi>`.
pub fn expected_cost(game: &CongestionGame, marginals: &[Vec<f64>], i: usize) -> Result<f64> {
    let grad = grad_fractional_potential(game, marginals, i)?;
    Ok(marginals[i].iter().zip(&grad).map(|(x, g)| x * g).sum())
}

/// Per-player gap to the best pure strategy and the maximum over players.
pub fn nash_gap(game: &CongestionGame, marginals: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let mut gaps = Vec::with_capacity(game.num_players());
    for i in 0..game.num_players() {
        let grad = grad_fractional_potential(game, marginals, i)?;
        let current: f64 = marginals[i].iter().zip(&grad).map(|(x, g)| x * g).sum();
        let best = game
            .action_set(i)
            .iter()
            .map(|strat| strat.iter().map(|&e| grad[e]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        gaps.push(current - best);
    }
    let max = gaps.iter().cloned().fold(0.0f64, f64::max);
    Ok((max, gaps))
}

/// Frank-Wolfe gap over the product of strategy polytopes.
pub fn fw_gap(game: &CongestionGame, marginals: &[Vec<f64>]) -> Result<f64> {
    let (_, gaps) = nash_gap(game, marginals)?;
    Ok(gaps.iter().sum())
}

fn check_marginals(game: &CongestionGame, marginals: &[Vec<f64>]) -> Result<()> {
    if marginals.len() != game.num_players()
        || marginals
            .iter()
            .any(|x| x.len() != game.num_resources())
    {
        return Err(Error::ShapeMismatch(
            "marginals do not match game shape".to_string(),
        ));
    }
    if marginals
        .iter()
        .flatten()
        .any(|v| !(-1e-9..=1.0 + 1e-9).contains(v))
    {
        return Err(Error::ParameterOutOfRange(
            "marginals must lie in [0, 1]".to_string(),
        ));
    }
    Ok(())
}
