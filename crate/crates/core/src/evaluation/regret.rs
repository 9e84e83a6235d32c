//! Regret series over a sequence of played profiles: cumulative Nash regret
//! and per-player individual regret against the best fixed response in
//! hindsight.

use crate::error::{Error, Result};
use crate::evaluation::{congestion_eval, markov_eval, normal_form as nf_eval};
use crate::games::{CongestionGame, Game, MarkovGame, NormalFormPotentialGame};
use crate::strategies::{PolicyTable, Profile};

/// Cap on the deterministic-policy enumeration used by the Markov hindsight
/// comparator.
const DET_POLICY_CAP: usize = 100_000;

#[derive(Clone, Debug, Default)]
pub struct RegretSeries {
    /// Running sum of per-step Nash gaps.
    pub nash: Vec<f64>,
    /// `individual[t][i]`: player i's regret against the best fixed
    /// strategy over the first t+1 profiles.
    pub individual: Vec<Vec<f64>>,
}

/// Computes both series for the profiles actually played. For one-shot games
/// the hindsight comparator is the best pure strategy (the minimum over
/// mixed strategies is attained at a vertex); for Markov games it is the
/// best deterministic stationary policy, enumerated per player.
pub fn regret_accumulators(game: &Game, played: &[Profile]) -> Result<RegretSeries> {
    match game {
        Game::NormalForm(g) => normal_form_series(g, played),
        Game::Congestion(g) => congestion_series(g, played),
        Game::Markov(g) => markov_series(g, played),
    }
}

fn normal_form_series(
    game: &NormalFormPotentialGame,
    played: &[Profile],
) -> Result<RegretSeries> {
    let n = game.num_players();
    let mut series = RegretSeries::default();
    let mut cum_nash = 0.0;
    let mut cum_cost = vec![0.0; n];
    let mut cum_grad: Vec<Vec<f64>> = game
        .action_counts()
        .iter()
        .map(|&m| vec![0.0; m])
        .collect();
    for profile in played {
        let strategies = match profile {
            Profile::Mixed { players } => players,
            _ => return Err(Error::ShapeMismatch("expected mixed profile".to_string())),
        };
        let (gap, _) = nf_eval::nash_gap(game, strategies)?;
        cum_nash += gap;
        series.nash.push(cum_nash);
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            let grad = nf_eval::grad_potential(game, strategies, i)?;
            cum_cost[i] += strategies[i]
                .probs()
                .iter()
                .zip(&grad)
                .map(|(p, g)| p * g)
                .sum::<f64>();
            for (acc, g) in cum_grad[i].iter_mut().zip(&grad) {
                *acc += g;
            }
            let best = cum_grad[i].iter().cloned().fold(f64::INFINITY, f64::min);
            row.push(cum_cost[i] - best);
        }
        series.individual.push(row);
    }
    Ok(series)
}

fn congestion_series(game: &CongestionGame, played: &[Profile]) -> Result<RegretSeries> {
    let n = game.num_players();
    let mut series = RegretSeries::default();
    let mut cum_nash = 0.0;
    let mut cum_cost = vec![0.0; n];
    let mut cum_grad = vec![vec![0.0; game.num_resources()]; n];
    for profile in played {
        let marginals: Vec<Vec<f64>> = match profile {
            Profile::Fractional { players } => {
                players.iter().map(|p| p.dense().to_vec()).collect()
            }
            _ => {
                return Err(Error::ShapeMismatch(
                    "expected fractional profile".to_string(),
                ))
            }
        };
        let (gap, _) = congestion_eval::nash_gap(game, &marginals)?;
        cum_nash += gap;
        series.nash.push(cum_nash);
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            let grad = congestion_eval::grad_fractional_potential(game, &marginals, i)?;
            cum_cost[i] += marginals[i].iter().zip(&grad).map(|(x, g)| x * g).sum::<f64>();
            for (acc, g) in cum_grad[i].iter_mut().zip(&grad) {
                *acc += g;
            }
            let best = game
                .action_set(i)
                .iter()
                .map(|strat| strat.iter().map(|&e| cum_grad[i][e]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            row.push(cum_cost[i] - best);
        }
        series.individual.push(row);
    }
    Ok(series)
}

fn markov_series(game: &MarkovGame, played: &[Profile]) -> Result<RegretSeries> {
    let n = game.num_players();
    let s_count = game.num_states();
    for &m in game.action_counts() {
        if (m as f64).powi(s_count as i32) > DET_POLICY_CAP as f64 {
            return Err(Error::EnumerationTooLarge {
                size: (m as u128).saturating_pow(s_count as u32),
                cap: DET_POLICY_CAP as u128,
            });
        }
    }
    let det_policies: Vec<Vec<Vec<usize>>> = game
        .action_counts()
        .iter()
        .map(|&m| enumerate_det_policies(s_count, m))
        .collect();

    let mut series = RegretSeries::default();
    let mut cum_nash = 0.0;
    let mut cum_value = vec![0.0; n];
    let mut cum_det: Vec<Vec<f64>> = det_policies
        .iter()
        .map(|ps| vec![0.0; ps.len()])
        .collect();
    for profile in played {
        let policies: &[PolicyTable] = match profile {
            Profile::Policies { players } => players,
            _ => return Err(Error::ShapeMismatch("expected policy profile".to_string())),
        };
        let (gap, _) = markov_eval::nash_gap(game, policies)?;
        cum_nash += gap;
        series.nash.push(cum_nash);
        let table = markov_eval::value_function(game, policies)?;
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            cum_value[i] += table.value_at_init[i];
            let mdp = markov_eval::induced_mdp(game, policies, i)?;
            for (det_idx, det) in det_policies[i].iter().enumerate() {
                cum_det[i][det_idx] += markov_eval::induced_policy_value(game, &mdp, det)?;
            }
            let best = cum_det[i].iter().cloned().fold(f64::INFINITY, f64::min);
            row.push(cum_value[i] - best);
        }
        series.individual.push(row);
    }
    Ok(series)
}

fn enumerate_det_policies(s_count: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; s_count];
    loop {
        out.push(current.clone());
        let mut s = 0;
        loop {
            if s == s_count {
                return out;
            }
            current[s] += 1;
            if current[s] < m {
                break;
            }
            current[s] = 0;
            s += 1;
        }
    }
}
