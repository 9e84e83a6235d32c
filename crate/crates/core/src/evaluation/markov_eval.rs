//! Exact linear-algebra oracles for Markov games: policy evaluation, best
//! responses, occupancy measures, and direct-parametrization policy
//! gradients.

use crate::error::{Error, Result};
use crate::games::{JointIter, MarkovGame};
use crate::linalg;
use crate::strategies::{PolicyTable, Simplex};

pub const VALUE_ITERATION_TOL: f64 = 1e-10;
pub const VALUE_ITERATION_CAP: usize = 1_000_000;

/// Per-player per-state expected cumulative costs, with the aggregate value
/// under the initial distribution.
#[derive(Clone, Debug)]
pub struct ValueTable {
    /// `values[i][s] = V_i(s)`.
    pub values: Vec<Vec<f64>>,
    /// `V_i(mu0)` per player.
    pub value_at_init: Vec<f64>,
}

impl ValueTable {
    /// State-action value `Q_i(s, a)` for a joint pure action.
    pub fn q_value(&self, game: &MarkovGame, i: usize, s: usize, joint: &[usize]) -> f64 {
        let flat = game.flat_joint(joint);
        let continue_prob = 1.0 - game.stop_prob(s, flat);
        let continuation: f64 = game
            .transition_row(s, flat)
            .iter()
            .zip(&self.values[i])
            .map(|(p, v)| p * v)
            .sum();
        game.cost(i, s, flat) + continue_prob * continuation
    }
}

/// Expected visit counts per state.
#[derive(Clone, Debug)]
pub struct OccupancyMeasure {
    pub visits: Vec<f64>,
    /// `max_s d(s) / mu0(s)`; infinite when `mu0` has zeros.
    pub d_infinity: f64,
}

/// Full joint-policy pass: the continuation kernel `M[s][s']` and per-player
/// expected one-step costs `r[i][s]`.
fn policy_pass(game: &MarkovGame, policies: &[PolicyTable]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let s_count = game.num_states();
    let n = game.num_players();
    let mut kernel = vec![vec![0.0; s_count]; s_count];
    let mut costs = vec![vec![0.0; s_count]; n];
    for s in 0..s_count {
        for (flat, joint) in JointIter::new(game.action_counts()).enumerate() {
            let w: f64 = joint
                .iter()
                .zip(policies)
                .map(|(&a, p)| p.row(s).prob(a))
                .product();
            if w == 0.0 {
                continue;
            }
            for (i, cost_row) in costs.iter_mut().enumerate() {
                cost_row[s] += w * game.cost(i, s, flat);
            }
            let cont = w * (1.0 - game.stop_prob(s, flat));
            if cont != 0.0 {
                for (s_next, p) in game.transition_row(s, flat).iter().enumerate() {
                    kernel[s][s_next] += cont * p;
                }
            }
        }
    }
    (kernel, costs)
}

fn solve_values(kernel: &[Vec<f64>], reward: &[f64]) -> Result<Vec<f64>> {
    let s_count = kernel.len();
    let mut system = vec![vec![0.0; s_count]; s_count];
    for s in 0..s_count {
        for s2 in 0..s_count {
            system[s][s2] = if s == s2 { 1.0 } else { 0.0 } - kernel[s][s2];
        }
    }
    linalg::solve(&system, reward)
}

/// Exact policy evaluation: solves `V_i = r_i + M V_i` per player.
pub fn value_function(game: &MarkovGame, policies: &[PolicyTable]) -> Result<ValueTable> {
    game.check_policies(policies)?;
    let (kernel, costs) = policy_pass(game, policies);
    let mut values = Vec::with_capacity(game.num_players());
    for r in &costs {
        values.push(solve_values(&kernel, r)?);
    }
    let value_at_init = values
        .iter()
        .map(|v| {
            v.iter()
                .zip(game.init_dist())
                .map(|(x, mu)| x * mu)
                .sum::<f64>()
        })
        .collect();
    Ok(ValueTable {
        values,
        value_at_init,
    })
}

/// The single-agent MDP induced on player `i` when the opponents play their
/// rows of `policies`: effective costs and the continuation kernel with
/// stopping folded in.
#[derive(Clone, Debug)]
pub struct InducedMdp {
    /// `eff_cost[s][a_i]`.
    pub eff_cost: Vec<Vec<f64>>,
    /// `eff_cont[s][a_i][s']`.
    pub eff_cont: Vec<Vec<Vec<f64>>>,
}

pub fn induced_mdp(game: &MarkovGame, policies: &[PolicyTable], i: usize) -> Result<InducedMdp> {
    game.check_policies(policies)?;
    let s_count = game.num_states();
    let m_i = game.action_counts()[i];
    let mut eff_cost = vec![vec![0.0; m_i]; s_count];
    let mut eff_cont = vec![vec![vec![0.0; s_count]; m_i]; s_count];
    for s in 0..s_count {
        for (flat, joint) in JointIter::new(game.action_counts()).enumerate() {
            let w: f64 = joint
                .iter()
                .zip(policies)
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, (&a, p))| p.row(s).prob(a))
                .product();
            if w == 0.0 {
                continue;
            }
            let a_i = joint[i];
            eff_cost[s][a_i] += w * game.cost(i, s, flat);
            let cont = w * (1.0 - game.stop_prob(s, flat));
            if cont != 0.0 {
                for (s_next, p) in game.transition_row(s, flat).iter().enumerate() {
                    eff_cont[s][a_i][s_next] += cont * p;
                }
            }
        }
    }
    Ok(InducedMdp { eff_cost, eff_cont })
}

/// Best response of player `i` against the opponents' rows of `policies`:
/// value iteration to sup-norm tolerance, then one exact evaluation of the
/// greedy policy (ties to the lowest action index).
pub fn best_response_value(
    game: &MarkovGame,
    policies: &[PolicyTable],
    i: usize,
) -> Result<(f64, PolicyTable)> {
    let mdp = induced_mdp(game, policies, i)?;
    let s_count = game.num_states();
    let m_i = game.action_counts()[i];
    let mut values = vec![0.0; s_count];
    let mut converged = false;
    for _ in 0..VALUE_ITERATION_CAP {
        let mut next = vec![0.0; s_count];
        for s in 0..s_count {
            let mut best = f64::INFINITY;
            for a in 0..m_i {
                let q = mdp.eff_cost[s][a]
                    + mdp.eff_cont[s][a]
                        .iter()
                        .zip(&values)
                        .map(|(p, v)| p * v)
                        .sum::<f64>();
                if q < best {
                    best = q;
                }
            }
            next[s] = best;
        }
        let delta = next
            .iter()
            .zip(&values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        values = next;
        if delta < VALUE_ITERATION_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            max_iters: VALUE_ITERATION_CAP,
        });
    }

    let mut greedy = Vec::with_capacity(s_count);
    for s in 0..s_count {
        let mut best_a = 0;
        let mut best_q = f64::INFINITY;
        for a in 0..m_i {
            let q = mdp.eff_cost[s][a]
                + mdp.eff_cont[s][a]
                    .iter()
                    .zip(&values)
                    .map(|(p, v)| p * v)
                    .sum::<f64>();
            if q < best_q {
                best_q = q;
                best_a = a;
            }
        }
        greedy.push(best_a);
    }

    // Exact evaluation of the greedy policy closes the value-iteration gap.
    let kernel: Vec<Vec<f64>> = (0..s_count)
        .map(|s| mdp.eff_cont[s][greedy[s]].clone())
        .collect();
    let reward: Vec<f64> = (0..s_count).map(|s| mdp.eff_cost[s][greedy[s]]).collect();
    let exact = solve_values(&kernel, &reward)?;
    let value_at_init = exact
        .iter()
        .zip(game.init_dist())
        .map(|(v, mu)| v * mu)
        .sum();
    let policy = PolicyTable::new(
        greedy
            .iter()
            .map(|&a| Simplex::point_mass(m_i, a))
            .collect(),
    )?;
    Ok((value_at_init, policy))
}

/// Evaluates a deterministic policy of player `i` (one action per state) in
/// the induced MDP. Used for hindsight comparators.
pub fn induced_policy_value(
    game: &MarkovGame,
    mdp: &InducedMdp,
    deterministic: &[usize],
) -> Result<f64> {
    let s_count = game.num_states();
    let kernel: Vec<Vec<f64>> = (0..s_count)
        .map(|s| mdp.eff_cont[s][deterministic[s]].clone())
        .collect();
    let reward: Vec<f64> = (0..s_count)
        .map(|s| mdp.eff_cost[s][deterministic[s]])
        .collect();
    let values = solve_values(&kernel, &reward)?;
    Ok(values
        .iter()
        .zip(game.init_dist())
        .map(|(v, mu)| v * mu)
        .sum())
}

/// Expected visit counts `d = mu0 + M^T d`.
pub fn occupancy_measure(game: &MarkovGame, policies: &[PolicyTable]) -> Result<OccupancyMeasure> {
    game.check_policies(policies)?;
    let (kernel, _) = policy_pass(game, policies);
    let s_count = game.num_states();
    let mut system = vec![vec![0.0; s_count]; s_count];
    for s in 0..s_count {
        for s2 in 0..s_count {
            // Transposed kernel.
            system[s][s2] = if s == s2 { 1.0 } else { 0.0 } - kernel[s2][s];
        }
    }
    let visits = linalg::solve(&system, game.init_dist())?;
    let d_infinity = if game.init_dist().iter().all(|m| *m > 0.0) {
        visits
            .iter()
            .zip(game.init_dist())
            .map(|(d, mu)| d / mu)
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(OccupancyMeasure { visits, d_infinity })
}

/// Direct-parametrization policy gradient `g[s][a] = d(s) * Qbar_i(s, a)`,
/// where `Qbar` marginalizes the opponents at each state.
pub fn exact_policy_gradient(
    game: &MarkovGame,
    policies: &[PolicyTable],
    i: usize,
) -> Result<Vec<Vec<f64>>> {
    let mdp = induced_mdp(game, policies, i)?;
    let table = value_function(game, policies)?;
    let occupancy = occupancy_measure(game, policies)?;
    let s_count = game.num_states();
    let m_i = game.action_counts()[i];
    let mut grad = vec![vec![0.0; m_i]; s_count];
    for s in 0..s_count {
        for a in 0..m_i {
            let q_bar = mdp.eff_cost[s][a]
                + mdp.eff_cont[s][a]
                    .iter()
                    .zip(&table.values[i])
                    .map(|(p, v)| p * v)
                    .sum::<f64>();
            grad[s][a] = occupancy.visits[s] * q_bar;
        }
    }
    Ok(grad)
}

/// Per-player Nash gaps `V_i(pi) - min_{pi_i} V_i(pi_i, pi_{-i})` and the max.
pub fn nash_gap(game: &MarkovGame, policies: &[PolicyTable]) -> Result<(f64, Vec<f64>)> {
    let table = value_function(game, policies)?;
    let mut gaps = Vec::with_capacity(game.num_players());
    for i in 0..game.num_players() {
        let (best, _) = best_response_value(game, policies, i)?;
        gaps.push(table.value_at_init[i] - best);
    }
    let max = gaps.iter().cloned().fold(0.0f64, f64::max);
    Ok((max, gaps))
}

/// Frank-Wolfe gap over the product of per-state simplices; the linear
/// maximization decomposes per state.
pub fn fw_gap(game: &MarkovGame, policies: &[PolicyTable]) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..game.num_players() {
        let grad = exact_policy_gradient(game, policies, i)?;
        for (s, row) in grad.iter().enumerate() {
            let current: f64 = policies[i]
                .row(s)
                .probs()
                .iter()
                .zip(row)
                .map(|(p, g)| p * g)
                .sum();
            let best = row.iter().cloned().fold(f64::INFINITY, f64::min);
            total += current - best;
        }
    }
    Ok(total)
}
