//! The Frank-Wolfe-with-exploration learners for the three game families,
//! plus the projected-SGD baseline and the run orchestrator.

mod runner;
mod schedules;

pub use runner::{evaluate_profile, run_learning, EvalMetrics, RunLog, RunParams, RunRow};
pub use schedules::{
    eta_mpg, eta_pg, mu_congestion, mu_mpg, mu_pg, rho_mpg, rho_pg, schedules_congestion,
    CongestionFeedback, ParamSchedule, ResolvedSchedule, ScheduleConfig, ScheduleFamily,
    DEFAULT_ALPHA, DEFAULT_BETA,
};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    bandit_linear_estimate, importance_sampling_full, recursive_blend, reinforce_episode_total,
    reinforce_estimate, second_moment_matrix, semi_bandit_estimate, EstimatorKind, GradEstimate,
    RecursiveGrad, DEFAULT_RANK_TOL,
};
use crate::games::{sample_episode, CongestionGame, Episode, MarkovGame, NormalFormPotentialGame};
use crate::rng;
use crate::strategies::{
    argmin_index, covering_exploration_point, linear_min_strategy, simplex_projection,
    PolicyTable, PolytopePoint, Simplex,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    FwExplore,
    ProjectedSgd,
}

/// How the initial strategies are drawn. Uniform keeps all players
/// symmetric; the Dirichlet draw breaks ties between interchangeable
/// players, which coordination games need to escape lock-step dynamics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    #[default]
    Uniform,
    RandomDirichlet,
}

fn dirichlet_row(m: usize, rng: &mut impl rand::Rng) -> Simplex {
    let raw: Vec<f64> = (0..m)
        .map(|_| -(rng.gen::<f64>().max(f64::MIN_POSITIVE)).ln())
        .collect();
    let sum: f64 = raw.iter().sum();
    Simplex::new(raw.iter().map(|v| v / sum).collect()).expect("dirichlet draw is a simplex")
}

/// How trajectory gradients assign credit. The causal (reward-to-go) form
/// is the unbiased one under the direct parametrization and the default;
/// the episode-total form multiplies the whole cost sum into every visited
/// score and is kept as a selectable alternative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryCredit {
    #[default]
    RewardToGo,
    EpisodeTotal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    FullBandit,
    SemiBandit,
    BanditLinear,
    Trajectory,
}

/// Learner state for normal-form potential games: one mixed strategy and one
/// recursive gradient per player, with per-player rng streams.
pub struct PgLearner {
    pub strategies: Vec<Simplex>,
    pub recursive: Vec<RecursiveGrad>,
    pub t: usize,
    kind: LearnerKind,
    streams: Vec<ChaCha8Rng>,
}

/// What one iteration played and observed.
#[derive(Clone, Debug)]
pub struct PgStepRecord {
    pub explored: Vec<Simplex>,
    pub played: Vec<usize>,
    pub costs: Vec<f64>,
}

impl PgLearner {
    pub fn new(game: &NormalFormPotentialGame, kind: LearnerKind, init: InitKind, seed: u64) -> Self {
        let n = game.num_players();
        let mut streams: Vec<ChaCha8Rng> =
            (0..n).map(|i| rng::player_stream(seed, i)).collect();
        let strategies = game
            .action_counts()
            .iter()
            .zip(&mut streams)
            .map(|(&m, stream)| match init {
                InitKind::Uniform => Simplex::uniform(m),
                InitKind::RandomDirichlet => dirichlet_row(m, stream),
            })
            .collect();
        PgLearner {
            strategies,
            recursive: game
                .action_counts()
                .iter()
                .map(|&m| RecursiveGrad::zeros(m))
                .collect(),
            t: 1,
            kind,
            streams,
        }
    }

    /// Mixes, plays, estimates, blends, and takes the update step.
    pub fn step(
        &mut self,
        game: &NormalFormPotentialGame,
        eta: f64,
        rho: f64,
        mu: f64,
    ) -> Result<PgStepRecord> {
        let n = game.num_players();
        let explored: Vec<Simplex> = self
            .strategies
            .iter()
            .map(|p| p.mix_with_uniform(mu))
            .collect::<Result<_>>()?;
        let played: Vec<usize> = explored
            .iter()
            .zip(&mut self.streams)
            .map(|(p, rng)| p.sample(rng))
            .collect();
        let costs: Vec<f64> = (0..n)
            .map(|i| {
                game.noise()
                    .sample(game.cost(i, &played), &mut self.streams[i])
            })
            .collect();
        for i in 0..n {
            let estimate = importance_sampling_full(costs[i], played[i], &explored[i])?;
            match self.kind {
                LearnerKind::FwExplore => {
                    self.recursive[i] = recursive_blend(&self.recursive[i], &estimate, rho)?;
                    let vertex = argmin_index(&self.recursive[i].d)?;
                    self.strategies[i] = self.strategies[i].fw_update(vertex, eta)?;
                }
                LearnerKind::ProjectedSgd => {
                    let shifted: Vec<f64> = self.strategies[i]
                        .probs()
                        .iter()
                        .zip(&estimate.values)
                        .map(|(p, g)| p - eta * g)
                        .collect();
                    self.strategies[i] = simplex_projection(&shifted);
                }
            }
        }
        self.t += 1;
        Ok(PgStepRecord {
            explored,
            played,
            costs,
        })
    }
}

/// Learner state for Markov potential games.
pub struct MpgLearner {
    pub policies: Vec<PolicyTable>,
    pub recursive: Vec<RecursiveGrad>,
    pub t: usize,
    kind: LearnerKind,
    trajectories_per_update: usize,
    credit: TrajectoryCredit,
    streams: Vec<ChaCha8Rng>,
    env: ChaCha8Rng,
}

#[derive(Clone, Debug)]
pub struct MpgStepRecord {
    pub explored: Vec<PolicyTable>,
    pub episodes: Vec<Episode>,
}

impl MpgLearner {
    pub fn new(
        game: &MarkovGame,
        kind: LearnerKind,
        init: InitKind,
        trajectories_per_update: usize,
        seed: u64,
    ) -> Self {
        let n = game.num_players();
        let s = game.num_states();
        let mut streams: Vec<ChaCha8Rng> =
            (0..n).map(|i| rng::player_stream(seed, i)).collect();
        let policies = game
            .action_counts()
            .iter()
            .zip(&mut streams)
            .map(|(&m, stream)| match init {
                InitKind::Uniform => PolicyTable::uniform(s, m),
                InitKind::RandomDirichlet => PolicyTable::new(
                    (0..s).map(|_| dirichlet_row(m, stream)).collect(),
                )
                .expect("dirichlet rows form a policy"),
            })
            .collect();
        MpgLearner {
            policies,
            recursive: game
                .action_counts()
                .iter()
                .map(|&m| RecursiveGrad::zeros(s * m))
                .collect(),
            t: 1,
            kind,
            trajectories_per_update: trajectories_per_update.max(1),
            credit: TrajectoryCredit::RewardToGo,
            streams,
            env: rng::env_stream(seed),
        }
    }

    pub fn with_credit(mut self, credit: TrajectoryCredit) -> Self {
        self.credit = credit;
        self
    }

    pub fn step(
        &mut self,
        game: &MarkovGame,
        eta: f64,
        rho: f64,
        mu: f64,
    ) -> Result<MpgStepRecord> {
        let n = game.num_players();
        let explored: Vec<PolicyTable> = self
            .policies
            .iter()
            .map(|p| p.mix_with_uniform(mu))
            .collect::<Result<_>>()?;
        let mut episodes = Vec::with_capacity(self.trajectories_per_update);
        for _ in 0..self.trajectories_per_update {
            episodes.push(sample_episode(
                game,
                &explored,
                &mut self.streams,
                &mut self.env,
            )?);
        }
        for i in 0..n {
            let mut mean = vec![0.0; self.recursive[i].d.len()];
            for episode in &episodes {
                let est = match self.credit {
                    TrajectoryCredit::RewardToGo => {
                        reinforce_estimate(&episode.steps, i, &explored[i])?
                    }
                    TrajectoryCredit::EpisodeTotal => {
                        reinforce_episode_total(&episode.steps, i, &explored[i])?
                    }
                };
                for (acc, v) in mean.iter_mut().zip(&est.values) {
                    *acc += v / self.trajectories_per_update as f64;
                }
            }
            let estimate = GradEstimate {
                values: mean,
                kind: EstimatorKind::Reinforce,
            };
            let m = game.action_counts()[i];
            match self.kind {
                LearnerKind::FwExplore => {
                    self.recursive[i] = recursive_blend(&self.recursive[i], &estimate, rho)?;
                    // The linear minimization over the policy polytope
                    // decomposes per state row.
                    let vertices: Vec<usize> = (0..game.num_states())
                        .map(|s| argmin_index(&self.recursive[i].d[s * m..(s + 1) * m]))
                        .collect::<Result<_>>()?;
                    self.policies[i] = self.policies[i].fw_update(&vertices, eta)?;
                }
                LearnerKind::ProjectedSgd => {
                    let rows: Vec<Simplex> = (0..game.num_states())
                        .map(|s| {
                            let shifted: Vec<f64> = self.policies[i]
                                .row(s)
                                .probs()
                                .iter()
                                .zip(&estimate.values[s * m..(s + 1) * m])
                                .map(|(p, g)| p - eta * g)
                                .collect();
                            simplex_projection(&shifted)
                        })
                        .collect();
                    self.policies[i] = PolicyTable::new(rows)?;
                }
            }
        }
        self.t += 1;
        Ok(MpgStepRecord { explored, episodes })
    }
}

/// Learner state for congestion games on the strategy polytope.
pub struct CongestionLearner {
    pub points: Vec<PolytopePoint>,
    pub recursive: Vec<RecursiveGrad>,
    pub covers: Vec<PolytopePoint>,
    pub t: usize,
    feedback: FeedbackKind,
    explore_coef: f64,
    streams: Vec<ChaCha8Rng>,
}

#[derive(Clone, Debug)]
pub struct CongestionStepRecord {
    pub explored: Vec<PolytopePoint>,
    pub played: Vec<Vec<usize>>,
    pub total_costs: Vec<f64>,
}

impl CongestionLearner {
    /// `explore_coef` scales mu into the polytope mixing coefficient;
    /// the default is the resource count d.
    pub fn new(
        game: &CongestionGame,
        feedback: FeedbackKind,
        init: InitKind,
        explore_coef: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        if !matches!(feedback, FeedbackKind::SemiBandit | FeedbackKind::BanditLinear) {
            return Err(Error::Config(
                "congestion learner needs semi_bandit or bandit_linear feedback".to_string(),
            ));
        }
        let n = game.num_players();
        let d = game.num_resources();
        let mut streams: Vec<ChaCha8Rng> =
            (0..n).map(|i| rng::player_stream(seed, i)).collect();
        let covers: Vec<PolytopePoint> = (0..n)
            .map(|i| covering_exploration_point(d, game.action_set(i)))
            .collect::<Result<_>>()?;
        // Initial point: a mixture over each player's strategies.
        let points: Vec<PolytopePoint> = (0..n)
            .map(|i| {
                let set = game.action_set(i);
                let weights: Vec<f64> = match init {
                    InitKind::Uniform => vec![1.0 / set.len() as f64; set.len()],
                    InitKind::RandomDirichlet => {
                        dirichlet_row(set.len(), &mut streams[i]).probs().to_vec()
                    }
                };
                let atoms = set
                    .iter()
                    .zip(&weights)
                    .map(|(resources, &weight)| crate::strategies::Atom {
                        resources: resources.clone(),
                        weight,
                    })
                    .collect();
                PolytopePoint::from_atoms(d, atoms)
            })
            .collect::<Result<_>>()?;
        Ok(CongestionLearner {
            points,
            recursive: (0..n).map(|_| RecursiveGrad::zeros(d)).collect(),
            covers,
            t: 1,
            feedback,
            explore_coef: explore_coef.unwrap_or(d as f64),
            streams,
        })
    }

    pub fn explored(&self, mu: f64) -> Result<Vec<PolytopePoint>> {
        self.points
            .iter()
            .zip(&self.covers)
            .map(|(x, cover)| x.mix_exploration(mu, self.explore_coef, cover))
            .collect()
    }

    pub fn step(
        &mut self,
        game: &CongestionGame,
        eta: f64,
        rho: f64,
        mu: f64,
    ) -> Result<CongestionStepRecord> {
        let n = game.num_players();
        let d = game.num_resources();
        let explored = self.explored(mu)?;
        let played: Vec<Vec<usize>> = explored
            .iter()
            .zip(&mut self.streams)
            .map(|(y, rng)| y.sample(rng).resources.clone())
            .collect();

        let mut loads = vec![0usize; d];
        for strat in &played {
            for &e in strat {
                loads[e] += 1;
            }
        }

        let mut total_costs = Vec::with_capacity(n);
        for i in 0..n {
            let observed: Vec<(usize, f64)> = played[i]
                .iter()
                .map(|&e| {
                    let mean = game.facility_cost(e, loads[e]);
                    (e, game.noise().sample(mean, &mut self.streams[i]))
                })
                .collect();
            let total: f64 = observed.iter().map(|(_, c)| c).sum();
            total_costs.push(total);

            let estimate = match self.feedback {
                FeedbackKind::SemiBandit => {
                    semi_bandit_estimate(&observed, explored[i].dense())?
                }
                FeedbackKind::BanditLinear => {
                    let mat = second_moment_matrix(&explored[i], DEFAULT_RANK_TOL)?;
                    let mut indicator = vec![0.0; d];
                    for &e in &played[i] {
                        indicator[e] = 1.0;
                    }
                    bandit_linear_estimate(total, &indicator, &mat)?
                }
                _ => unreachable!("constructor restricts feedback kinds"),
            };
            self.recursive[i] = recursive_blend(&self.recursive[i], &estimate, rho)?;
            let best = linear_min_strategy(&self.recursive[i].d, game.action_set(i))?;
            self.points[i] =
                self.points[i].fw_update(&game.action_set(i)[best].clone(), eta)?;
        }
        self.t += 1;
        Ok(CongestionStepRecord {
            explored,
            played,
            total_costs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{random_potential_game, NoiseModel};

    #[test]
    fn single_action_game_is_fixed() {
        let mut rng = crate::rng::stream(5, 7);
        let game = random_potential_game(&[1], NoiseModel::Deterministic, &mut rng).unwrap();
        let mut learner = PgLearner::new(&game, LearnerKind::FwExplore, InitKind::Uniform, 3);
        for t in 1..10 {
            learner
                .step(&game, eta_pg(t, 1), rho_pg(t, 1, 1, 0.5), 0.5)
                .unwrap();
            assert_eq!(learner.strategies[0].probs(), &[1.0]);
        }
    }

    #[test]
    fn exact_gradient_moves_toward_best_response() {
        // mu = 0 and the recursive direction preloaded with the exact
        // gradient: the update must head to the argmin vertex.
        let mut rng = crate::rng::stream(6, 7);
        let game = random_potential_game(&[3, 3], NoiseModel::Deterministic, &mut rng).unwrap();
        let mut learner = PgLearner::new(&game, LearnerKind::FwExplore, InitKind::Uniform, 4);
        let profile = learner.strategies.clone();
        let grad = crate::evaluation::normal_form::grad_potential(&game, &profile, 0).unwrap();
        let best = argmin_index(&grad).unwrap();
        learner.recursive[0] = RecursiveGrad {
            d: grad,
            t_last: 0,
        };
        let before = learner.strategies[0].prob(best);
        // rho = 0 keeps the preloaded gradient; deterministic costs.
        let eta = 0.25;
        learner.step(&game, eta, 0.0, 0.0).unwrap();
        let after = learner.strategies[0].prob(best);
        assert!((after - ((1.0 - eta) * before + eta)).abs() < 1e-12);
    }

    #[test]
    fn sgd_projection_example() {
        // pi = (0.5, 0.5), g = (1, 0), eta = 0.1 -> project (0.4, 0.5).
        let shifted = [0.4, 0.5];
        let projected = simplex_projection(&shifted);
        assert!((projected.prob(0) - 0.45).abs() < 1e-12);
        assert!((projected.prob(1) - 0.55).abs() < 1e-12);
    }

    #[test]
    fn congestion_learner_single_player_semi_bandit() {
        // Deterministic costs, one player: the estimate on played resources
        // is c(e, 1) / y_e.
        let game = crate::games::CongestionGame::new(
            1,
            2,
            1,
            vec![vec![vec![0], vec![1]]],
            vec![vec![0.0, 0.4], vec![0.0, 0.6]],
            NoiseModel::Deterministic,
        )
        .unwrap();
        let mut learner =
            CongestionLearner::new(&game, FeedbackKind::SemiBandit, InitKind::Uniform, Some(1.0), 11).unwrap();
        let mu = 0.2;
        let explored = learner.explored(mu).unwrap();
        let record = learner.step(&game, 0.5, 1.0, mu).unwrap();
        let e = record.played[0][0];
        let expect = game.facility_cost(e, 1) / explored[0].dense()[e];
        assert!((learner.recursive[0].d[e] - expect).abs() < 1e-12);
    }

    #[test]
    fn learner_iterates_stay_feasible() {
        let mut rng = crate::rng::stream(21, 0);
        let game =
            crate::games::random_congestion_game(2, 3, 1, 1, NoiseModel::Bernoulli, &mut rng)
                .unwrap();
        let mut learner =
            CongestionLearner::new(&game, FeedbackKind::BanditLinear, InitKind::Uniform, None, 9).unwrap();
        let mu = mu_congestion(100, 2, 3, CongestionFeedback::Bandit);
        for t in 1..=100 {
            let (eta, rho) = schedules_congestion(t, 2, 3, mu, CongestionFeedback::Bandit);
            learner.step(&game, eta, rho, mu).unwrap();
            for point in &learner.points {
                let sum: f64 = point.atoms().iter().map(|a| a.weight).sum();
                assert!((sum - 1.0).abs() < 1e-9);
                assert!(point.atoms().len() <= 4);
                assert!(point.dense().iter().all(|x| (-1e-12..=1.0 + 1e-9).contains(x)));
            }
        }
    }
}
