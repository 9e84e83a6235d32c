//! Executes a learning run: iterates a learner, evaluates iterates exactly
//! at a configurable cadence, and assembles the full log with regret and
//! distance-to-final post-passes.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{congestion_eval, markov_eval, normal_form as nf_eval, regret};
use crate::games::Game;
use crate::learners::{
    CongestionLearner, FeedbackKind, InitKind, LearnerKind, MpgLearner, PgLearner,
    ResolvedSchedule, ScheduleConfig, TrajectoryCredit,
};
use crate::strategies::{l1_distance, PolicyTable, Profile, Simplex};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunParams {
    pub learner: LearnerKind,
    pub feedback: FeedbackKind,
    pub schedule: ScheduleConfig,
    pub t_max: usize,
    pub seed: u64,
    /// Exact evaluation cadence: iterate k is evaluated when
    /// `(k - 1) % eval_every == 0`; the final iterate is always evaluated.
    pub eval_every: usize,
    /// Trajectories averaged per update in Markov games.
    pub trajectories_per_update: usize,
    /// Polytope exploration coefficient; defaults to the resource count.
    pub explore_coef: Option<f64>,
    /// Initial strategy draw.
    #[serde(default)]
    pub init: InitKind,
    /// Credit assignment for trajectory gradients (Markov games).
    #[serde(default)]
    pub trajectory_credit: TrajectoryCredit,
}

impl RunParams {
    pub fn new(learner: LearnerKind, feedback: FeedbackKind, schedule: ScheduleConfig) -> Self {
        RunParams {
            learner,
            feedback,
            schedule,
            t_max: 100,
            seed: 0,
            eval_every: 1,
            trajectories_per_update: 1,
            explore_coef: None,
            init: InitKind::Uniform,
            trajectory_credit: TrajectoryCredit::RewardToGo,
        }
    }

    fn validate(&self, game: &Game) -> Result<()> {
        if self.eval_every == 0 {
            return Err(Error::Config("eval_every must be >= 1".to_string()));
        }
        if self.trajectories_per_update == 0 {
            return Err(Error::Config(
                "trajectories_per_update must be >= 1".to_string(),
            ));
        }
        let compatible = matches!(
            (game, self.learner, self.feedback),
            (Game::NormalForm(_), _, FeedbackKind::FullBandit)
                | (Game::Congestion(_), LearnerKind::FwExplore, FeedbackKind::SemiBandit)
                | (Game::Congestion(_), LearnerKind::FwExplore, FeedbackKind::BanditLinear)
                | (Game::Markov(_), _, FeedbackKind::Trajectory)
        );
        if !compatible {
            return Err(Error::Config(format!(
                "learner {:?} with feedback {:?} does not fit a {} game",
                self.learner,
                self.feedback,
                game.kind_name()
            )));
        }
        Ok(())
    }
}

/// Exact metrics of one evaluated iterate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub nash_gap: f64,
    pub fw_gap: f64,
    pub expected_costs: Vec<f64>,
}

/// One logged row: iterate index, schedule values, exact metrics on the
/// un-mixed iterate and on the explored iterate, and post-pass cumulative
/// columns.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRow {
    pub t: usize,
    pub eta: f64,
    pub rho: f64,
    pub mu: f64,
    pub nash_gap: f64,
    pub fw_gap: f64,
    pub nash_gap_explored: f64,
    pub fw_gap_explored: f64,
    /// Expected cost per player on the explored (played) iterate.
    pub expected_costs: Vec<f64>,
    pub cum_nash_regret: f64,
    pub cum_individual_regret: Vec<f64>,
    pub l1_to_final: f64,
}

/// A full run transcript. Strategy snapshots are kept for every iteration so
/// distance-to-final curves do not depend on the evaluation cadence.
#[derive(Clone, Debug)]
pub struct RunLog {
    pub params: RunParams,
    pub game_kind: String,
    pub num_players: usize,
    pub mu: f64,
    pub rows: Vec<RunRow>,
    /// `strategies[k]` is the un-mixed iterate with index k+1 (1-based).
    pub strategies: Vec<Profile>,
    /// Explored profile of every logged row with `t <= t_max` (the played
    /// ones), in row order.
    pub played_profiles: Vec<Profile>,
    /// Per-iteration L1 distance of the un-mixed iterate to the final one.
    pub l1_to_final: Vec<f64>,
    pub final_strategy: Profile,
    /// Wall-clock duration; reported on stderr, never serialized, so output
    /// files stay byte-deterministic.
    pub elapsed: Duration,
}

#[allow(clippy::large_enum_variant)]
enum LearnerDriver {
    Pg(PgLearner),
    Mpg(MpgLearner),
    Congestion(CongestionLearner),
}

impl LearnerDriver {
    fn build(game: &Game, params: &RunParams) -> Result<Self> {
        Ok(match game {
            Game::NormalForm(g) => LearnerDriver::Pg(PgLearner::new(
                g,
                params.learner,
                params.init,
                params.seed,
            )),
            Game::Markov(g) => LearnerDriver::Mpg(
                MpgLearner::new(
                    g,
                    params.learner,
                    params.init,
                    params.trajectories_per_update,
                    params.seed,
                )
                .with_credit(params.trajectory_credit),
            ),
            Game::Congestion(g) => LearnerDriver::Congestion(CongestionLearner::new(
                g,
                params.feedback,
                params.init,
                params.explore_coef,
                params.seed,
            )?),
        })
    }

    fn snapshot(&self) -> Profile {
        match self {
            LearnerDriver::Pg(l) => Profile::Mixed {
                players: l.strategies.clone(),
            },
            LearnerDriver::Mpg(l) => Profile::Policies {
                players: l.policies.clone(),
            },
            LearnerDriver::Congestion(l) => Profile::Fractional {
                players: l.points.clone(),
            },
        }
    }

    fn explored_snapshot(&self, mu: f64) -> Result<Profile> {
        Ok(match self {
            LearnerDriver::Pg(l) => Profile::Mixed {
                players: l
                    .strategies
                    .iter()
                    .map(|p| p.mix_with_uniform(mu))
                    .collect::<Result<Vec<Simplex>>>()?,
            },
            LearnerDriver::Mpg(l) => Profile::Policies {
                players: l
                    .policies
                    .iter()
                    .map(|p| p.mix_with_uniform(mu))
                    .collect::<Result<Vec<PolicyTable>>>()?,
            },
            LearnerDriver::Congestion(l) => Profile::Fractional {
                players: l.explored(mu)?,
            },
        })
    }

    fn step(&mut self, game: &Game, eta: f64, rho: f64, mu: f64) -> Result<()> {
        match (self, game) {
            (LearnerDriver::Pg(l), Game::NormalForm(g)) => {
                l.step(g, eta, rho, mu)?;
            }
            (LearnerDriver::Mpg(l), Game::Markov(g)) => {
                l.step(g, eta, rho, mu)?;
            }
            (LearnerDriver::Congestion(l), Game::Congestion(g)) => {
                l.step(g, eta, rho, mu)?;
            }
            _ => unreachable!("driver is built from the same game"),
        }
        Ok(())
    }

    fn check_finite(&self) -> Result<()> {
        let finite = match self {
            LearnerDriver::Pg(l) => l
                .strategies
                .iter()
                .all(|p| p.probs().iter().all(|v| v.is_finite())),
            LearnerDriver::Mpg(l) => l.policies.iter().all(|p| {
                p.rows()
                    .iter()
                    .all(|r| r.probs().iter().all(|v| v.is_finite()))
            }),
            LearnerDriver::Congestion(l) => l
                .points
                .iter()
                .all(|p| p.dense().iter().all(|v| v.is_finite())),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::NumericalDivergence(
                "learner state contains non-finite entries".to_string(),
            ))
        }
    }
}

/// Exact metrics of one profile.
pub fn evaluate_profile(game: &Game, profile: &Profile) -> Result<EvalMetrics> {
    match (game, profile) {
        (Game::NormalForm(g), Profile::Mixed { players }) => {
            let (nash_gap, _) = nf_eval::nash_gap(g, players)?;
            let fw_gap = nf_eval::fw_gap(g, players)?;
            let expected_costs = (0..g.num_players())
                .map(|i| nf_eval::expected_cost(g, players, i))
                .collect::<Result<_>>()?;
            Ok(EvalMetrics {
                nash_gap,
                fw_gap,
                expected_costs,
            })
        }
        (Game::Congestion(g), Profile::Fractional { players }) => {
            let marginals: Vec<Vec<f64>> =
                players.iter().map(|p| p.dense().to_vec()).collect();
            let (nash_gap, _) = congestion_eval::nash_gap(g, &marginals)?;
            let fw_gap = congestion_eval::fw_gap(g, &marginals)?;
            let expected_costs = (0..g.num_players())
                .map(|i| congestion_eval::expected_cost(g, &marginals, i))
                .collect::<Result<_>>()?;
            Ok(EvalMetrics {
                nash_gap,
                fw_gap,
                expected_costs,
            })
        }
        (Game::Markov(g), Profile::Policies { players }) => {
            let (nash_gap, _) = markov_eval::nash_gap(g, players)?;
            let fw_gap = markov_eval::fw_gap(g, players)?;
            let table = markov_eval::value_function(g, players)?;
            Ok(EvalMetrics {
                nash_gap,
                fw_gap,
                expected_costs: table.value_at_init,
            })
        }
        _ => Err(Error::ShapeMismatch(
            "profile representation does not match game kind".to_string(),
        )),
    }
}

/// Runs `t_max` iterations of the configured learner on `game`,
/// bit-reproducible given `(seed, params)`.
pub fn run_learning(game: &Game, params: &RunParams) -> Result<RunLog> {
    params.validate(game)?;
    let started = Instant::now();
    let schedule: ResolvedSchedule = params.schedule.resolve(game, params.t_max)?;
    let mu = schedule.mu;
    let mut driver = LearnerDriver::build(game, params)?;

    let mut strategies = Vec::with_capacity(params.t_max + 1);
    let mut rows: Vec<RunRow> = Vec::new();
    let mut played_profiles: Vec<Profile> = Vec::new();

    strategies.push(driver.snapshot());
    let should_eval = |k: usize| (k - 1).is_multiple_of(params.eval_every);

    // Evaluate iterate k (1-based). Schedule columns carry the values the
    // step from iterate k will use.
    let log_row = |driver: &LearnerDriver,
                       k: usize,
                       played: &mut Vec<Profile>,
                       rows: &mut Vec<RunRow>|
     -> Result<()> {
        let plain = driver.snapshot();
        let explored = driver.explored_snapshot(mu)?;
        let metrics = evaluate_profile(game, &plain)?;
        let metrics_explored = evaluate_profile(game, &explored)?;
        if k <= params.t_max {
            played.push(explored);
        }
        rows.push(RunRow {
            t: k,
            eta: schedule.eta_at(k),
            rho: schedule.rho_at(k),
            mu,
            nash_gap: metrics.nash_gap,
            fw_gap: metrics.fw_gap,
            nash_gap_explored: metrics_explored.nash_gap,
            fw_gap_explored: metrics_explored.fw_gap,
            expected_costs: metrics_explored.expected_costs,
            cum_nash_regret: 0.0,
            cum_individual_regret: Vec::new(),
            l1_to_final: 0.0,
        });
        Ok(())
    };

    if params.t_max == 0 || should_eval(1) {
        log_row(&driver, 1, &mut played_profiles, &mut rows)?;
    }
    for t in 1..=params.t_max {
        let eta = schedule.eta_at(t);
        let rho = schedule.rho_at(t);
        driver.step(game, eta, rho, mu)?;
        driver.check_finite()?;
        let k = t + 1;
        strategies.push(driver.snapshot());
        if k <= params.t_max && should_eval(k) {
            log_row(&driver, k, &mut played_profiles, &mut rows)?;
        }
    }
    if params.t_max > 0 {
        // Final iterate, always evaluated.
        log_row(&driver, params.t_max + 1, &mut played_profiles, &mut rows)?;
    }

    // Post-pass: regret over the played (explored) rows.
    let series = regret::regret_accumulators(game, &played_profiles)?;
    let mut played_idx = 0;
    let mut last_nash = 0.0;
    let mut last_individual = vec![0.0; game.num_players()];
    for row in &mut rows {
        if row.t <= params.t_max {
            last_nash = series.nash[played_idx];
            last_individual = series.individual[played_idx].clone();
            played_idx += 1;
        }
        row.cum_nash_regret = last_nash;
        row.cum_individual_regret = last_individual.clone();
    }

    // Post-pass: distance of every iterate to the final strategy.
    let final_strategy = strategies.last().cloned().expect("at least one snapshot");
    let l1_to_final: Vec<f64> = strategies
        .iter()
        .map(|s| l1_distance(s, &final_strategy))
        .collect::<Result<_>>()?;
    for row in &mut rows {
        row.l1_to_final = l1_to_final[row.t - 1];
    }

    Ok(RunLog {
        params: params.clone(),
        game_kind: game.kind_name().to_string(),
        num_players: game.num_players(),
        mu,
        rows,
        strategies,
        played_profiles,
        l1_to_final,
        final_strategy,
        elapsed: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{random_potential_game, NoiseModel};
    use crate::learners::ScheduleFamily;

    fn small_game() -> Game {
        let mut rng = crate::rng::stream(101, 0);
        Game::NormalForm(
            random_potential_game(&[3, 3], NoiseModel::Bernoulli, &mut rng).unwrap(),
        )
    }

    fn params(t_max: usize, eval_every: usize) -> RunParams {
        let mut p = RunParams::new(
            LearnerKind::FwExplore,
            FeedbackKind::FullBandit,
            ScheduleConfig::preset(ScheduleFamily::PotentialGame),
        );
        p.t_max = t_max;
        p.eval_every = eval_every;
        p.seed = 42;
        p
    }

    #[test]
    fn zero_iterations_logs_single_row() {
        let game = small_game();
        let log = run_learning(&game, &params(0, 1)).unwrap();
        assert_eq!(log.rows.len(), 1);
        assert_eq!(log.rows[0].t, 1);
        assert_eq!(log.strategies.len(), 1);
    }

    #[test]
    fn row_count_contract() {
        let game = small_game();
        for (t_max, eval_every) in [(10usize, 1usize), (10, 3), (9, 4), (8, 4), (4, 4)] {
            let log = run_learning(&game, &params(t_max, eval_every)).unwrap();
            let expect = t_max.div_ceil(eval_every) + 1;
            assert_eq!(
                log.rows.len(),
                expect,
                "t_max {t_max} eval_every {eval_every}"
            );
            assert_eq!(log.strategies.len(), t_max + 1);
            // Rows are monotone in t and end at the final iterate.
            assert!(log.rows.windows(2).all(|w| w[0].t < w[1].t));
            assert_eq!(log.rows.last().unwrap().t, t_max + 1);
        }
    }

    #[test]
    fn identical_seeds_give_identical_logs() {
        let game = small_game();
        let a = run_learning(&game, &params(50, 5)).unwrap();
        let b = run_learning(&game, &params(50, 5)).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.t, rb.t);
            assert_eq!(ra.nash_gap.to_bits(), rb.nash_gap.to_bits());
            assert_eq!(ra.cum_nash_regret.to_bits(), rb.cum_nash_regret.to_bits());
            assert_eq!(ra.l1_to_final.to_bits(), rb.l1_to_final.to_bits());
        }
    }

    #[test]
    fn different_seeds_differ() {
        let game = small_game();
        let mut p2 = params(50, 5);
        p2.seed = 43;
        let a = run_learning(&game, &params(50, 5)).unwrap();
        let b = run_learning(&game, &p2).unwrap();
        let same = a
            .rows
            .iter()
            .zip(&b.rows)
            .all(|(x, y)| x.nash_gap.to_bits() == y.nash_gap.to_bits());
        assert!(!same);
    }

    #[test]
    fn gap_inequality_on_logged_rows() {
        let game = small_game();
        let log = run_learning(&game, &params(200, 10)).unwrap();
        for row in &log.rows {
            assert!(row.nash_gap <= row.fw_gap + 1e-12);
            assert!(row.nash_gap_explored <= row.fw_gap_explored + 1e-12);
        }
    }

    #[test]
    fn cumulative_columns_are_nondecreasing() {
        let game = small_game();
        let log = run_learning(&game, &params(100, 1)).unwrap();
        let mut prev = 0.0;
        for row in &log.rows {
            assert!(row.cum_nash_regret >= prev - 1e-12);
            prev = row.cum_nash_regret;
        }
        // The final row repeats the last played cumulative value.
        let last_played = &log.rows[log.rows.len() - 2];
        let final_row = log.rows.last().unwrap();
        assert_eq!(final_row.cum_nash_regret, last_played.cum_nash_regret);
    }

    #[test]
    fn incompatible_pairs_are_rejected() {
        let game = small_game();
        let mut p = params(10, 1);
        p.feedback = FeedbackKind::Trajectory;
        assert!(matches!(
            run_learning(&game, &p),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn l1_to_final_ends_at_zero() {
        let game = small_game();
        let log = run_learning(&game, &params(30, 3)).unwrap();
        assert_eq!(log.l1_to_final.len(), 31);
        assert!(log.l1_to_final.last().unwrap().abs() < 1e-15);
        assert!(log.rows.last().unwrap().l1_to_final.abs() < 1e-15);
    }
}
