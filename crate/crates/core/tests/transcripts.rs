//! Hand-stepped transcripts: the learners' iterate sequences are replayed
//! against inline re-executions of the update rules sharing only the rng
//! stream derivation and the categorical sampling primitive.

#![allow(clippy::needless_range_loop)]

use fwexplore::estimators::{importance_sampling_full, recursive_blend, RecursiveGrad};
use fwexplore::games::{
    random_potential_game, CongestionGame, Game, JointTensor, MarkovGame, NoiseModel,
    NormalFormPotentialGame,
};
use fwexplore::learners::{
    eta_pg, rho_pg, run_learning, FeedbackKind, InitKind, LearnerKind, MpgLearner, PgLearner,
    RunParams, ScheduleConfig, ScheduleFamily,
};
use fwexplore::strategies::{argmin_index, PolytopePoint, Simplex};

fn two_by_two() -> NormalFormPotentialGame {
    let shared = JointTensor::new(vec![2, 2], vec![0.15, 0.85, 0.7, 0.35]).unwrap();
    NormalFormPotentialGame::new(
        vec![2, 2],
        vec![shared.clone(), shared.clone()],
        Some(shared),
        NoiseModel::Bernoulli,
    )
    .unwrap()
}

#[test]
fn pg_learner_matches_hand_trace() {
    let game = two_by_two();
    let seed = 12345;
    let mu = 0.2;
    let mut learner = PgLearner::new(&game, LearnerKind::FwExplore, InitKind::Uniform, seed);

    // Inline re-execution of the update rules with the same draws.
    let mut strategies = [Simplex::uniform(2), Simplex::uniform(2)];
    let mut directions = [RecursiveGrad::zeros(2), RecursiveGrad::zeros(2)];
    let mut streams = vec![
        fwexplore::rng::player_stream(seed, 0),
        fwexplore::rng::player_stream(seed, 1),
    ];

    for t in 1..=3usize {
        let eta = eta_pg(t, 2);
        let rho = rho_pg(t, 2, 2, mu);
        learner.step(&game, eta, rho, mu).unwrap();

        // Mix, sample both actions, then sample both costs, in player order.
        let explored: Vec<Simplex> = strategies
            .iter()
            .map(|p| p.mix_with_uniform(mu).unwrap())
            .collect();
        let played: Vec<usize> = explored
            .iter()
            .zip(&mut streams)
            .map(|(p, rng)| p.sample(rng))
            .collect();
        let costs: Vec<f64> = (0..2)
            .map(|i| {
                game.noise()
                    .sample(game.cost(i, &played), &mut streams[i])
            })
            .collect();
        for i in 0..2 {
            let est = importance_sampling_full(costs[i], played[i], &explored[i]).unwrap();
            directions[i] = recursive_blend(&directions[i], &est, rho).unwrap();
            let vertex = argmin_index(&directions[i].d).unwrap();
            strategies[i] = strategies[i].fw_update(vertex, eta).unwrap();
        }

        for i in 0..2 {
            for (a, b) in learner.strategies[i].probs().iter().zip(strategies[i].probs()) {
                assert!(
                    (a - b).abs() < 1e-15,
                    "t = {t}, player {i}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn congestion_learner_matches_hand_trace() {
    let game = CongestionGame::new(
        2,
        2,
        1,
        vec![vec![vec![0], vec![1]], vec![vec![0], vec![1]]],
        vec![vec![0.0, 0.3, 0.6], vec![0.0, 0.2, 0.9]],
        NoiseModel::Deterministic,
    )
    .unwrap();
    let seed = 777;
    let mu = 0.05;
    let coef = 1.0;
    let mut learner = fwexplore::learners::CongestionLearner::new(
        &game,
        FeedbackKind::SemiBandit,
        InitKind::Uniform,
        Some(coef),
        seed,
    )
    .unwrap();

    // Inline trace.
    let d = 2;
    let cover: Vec<PolytopePoint> = (0..2)
        .map(|i| {
            fwexplore::strategies::covering_exploration_point(d, game.action_set(i)).unwrap()
        })
        .collect();
    let mut points: Vec<PolytopePoint> = (0..2)
        .map(|i| {
            let atoms = game
                .action_set(i)
                .iter()
                .map(|r| fwexplore::strategies::Atom {
                    resources: r.clone(),
                    weight: 0.5,
                })
                .collect();
            PolytopePoint::from_atoms(d, atoms).unwrap()
        })
        .collect();
    let mut directions = [RecursiveGrad::zeros(d), RecursiveGrad::zeros(d)];
    let mut streams = vec![
        fwexplore::rng::player_stream(seed, 0),
        fwexplore::rng::player_stream(seed, 1),
    ];

    for t in 1..=3usize {
        let (eta, rho) =
            fwexplore::learners::schedules_congestion(t, 2, d, mu, fwexplore::learners::CongestionFeedback::SemiBandit);
        learner.step(&game, eta, rho, mu).unwrap();

        let explored: Vec<PolytopePoint> = points
            .iter()
            .zip(&cover)
            .map(|(x, c)| x.mix_exploration(mu, coef, c).unwrap())
            .collect();
        let played: Vec<Vec<usize>> = explored
            .iter()
            .zip(&mut streams)
            .map(|(y, rng)| y.sample(rng).resources.clone())
            .collect();
        let mut loads = vec![0usize; d];
        for strat in &played {
            for &e in strat {
                loads[e] += 1;
            }
        }
        for i in 0..2 {
            let observed: Vec<(usize, f64)> = played[i]
                .iter()
                .map(|&e| {
                    (
                        e,
                        game.noise()
                            .sample(game.facility_cost(e, loads[e]), &mut streams[i]),
                    )
                })
                .collect();
            let est =
                fwexplore::estimators::semi_bandit_estimate(&observed, explored[i].dense())
                    .unwrap();
            directions[i] = recursive_blend(&directions[i], &est, rho).unwrap();
            let best = fwexplore::strategies::linear_min_strategy(
                &directions[i].d,
                game.action_set(i),
            )
            .unwrap();
            points[i] = points[i]
                .fw_update(&game.action_set(i)[best].clone(), eta)
                .unwrap();
        }

        for i in 0..2 {
            for (a, b) in learner.points[i].dense().iter().zip(points[i].dense()) {
                assert!((a - b).abs() < 1e-15, "t = {t}, player {i}");
            }
        }
    }
}

/// A single-state Markov game with immediate stopping reduces to the
/// one-shot learner: same iterates from the same seed.
#[test]
fn single_state_markov_reduces_to_one_shot() {
    let mut rng = fwexplore::rng::stream(31337, 0);
    let one_shot = random_potential_game(&[3, 2], NoiseModel::Deterministic, &mut rng).unwrap();
    let joint: usize = 6;
    let costs: Vec<Vec<Vec<f64>>> = (0..2)
        .map(|i| {
            vec![(0..joint)
                .map(|flat| {
                    let a = vec![flat / 2, flat % 2];
                    one_shot.cost(i, &a)
                })
                .collect()]
        })
        .collect();
    let markov = MarkovGame::new(
        1,
        vec![3, 2],
        costs,
        vec![vec![vec![1.0]; joint]],
        vec![vec![1.0; joint]],
        vec![1.0],
        None,
        NoiseModel::Deterministic,
    )
    .unwrap();

    let seed = 99;
    let mu = 0.15;
    let mut pg = PgLearner::new(&one_shot, LearnerKind::FwExplore, InitKind::Uniform, seed);
    let mut mpg = MpgLearner::new(&markov, LearnerKind::FwExplore, InitKind::Uniform, 1, seed);
    for t in 1..=5usize {
        let eta = eta_pg(t, 2);
        let rho = rho_pg(t, 2, 3, mu);
        pg.step(&one_shot, eta, rho, mu).unwrap();
        mpg.step(&markov, eta, rho, mu).unwrap();
        for i in 0..2 {
            let a = pg.strategies[i].probs();
            let b = mpg.policies[i].row(0).probs();
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12, "t = {t}, player {i}: {x} vs {y}");
            }
        }
    }
}

/// With exact gradients (rho = 1 replaced by directly preloading the exact
/// gradient each step) and no exploration, the potential decreases up to the
/// smoothness slack eta^2 n L / 2.
#[test]
fn exact_gradient_descent_decreases_potential() {
    let mut rng = fwexplore::rng::stream(271828, 0);
    let game = random_potential_game(&[3, 3, 2], NoiseModel::Deterministic, &mut rng).unwrap();
    let smoothness = fwexplore::evaluation::estimate_smoothness(&game, 64, &mut rng).unwrap();
    let n = 3;
    let mut profile: Vec<Simplex> = game
        .action_counts()
        .iter()
        .map(|&m| Simplex::uniform(m))
        .collect();
    let mut previous = game.expected_potential(&profile).unwrap();
    for t in 1..=60usize {
        let eta = eta_pg(t, n);
        let mut next = profile.clone();
        for i in 0..n {
            let grad =
                fwexplore::evaluation::normal_form::grad_potential(&game, &profile, i).unwrap();
            let vertex = argmin_index(&grad).unwrap();
            next[i] = profile[i].fw_update(vertex, eta).unwrap();
        }
        profile = next;
        let value = game.expected_potential(&profile).unwrap();
        let slack = eta * eta * n as f64 * smoothness / 2.0;
        assert!(
            value <= previous + slack + 1e-12,
            "t = {t}: {value} > {previous} + {slack}"
        );
        previous = value;
    }
}

/// Identical (seed, config) pairs give identical iterate sequences; the
/// explored profiles logged by the runner follow the same draw path.
#[test]
fn runner_transcript_is_reproducible() {
    let mut rng = fwexplore::rng::stream(515, 0);
    let game = Game::NormalForm(
        random_potential_game(&[2, 2], NoiseModel::Bernoulli, &mut rng).unwrap(),
    );
    let mut params = RunParams::new(
        LearnerKind::FwExplore,
        FeedbackKind::FullBandit,
        ScheduleConfig::preset(ScheduleFamily::PotentialGame),
    );
    params.t_max = 20;
    params.seed = 4;
    let a = run_learning(&game, &params).unwrap();
    let b = run_learning(&game, &params).unwrap();
    assert_eq!(a.strategies.len(), b.strategies.len());
    for (x, y) in a.strategies.iter().zip(&b.strategies) {
        assert_eq!(x, y);
    }
}
