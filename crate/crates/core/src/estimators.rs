//! One-sample gradient estimators and the recursive blend that forms the
//! learners' search direction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::EpisodeStep;
use crate::linalg;
use crate::strategies::{PolicyTable, PolytopePoint, Simplex};

/// A single-sample gradient estimate. Lengths follow the strategy
/// representation: `m_i` on the simplex, `d` on the polytope, and `S * m_i`
/// flattened state-major for policy tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradEstimate {
    pub values: Vec<f64>,
    pub kind: EstimatorKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    FullBanditSimplex,
    SemiBandit,
    BanditLinear,
    Reinforce,
}

/// The recursive direction `d^t = (1 - rho) d^{t-1} + rho * estimate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursiveGrad {
    pub d: Vec<f64>,
    pub t_last: usize,
}

impl RecursiveGrad {
    /// Zero initialization; the first blend is then mostly data when rho_1
    /// is large.
    pub fn zeros(len: usize) -> Self {
        RecursiveGrad {
            d: vec![0.0; len],
            t_last: 0,
        }
    }
}

/// Importance-sampled full-bandit estimate on the simplex: the observed cost
/// divided by the played action's probability, at that coordinate.
pub fn importance_sampling_full(
    cost: f64,
    played: usize,
    mixed: &Simplex,
) -> Result<GradEstimate> {
    let p = mixed.prob(played);
    if p <= 0.0 {
        return Err(Error::DivisionByZeroProb { coord: played });
    }
    let mut values = vec![0.0; mixed.len()];
    values[played] = cost / p;
    Ok(GradEstimate {
        values,
        kind: EstimatorKind::FullBanditSimplex,
    })
}

/// Semi-bandit estimate over resources: observed per-resource costs divided
/// by the resource marginals of the sampling point.
pub fn semi_bandit_estimate(
    observed: &[(usize, f64)],
    y_dense: &[f64],
) -> Result<GradEstimate> {
    let mut values = vec![0.0; y_dense.len()];
    for &(e, cost) in observed {
        let p = y_dense[e];
        if p <= 0.0 {
            return Err(Error::DivisionByZeroProb { coord: e });
        }
        values[e] = cost / p;
    }
    Ok(GradEstimate {
        values,
        kind: EstimatorKind::SemiBandit,
    })
}

/// The second-moment matrix `Sigma = E[a a^T]` of the sampling distribution,
/// with its pseudoinverse.
#[derive(Clone, Debug)]
pub struct SecondMomentMatrix {
    pub sigma: Vec<Vec<f64>>,
    pub pinv: Vec<Vec<f64>>,
    pub rank_tol: f64,
}

pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Computes `Sigma` exactly from the point's atoms and inverts it on its
/// range by symmetric eigendecomposition, zeroing eigenvalues below
/// `rank_tol * lambda_max`.
pub fn second_moment_matrix(point: &PolytopePoint, rank_tol: f64) -> Result<SecondMomentMatrix> {
    let d = point.dim();
    let mut sigma = vec![vec![0.0; d]; d];
    for atom in point.atoms() {
        for &e1 in &atom.resources {
            for &e2 in &atom.resources {
                sigma[e1][e2] += atom.weight;
            }
        }
    }
    if sigma.iter().flatten().all(|v| *v == 0.0) {
        return Err(Error::DegenerateDistribution);
    }
    let pinv = linalg::sym_pinv(&sigma, rank_tol);
    Ok(SecondMomentMatrix {
        sigma,
        pinv,
        rank_tol,
    })
}

/// Bandit-feedback linear estimate `cost * pinv(Sigma) * a`. The played
/// indicator must lie in the row space of `Sigma`, which holds whenever it
/// was drawn from the distribution that produced `Sigma`.
pub fn bandit_linear_estimate(
    total_cost: f64,
    played: &[f64],
    mat: &SecondMomentMatrix,
) -> Result<GradEstimate> {
    // Row-space check: Sigma pinv(Sigma) acts as identity on range(Sigma).
    let projected = linalg::mat_vec(&mat.sigma, &linalg::mat_vec(&mat.pinv, played));
    let norm = played.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    let residual = projected
        .iter()
        .zip(played)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if residual > 1e-6 * norm {
        return Err(Error::EstimatorInconsistent { residual });
    }
    let values = linalg::mat_vec(&mat.pinv, played)
        .into_iter()
        .map(|v| total_cost * v)
        .collect();
    Ok(GradEstimate {
        values,
        kind: EstimatorKind::BanditLinear,
    })
}

/// One-trajectory REINFORCE estimate of the direct-parametrization policy
/// gradient: each visit of `(s, a)` contributes the costs from that step
/// onward divided by `pi(a | s)`. The policy must be the one the trajectory
/// was sampled from.
///
/// The causal weighting is what makes the estimate unbiased here: the
/// per-coordinate score `1/pi(a|s)` of the direct parametrization has unit
/// (not zero) conditional mean, so weighting every visit by the full episode
/// total would pick up the pre-visit costs as bias.
pub fn reinforce_estimate(
    trajectory: &[EpisodeStep],
    player: usize,
    policy: &PolicyTable,
) -> Result<GradEstimate> {
    let states = policy.states();
    let m = policy.actions();
    let mut values = vec![0.0; states * m];
    let mut to_go = 0.0;
    for step in trajectory.iter().rev() {
        to_go += step.costs[player];
        let a = step.joint[player];
        let p = policy.row(step.state).prob(a);
        if p <= 0.0 {
            return Err(Error::DivisionByZeroProb {
                coord: step.state * m + a,
            });
        }
        values[step.state * m + a] += to_go / p;
    }
    Ok(GradEstimate {
        values,
        kind: EstimatorKind::Reinforce,
    })
}

/// The episode-total variant: the whole cost sum multiplies every visited
/// score. On one-step episodes it coincides with [`reinforce_estimate`];
/// on longer episodes it carries an acausal bias term under the direct
/// parametrization, so it is kept only as a selectable alternative.
pub fn reinforce_episode_total(
    trajectory: &[EpisodeStep],
    player: usize,
    policy: &PolicyTable,
) -> Result<GradEstimate> {
    let states = policy.states();
    let m = policy.actions();
    let total_cost: f64 = trajectory.iter().map(|step| step.costs[player]).sum();
    let mut score = vec![0.0; states * m];
    for step in trajectory {
        let a = step.joint[player];
        let p = policy.row(step.state).prob(a);
        if p <= 0.0 {
            return Err(Error::DivisionByZeroProb {
                coord: step.state * m + a,
            });
        }
        score[step.state * m + a] += 1.0 / p;
    }
    let values = score.into_iter().map(|s| total_cost * s).collect();
    Ok(GradEstimate {
        values,
        kind: EstimatorKind::Reinforce,
    })
}

/// `d^t = (1 - rho) d^{t-1} + rho * estimate`.
pub fn recursive_blend(
    prev: &RecursiveGrad,
    est: &GradEstimate,
    rho: f64,
) -> Result<RecursiveGrad> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::ParameterOutOfRange(format!(
            "blend coefficient rho = {rho} outside [0, 1]"
        )));
    }
    if prev.d.len() != est.values.len() {
        return Err(Error::ShapeMismatch(format!(
            "recursive gradient length {} vs estimate length {}",
            prev.d.len(),
            est.values.len()
        )));
    }
    let d = prev
        .d
        .iter()
        .zip(&est.values)
        .map(|(p, e)| (1.0 - rho) * p + rho * e)
        .collect();
    Ok(RecursiveGrad {
        d,
        t_last: prev.t_last + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::Atom;

    #[test]
    fn importance_sampling_examples() {
        let uniform = Simplex::uniform(2);
        let est = importance_sampling_full(0.5, 0, &uniform).unwrap();
        assert_eq!(est.values, vec![1.0, 0.0]);

        let zero = importance_sampling_full(0.0, 1, &uniform).unwrap();
        assert_eq!(zero.values, vec![0.0, 0.0]);

        let mixed = Simplex::new(vec![0.5, 0.25, 0.25]).unwrap();
        let est = importance_sampling_full(0.8, 2, &mixed).unwrap();
        assert!((est.values[2] - 3.2).abs() < 1e-12);
        assert_eq!(est.values[0], 0.0);

        let point = Simplex::point_mass(2, 0);
        assert!(matches!(
            importance_sampling_full(0.5, 1, &point),
            Err(Error::DivisionByZeroProb { coord: 1 })
        ));
    }

    #[test]
    fn semi_bandit_examples() {
        let est = semi_bandit_estimate(&[(0, 0.3)], &[0.5, 0.4]).unwrap();
        assert!((est.values[0] - 0.6).abs() < 1e-12);
        assert_eq!(est.values[1], 0.0);

        let empty = semi_bandit_estimate(&[], &[0.5, 0.4]).unwrap();
        assert_eq!(empty.values, vec![0.0, 0.0]);

        let raw = semi_bandit_estimate(&[(0, 0.2), (1, 0.7)], &[1.0, 1.0]).unwrap();
        assert_eq!(raw.values, vec![0.2, 0.7]);

        assert!(semi_bandit_estimate(&[(1, 0.5)], &[0.5, 0.0]).is_err());
    }

    #[test]
    fn second_moment_point_mass() {
        let point = PolytopePoint::vertex(2, &[0]).unwrap();
        let mat = second_moment_matrix(&point, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(mat.sigma[0][0], 1.0);
        assert_eq!(mat.sigma[1][1], 0.0);
        // pinv acts as identity on span(a).
        assert!((mat.pinv[0][0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn second_moment_uniform_two_singletons() {
        let point = PolytopePoint::from_atoms(
            2,
            vec![
                Atom { resources: vec![0], weight: 0.5 },
                Atom { resources: vec![1], weight: 0.5 },
            ],
        )
        .unwrap();
        let mat = second_moment_matrix(&point, DEFAULT_RANK_TOL).unwrap();
        assert!((mat.sigma[0][0] - 0.5).abs() < 1e-15);
        assert!((mat.sigma[1][1] - 0.5).abs() < 1e-15);
        assert!(mat.sigma[0][1].abs() < 1e-15);
        assert!((mat.pinv[0][0] - 2.0).abs() < 1e-10);
        assert!((mat.pinv[1][1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn second_moment_is_psd() {
        let mut rng = crate::rng::stream(83, 0);
        use rand::Rng;
        for _ in 0..10 {
            let d = 4;
            let atoms: Vec<Atom> = (0..5)
                .map(|_| {
                    let resources: Vec<usize> =
                        (0..d).filter(|_| rng.gen_bool(0.5)).collect();
                    Atom { resources, weight: 0.2 }
                })
                .collect();
            let Ok(point) = PolytopePoint::from_atoms(d, atoms) else {
                continue;
            };
            let Ok(mat) = second_moment_matrix(&point, DEFAULT_RANK_TOL) else {
                continue;
            };
            let (vals, _) = crate::linalg::symmetric_eigen(&mat.sigma);
            for v in vals {
                assert!(v >= -1e-12);
            }
        }
    }

    #[test]
    fn bandit_linear_examples() {
        let point = PolytopePoint::from_atoms(
            2,
            vec![
                Atom { resources: vec![0], weight: 0.5 },
                Atom { resources: vec![1], weight: 0.5 },
            ],
        )
        .unwrap();
        let mat = second_moment_matrix(&point, DEFAULT_RANK_TOL).unwrap();

        let zero = bandit_linear_estimate(0.0, &[1.0, 0.0], &mat).unwrap();
        assert!(zero.values.iter().all(|v| v.abs() < 1e-12));

        let est = bandit_linear_estimate(0.4, &[1.0, 0.0], &mat).unwrap();
        assert!((est.values[0] - 0.8).abs() < 1e-10);
        assert!(est.values[1].abs() < 1e-10);

        let mass = PolytopePoint::vertex(2, &[0]).unwrap();
        let mat = second_moment_matrix(&mass, DEFAULT_RANK_TOL).unwrap();
        let est = bandit_linear_estimate(0.5, &[1.0, 0.0], &mat).unwrap();
        assert!((est.values[0] - 0.5).abs() < 1e-10);
        // A vector outside the sampled span is rejected.
        assert!(matches!(
            bandit_linear_estimate(0.5, &[0.0, 1.0], &mat),
            Err(Error::EstimatorInconsistent { .. })
        ));
    }

    fn step(state: usize, action: usize, cost: f64) -> EpisodeStep {
        EpisodeStep {
            state,
            joint: vec![action],
            costs: vec![cost],
        }
    }

    #[test]
    fn reinforce_examples() {
        let policy = PolicyTable::uniform(1, 2);
        let zero = reinforce_estimate(&[step(0, 1, 0.0)], 0, &policy).unwrap();
        assert!(zero.values.iter().all(|v| v.abs() < 1e-15));

        let single = reinforce_estimate(&[step(0, 1, 0.5)], 0, &policy).unwrap();
        assert_eq!(single.values, vec![0.0, 1.0]);

        // Two visits of the same pair with costs 0.2 then 0.3: the causal
        // weights are 0.5 and 0.3, so (0.5 + 0.3) / 0.25 = 3.2. The
        // episode-total variant multiplies the full sum into both visits.
        let policy = PolicyTable::new(vec![Simplex::new(vec![0.25, 0.75]).unwrap()]).unwrap();
        let steps = [step(0, 0, 0.2), step(0, 0, 0.3)];
        let causal = reinforce_estimate(&steps, 0, &policy).unwrap();
        assert!((causal.values[0] - 3.2).abs() < 1e-12);
        assert_eq!(causal.values[1], 0.0);
        let total = reinforce_episode_total(&steps, 0, &policy).unwrap();
        assert!((total.values[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn reinforce_variants_agree_on_single_steps() {
        let policy = PolicyTable::new(vec![Simplex::new(vec![0.4, 0.6]).unwrap()]).unwrap();
        let steps = [step(0, 0, 0.7)];
        let causal = reinforce_estimate(&steps, 0, &policy).unwrap();
        let total = reinforce_episode_total(&steps, 0, &policy).unwrap();
        for (a, b) in causal.values.iter().zip(&total.values) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn causal_norm_never_exceeds_episode_total() {
        let policy = PolicyTable::new(vec![
        Simplex::new(vec![0.3, 0.7]).unwrap(),
        Simplex::new(vec![0.6, 0.4]).unwrap(),
        ])
        .unwrap();
        let mut rng = crate::rng::stream(31, 4);
        use rand::Rng;
        for _ in 0..50 {
            let steps: Vec<EpisodeStep> = (0..rng.gen_range(1..8))
                .map(|_| {
                    let s = rng.gen_range(0..2);
                    let a = rng.gen_range(0..2);
                    EpisodeStep {
                        state: s,
                        joint: vec![a],
                        costs: vec![rng.gen_range(0.0..1.0)],
                    }
                })
                .collect();
            let causal = reinforce_estimate(&steps, 0, &policy).unwrap();
            let total = reinforce_episode_total(&steps, 0, &policy).unwrap();
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(norm(&causal.values) <= norm(&total.values) + 1e-12);
        }
    }

    #[test]
    fn reinforce_rejects_zero_probability_visits() {
        let policy = PolicyTable::new(vec![Simplex::point_mass(2, 0)]).unwrap();
        assert!(matches!(
            reinforce_estimate(&[step(0, 1, 0.5)], 0, &policy),
            Err(Error::DivisionByZeroProb { .. })
        ));
    }

    #[test]
    fn recursive_blend_examples() {
        let prev = RecursiveGrad {
            d: vec![1.0, 0.0],
            t_last: 3,
        };
        let est = GradEstimate {
            values: vec![0.0, 1.0],
            kind: EstimatorKind::FullBanditSimplex,
        };
        assert_eq!(recursive_blend(&prev, &est, 1.0).unwrap().d, vec![0.0, 1.0]);
        assert_eq!(recursive_blend(&prev, &est, 0.0).unwrap().d, vec![1.0, 0.0]);
        let mid = recursive_blend(&prev, &est, 0.25).unwrap();
        assert!((mid.d[0] - 0.75).abs() < 1e-15);
        assert!((mid.d[1] - 0.25).abs() < 1e-15);
        assert_eq!(mid.t_last, 4);

        let short = GradEstimate {
            values: vec![0.0],
            kind: EstimatorKind::FullBanditSimplex,
        };
        assert!(recursive_blend(&prev, &short, 0.5).is_err());
    }

    #[test]
    fn constant_estimate_converges_geometrically() {
        let target = GradEstimate {
            values: vec![2.0, -1.0, 0.5],
            kind: EstimatorKind::FullBanditSimplex,
        };
        let rho = 0.3;
        let mut d = RecursiveGrad::zeros(3);
        let initial_gap: f64 = target
            .values
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        for t in 1..=30 {
            d = recursive_blend(&d, &target, rho).unwrap();
            let gap: f64 = d
                .d
                .iter()
                .zip(&target.values)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let expect = (1.0f64 - rho).powi(t) * initial_gap;
            assert!((gap - expect).abs() <= 1e-12, "t = {t}: {gap} vs {expect}");
        }
    }
}
