//! Congestion games: players pick resource subsets, per-resource costs
//! depend on the load.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::noise::NoiseModel;
use crate::games::normal_form::{PotentialReport, POTENTIAL_TOL};
use crate::games::tensor::JointIter;
use crate::strategies::Simplex;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CongestionGame {
    n: usize,
    d: usize,
    k: usize,
    /// `action_sets[i][a]` is the sorted resource list of strategy `a` of
    /// player `i`; every strategy has exactly `k` resources and every
    /// player's strategies jointly cover all `d` resources.
    action_sets: Vec<Vec<Vec<usize>>>,
    /// `facility_costs[e][l]` for load `l` in `0..=n`. The load-0 column is
    /// stored but never charged to a player.
    facility_costs: Vec<Vec<f64>>,
    noise: NoiseModel,
}

impl CongestionGame {
    pub fn new(
        n: usize,
        d: usize,
        k: usize,
        action_sets: Vec<Vec<Vec<usize>>>,
        facility_costs: Vec<Vec<f64>>,
        noise: NoiseModel,
    ) -> Result<Self> {
        if n == 0 || d == 0 || k == 0 {
            return Err(Error::Config(
                "player, resource, and strategy-size counts must be positive".to_string(),
            ));
        }
        if action_sets.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} action sets for {} players",
                action_sets.len(),
                n
            )));
        }
        let mut sorted_sets = Vec::with_capacity(n);
        for (i, set) in action_sets.into_iter().enumerate() {
            if set.is_empty() {
                return Err(Error::Config(format!("player {i} has no strategies")));
            }
            let mut cleaned = Vec::with_capacity(set.len());
            let mut covered = vec![false; d];
            for strat in set {
                let mut s = strat;
                s.sort_unstable();
                s.dedup();
                if s.len() != k {
                    return Err(Error::Config(format!(
                        "player {i} has a strategy with {} resources, expected k = {k}",
                        s.len()
                    )));
                }
                if s.iter().any(|&e| e >= d) {
                    return Err(Error::Config(format!(
                        "player {i} references a resource outside 0..{d}"
                    )));
                }
                for &e in &s {
                    covered[e] = true;
                }
                cleaned.push(s);
            }
            if let Some(e) = covered.iter().position(|c| !c) {
                // The covering exploration point needs positive marginal on
                // every resource.
                return Err(Error::NotCoverable { resource: e });
            }
            sorted_sets.push(cleaned);
        }
        if facility_costs.len() != d || facility_costs.iter().any(|row| row.len() != n + 1) {
            return Err(Error::ShapeMismatch(format!(
                "facility costs must be a {d} x {} matrix",
                n + 1
            )));
        }
        if facility_costs
            .iter()
            .flatten()
            .any(|v| !(0.0..=1.0).contains(v))
        {
            return Err(Error::ParameterOutOfRange(
                "facility costs must lie in [0, 1]".to_string(),
            ));
        }
        Ok(CongestionGame {
            n,
            d,
            k,
            action_sets: sorted_sets,
            facility_costs,
            noise,
        })
    }

    pub fn num_players(&self) -> usize {
        self.n
    }

    pub fn num_resources(&self) -> usize {
        self.d
    }

    pub fn strategy_size(&self) -> usize {
        self.k
    }

    pub fn action_sets(&self) -> &[Vec<Vec<usize>>] {
        &self.action_sets
    }

    pub fn action_set(&self, i: usize) -> &[Vec<usize>] {
        &self.action_sets[i]
    }

    pub fn action_counts(&self) -> Vec<usize> {
        self.action_sets.iter().map(|s| s.len()).collect()
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// Mean cost of resource `e` under load `l`.
    pub fn facility_cost(&self, e: usize, l: usize) -> f64 {
        self.facility_costs[e][l]
    }

    pub fn validate_joint(&self, joint: &[usize]) -> Result<()> {
        if joint.len() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "joint action has {} entries for {} players",
                joint.len(),
                self.n
            )));
        }
        for (player, (&a, set)) in joint.iter().zip(&self.action_sets).enumerate() {
            if a >= set.len() {
                return Err(Error::InvalidAction { player, index: a });
            }
        }
        Ok(())
    }

    /// Number of players on each resource for a joint pure strategy.
    pub fn loads(&self, joint: &[usize]) -> Vec<usize> {
        let mut loads = vec![0usize; self.d];
        for (i, &a) in joint.iter().enumerate() {
            for &e in &self.action_sets[i][a] {
                loads[e] += 1;
            }
        }
        loads
    }

    /// Mean total cost of player `i` at a joint pure strategy.
    pub fn cost(&self, i: usize, joint: &[usize]) -> f64 {
        let loads = self.loads(joint);
        self.action_sets[i][joint[i]]
            .iter()
            .map(|&e| self.facility_cost(e, loads[e]))
            .sum()
    }

    /// One noisy observation per resource a player is standing on. Returns
    /// `(per-player facility cost pairs, per-player totals)`, where the pairs
    /// are `(resource, observed cost)`.
    #[allow(clippy::type_complexity)]
    pub fn sample_facility_costs(
        &self,
        joint: &[usize],
        rng: &mut impl Rng,
    ) -> Result<(Vec<Vec<(usize, f64)>>, Vec<f64>)> {
        self.validate_joint(joint)?;
        let loads = self.loads(joint);
        let mut per_player = Vec::with_capacity(self.n);
        let mut totals = Vec::with_capacity(self.n);
        for (i, &a) in joint.iter().enumerate() {
            let mut observed = Vec::with_capacity(self.k);
            let mut total = 0.0;
            for &e in &self.action_sets[i][a] {
                let v = self.noise.sample(self.facility_cost(e, loads[e]), rng);
                total += v;
                observed.push((e, v));
            }
            per_player.push(observed);
            totals.push(total);
        }
        Ok((per_player, totals))
    }

    /// Noisy total cost per player; each summand lies in [0, 1], so totals
    /// lie in [0, k].
    pub fn sample_cost(&self, joint: &[usize], rng: &mut impl Rng) -> Result<Vec<f64>> {
        Ok(self.sample_facility_costs(joint, rng)?.1)
    }

    /// The exact potential `sum_e sum_{l=1..N_e} c(e, l)`.
    pub fn rosenthal_potential(&self, joint: &[usize]) -> Result<f64> {
        self.validate_joint(joint)?;
        let loads = self.loads(joint);
        let mut phi = 0.0;
        for (e, &load) in loads.iter().enumerate() {
            for l in 1..=load {
                phi += self.facility_cost(e, l);
            }
        }
        Ok(phi)
    }

    /// Expected Rosenthal potential of a product profile over strategies,
    /// by enumeration of joint pure strategies.
    pub fn expected_potential(&self, profile: &[Simplex]) -> Result<f64> {
        let counts = self.action_counts();
        if profile.len() != self.n
            || profile.iter().zip(&counts).any(|(p, &m)| p.len() != m)
        {
            return Err(Error::ShapeMismatch(
                "profile does not match strategy counts".to_string(),
            ));
        }
        crate::games::tensor::joint_size(&counts)?;
        let mut total = 0.0;
        for joint in JointIter::new(&counts) {
            let w: f64 = joint
                .iter()
                .zip(profile)
                .map(|(&a, p)| p.prob(a))
                .product();
            if w > 0.0 {
                total += w * self.rosenthal_potential(&joint)?;
            }
        }
        Ok(total)
    }

    /// Checks the unilateral-deviation identity against the Rosenthal
    /// potential over all joint strategies and deviations.
    pub fn verify_potential_property(&self) -> Result<PotentialReport> {
        let counts = self.action_counts();
        crate::games::tensor::joint_size(&counts)?;
        let mut max_residual = 0.0f64;
        let mut checks = 0usize;
        for joint in JointIter::new(&counts) {
            let base_pot = self.rosenthal_potential(&joint)?;
            for i in 0..self.n {
                let base_cost = self.cost(i, &joint);
                let mut deviated = joint.clone();
                for alt in 0..counts[i] {
                    if alt == joint[i] {
                        continue;
                    }
                    deviated[i] = alt;
                    let dc = base_cost - self.cost(i, &deviated);
                    let dp = base_pot - self.rosenthal_potential(&deviated)?;
                    max_residual = max_residual.max((dc - dp).abs());
                    checks += 1;
                }
                deviated[i] = joint[i];
            }
        }
        Ok(PotentialReport {
            max_residual,
            checks,
            passes: max_residual <= POTENTIAL_TOL,
        })
    }

    /// Per-player marginal resource probabilities of a product profile.
    pub fn marginals(&self, profile: &[Simplex]) -> Vec<Vec<f64>> {
        profile
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut x = vec![0.0; self.d];
                for (a, strat) in self.action_sets[i].iter().enumerate() {
                    for &e in strat {
                        x[e] += p.prob(a);
                    }
                }
                x
            })
            .collect()
    }
}

/// Samples a congestion game whose per-player action sets cover all
/// resources: a greedy partition of the resources into k-sized strategies is
/// always included, then extra random strategies are added.
pub fn random_congestion_game(
    n: usize,
    d: usize,
    k: usize,
    extra_strategies: usize,
    noise: NoiseModel,
    rng: &mut impl Rng,
) -> Result<CongestionGame> {
    let mut facility_costs = vec![vec![0.0; n + 1]; d];
    for row in &mut facility_costs {
        let mut level = 0.0;
        for l in row.iter_mut() {
            // Load-increasing costs in [0, 1].
            level += rng.gen_range(0.0..(1.0 / (n as f64 + 1.0)));
            *l = level;
        }
    }
    let mut action_sets = Vec::with_capacity(n);
    for _ in 0..n {
        let mut set: Vec<Vec<usize>> = Vec::new();
        // Covering strategies: walk the resources in order, wrapping to fill
        // the final strategy up to k resources.
        let mut e = 0;
        while e < d {
            let strat: Vec<usize> = (0..k).map(|j| (e + j) % d).collect();
            set.push(strat);
            e += k;
        }
        for _ in 0..extra_strategies {
            let mut strat: Vec<usize> = Vec::new();
            while strat.len() < k {
                let cand = rng.gen_range(0..d);
                if !strat.contains(&cand) {
                    strat.push(cand);
                }
            }
            strat.sort_unstable();
            if !set.contains(&strat) {
                set.push(strat);
            }
        }
        action_sets.push(set);
    }
    CongestionGame::new(n, d, k, action_sets, facility_costs, noise)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_player_line() -> CongestionGame {
        // d = 2 resources, k = 1; both players may stand on either resource.
        CongestionGame::new(
            2,
            2,
            1,
            vec![vec![vec![0], vec![1]], vec![vec![0], vec![1]]],
            vec![vec![0.0, 0.3, 0.5], vec![0.0, 0.2, 0.9]],
            NoiseModel::Deterministic,
        )
        .unwrap()
    }

    #[test]
    fn rosenthal_examples() {
        let g = two_player_line();
        // Both players on e0: 0.3 + 0.5 = 0.8 plus nothing on e1.
        assert!((g.rosenthal_potential(&[0, 0]).unwrap() - 0.8).abs() < 1e-15);
        // One on each: 0.3 + 0.2.
        assert!((g.rosenthal_potential(&[0, 1]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_player_single_resource() {
        let g = CongestionGame::new(
            1,
            1,
            1,
            vec![vec![vec![0]]],
            vec![vec![0.0, 0.3]],
            NoiseModel::Deterministic,
        )
        .unwrap();
        assert!((g.rosenthal_potential(&[0]).unwrap() - 0.3).abs() < 1e-15);
        assert!((g.cost(0, &[0]) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn potential_property_holds_for_random_games() {
        let mut rng = crate::rng::stream(3, 0);
        for _ in 0..10 {
            let g = random_congestion_game(3, 4, 2, 2, NoiseModel::Deterministic, &mut rng)
                .unwrap();
            let report = g.verify_potential_property().unwrap();
            assert!(report.passes, "residual {}", report.max_residual);
        }
    }

    #[test]
    fn strategies_must_have_k_resources() {
        let err = CongestionGame::new(
            1,
            2,
            2,
            vec![vec![vec![0]]],
            vec![vec![0.0, 0.1], vec![0.0, 0.1]],
            NoiseModel::Deterministic,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn action_sets_must_cover_resources() {
        let err = CongestionGame::new(
            1,
            2,
            1,
            vec![vec![vec![0]]],
            vec![vec![0.0, 0.1], vec![0.0, 0.1]],
            NoiseModel::Deterministic,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotCoverable { resource: 1 }));
    }

    #[test]
    fn sample_facility_costs_are_per_resource() {
        let g = two_player_line();
        let mut rng = crate::rng::stream(0, 0);
        let (per_player, totals) = g.sample_facility_costs(&[0, 0], &mut rng).unwrap();
        assert_eq!(per_player[0], vec![(0, 0.5)]);
        assert_eq!(per_player[1], vec![(0, 0.5)]);
        assert_eq!(totals, vec![0.5, 0.5]);
    }
}
