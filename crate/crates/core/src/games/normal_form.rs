//! Finite potential games in normal form.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::noise::NoiseModel;
use crate::games::tensor::{JointIter, JointTensor};
use crate::strategies::Simplex;

/// Report of the unilateral-deviation identity check: the largest deviation
/// between cost differences and potential differences across all players and
/// unilateral deviations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialReport {
    pub max_residual: f64,
    pub checks: usize,
    pub passes: bool,
}

pub const POTENTIAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalFormPotentialGame {
    n: usize,
    action_counts: Vec<usize>,
    costs: Vec<JointTensor>,
    potential: JointTensor,
    noise: NoiseModel,
}

impl NormalFormPotentialGame {
    /// Builds a game from per-player cost tensors. When `potential` is absent
    /// it is reconstructed by path integration: starting from the all-zeros
    /// base profile, players switch to their target action one at a time and
    /// the switching player's cost differences accumulate. For an exact
    /// potential game the result satisfies the unilateral-deviation identity;
    /// `verify_potential_property` checks it.
    pub fn new(
        action_counts: Vec<usize>,
        costs: Vec<JointTensor>,
        potential: Option<JointTensor>,
        noise: NoiseModel,
    ) -> Result<Self> {
        let n = action_counts.len();
        if n == 0 {
            return Err(Error::Config("game needs at least one player".to_string()));
        }
        if costs.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} cost tensors for {} players",
                costs.len(),
                n
            )));
        }
        for (i, c) in costs.iter().enumerate() {
            if c.dims() != action_counts.as_slice() {
                return Err(Error::ShapeMismatch(format!(
                    "cost tensor of player {i} has dims {:?}, expected {:?}",
                    c.dims(),
                    action_counts
                )));
            }
            if c.values().iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::ParameterOutOfRange(format!(
                    "cost of player {i} outside [0, 1]"
                )));
            }
        }
        if let Some(ref p) = potential {
            if p.dims() != action_counts.as_slice() {
                return Err(Error::ShapeMismatch(
                    "potential tensor dims differ from action counts".to_string(),
                ));
            }
        }
        let potential = match potential {
            Some(p) => p,
            None => reconstruct_potential(&action_counts, &costs)?,
        };
        Ok(NormalFormPotentialGame {
            n,
            action_counts,
            costs,
            potential,
            noise,
        })
    }

    pub fn num_players(&self) -> usize {
        self.n
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn max_actions(&self) -> usize {
        *self.action_counts.iter().max().unwrap()
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn validate_joint(&self, joint: &[usize]) -> Result<()> {
        if joint.len() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "joint action has {} entries for {} players",
                joint.len(),
                self.n
            )));
        }
        for (player, (&a, &m)) in joint.iter().zip(&self.action_counts).enumerate() {
            if a >= m {
                return Err(Error::InvalidAction { player, index: a });
            }
        }
        Ok(())
    }

    /// Mean cost of player `i` at a joint pure action.
    pub fn cost(&self, i: usize, joint: &[usize]) -> f64 {
        self.costs[i].get(joint)
    }

    pub fn potential_value(&self, joint: &[usize]) -> f64 {
        self.potential.get(joint)
    }

    /// One noisy cost observation per player.
    pub fn sample_cost(&self, joint: &[usize], rng: &mut impl Rng) -> Result<Vec<f64>> {
        self.validate_joint(joint)?;
        Ok((0..self.n)
            .map(|i| self.noise.sample(self.cost(i, joint), rng))
            .collect())
    }

    /// Exact expected potential by enumeration over joint pure actions.
    pub fn expected_potential(&self, profile: &[Simplex]) -> Result<f64> {
        self.check_profile(profile)?;
        let mut total = 0.0;
        for joint in JointIter::new(&self.action_counts) {
            let w: f64 = joint
                .iter()
                .zip(profile)
                .map(|(&a, p)| p.prob(a))
                .product();
            if w > 0.0 {
                total += w * self.potential_value(&joint);
            }
        }
        Ok(total)
    }

    /// Max residual of the unilateral-deviation identity over all players
    /// and deviations.
    pub fn verify_potential_property(&self) -> PotentialReport {
        let mut max_residual = 0.0f64;
        let mut checks = 0usize;
        for joint in JointIter::new(&self.action_counts) {
            for i in 0..self.n {
                let base_cost = self.cost(i, &joint);
                let base_pot = self.potential_value(&joint);
                let mut deviated = joint.clone();
                for alt in 0..self.action_counts[i] {
                    if alt == joint[i] {
                        continue;
                    }
                    deviated[i] = alt;
                    let dc = base_cost - self.cost(i, &deviated);
                    let dp = base_pot - self.potential_value(&deviated);
                    max_residual = max_residual.max((dc - dp).abs());
                    checks += 1;
                }
                deviated[i] = joint[i];
            }
        }
        PotentialReport {
            max_residual,
            checks,
            passes: max_residual <= POTENTIAL_TOL,
        }
    }

    pub fn check_profile(&self, profile: &[Simplex]) -> Result<()> {
        if profile.len() != self.n
            || profile
                .iter()
                .zip(&self.action_counts)
                .any(|(p, &m)| p.len() != m)
        {
            return Err(Error::ShapeMismatch(
                "profile does not match action counts".to_string(),
            ));
        }
        Ok(())
    }
}

fn reconstruct_potential(action_counts: &[usize], costs: &[JointTensor]) -> Result<JointTensor> {
    let n = action_counts.len();
    let mut potential = JointTensor::zeros(action_counts.to_vec())?;
    for joint in JointIter::new(action_counts) {
        // Walk from the base profile to `joint`, switching one player at a
        // time; accumulate the switching player's cost differences.
        let mut phi = 0.0;
        let mut current = vec![0usize; n];
        for i in 0..n {
            let before = costs[i].get(&current);
            current[i] = joint[i];
            let after = costs[i].get(&current);
            phi += after - before;
        }
        potential.set(&joint, phi);
    }
    Ok(potential)
}

/// Samples an exact potential game: a random potential in [0, 1/2] plus
/// player-specific terms that depend only on the opponents' actions, so the
/// unilateral-deviation identity holds by construction and all costs stay
/// in [0, 1].
pub fn random_potential_game(
    action_counts: &[usize],
    noise: NoiseModel,
    rng: &mut impl Rng,
) -> Result<NormalFormPotentialGame> {
    let n = action_counts.len();
    let mut potential = JointTensor::zeros(action_counts.to_vec())?;
    for v in potential.values_mut() {
        *v = rng.gen_range(0.0..0.5);
    }
    let mut costs = Vec::with_capacity(n);
    for i in 0..n {
        let mut opp_dims = action_counts.to_vec();
        opp_dims[i] = 1;
        let mut dummy = JointTensor::zeros(opp_dims)?;
        for v in dummy.values_mut() {
            *v = rng.gen_range(0.0..0.5);
        }
        let mut tensor = JointTensor::zeros(action_counts.to_vec())?;
        for joint in JointIter::new(action_counts) {
            let mut masked = joint.clone();
            masked[i] = 0;
            tensor.set(&joint, potential.get(&joint) + dummy.get(&masked));
        }
        costs.push(tensor);
    }
    NormalFormPotentialGame::new(action_counts.to_vec(), costs, Some(potential), noise)
}
