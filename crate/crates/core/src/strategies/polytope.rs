//! Fractional congestion strategies kept as explicit convex combinations of
//! pure strategies (atoms). Because every update the learner performs is a
//! convex combination of vertices, the Caratheodory decomposition reduces to
//! bookkeeping plus an atom-pruning step that removes affine dependencies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::strategies::simplex::sample_categorical;

const WEIGHT_EPS: f64 = 1e-15;
/// Pivots below this fraction of the largest entry are treated as null
/// directions in the affine-dependency solve.
pub const DEPENDENCY_TOL: f64 = 1e-10;

/// One pure strategy (a set of resources) together with its mixture weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Sorted resource indices of the pure strategy.
    pub resources: Vec<usize>,
    pub weight: f64,
}

impl Atom {
    pub fn indicator(&self, d: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        for &e in &self.resources {
            v[e] = 1.0;
        }
        v
    }
}

/// A point of the strategy polytope: a convex combination of pure strategies
/// with its dense resource-marginal vector cached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopePoint {
    d: usize,
    atoms: Vec<Atom>,
    dense: Vec<f64>,
}

impl PolytopePoint {
    /// Point mass on one pure strategy.
    pub fn vertex(d: usize, resources: &[usize]) -> Result<Self> {
        let mut sorted = resources.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.iter().any(|&e| e >= d) {
            return Err(Error::ShapeMismatch(format!(
                "resource index out of range for d = {d}"
            )));
        }
        let atom = Atom {
            resources: sorted,
            weight: 1.0,
        };
        let dense = atom.indicator(d);
        Ok(PolytopePoint {
            d,
            atoms: vec![atom],
            dense,
        })
    }

    /// Builds a point from weighted pure strategies. Weights must be
    /// nonnegative and sum to one within tolerance.
    pub fn from_atoms(d: usize, atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::ShapeMismatch("no atoms".to_string()));
        }
        let sum: f64 = atoms.iter().map(|a| a.weight).sum();
        if atoms.iter().any(|a| a.weight < -1e-12) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::ParameterOutOfRange(format!(
                "atom weights must be nonnegative and sum to 1, got sum {sum}"
            )));
        }
        let mut point = PolytopePoint {
            d,
            atoms,
            dense: vec![0.0; d],
        };
        point.normalize_weights();
        point.refresh_dense();
        Ok(point)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn dense(&self) -> &[f64] {
        &self.dense
    }

    fn normalize_weights(&mut self) {
        for a in &mut self.atoms {
            if a.weight < 0.0 {
                a.weight = 0.0;
            }
        }
        let sum: f64 = self.atoms.iter().map(|a| a.weight).sum();
        if sum > 0.0 {
            for a in &mut self.atoms {
                a.weight /= sum;
            }
        }
    }

    fn refresh_dense(&mut self) {
        self.dense = vec![0.0; self.d];
        for a in &self.atoms {
            for &e in &a.resources {
                self.dense[e] += a.weight;
            }
        }
    }

    /// Samples a pure strategy from the decomposition. One uniform draw.
    pub fn sample(&self, rng: &mut impl Rng) -> &Atom {
        let weights: Vec<f64> = self.atoms.iter().map(|a| a.weight).collect();
        &self.atoms[sample_categorical(&weights, rng)]
    }

    /// `(1 - eps) * self + eps * other`, atoms concatenated then pruned.
    pub fn convex_combine(&self, other: &PolytopePoint, eps: f64) -> Result<PolytopePoint> {
        if self.d != other.d {
            return Err(Error::ShapeMismatch(
                "polytope dimensions differ".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::ParameterOutOfRange(format!(
                "combination coefficient {eps} outside [0, 1]"
            )));
        }
        let mut atoms = Vec::with_capacity(self.atoms.len() + other.atoms.len());
        for a in &self.atoms {
            atoms.push(Atom {
                resources: a.resources.clone(),
                weight: a.weight * (1.0 - eps),
            });
        }
        for a in &other.atoms {
            atoms.push(Atom {
                resources: a.resources.clone(),
                weight: a.weight * eps,
            });
        }
        let pruned = prune_atoms(self.d, atoms)?;
        let mut point = PolytopePoint {
            d: self.d,
            atoms: pruned,
            dense: vec![0.0; self.d],
        };
        point.refresh_dense();
        Ok(point)
    }

    /// Exploration mixing of Algorithm-style `y = (1 - eps) x + eps cover`
    /// with `eps = coef * mu`.
    pub fn mix_exploration(
        &self,
        mu: f64,
        coef: f64,
        cover: &PolytopePoint,
    ) -> Result<PolytopePoint> {
        let eps = coef * mu;
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::ParameterOutOfRange(format!(
                "effective exploration coefficient {eps} outside [0, 1]"
            )));
        }
        self.convex_combine(cover, eps)
    }

    /// Frank-Wolfe step toward a pure strategy.
    pub fn fw_update(&self, vertex: &[usize], eta: f64) -> Result<PolytopePoint> {
        let v = PolytopePoint::vertex(self.d, vertex)?;
        self.convex_combine(&v, eta)
    }

    /// The Caratheodory decomposition of this point: at most `d + 1` pure
    /// strategies whose weighted indicators reproduce the dense marginals.
    pub fn caratheodory_decompose(&self) -> Result<Vec<(Vec<usize>, f64)>> {
        let atoms = prune_atoms(self.d, self.atoms.clone())?;
        Ok(atoms
            .into_iter()
            .map(|a| (a.resources, a.weight))
            .collect())
    }
}

/// Merges duplicate atoms, drops zero weights, and while more than `d + 1`
/// atoms remain, removes one along an affine dependency of the indicator
/// vectors. The dense marginals are preserved at every step.
pub fn prune_atoms(d: usize, atoms: Vec<Atom>) -> Result<Vec<Atom>> {
    let mut merged: Vec<Atom> = Vec::new();
    for atom in atoms {
        if atom.weight <= WEIGHT_EPS {
            continue;
        }
        match merged.iter_mut().find(|m| m.resources == atom.resources) {
            Some(m) => m.weight += atom.weight,
            None => merged.push(atom),
        }
    }
    if merged.is_empty() {
        return Err(Error::ShapeMismatch("all atoms have zero weight".to_string()));
    }

    while merged.len() > d + 1 {
        // (d + 1) x K matrix: indicator vectors stacked with a row of ones.
        let k = merged.len();
        let mut mat = vec![vec![0.0; k]; d + 1];
        for (j, atom) in merged.iter().enumerate() {
            for &e in &atom.resources {
                mat[e][j] = 1.0;
            }
            mat[d][j] = 1.0;
        }
        let z = linalg::null_vector(&mat, DEPENDENCY_TOL).ok_or(Error::DecompositionUnstable)?;
        let scale = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale <= DEPENDENCY_TOL {
            return Err(Error::DecompositionUnstable);
        }

        // Move weights along z until the first one hits zero.
        let mut theta = f64::INFINITY;
        let mut drop_idx = usize::MAX;
        for (j, atom) in merged.iter().enumerate() {
            if z[j] < -DEPENDENCY_TOL * scale {
                let step = atom.weight / (-z[j]);
                if step < theta {
                    theta = step;
                    drop_idx = j;
                }
            }
        }
        if drop_idx == usize::MAX {
            // Flip the direction: some coefficient must be negative then.
            let mut theta_neg = f64::INFINITY;
            for (j, atom) in merged.iter().enumerate() {
                if z[j] > DEPENDENCY_TOL * scale {
                    let step = atom.weight / z[j];
                    if step < theta_neg {
                        theta_neg = step;
                        drop_idx = j;
                    }
                }
            }
            if drop_idx == usize::MAX {
                return Err(Error::DecompositionUnstable);
            }
            theta = -theta_neg;
        }

        for (j, atom) in merged.iter_mut().enumerate() {
            atom.weight += theta * z[j];
            if atom.weight < 0.0 {
                atom.weight = 0.0;
            }
        }
        merged.remove(drop_idx);
        merged.retain(|a| a.weight > WEIGHT_EPS);
    }

    // Re-pin the unit sum after the arithmetic above.
    let sum: f64 = merged.iter().map(|a| a.weight).sum();
    for a in &mut merged {
        a.weight /= sum;
    }
    Ok(merged)
}

/// Uniform mixture over a greedily chosen covering collection of pure
/// strategies: every resource of `0..d` ends up with strictly positive
/// marginal. Greedy picks the strategy covering the most uncovered
/// resources, ties broken by lowest index.
pub fn covering_exploration_point(d: usize, action_set: &[Vec<usize>]) -> Result<PolytopePoint> {
    if action_set.is_empty() {
        return Err(Error::ShapeMismatch("empty action set".to_string()));
    }
    for e in 0..d {
        if !action_set.iter().any(|a| a.contains(&e)) {
            return Err(Error::NotCoverable { resource: e });
        }
    }
    let mut covered = vec![false; d];
    let mut chosen: Vec<usize> = Vec::new();
    while covered.iter().any(|c| !c) {
        let mut best = usize::MAX;
        let mut best_gain = 0;
        for (idx, strat) in action_set.iter().enumerate() {
            let gain = strat.iter().filter(|&&e| !covered[e]).count();
            if gain > best_gain {
                best_gain = gain;
                best = idx;
            }
        }
        if best == usize::MAX {
            // Unreachable given the coverage check above.
            return Err(Error::NotCoverable {
                resource: covered.iter().position(|c| !c).unwrap_or(0),
            });
        }
        chosen.push(best);
        for &e in &action_set[best] {
            covered[e] = true;
        }
    }
    let w = 1.0 / chosen.len() as f64;
    let atoms: Vec<Atom> = chosen
        .into_iter()
        .map(|idx| {
            let mut resources = action_set[idx].clone();
            resources.sort_unstable();
            Atom {
                resources,
                weight: w,
            }
        })
        .collect();
    PolytopePoint::from_atoms(d, atoms)
}

/// Pure strategy in `action_set` minimizing `<a, direction>`, ties broken by
/// lowest index.
pub fn linear_min_strategy(direction: &[f64], action_set: &[Vec<usize>]) -> Result<usize> {
    if direction.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidGradient);
    }
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for (idx, strat) in action_set.iter().enumerate() {
        let score: f64 = strat.iter().map(|&e| direction[e]).sum();
        if score < best_score {
            best_score = score;
            best = idx;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_marginal_err(point: &PolytopePoint, reference: &[f64]) -> f64 {
        point
            .dense()
            .iter()
            .zip(reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn mix_exploration_endpoints() {
        let x = PolytopePoint::vertex(2, &[0]).unwrap();
        let cover = covering_exploration_point(2, &[vec![0], vec![1]]).unwrap();
        let unchanged = x.mix_exploration(0.0, 2.0, &cover).unwrap();
        assert_eq!(unchanged.dense(), x.dense());
        let full = x.mix_exploration(0.5, 2.0, &cover).unwrap();
        assert!(max_marginal_err(&full, cover.dense()) < 1e-15);
    }

    #[test]
    fn mix_exploration_marginals() {
        // dense (0.6, 0.4) mixed with cover (0.5, 0.5) at eps = 0.1 -> (0.59, 0.41)
        let x = PolytopePoint::from_atoms(
            2,
            vec![
                Atom { resources: vec![0], weight: 0.6 },
                Atom { resources: vec![1], weight: 0.4 },
            ],
        )
        .unwrap();
        let cover = covering_exploration_point(2, &[vec![0], vec![1]]).unwrap();
        let y = x.mix_exploration(0.1, 1.0, &cover).unwrap();
        assert!((y.dense()[0] - 0.59).abs() < 1e-12);
        assert!((y.dense()[1] - 0.41).abs() < 1e-12);
    }

    #[test]
    fn mix_exploration_rejects_large_eps() {
        let x = PolytopePoint::vertex(2, &[0]).unwrap();
        let cover = covering_exploration_point(2, &[vec![0], vec![1]]).unwrap();
        assert!(x.mix_exploration(0.6, 2.0, &cover).is_err());
    }

    #[test]
    fn covering_greedy_two_strategies() {
        // d=3, strategies {e0,e1}, {e1,e2}: both chosen, dense (0.5, 1.0, 0.5).
        let cover = covering_exploration_point(3, &[vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(cover.atoms().len(), 2);
        assert!((cover.dense()[0] - 0.5).abs() < 1e-15);
        assert!((cover.dense()[1] - 1.0).abs() < 1e-15);
        assert!((cover.dense()[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn covering_single_strategy() {
        let cover = covering_exploration_point(2, &[vec![0, 1]]).unwrap();
        assert_eq!(cover.atoms().len(), 1);
        assert!((cover.atoms()[0].weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn covering_detects_uncoverable() {
        let err = covering_exploration_point(3, &[vec![0], vec![1]]).unwrap_err();
        match err {
            Error::NotCoverable { resource } => assert_eq!(resource, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn prune_merges_duplicates() {
        let atoms = vec![
            Atom { resources: vec![0], weight: 0.3 },
            Atom { resources: vec![0], weight: 0.7 },
        ];
        let pruned = prune_atoms(1, atoms).unwrap();
        assert_eq!(pruned.len(), 1);
        assert!((pruned[0].weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn prune_leaves_small_sets_alone() {
        let atoms = vec![
            Atom { resources: vec![0], weight: 0.5 },
            Atom { resources: vec![], weight: 0.5 },
        ];
        let pruned = prune_atoms(1, atoms.clone()).unwrap();
        assert_eq!(pruned.len(), 2);
    }

    #[test]
    fn three_affinely_independent_atoms_are_a_fixpoint() {
        // (1,0), (0,1), (1,1) carry no affine dependency (the stacked
        // ones-row makes their columns independent), and 3 <= d + 1 for
        // d = 2, so pruning must leave them untouched.
        let atoms = vec![
            Atom { resources: vec![0], weight: 0.25 },
            Atom { resources: vec![1], weight: 0.25 },
            Atom { resources: vec![0, 1], weight: 0.5 },
        ];
        let point = PolytopePoint::from_atoms(2, atoms).unwrap();
        let expect = point.dense().to_vec();
        assert!((expect[0] - 0.75).abs() < 1e-15);
        assert!((expect[1] - 0.75).abs() < 1e-15);
        let decomposed = point.caratheodory_decompose().unwrap();
        assert_eq!(decomposed.len(), 3);
        let mut dense = [0.0; 2];
        for (resources, w) in &decomposed {
            for &e in resources {
                dense[e] += w;
            }
        }
        assert!((dense[0] - expect[0]).abs() < 1e-12);
        assert!((dense[1] - expect[1]).abs() < 1e-12);
    }

    #[test]
    fn prune_reduces_six_atoms_in_three_dims() {
        let atoms = vec![
            Atom { resources: vec![0], weight: 0.2 },
            Atom { resources: vec![1], weight: 0.2 },
            Atom { resources: vec![2], weight: 0.1 },
            Atom { resources: vec![0, 1], weight: 0.2 },
            Atom { resources: vec![1, 2], weight: 0.2 },
            Atom { resources: vec![0, 2], weight: 0.1 },
        ];
        let point = PolytopePoint::from_atoms(3, atoms).unwrap();
        let reference = point.dense().to_vec();
        let pruned = prune_atoms(3, point.atoms().to_vec()).unwrap();
        assert!(pruned.len() <= 4);
        let mut dense = [0.0; 3];
        for a in &pruned {
            for &e in &a.resources {
                dense[e] += a.weight;
            }
        }
        for (got, want) in dense.iter().zip(&reference) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_min_enumerates_dot_products() {
        // direction (0.5, 0.1, 0.1): {e1,e2} scores 0.2 < 0.6 of {e0,e1}.
        let sets = vec![vec![0, 1], vec![1, 2]];
        assert_eq!(linear_min_strategy(&[0.5, 0.1, 0.1], &sets).unwrap(), 1);
        assert_eq!(linear_min_strategy(&[0.0, 0.0, 0.0], &sets).unwrap(), 0);
        assert!(linear_min_strategy(&[f64::NAN, 0.0, 0.0], &sets).is_err());
    }

    #[test]
    fn linear_min_invariant_to_positive_scaling() {
        // Strategies share the cardinality k, so constant shifts move every
        // score by the same amount and positive scaling preserves order.
        let mut rng = crate::rng::stream(12, 0);
        use rand::Rng;
        let sets = vec![vec![0, 1], vec![1, 2], vec![0, 2]];
        for _ in 0..50 {
            let dir: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let base = linear_min_strategy(&dir, &sets).unwrap();
            let shift: f64 = rng.gen_range(-5.0..5.0);
            let scale: f64 = rng.gen_range(0.01..10.0);
            let shifted: Vec<f64> = dir.iter().map(|v| v + shift).collect();
            let scaled: Vec<f64> = dir.iter().map(|v| v * scale).collect();
            assert_eq!(base, linear_min_strategy(&shifted, &sets).unwrap());
            assert_eq!(base, linear_min_strategy(&scaled, &sets).unwrap());
        }
    }

    #[test]
    fn random_update_chain_preserves_marginals() {
        use rand::Rng;
        let mut rng = crate::rng::stream(7, 99);
        let d = 6;
        let action_set: Vec<Vec<usize>> = (0..d).map(|e| vec![e]).collect();
        let cover = covering_exploration_point(d, &action_set).unwrap();
        let mut x = PolytopePoint::vertex(d, &[0]).unwrap();
        let mut shadow = x.dense().to_vec();
        for _ in 0..500 {
            let eta: f64 = rng.gen_range(0.0..0.3);
            let vertex = rng.gen_range(0..d);
            x = x.fw_update(&[vertex], eta).unwrap();
            for (e, s) in shadow.iter_mut().enumerate() {
                *s = (1.0 - eta) * *s + if e == vertex { eta } else { 0.0 };
            }
            if rng.gen_bool(0.3) {
                let mu: f64 = rng.gen_range(0.0..0.1);
                x = x.mix_exploration(mu, 1.0, &cover).unwrap();
                for (s, c) in shadow.iter_mut().zip(cover.dense()) {
                    *s = (1.0 - mu) * *s + mu * c;
                }
            }
            assert!(x.atoms().len() <= d + 1);
        }
        let decomposition = x.caratheodory_decompose().unwrap();
        assert!(decomposition.len() <= d + 1);
        let mut dense = vec![0.0; d];
        for (resources, w) in &decomposition {
            for &e in resources {
                dense[e] += w;
            }
        }
        for (got, want) in dense.iter().zip(&shadow) {
            assert!((got - want).abs() < 1e-10, "drift too large: {got} vs {want}");
        }
    }
}
