//! Probability vectors over finite action sets and the operations the
//! learners perform on them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SIMPLEX_TOL: f64 = 1e-12;

/// A probability distribution over `m` actions. Nonnegative, sums to one
/// within `SIMPLEX_TOL`; renormalized after every arithmetic operation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    probs: Vec<f64>,
}

impl Simplex {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::ShapeMismatch("empty simplex".to_string()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < -SIMPLEX_TOL) {
            return Err(Error::ParameterOutOfRange(format!(
                "simplex entries must be finite and nonnegative: {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::ParameterOutOfRange(format!(
                "simplex must sum to 1, got {sum}"
            )));
        }
        let mut s = Simplex { probs };
        s.renormalize();
        Ok(s)
    }

    pub fn uniform(m: usize) -> Self {
        Simplex {
            probs: vec![1.0 / m as f64; m],
        }
    }

    pub fn point_mass(m: usize, index: usize) -> Self {
        let mut probs = vec![0.0; m];
        probs[index] = 1.0;
        Simplex { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    fn renormalize(&mut self) {
        for p in &mut self.probs {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = self.probs.iter().sum();
        if sum > 0.0 && (sum - 1.0).abs() > 0.0 {
            for p in &mut self.probs {
                *p /= sum;
            }
        }
    }

    /// `(1 - mu) * self + mu * uniform`.
    pub fn mix_with_uniform(&self, mu: f64) -> Result<Simplex> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::ParameterOutOfRange(format!(
                "mixing coefficient mu = {mu} outside [0, 1]"
            )));
        }
        let m = self.probs.len() as f64;
        let mut probs: Vec<f64> = self
            .probs
            .iter()
            .map(|p| (1.0 - mu) * p + mu / m)
            .collect();
        let sum: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= sum;
        }
        Ok(Simplex { probs })
    }

    /// Frank-Wolfe step toward the vertex `vertex`: `(1 - eta) * self + eta * e_vertex`.
    pub fn fw_update(&self, vertex: usize, eta: f64) -> Result<Simplex> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::ParameterOutOfRange(format!(
                "step size eta = {eta} outside [0, 1]"
            )));
        }
        if vertex >= self.probs.len() {
            return Err(Error::InvalidAction {
                player: usize::MAX,
                index: vertex,
            });
        }
        let mut probs: Vec<f64> = self.probs.iter().map(|p| (1.0 - eta) * p).collect();
        probs[vertex] += eta;
        let sum: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= sum;
        }
        Ok(Simplex { probs })
    }

    /// Samples an action index. Consumes exactly one uniform draw.
    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        sample_categorical(&self.probs, rng)
    }
}

/// Draws an index from an unnormalized nonnegative weight vector using a
/// single uniform draw and a cumulative walk.
pub fn sample_categorical(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Index of the minimum entry, ties broken by lowest index.
/// Errors when the direction contains NaNs.
pub fn argmin_index(direction: &[f64]) -> Result<usize> {
    if direction.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidGradient);
    }
    let mut best = 0;
    for (i, v) in direction.iter().enumerate().skip(1) {
        if *v < direction[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Euclidean projection onto the probability simplex by sort-and-threshold.
/// Inputs already on the simplex are returned unchanged, which makes the
/// projection exactly idempotent.
pub fn simplex_projection(v: &[f64]) -> Simplex {
    let sum: f64 = v.iter().sum();
    if v.iter().all(|x| *x >= 0.0) && (sum - 1.0).abs() <= SIMPLEX_TOL {
        return Simplex { probs: v.to_vec() };
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let candidate = (cumsum - 1.0) / (j as f64 + 1.0);
        if s - candidate > 0.0 {
            tau = candidate;
        }
    }
    let probs: Vec<f64> = v.iter().map(|x| (x - tau).max(0.0)).collect();
    let mut s = Simplex { probs };
    s.renormalize();
    s
}

/// Per-state mixed strategy of one player in a Markov game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyTable {
    rows: Vec<Simplex>,
}

impl PolicyTable {
    pub fn new(rows: Vec<Simplex>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::ShapeMismatch("empty policy table".to_string()));
        }
        let m = rows[0].len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::ShapeMismatch(
                "policy rows have inconsistent action counts".to_string(),
            ));
        }
        Ok(PolicyTable { rows })
    }

    pub fn uniform(states: usize, m: usize) -> Self {
        PolicyTable {
            rows: vec![Simplex::uniform(m); states],
        }
    }

    pub fn rows(&self) -> &[Simplex] {
        &self.rows
    }

    pub fn row(&self, s: usize) -> &Simplex {
        &self.rows[s]
    }

    pub fn states(&self) -> usize {
        self.rows.len()
    }

    pub fn actions(&self) -> usize {
        self.rows[0].len()
    }

    pub fn mix_with_uniform(&self, mu: f64) -> Result<PolicyTable> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.mix_with_uniform(mu))
            .collect::<Result<Vec<_>>>()?;
        Ok(PolicyTable { rows })
    }

    /// Rowwise Frank-Wolfe step toward the deterministic policy `vertices`.
    pub fn fw_update(&self, vertices: &[usize], eta: f64) -> Result<PolicyTable> {
        if vertices.len() != self.rows.len() {
            return Err(Error::ShapeMismatch(
                "vertex list length differs from state count".to_string(),
            ));
        }
        let rows = self
            .rows
            .iter()
            .zip(vertices)
            .map(|(r, &v)| r.fw_update(v, eta))
            .collect::<Result<Vec<_>>>()?;
        Ok(PolicyTable { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mix_with_uniform_endpoints() {
        let p = Simplex::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(p.mix_with_uniform(0.0).unwrap().probs(), p.probs());
        let full = p.mix_with_uniform(1.0).unwrap();
        assert!((full.prob(0) - 0.5).abs() < 1e-15);
        assert!((full.prob(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mix_with_uniform_arithmetic() {
        // (1,0) mixed at mu=0.2 over two actions -> (0.9, 0.1)
        let p = Simplex::new(vec![1.0, 0.0]).unwrap();
        let mixed = p.mix_with_uniform(0.2).unwrap();
        assert!((mixed.prob(0) - 0.9).abs() < 1e-15);
        assert!((mixed.prob(1) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn mix_rejects_out_of_range() {
        let p = Simplex::uniform(2);
        assert!(p.mix_with_uniform(1.5).is_err());
        assert!(p.mix_with_uniform(-0.1).is_err());
    }

    #[test]
    fn fw_update_endpoints_and_arithmetic() {
        let p = Simplex::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(p.fw_update(0, 0.0).unwrap().probs(), p.probs());
        assert_eq!(p.fw_update(0, 1.0).unwrap().probs(), &[1.0, 0.0]);
        let stepped = p.fw_update(0, 0.2).unwrap();
        assert!((stepped.prob(0) - 0.6).abs() < 1e-15);
        assert!((stepped.prob(1) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn argmin_tie_breaks_low_index() {
        assert_eq!(argmin_index(&[0.2, 0.1, 0.3]).unwrap(), 1);
        assert_eq!(argmin_index(&[0.5, 0.5, 0.5]).unwrap(), 0);
        assert!(argmin_index(&[f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn projection_examples() {
        let on = simplex_projection(&[0.3, 0.7]);
        assert_eq!(on.probs(), &[0.3, 0.7]);

        let dominant = simplex_projection(&[2.0, 0.0]);
        assert_eq!(dominant.probs(), &[1.0, 0.0]);

        // KKT threshold tau = 0.2 here: (0.8, 0.6) -> (0.6, 0.4).
        let p = simplex_projection(&[0.8, 0.6]);
        assert!((p.prob(0) - 0.6).abs() < 1e-12);
        assert!((p.prob(1) - 0.4).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn argmin_invariant_to_shift_and_scale(
            v in proptest::collection::vec(-5.0f64..5.0, 1..8),
            shift in -10.0f64..10.0,
            scale in 0.01f64..50.0,
        ) {
            let base = argmin_index(&v).unwrap();
            let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
            let scaled: Vec<f64> = v.iter().map(|x| x * scale).collect();
            prop_assert_eq!(base, argmin_index(&shifted).unwrap());
            prop_assert_eq!(base, argmin_index(&scaled).unwrap());
        }

        #[test]
        fn projection_idempotent_and_normalized(v in proptest::collection::vec(-5.0f64..5.0, 1..8)) {
            let once = simplex_projection(&v);
            let sum: f64 = once.probs().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(once.probs().iter().all(|p| *p >= 0.0));
            let twice = simplex_projection(once.probs());
            prop_assert_eq!(once.probs(), twice.probs());
        }

        #[test]
        fn fw_update_stays_feasible(
            raw in proptest::collection::vec(0.01f64..1.0, 2..6),
            eta in 0.0f64..=1.0,
            vertex_sel in 0usize..5,
        ) {
            let sum: f64 = raw.iter().sum();
            let p = Simplex::new(raw.iter().map(|x| x / sum).collect()).unwrap();
            let vertex = vertex_sel % p.len();
            let stepped = p.fw_update(vertex, eta).unwrap();
            let s: f64 = stepped.probs().iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
            prop_assert!(stepped.probs().iter().all(|x| *x >= 0.0));
        }
    }
}
