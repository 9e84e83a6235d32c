//! Strategy-space geometry: simplex vectors, per-state policy tables, and
//! polytope points with Caratheodory decompositions.

mod polytope;
mod simplex;

pub use polytope::{
    covering_exploration_point, linear_min_strategy, prune_atoms, Atom, PolytopePoint,
    DEPENDENCY_TOL,
};
pub use simplex::{
    argmin_index, sample_categorical, simplex_projection, PolicyTable, Simplex, SIMPLEX_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A joint strategy profile, one entry per player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "repr", rename_all = "snake_case")]
pub enum Profile {
    /// One-shot mixed strategies.
    Mixed { players: Vec<Simplex> },
    /// Per-state policies for Markov games.
    Policies { players: Vec<PolicyTable> },
    /// Fractional congestion strategies.
    Fractional { players: Vec<PolytopePoint> },
}

impl Profile {
    pub fn num_players(&self) -> usize {
        match self {
            Profile::Mixed { players } => players.len(),
            Profile::Policies { players } => players.len(),
            Profile::Fractional { players } => players.len(),
        }
    }
}

/// Total variation of raw entries: sum over players, states, and actions of
/// the absolute differences. Fractional profiles compare dense marginals.
pub fn l1_distance(a: &Profile, b: &Profile) -> Result<f64> {
    match (a, b) {
        (Profile::Mixed { players: pa }, Profile::Mixed { players: pb }) => {
            if pa.len() != pb.len() || pa.iter().zip(pb).any(|(x, y)| x.len() != y.len()) {
                return Err(Error::ShapeMismatch("profile shapes differ".to_string()));
            }
            Ok(pa
                .iter()
                .zip(pb)
                .map(|(x, y)| {
                    x.probs()
                        .iter()
                        .zip(y.probs())
                        .map(|(u, v)| (u - v).abs())
                        .sum::<f64>()
                })
                .sum())
        }
        (Profile::Policies { players: pa }, Profile::Policies { players: pb }) => {
            if pa.len() != pb.len()
                || pa
                    .iter()
                    .zip(pb)
                    .any(|(x, y)| x.states() != y.states() || x.actions() != y.actions())
            {
                return Err(Error::ShapeMismatch("profile shapes differ".to_string()));
            }
            Ok(pa
                .iter()
                .zip(pb)
                .map(|(x, y)| {
                    x.rows()
                        .iter()
                        .zip(y.rows())
                        .map(|(rx, ry)| {
                            rx.probs()
                                .iter()
                                .zip(ry.probs())
                                .map(|(u, v)| (u - v).abs())
                                .sum::<f64>()
                        })
                        .sum::<f64>()
                })
                .sum())
        }
        (Profile::Fractional { players: pa }, Profile::Fractional { players: pb }) => {
            if pa.len() != pb.len() || pa.iter().zip(pb).any(|(x, y)| x.dim() != y.dim()) {
                return Err(Error::ShapeMismatch("profile shapes differ".to_string()));
            }
            Ok(pa
                .iter()
                .zip(pb)
                .map(|(x, y)| {
                    x.dense()
                        .iter()
                        .zip(y.dense())
                        .map(|(u, v)| (u - v).abs())
                        .sum::<f64>()
                })
                .sum())
        }
        _ => Err(Error::ShapeMismatch(
            "profiles have different representations".to_string(),
        )),
    }
}
