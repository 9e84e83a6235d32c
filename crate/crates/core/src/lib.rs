//! Simulator library for no-regret learning in potential games, Markov
//! potential games, and congestion games, built around stochastic
//! Frank-Wolfe updates with exploration and recursive gradient estimation.
//! Exact enumeration and linear-algebra oracles measure Nash and individual
//! regret alongside the learners.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod games;
pub mod harness;
pub mod learners;
pub mod linalg;
pub mod rng;
pub mod strategies;

pub use error::{Error, Result};
