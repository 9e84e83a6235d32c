//! Cost observation noise. Samples always land in [0, 1].

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Observations equal the mean cost.
    Deterministic,
    /// Bernoulli(mean): unbiased, supported on {0, 1}.
    Bernoulli,
    /// mean + sigma * N(0,1), clipped to [0, 1]. Slightly biased near the
    /// boundary; provided for robustness experiments only.
    TruncatedGaussian { sigma: f64 },
}

impl NoiseModel {
    /// One observation of a cost with the stored `mean` in [0, 1].
    pub fn sample(&self, mean: f64, rng: &mut impl Rng) -> f64 {
        match self {
            NoiseModel::Deterministic => mean,
            NoiseModel::Bernoulli => {
                if rng.gen::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            NoiseModel::TruncatedGaussian { sigma } => {
                let z = standard_normal(rng);
                (mean + sigma * z).clamp(0.0, 1.0)
            }
        }
    }
}

/// Box-Muller draw. Consumes exactly two uniforms.
fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
