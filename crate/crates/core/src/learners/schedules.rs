//! Parameter schedules for the learners: the per-family presets plus
//! overridable closed forms. Every schedule value is clamped into (0, 1].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::Game;

fn clamp_unit(v: f64) -> f64 {
    v.min(1.0)
}

pub const DEFAULT_ALPHA: f64 = 8.0 / 15.0;
pub const DEFAULT_BETA: f64 = 1.0 / 5.0;

/// `eta_t = 1 / (sqrt(n) t^{4/5})`.
pub fn eta_pg(t: usize, n: usize) -> f64 {
    eta_pg_alpha(t, n, DEFAULT_ALPHA)
}

pub fn eta_pg_alpha(t: usize, n: usize, alpha: f64) -> f64 {
    clamp_unit(1.0 / ((n as f64).sqrt() * (t as f64).powf(1.5 * alpha)))
}

/// `rho_t = 4 mu^{1/3} n^{1/3} m^{1/3} / t^{8/15}`.
pub fn rho_pg(t: usize, n: usize, m: usize, mu: f64) -> f64 {
    rho_pg_alpha(t, n, m, mu, DEFAULT_ALPHA)
}

pub fn rho_pg_alpha(t: usize, n: usize, m: usize, mu: f64, alpha: f64) -> f64 {
    let coef = 4.0 * mu.cbrt() * ((n * m) as f64).cbrt();
    clamp_unit(coef / (t as f64).powf(alpha))
}

/// `mu = min{1/(mn), m / (n^{1/8} T^{1/5})}`.
pub fn mu_pg(t_max: usize, n: usize, m: usize) -> f64 {
    mu_pg_beta(t_max, n, m, DEFAULT_BETA)
}

pub fn mu_pg_beta(t_max: usize, n: usize, m: usize, beta: f64) -> f64 {
    let first = 1.0 / (m as f64 * n as f64);
    let second = m as f64 / ((n as f64).powf(0.125) * (t_max.max(1) as f64).powf(beta));
    clamp_unit(first.min(second))
}

/// `eta_t = kappa / (n^{3/2} m t^{4/5})`.
pub fn eta_mpg(t: usize, n: usize, m: usize, kappa: f64) -> f64 {
    eta_mpg_alpha(t, n, m, kappa, DEFAULT_ALPHA)
}

pub fn eta_mpg_alpha(t: usize, n: usize, m: usize, kappa: f64, alpha: f64) -> f64 {
    clamp_unit(kappa / ((n as f64).powf(1.5) * m as f64 * (t as f64).powf(1.5 * alpha)))
}

/// `rho_t = 4 mu^{1/3} / (n^{1/3} m^{2/3} t^{8/15})`.
pub fn rho_mpg(t: usize, n: usize, m: usize, mu: f64) -> f64 {
    rho_mpg_alpha(t, n, m, mu, DEFAULT_ALPHA)
}

pub fn rho_mpg_alpha(t: usize, n: usize, m: usize, mu: f64, alpha: f64) -> f64 {
    let coef = 4.0 * mu.cbrt() / ((n as f64).cbrt() * (m as f64).powf(2.0 / 3.0));
    clamp_unit(coef / (t as f64).powf(alpha))
}

/// `mu = min{1/(m^2 n), kappa^{4/3} / (n^{7/8} m^{1/4} T^{beta})}`.
pub fn mu_mpg(t_max: usize, n: usize, m: usize, kappa: f64) -> f64 {
    mu_mpg_beta(t_max, n, m, kappa, DEFAULT_BETA)
}

pub fn mu_mpg_beta(t_max: usize, n: usize, m: usize, kappa: f64, beta: f64) -> f64 {
    let first = 1.0 / ((m * m) as f64 * n as f64);
    let second = kappa.powf(4.0 / 3.0)
        / ((n as f64).powf(7.0 / 8.0)
            * (m as f64).powf(0.25)
            * (t_max.max(1) as f64).powf(beta));
    clamp_unit(first.min(second))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CongestionFeedback {
    Bandit,
    SemiBandit,
}

/// Preset `(eta_t, rho_t)` for the congestion learners.
pub fn schedules_congestion(
    t: usize,
    n: usize,
    d: usize,
    mu: f64,
    feedback: CongestionFeedback,
) -> (f64, f64) {
    let eta = clamp_unit(2.0 / (t as f64).powf(0.8));
    let rho_coef = match feedback {
        CongestionFeedback::Bandit => 4.0 * mu.cbrt() * (d as f64).powf(1.0 / 6.0),
        CongestionFeedback::SemiBandit => {
            4.0 * mu.cbrt() * (d as f64).powf(1.0 / 6.0) / (n as f64).cbrt()
        }
    };
    let rho = clamp_unit(rho_coef / (t as f64).powf(DEFAULT_ALPHA));
    (eta, rho)
}

/// Preset exploration rate for the congestion learners.
pub fn mu_congestion(t_max: usize, n: usize, d: usize, feedback: CongestionFeedback) -> f64 {
    let t_pow = (t_max.max(1) as f64).powf(DEFAULT_BETA);
    let mu = match feedback {
        CongestionFeedback::Bandit => {
            1.0 / ((n as f64).powf(3.0 / 8.0) * (d as f64).powf(17.0 / 16.0) * t_pow)
        }
        CongestionFeedback::SemiBandit => 1.0 / (((n * d) as f64).powf(3.0 / 8.0) * t_pow),
    };
    clamp_unit(mu)
}

/// A closed-form parameter schedule: either a constant or
/// `coef / (t + offset)^exponent`, clamped into (0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamSchedule {
    Constant { value: f64 },
    Power { coef: f64, exponent: f64, offset: f64 },
}

impl ParamSchedule {
    pub fn eval(&self, t: usize) -> f64 {
        let raw = match self {
            ParamSchedule::Constant { value } => *value,
            ParamSchedule::Power {
                coef,
                exponent,
                offset,
            } => coef / (t as f64 + offset).powf(*exponent),
        };
        clamp_unit(raw)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleFamily {
    PotentialGame,
    MarkovPg,
    CongestionBandit,
    CongestionSemibandit,
    Custom,
}

/// Schedule selection: a preset family with optional explicit overrides.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub family: ScheduleFamily,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub eta: Option<ParamSchedule>,
    #[serde(default)]
    pub rho: Option<ParamSchedule>,
    #[serde(default)]
    pub mu: Option<f64>,
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

impl ScheduleConfig {
    pub fn preset(family: ScheduleFamily) -> Self {
        ScheduleConfig {
            family,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            eta: None,
            rho: None,
            mu: None,
        }
    }

    pub fn with_overrides(
        mut self,
        eta: Option<ParamSchedule>,
        rho: Option<ParamSchedule>,
        mu: Option<f64>,
    ) -> Self {
        self.eta = eta.or(self.eta);
        self.rho = rho.or(self.rho);
        self.mu = mu.or(self.mu);
        self
    }

    /// Pins the schedule against a game and horizon.
    pub fn resolve(&self, game: &Game, t_max: usize) -> Result<ResolvedSchedule> {
        if !(0.0 < self.alpha && self.alpha < 1.0) || !(0.0 < self.beta && self.beta < 1.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "alpha = {}, beta = {} must lie in (0, 1)",
                self.alpha, self.beta
            )));
        }
        let n = game.num_players();
        let (preset_eta, preset_rho, preset_mu): (ParamSchedule, ParamSchedule, f64) =
            match (self.family, game) {
                (ScheduleFamily::PotentialGame, Game::NormalForm(g)) => {
                    let m = g.max_actions();
                    let mu = mu_pg_beta(t_max, n, m, self.beta);
                    (
                        ParamSchedule::Power {
                            coef: 1.0 / (n as f64).sqrt(),
                            exponent: 1.5 * self.alpha,
                            offset: 0.0,
                        },
                        ParamSchedule::Power {
                            coef: 4.0 * mu.cbrt() * ((n * m) as f64).cbrt(),
                            exponent: self.alpha,
                            offset: 0.0,
                        },
                        mu,
                    )
                }
                (ScheduleFamily::MarkovPg, Game::Markov(g)) => {
                    let m = g.max_actions();
                    let kappa = g.kappa_min();
                    let mu = mu_mpg_beta(t_max, n, m, kappa, self.beta);
                    (
                        ParamSchedule::Power {
                            coef: kappa / ((n as f64).powf(1.5) * m as f64),
                            exponent: 1.5 * self.alpha,
                            offset: 0.0,
                        },
                        ParamSchedule::Power {
                            coef: 4.0 * mu.cbrt()
                                / ((n as f64).cbrt() * (m as f64).powf(2.0 / 3.0)),
                            exponent: self.alpha,
                            offset: 0.0,
                        },
                        mu,
                    )
                }
                (ScheduleFamily::CongestionBandit, Game::Congestion(g)) => {
                    let d = g.num_resources();
                    let mu = mu_congestion(t_max, n, d, CongestionFeedback::Bandit);
                    (
                        ParamSchedule::Power {
                            coef: 2.0,
                            exponent: 1.5 * self.alpha,
                            offset: 0.0,
                        },
                        ParamSchedule::Power {
                            coef: 4.0 * mu.cbrt() * (d as f64).powf(1.0 / 6.0),
                            exponent: self.alpha,
                            offset: 0.0,
                        },
                        mu,
                    )
                }
                (ScheduleFamily::CongestionSemibandit, Game::Congestion(g)) => {
                    let d = g.num_resources();
                    let mu = mu_congestion(t_max, n, d, CongestionFeedback::SemiBandit);
                    (
                        ParamSchedule::Power {
                            coef: 2.0,
                            exponent: 1.5 * self.alpha,
                            offset: 0.0,
                        },
                        ParamSchedule::Power {
                            coef: 4.0 * mu.cbrt() * (d as f64).powf(1.0 / 6.0)
                                / (n as f64).cbrt(),
                            exponent: self.alpha,
                            offset: 0.0,
                        },
                        mu,
                    )
                }
                (ScheduleFamily::Custom, _) => {
                    let eta = self.eta.clone().ok_or_else(|| {
                        Error::Config("custom schedule needs an explicit eta".to_string())
                    })?;
                    let rho = self.rho.clone().ok_or_else(|| {
                        Error::Config("custom schedule needs an explicit rho".to_string())
                    })?;
                    let mu = self.mu.ok_or_else(|| {
                        Error::Config("custom schedule needs an explicit mu".to_string())
                    })?;
                    (eta, rho, mu)
                }
                (family, game) => {
                    return Err(Error::Config(format!(
                        "schedule family {family:?} does not apply to a {} game",
                        game.kind_name()
                    )))
                }
            };
        let mu = self.mu.unwrap_or(preset_mu);
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::ParameterOutOfRange(format!(
                "mu = {mu} outside [0, 1]"
            )));
        }
        Ok(ResolvedSchedule {
            eta: self.eta.clone().unwrap_or(preset_eta),
            rho: self.rho.clone().unwrap_or(preset_rho),
            mu,
        })
    }
}

/// A schedule pinned to a run: closures of the iteration index plus the
/// fixed exploration rate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolvedSchedule {
    pub eta: ParamSchedule,
    pub rho: ParamSchedule,
    pub mu: f64,
}

impl ResolvedSchedule {
    pub fn eta_at(&self, t: usize) -> f64 {
        self.eta.eval(t)
    }

    pub fn rho_at(&self, t: usize) -> f64 {
        self.rho.eval(t)
    }
}
