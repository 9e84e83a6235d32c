//! CSV serialization of run logs and final-strategy JSON files.
//!
//! Floats print with Rust's shortest round-trip representation, so a written
//! value parses back bit-exactly. Wall-clock timing is reported on stderr
//! only; every byte of the files is determined by `(seed, config)`.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;

use crate::error::{Error, Result};
use crate::learners::RunLog;
use crate::strategies::Profile;

/// Renders the full CSV: `#`-prefixed header comments (config echo, seed,
/// version), one header row, one data row per evaluated iterate.
pub fn render_csv(log: &RunLog) -> Result<String> {
    let mut out = String::new();
    let config_echo = serde_json::to_string(&log.params)?;
    writeln!(out, "# config={config_echo}").unwrap();
    writeln!(out, "# seed={}", log.params.seed).unwrap();
    writeln!(out, "# version={}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "# game_kind={}", log.game_kind).unwrap();

    let n = log.num_players;
    let mut header: Vec<String> = vec![
        "t".into(),
        "eta".into(),
        "rho".into(),
        "mu".into(),
        "nash_gap".into(),
        "fw_gap".into(),
        "nash_gap_explored".into(),
        "fw_gap_explored".into(),
    ];
    header.extend((0..n).map(|i| format!("cost_{i}")));
    header.push("cum_nash_regret".into());
    header.extend((0..n).map(|i| format!("regret_{i}")));
    header.push("l1_to_final".into());
    writeln!(out, "{}", header.join(",")).unwrap();

    for row in &log.rows {
        let mut fields: Vec<String> = vec![
            row.t.to_string(),
            row.eta.to_string(),
            row.rho.to_string(),
            row.mu.to_string(),
            row.nash_gap.to_string(),
            row.fw_gap.to_string(),
            row.nash_gap_explored.to_string(),
            row.fw_gap_explored.to_string(),
        ];
        fields.extend(row.expected_costs.iter().map(|v| v.to_string()));
        fields.push(row.cum_nash_regret.to_string());
        fields.extend(row.cum_individual_regret.iter().map(|v| v.to_string()));
        fields.push(row.l1_to_final.to_string());
        writeln!(out, "{}", fields.join(",")).unwrap();
    }
    Ok(out)
}

pub fn write_csv(log: &RunLog, path: &Path) -> Result<()> {
    std::fs::write(path, render_csv(log)?)?;
    Ok(())
}

/// A parsed CSV: column names and numeric rows. Comment lines are skipped.
pub struct ParsedCsv {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ParsedCsv {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Config(format!("csv has no column '{name}'")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn parse_csv(text: &str) -> Result<ParsedCsv> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("csv has no header row".to_string()))?;
    let columns: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad csv field '{f}': {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != columns.len() {
            return Err(Error::Config("csv row width mismatch".to_string()));
        }
        rows.push(row);
    }
    Ok(ParsedCsv { columns, rows })
}

/// Final strategies as nested JSON arrays indexed [player][state][action];
/// fractional strategies keep their atom decompositions alongside the dense
/// marginals.
pub fn strategy_json(profile: &Profile) -> serde_json::Value {
    match profile {
        Profile::Mixed { players } => json!({
            "format": "policy_arrays",
            "strategies": players
                .iter()
                .map(|p| vec![p.probs().to_vec()])
                .collect::<Vec<_>>(),
        }),
        Profile::Policies { players } => json!({
            "format": "policy_arrays",
            "strategies": players
                .iter()
                .map(|p| {
                    p.rows()
                        .iter()
                        .map(|r| r.probs().to_vec())
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
        }),
        Profile::Fractional { players } => json!({
            "format": "atoms",
            "d": players.first().map_or(0, |p| p.dim()),
            "players": players
                .iter()
                .map(|p| {
                    json!({
                        "atoms": p
                            .atoms()
                            .iter()
                            .map(|a| json!({"resources": a.resources, "weight": a.weight}))
                            .collect::<Vec<_>>(),
                        "dense": p.dense().to_vec(),
                    })
                })
                .collect::<Vec<_>>(),
        }),
    }
}

pub fn write_strategy(profile: &Profile, path: &Path) -> Result<()> {
    let value = strategy_json(profile);
    std::fs::write(path, serde_json::to_string_pretty(&value)?)?;
    Ok(())
}

/// Reads a strategy file back into a profile. Accepts the wrapper format
/// written by [`write_strategy`] and bare nested arrays.
pub fn read_strategy(path: &Path) -> Result<Profile> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    parse_strategy(&value)
}

pub fn parse_strategy(value: &serde_json::Value) -> Result<Profile> {
    use crate::strategies::{Atom, PolicyTable, PolytopePoint, Simplex};
    let format = value.get("format").and_then(|f| f.as_str());
    match format {
        Some("atoms") => {
            let d = value
                .get("d")
                .and_then(|v| v.as_u64())
                .ok_or_else(|| Error::Config("atoms strategy needs 'd'".to_string()))?
                as usize;
            let players = value
                .get("players")
                .and_then(|v| v.as_array())
                .ok_or_else(|| Error::Config("atoms strategy needs 'players'".to_string()))?
                .iter()
                .map(|p| {
                    let atoms = p
                        .get("atoms")
                        .and_then(|v| v.as_array())
                        .ok_or_else(|| Error::Config("missing atoms".to_string()))?
                        .iter()
                        .map(|a| {
                            let resources = a
                                .get("resources")
                                .and_then(|v| v.as_array())
                                .ok_or_else(|| Error::Config("missing resources".to_string()))?
                                .iter()
                                .map(|r| r.as_u64().unwrap_or(0) as usize)
                                .collect();
                            let weight = a
                                .get("weight")
                                .and_then(|v| v.as_f64())
                                .ok_or_else(|| Error::Config("missing weight".to_string()))?;
                            Ok(Atom { resources, weight })
                        })
                        .collect::<Result<Vec<Atom>>>()?;
                    PolytopePoint::from_atoms(d, atoms)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Profile::Fractional { players })
        }
        _ => {
            let arrays = value
                .get("strategies")
                .unwrap_or(value)
                .as_array()
                .ok_or_else(|| {
                    Error::Config("strategy file must hold nested arrays".to_string())
                })?;
            let players = arrays
                .iter()
                .map(|per_player| {
                    let rows = per_player
                        .as_array()
                        .ok_or_else(|| Error::Config("expected [state][action]".to_string()))?
                        .iter()
                        .map(|row| {
                            let probs = row
                                .as_array()
                                .ok_or_else(|| Error::Config("expected action row".to_string()))?
                                .iter()
                                .map(|v| {
                                    v.as_f64().ok_or_else(|| {
                                        Error::Config("non-numeric probability".to_string())
                                    })
                                })
                                .collect::<Result<Vec<f64>>>()?;
                            Simplex::new(probs)
                        })
                        .collect::<Result<Vec<Simplex>>>()?;
                    PolicyTable::new(rows)
                })
                .collect::<Result<Vec<_>>>()?;
            if players.iter().all(|p| p.states() == 1) {
                Ok(Profile::Mixed {
                    players: players.iter().map(|p| p.row(0).clone()).collect(),
                })
            } else {
                Ok(Profile::Policies { players })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{random_potential_game, Game, NoiseModel};
    use crate::learners::{
        run_learning, FeedbackKind, LearnerKind, RunParams, ScheduleConfig, ScheduleFamily,
    };

    fn sample_log() -> RunLog {
        let mut rng = crate::rng::stream(7, 0);
        let game = Game::NormalForm(
            random_potential_game(&[2, 2], NoiseModel::Bernoulli, &mut rng).unwrap(),
        );
        let mut params = RunParams::new(
            LearnerKind::FwExplore,
            FeedbackKind::FullBandit,
            ScheduleConfig::preset(ScheduleFamily::PotentialGame),
        );
        params.t_max = 12;
        params.eval_every = 3;
        run_learning(&game, &params).unwrap()
    }

    #[test]
    fn csv_round_trips_exact_floats() {
        let log = sample_log();
        let text = render_csv(&log).unwrap();
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(parsed.rows.len(), log.rows.len());
        let nash = parsed.column("nash_gap").unwrap();
        for (value, row) in nash.iter().zip(&log.rows) {
            assert_eq!(value.to_bits(), row.nash_gap.to_bits());
        }
        let l1 = parsed.column("l1_to_final").unwrap();
        for (value, row) in l1.iter().zip(&log.rows) {
            assert_eq!(value.to_bits(), row.l1_to_final.to_bits());
        }
    }

    #[test]
    fn strategy_json_round_trip() {
        let log = sample_log();
        let value = strategy_json(&log.final_strategy);
        let parsed = parse_strategy(&value).unwrap();
        assert_eq!(parsed, log.final_strategy);
    }
}
