//! JSON game definitions. The top-level `kind` selects the family; costs are
//! nested arrays indexed one player action per nesting level.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::games::congestion::CongestionGame;
use crate::games::markov::MarkovGame;
use crate::games::noise::NoiseModel;
use crate::games::normal_form::NormalFormPotentialGame;
use crate::games::tensor::JointTensor;
use crate::games::Game;

pub fn game_from_json(text: &str) -> Result<Game> {
    let value: Value = serde_json::from_str(text)?;
    let kind = value
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Config("game file needs a string field 'kind'".to_string()))?;
    match kind {
        "normal_form" => parse_normal_form(&value),
        "congestion" => parse_congestion(&value),
        "markov" => parse_markov(&value),
        other => Err(Error::Config(format!("unknown game kind '{other}'"))),
    }
}

pub fn game_from_file(path: &std::path::Path) -> Result<Game> {
    let text = std::fs::read_to_string(path)?;
    game_from_json(&text)
}

fn parse_noise(value: &Value) -> Result<NoiseModel> {
    match value.get("noise") {
        None | Some(Value::Null) => Ok(NoiseModel::Deterministic),
        Some(v) => Ok(serde_json::from_value(v.clone())?),
    }
}

fn get_usize(value: &Value, field: &str) -> Result<usize> {
    value
        .get(field)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| Error::Config(format!("missing or invalid field '{field}'")))
}

fn get_usize_vec(value: &Value, field: &str) -> Result<Vec<usize>> {
    let arr = value
        .get(field)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Config(format!("missing array field '{field}'")))?;
    arr.iter()
        .map(|v| {
            v.as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| Error::Config(format!("non-integer entry in '{field}'")))
        })
        .collect()
}

fn get_f64_vec(value: &Value, field: &str) -> Result<Vec<f64>> {
    let arr = value
        .get(field)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Config(format!("missing array field '{field}'")))?;
    arr.iter()
        .map(|v| {
            v.as_f64()
                .ok_or_else(|| Error::Config(format!("non-numeric entry in '{field}'")))
        })
        .collect()
}

/// Flattens a nested array with the given dims, last dimension innermost.
fn parse_nested(value: &Value, dims: &[usize], out: &mut Vec<f64>) -> Result<()> {
    if dims.is_empty() {
        let v = value
            .as_f64()
            .ok_or_else(|| Error::Config("expected a number leaf in nested costs".to_string()))?;
        out.push(v);
        return Ok(());
    }
    let arr = value
        .as_array()
        .ok_or_else(|| Error::Config("expected a nested array".to_string()))?;
    if arr.len() != dims[0] {
        return Err(Error::Config(format!(
            "nested array level has {} entries, expected {}",
            arr.len(),
            dims[0]
        )));
    }
    for item in arr {
        parse_nested(item, &dims[1..], out)?;
    }
    Ok(())
}

fn parse_tensor(value: &Value, dims: &[usize]) -> Result<JointTensor> {
    let mut flat = Vec::new();
    parse_nested(value, dims, &mut flat)?;
    JointTensor::new(dims.to_vec(), flat)
}

fn parse_normal_form(value: &Value) -> Result<Game> {
    let action_counts = get_usize_vec(value, "action_counts")?;
    let costs_value = value
        .get("costs")
        .ok_or_else(|| Error::Config("missing field 'costs'".to_string()))?
        .as_array()
        .ok_or_else(|| Error::Config("'costs' must be an array per player".to_string()))?;
    let costs = costs_value
        .iter()
        .map(|v| parse_tensor(v, &action_counts))
        .collect::<Result<Vec<_>>>()?;
    let potential = match value.get("potential") {
        None | Some(Value::Null) => None,
        Some(v) => Some(parse_tensor(v, &action_counts)?),
    };
    let noise = parse_noise(value)?;
    Ok(Game::NormalForm(NormalFormPotentialGame::new(
        action_counts,
        costs,
        potential,
        noise,
    )?))
}

fn parse_congestion(value: &Value) -> Result<Game> {
    let n = get_usize(value, "n")?;
    let d = get_usize(value, "d")?;
    let k = get_usize(value, "k")?;
    let sets_value = value
        .get("action_sets")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Config("missing array field 'action_sets'".to_string()))?;
    let mut action_sets = Vec::with_capacity(sets_value.len());
    for per_player in sets_value {
        let strategies = per_player
            .as_array()
            .ok_or_else(|| Error::Config("action_sets entries must be arrays".to_string()))?;
        let mut set = Vec::with_capacity(strategies.len());
        for strat in strategies {
            let resources = strat
                .as_array()
                .ok_or_else(|| Error::Config("strategies must be resource arrays".to_string()))?
                .iter()
                .map(|v| {
                    v.as_u64()
                        .map(|x| x as usize)
                        .ok_or_else(|| Error::Config("non-integer resource".to_string()))
                })
                .collect::<Result<Vec<usize>>>()?;
            set.push(resources);
        }
        action_sets.push(set);
    }
    let costs_value = value
        .get("facility_costs")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Config("missing field 'facility_costs'".to_string()))?;
    let facility_costs = costs_value
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::Config("facility cost rows must be arrays".to_string()))?
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| Error::Config("non-numeric facility cost".to_string()))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let noise = parse_noise(value)?;
    Ok(Game::Congestion(CongestionGame::new(
        n,
        d,
        k,
        action_sets,
        facility_costs,
        noise,
    )?))
}

fn parse_markov(value: &Value) -> Result<Game> {
    let s_count = get_usize(value, "s_count")?;
    let action_counts = get_usize_vec(value, "action_counts")?;
    let joint: usize = action_counts.iter().product();

    let costs_value = value
        .get("costs")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Config("missing field 'costs'".to_string()))?;
    let mut costs = Vec::with_capacity(costs_value.len());
    for per_player in costs_value {
        let per_state_value = per_player
            .as_array()
            .ok_or_else(|| Error::Config("markov costs must nest per state".to_string()))?;
        let mut per_state = Vec::with_capacity(per_state_value.len());
        for state_costs in per_state_value {
            let mut flat = Vec::with_capacity(joint);
            parse_nested(state_costs, &action_counts, &mut flat)?;
            per_state.push(flat);
        }
        costs.push(per_state);
    }

    let transitions_value = value
        .get("transitions")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Config("missing field 'transitions'".to_string()))?;
    let mut transitions = Vec::with_capacity(transitions_value.len());
    for per_state in transitions_value {
        // Nested by actions with an [s'] array leaf.
        let mut rows = vec![Vec::new(); joint];
        collect_rows(per_state, &action_counts, 0, 0, &mut rows)?;
        transitions.push(rows);
    }

    let stop_prob = match value.get("stop_prob") {
        Some(Value::Number(num)) => {
            let kappa = num
                .as_f64()
                .ok_or_else(|| Error::Config("invalid stop_prob".to_string()))?;
            vec![vec![kappa; joint]; s_count]
        }
        Some(table) => {
            let per_state = table
                .as_array()
                .ok_or_else(|| Error::Config("stop_prob must be a number or array".to_string()))?;
            per_state
                .iter()
                .map(|v| {
                    let mut flat = Vec::with_capacity(joint);
                    parse_nested(v, &action_counts, &mut flat)?;
                    Ok(flat)
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => return Err(Error::Config("missing field 'stop_prob'".to_string())),
    };

    let init_dist = get_f64_vec(value, "init_dist")?;
    let horizon_cap = match value.get("horizon_cap") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| Error::Config("invalid horizon_cap".to_string()))?
                as usize,
        ),
    };
    let noise = parse_noise(value)?;
    Ok(Game::Markov(MarkovGame::new(
        s_count,
        action_counts,
        costs,
        transitions,
        stop_prob,
        init_dist,
        horizon_cap,
        noise,
    )?))
}

fn collect_rows(
    value: &Value,
    dims: &[usize],
    depth: usize,
    flat: usize,
    rows: &mut [Vec<f64>],
) -> Result<()> {
    if depth == dims.len() {
        let row = value
            .as_array()
            .ok_or_else(|| Error::Config("transition leaf must be an array".to_string()))?
            .iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| Error::Config("non-numeric transition".to_string()))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows[flat] = row;
        return Ok(());
    }
    let arr = value
        .as_array()
        .ok_or_else(|| Error::Config("expected nested transition array".to_string()))?;
    if arr.len() != dims[depth] {
        return Err(Error::Config(format!(
            "transition nesting has {} entries, expected {}",
            arr.len(),
            dims[depth]
        )));
    }
    for (a, item) in arr.iter().enumerate() {
        collect_rows(item, dims, depth + 1, flat * dims[depth] + a, rows)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_form_round_trip() {
        let text = r#"{
            "kind": "normal_form",
            "action_counts": [2, 2],
            "costs": [[[0.1, 0.2], [0.3, 0.4]], [[0.1, 0.3], [0.2, 0.4]]],
            "noise": {"kind": "bernoulli"}
        }"#;
        let game = game_from_json(text).unwrap();
        match game {
            Game::NormalForm(g) => {
                assert_eq!(g.num_players(), 2);
                assert!((g.cost(0, &[1, 0]) - 0.3).abs() < 1e-15);
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn congestion_parse() {
        let text = r#"{
            "kind": "congestion",
            "n": 2, "d": 2, "k": 1,
            "action_sets": [[[0], [1]], [[0], [1]]],
            "facility_costs": [[0.0, 0.2, 0.4], [0.0, 0.1, 0.5]]
        }"#;
        let game = game_from_json(text).unwrap();
        match game {
            Game::Congestion(g) => assert_eq!(g.num_resources(), 2),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn markov_parse_with_scalar_stop() {
        let text = r#"{
            "kind": "markov",
            "s_count": 1,
            "action_counts": [2],
            "costs": [[[0.2, 0.6]]],
            "transitions": [[[1.0], [1.0]]],
            "stop_prob": 0.5,
            "init_dist": [1.0]
        }"#;
        let game = game_from_json(text).unwrap();
        match game {
            Game::Markov(g) => {
                assert_eq!(g.num_states(), 1);
                assert!((g.kappa_min() - 0.5).abs() < 1e-15);
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn unknown_kind_is_config_error() {
        let err = game_from_json(r#"{"kind": "chess"}"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
