//! Name-based construction of environments from JSON parameters.

use std::sync::Arc;

use maac_core::{DecPomdpModel, GenerativeEnv, ModelEnv};
use serde_json::{Map, Value};

use crate::error::{EnvError, Result};
use crate::{
    build_binary_match_game, build_climb_game, build_dectiger_with, build_guess_game,
    build_morning_game, CaptureTarget, DecTigerParams, GridWorld, GridWorldKind,
    SmallBoxPushing, TileMap,
};

pub type EnvParams = Map<String, Value>;

/// Every environment name accepted by [`build_env`].
pub const ENV_NAMES: &[&str] = &[
    "climb",
    "morning",
    "guess",
    "binary_match",
    "dectiger",
    "go_together",
    "find_treasure",
    "cleaner",
    "move_box",
    "capture_target",
    "small_box_pushing",
];

const EXPLICIT: &[&str] = &["climb", "morning", "guess", "binary_match", "dectiger"];

/// Episode cap applied to explicit models without a horizon.
const DEFAULT_MAX_STEPS: usize = 200;

pub fn is_explicit(name: &str) -> bool {
    EXPLICIT.contains(&name)
}

fn bad(name: &str, reason: impl Into<String>) -> EnvError {
    EnvError::InvalidParam {
        name: name.to_string(),
        reason: reason.into(),
    }
}

fn get_f64(params: &EnvParams, key: &str) -> Result<Option<f64>> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v.as_f64().map(Some).ok_or_else(|| bad(key, "expected a number")),
    }
}

fn get_usize(params: &EnvParams, key: &str) -> Result<Option<usize>> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|x| Some(x as usize))
            .ok_or_else(|| bad(key, "expected a non-negative integer")),
    }
}

fn get_str<'a>(params: &'a EnvParams, key: &str) -> Result<Option<&'a str>> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v.as_str().map(Some).ok_or_else(|| bad(key, "expected a string")),
    }
}

/// Build the explicit model for `name`. Grid worlds and other generative
/// environments return [`EnvError::NotExplicit`].
pub fn build_model(name: &str, params: &EnvParams) -> Result<DecPomdpModel> {
    let model = match name {
        "climb" => build_climb_game(),
        "morning" => build_morning_game(),
        "guess" => build_guess_game(
            get_f64(params, "r")?.unwrap_or(10.0),
            get_f64(params, "safe")?.unwrap_or(5.0),
        )?,
        "binary_match" => build_binary_match_game(get_f64(params, "r")?.unwrap_or(1.0))?,
        "dectiger" => {
            let defaults = DecTigerParams::default();
            let horizon = match params.get("horizon") {
                Some(Value::Null) => None,
                _ => get_usize(params, "horizon")?.or(defaults.horizon),
            };
            build_dectiger_with(&DecTigerParams {
                horizon,
                gamma: get_f64(params, "gamma")?.unwrap_or(defaults.gamma),
                listen_accuracy: get_f64(params, "listen_accuracy")?
                    .unwrap_or(defaults.listen_accuracy),
            })?
        }
        other if ENV_NAMES.contains(&other) => return Err(EnvError::NotExplicit(other.into())),
        other => return Err(EnvError::UnknownEnv(other.into())),
    };
    match get_f64(params, "gamma")? {
        Some(g) if name != "dectiger" => Ok(model.with_gamma(g)?),
        _ => Ok(model),
    }
}

/// Build any environment by name as a generative simulator.
pub fn build_env(name: &str, params: &EnvParams) -> Result<Box<dyn GenerativeEnv>> {
    if is_explicit(name) {
        let model = build_model(name, params)?;
        let max_steps = get_usize(params, "max_steps")?.unwrap_or(DEFAULT_MAX_STEPS);
        return Ok(Box::new(ModelEnv::new(Arc::new(model), max_steps)));
    }
    match name {
        "go_together" | "find_treasure" | "cleaner" | "move_box" => {
            let kind: GridWorldKind = name.parse()?;
            let map_text = match get_str(params, "map_file")? {
                Some(path) => Some(
                    std::fs::read_to_string(path)
                        .map_err(|e| bad("map_file", format!("{path}: {e}")))?,
                ),
                None => get_str(params, "map")?.map(str::to_string),
            };
            let map = TileMap::parse(map_text.as_deref().unwrap_or(kind.default_map()))?;
            Ok(Box::new(GridWorld::new(
                kind,
                map,
                get_usize(params, "horizon")?.unwrap_or(kind.default_horizon()),
                get_f64(params, "gamma")?.unwrap_or(0.95),
            )?))
        }
        "capture_target" => Ok(Box::new(CaptureTarget::new(
            get_usize(params, "m")?.unwrap_or(4),
            get_usize(params, "horizon")?.unwrap_or(60),
            get_f64(params, "gamma")?.unwrap_or(0.95),
        )?)),
        "small_box_pushing" => Ok(Box::new(SmallBoxPushing::new(
            get_usize(params, "m")?.unwrap_or(6),
            get_usize(params, "n_agents")?.unwrap_or(2),
            get_usize(params, "horizon")?.unwrap_or(100),
        )?)),
        other => Err(EnvError::UnknownEnv(other.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn params(v: Value) -> EnvParams {
        v.as_object().cloned().unwrap_or_default()
    }

    #[test]
    fn every_name_builds() {
        for name in ENV_NAMES {
            let env = build_env(name, &EnvParams::new()).unwrap();
            assert!(env.info().num_agents >= 2, "{name}");
        }
    }

    #[test]
    fn explicit_split() {
        for name in ENV_NAMES {
            assert_eq!(build_model(name, &EnvParams::new()).is_ok(), is_explicit(name));
        }
        assert!(matches!(
            build_model("cleaner", &EnvParams::new()),
            Err(EnvError::NotExplicit(_))
        ));
        assert!(matches!(
            build_env("nope", &EnvParams::new()),
            Err(EnvError::UnknownEnv(_))
        ));
    }

    #[test]
    fn parameters_are_applied() {
        let m = build_model("dectiger", &params(json!({"horizon": 2, "gamma": 0.9}))).unwrap();
        assert_eq!(m.horizon(), Some(2));
        assert_eq!(m.gamma(), 0.9);
        let m = build_model("dectiger", &params(json!({"horizon": null}))).unwrap();
        assert_eq!(m.horizon(), None);
        assert!(build_model("binary_match", &params(json!({"r": -1.0}))).is_err());
        assert!(build_env("capture_target", &params(json!({"m": "x"}))).is_err());
    }
}
