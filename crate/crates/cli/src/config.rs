//! Flat `key = value` configuration.
//!
//! Values come from the experiment's defaults, then the config file, then
//! command-line flags, later sources winning.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use horoflow::cusp_dioph::AlphaSpec;
use horoflow::random_walk::StepDistribution;
use horoflow::{FlowKind, FuchsianGroupSpec};

use crate::error::CliError;

/// A parameter accepted by an experiment.
pub struct Key {
    pub name: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

/// Output paths; accepted everywhere and never echoed.
pub const OUTPUT_KEYS: [&str; 2] = ["json", "csv"];

/// Parses `key = value` lines. `#` starts a comment line.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::config(format!("line {}: empty key", i + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::config(format!(
                "line {}: duplicate key {k}",
                i + 1
            )));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn resolve(
        experiment: &str,
        keys: &[Key],
        file: BTreeMap<String, String>,
        flags: Vec<(String, String)>,
    ) -> Result<Self, CliError> {
        let mut values: BTreeMap<String, String> = keys
            .iter()
            .filter_map(|k| k.default.map(|d| (k.name.to_string(), d.to_string())))
            .collect();
        let known = |k: &str| keys.iter().any(|key| key.name == k) || OUTPUT_KEYS.contains(&k);
        for (k, v) in file {
            if k == "experiment" {
                if v != experiment {
                    return Err(CliError::config(format!(
                        "config file is for experiment {v}, not {experiment}"
                    )));
                }
                continue;
            }
            if !known(&k) {
                return Err(CliError::config(format!(
                    "unknown key {k} for {experiment}"
                )));
            }
            values.insert(k, v);
        }
        values.extend(flags);
        Ok(Params { values })
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Result<&str, CliError> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::config(format!("missing required key {key}")))
    }

    pub fn get<T>(&self, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let raw = self.str(key)?;
        raw.parse()
            .map_err(|e| CliError::config(format!("{key} = {raw}: {e}")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self.get(key)?;
        if !v.is_finite() {
            return Err(CliError::config(format!("{key} must be finite")));
        }
        Ok(v)
    }

    /// Counts may be written `1e6`.
    pub fn count(&self, key: &str) -> Result<u64, CliError> {
        let v = self.f64(key)?;
        if v < 0.0 || v.fract() != 0.0 || v > 2f64.powi(53) {
            return Err(CliError::config(format!("{key} = {v} is not a count")));
        }
        Ok(v as u64)
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        Ok(self.count(key)? as usize)
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        parse_list(self.str(key)?).map_err(|e| CliError::config(format!("{key}: {e}")))
    }

    pub fn group(&self) -> Result<FuchsianGroupSpec, CliError> {
        parse_group(self.str("group")?)
    }

    pub fn alpha(&self) -> Result<AlphaSpec, CliError> {
        let raw = self.str("alpha")?;
        raw.parse()
            .map_err(|e| CliError::config(format!("alpha = {raw}: {e}")))
    }

    pub fn mu(&self) -> Result<StepDistribution, CliError> {
        parse_mu(self.str("mu")?)
    }

    pub fn rho_seq(&self) -> Result<Vec<f64>, CliError> {
        parse_rho_seq(self.str("rho_seq")?)
    }

    pub fn flow_kind(&self) -> Result<FlowKind, CliError> {
        match self.str("kind")? {
            "geodesic" => Ok(FlowKind::Geodesic),
            "horocycle_pos" => Ok(FlowKind::HorocyclePos),
            "horocycle_neg" => Ok(FlowKind::HorocycleNeg),
            other => Err(CliError::config(format!(
                "kind = {other}: expected geodesic, horocycle_pos or horocycle_neg"
            ))),
        }
    }

    /// Inputs as resolved, without output paths.
    pub fn echo(&self) -> BTreeMap<&str, &str> {
        self.values
            .iter()
            .filter(|(k, _)| !OUTPUT_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect()
    }
}

fn parse_list(raw: &str) -> Result<Vec<f64>, String> {
    raw.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{s:?} is not a number"))
        })
        .collect()
}

pub fn parse_group(raw: &str) -> Result<FuchsianGroupSpec, CliError> {
    match raw {
        "modular" => Ok(FuchsianGroupSpec::Modular),
        "gamma2" => Ok(FuchsianGroupSpec::Gamma2),
        other => Err(CliError::config(format!(
            "group = {other}: expected modular or gamma2"
        ))),
    }
}

/// `gaussian:a,b`, `exp:rate,shift`, `point:at` or `empirical:v1,v2,...`.
pub fn parse_mu(raw: &str) -> Result<StepDistribution, CliError> {
    let bad = |why: String| CliError::config(format!("mu = {raw}: {why}"));
    let (kind, args) = raw
        .split_once(':')
        .ok_or_else(|| bad("expected kind:parameters".into()))?;
    let v = parse_list(args).map_err(bad)?;
    let arity = |n: usize| {
        if v.len() == n {
            Ok(())
        } else {
            Err(bad(format!("{kind} takes {n} parameters")))
        }
    };
    let built = match kind {
        "gaussian" => {
            arity(2)?;
            StepDistribution::gaussian(v[0], v[1])
        }
        "exp" => {
            arity(2)?;
            StepDistribution::shifted_exponential(v[0], v[1])
        }
        "point" => {
            arity(1)?;
            StepDistribution::point_mass(v[0])
        }
        "empirical" => StepDistribution::empirical(v),
        other => return Err(bad(format!("unknown kind {other}"))),
    };
    built.map_err(|e| bad(e.to_string()))
}

/// `harmonic:N` (1/n for n = 1..N), `dyadic:K` (2^-k for k = 1..K), or an
/// explicit comma-separated list.
pub fn parse_rho_seq(raw: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::config(format!("rho_seq = {raw}: {why}"));
    let count = |s: &str| {
        s.trim()
            .parse::<u32>()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| bad("expected a positive length"))
    };
    if let Some(n) = raw.strip_prefix("harmonic:") {
        return Ok((1..=count(n)?).map(|n| 1.0 / n as f64).collect());
    }
    if let Some(k) = raw.strip_prefix("dyadic:") {
        return Ok((1..=count(k)?).map(|k| 0.5f64.powi(k as i32)).collect());
    }
    parse_list(raw).map_err(|e| bad(&e))
}
