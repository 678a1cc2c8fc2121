//! JSON exchange formats for POVMs and state clouds.
//!
//! A POVM file is either the density form
//! `{"dim": n, "outcomes": [{"label": ..., "alpha": ..., "F": matrix}, ...]}`
//! or `{"effects": [matrix, ...]}`; matrices are row-major nested arrays of
//! `[re, im]` pairs.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{CloudPoint, StateCloud};
use crate::operator::{DensityOperator, HermitianOperator};
use crate::povm::{from_effects, DiscretePovm, Outcome};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeRecord {
    #[serde(default)]
    label: Option<String>,
    alpha: f64,
    #[serde(rename = "F")]
    f: HermitianOperator,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityForm {
    /// Free-form record of how the file was produced; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<Value>,
    dim: usize,
    outcomes: Vec<OutcomeRecord>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EffectForm {
    #[serde(default, rename = "config")]
    _config: Option<Value>,
    effects: Vec<HermitianOperator>,
}

fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
}

fn from_value<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

/// Parses and validates a POVM, with normalization tolerance `tol`.
pub fn parse_povm(text: &str, tol: f64) -> Result<DiscretePovm> {
    let value = parse_value(text)?;
    if value.get("effects").is_some() {
        let form: EffectForm = from_value(value, "effects")?;
        return from_effects(&form.effects, tol);
    }
    let form: DensityForm = from_value(value, "povm")?;
    let outcomes = form
        .outcomes
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let state = DensityOperator::new(r.f)?;
            Ok(Outcome::new(r.label.unwrap_or_else(|| i.to_string()), r.alpha, state))
        })
        .collect::<Result<Vec<_>>>()?;
    DiscretePovm::with_tolerance(form.dim, outcomes, tol)
}

/// Density-form JSON of a POVM.
pub fn povm_to_json(povm: &DiscretePovm) -> String {
    povm_to_json_with_config(povm, None)
}

/// Density-form JSON with a `config` record ahead of the data.
pub fn povm_to_json_with_config(povm: &DiscretePovm, config: Option<Value>) -> String {
    let form = DensityForm {
        config,
        dim: povm.dim(),
        outcomes: povm
            .outcomes()
            .iter()
            .map(|o| OutcomeRecord {
                label: Some(o.label.clone()),
                alpha: o.alpha,
                f: o.state.op().clone(),
            })
            .collect(),
    };
    to_json(&form)
}

/// `{"dim": n, "points": [{"weight": w, "point": matrix}, ...]}`.
pub fn parse_cloud(text: &str) -> Result<StateCloud> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        dim: usize,
        points: Vec<CloudPoint>,
    }
    let raw: Raw = from_value(parse_value(text)?, "cloud")?;
    StateCloud::new(raw.dim, raw.points)
}

pub fn cloud_to_json(cloud: &StateCloud) -> String {
    to_json(cloud)
}

/// Pretty JSON with shortest round-trip float formatting.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
