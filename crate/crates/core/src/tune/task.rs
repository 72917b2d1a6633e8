use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{TunableParam, TuneError};
use crate::blueprint::{Blueprint, ParamPath};
use crate::sim::{EnvSpec, MetricSpec};

/// One evaluation condition: a patch over the task's environment, blueprint
/// parameter overrides (e.g. re-instantiating the task model for a different
/// plant) and a seed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub name: String,
    /// Merged recursively over the base environment document.
    pub env: Value,
    pub overrides: BTreeMap<ParamPath, f64>,
    pub seed: u64,
}

impl Scenario {
    pub fn env_spec(&self, base: &EnvSpec) -> Result<EnvSpec, TuneError> {
        let mut doc = serde_json::to_value(base).map_err(|e| TuneError::Task(e.to_string()))?;
        merge(&mut doc, &self.env);
        serde_json::from_value(doc)
            .map_err(|e| TuneError::Task(format!("scenario '{}': {e}", self.name)))
    }

    pub fn apply(&self, bp: &Blueprint) -> Result<Blueprint, TuneError> {
        let mut out = bp.clone();
        for (path, value) in &self.overrides {
            out.set_param(path, *value)?;
        }
        Ok(out)
    }
}

fn merge(doc: &mut Value, patch: &Value) {
    if let (Value::Object(d), Value::Object(p)) = (&mut *doc, patch) {
        for (k, v) in p {
            merge(d.entry(k.clone()).or_insert(Value::Null), v);
        }
        return;
    }
    if !patch.is_null() {
        *doc = patch.clone();
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuneConfig {
    pub params: Vec<TunableParam>,
    pub scenarios: Vec<Scenario>,
}

/// A task file: description, environment and evaluation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub format: u32,
    pub format_kind: String,
    pub task_id: String,
    pub description: String,
    pub env: Value,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default)]
    pub metrics: Vec<String>,
    #[serde(default)]
    pub tune: TuneConfig,
}

fn default_duration() -> f64 {
    10.0
}

impl TaskSpec {
    pub fn parse(text: &str) -> Result<TaskSpec, TuneError> {
        let t: TaskSpec = serde_json::from_str(text).map_err(|e| {
            TuneError::Task(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        if t.format != 1 || t.format_kind != "task" {
            return Err(TuneError::Task(format!(
                "expected format 1 with format_kind \"task\", got {} / \"{}\"",
                t.format, t.format_kind
            )));
        }
        t.env_spec()?;
        t.metric_specs()?;
        if !(t.duration > 0.0 && t.duration.is_finite()) {
            return Err(TuneError::Task(format!(
                "duration must be positive, got {}",
                t.duration
            )));
        }
        for p in &t.tune.params {
            p.validate()?;
        }
        Ok(t)
    }

    pub fn env_spec(&self) -> Result<EnvSpec, TuneError> {
        EnvSpec::from_json(&self.env.to_string()).map_err(|e| TuneError::Task(e.to_string()))
    }

    pub fn metric_specs(&self) -> Result<Vec<MetricSpec>, TuneError> {
        self.metrics
            .iter()
            .map(|m| m.parse().map_err(TuneError::from))
            .collect()
    }

    /// Declared scenarios, or the bare environment at seed 0.
    pub fn scenarios(&self) -> Vec<Scenario> {
        if self.tune.scenarios.is_empty() {
            vec![Scenario {
                name: "nominal".into(),
                ..Scenario::default()
            }]
        } else {
            self.tune.scenarios.clone()
        }
    }
}
