//! Parameter-level tuning: tunable parameters, trajectory summaries, and the
//! run-evaluate-propose loop with a deterministic coordinate search.

mod coordinate;
mod search;
mod task;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blueprint::{Blueprint, BlueprintError, ParamPath, Section};
use crate::canonical::format_sig;
use crate::sim::{MetricSpec, RunResult, SimError};

pub use coordinate::CoordinateProposer;
pub use search::{
    evaluate_candidate, tune_loop, Evaluation, ProposalContext, Proposer, TuneReport, TuneRound,
    TuneSetup,
};
pub use task::{Scenario, TaskSpec, TuneConfig};

#[derive(Debug, Error)]
pub enum TuneError {
    #[error(transparent)]
    Blueprint(#[from] BlueprintError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("'{0}' is not a tunable parameter")]
    UnknownPath(String),
    #[error("{path} = {value} is outside [{lower}, {upper}]")]
    OutOfBounds {
        path: String,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("tunable {0}")]
    InvalidParam(String),
    #[error("task file: {0}")]
    Task(String),
    #[error("the budget must be at least one round")]
    Budget,
    #[error("no round could be built and run:\n{}", .0.causes().join("\n"))]
    AllFailed(Box<TuneReport>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Log,
    Linear,
}

/// One scalar the tuner may change, with its search bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TunableParam {
    pub path: ParamPath,
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub scale: Scale,
}

impl TunableParam {
    pub fn new(path: ParamPath, lower: f64, upper: f64, scale: Scale) -> Self {
        TunableParam {
            path,
            lower,
            upper,
            scale,
        }
    }

    pub fn validate(&self) -> Result<(), TuneError> {
        let bad = |m: &str| TuneError::InvalidParam(format!("{}: {m}", self.path));
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(bad("bounds must be finite with lower < upper"));
        }
        if self.scale == Scale::Log && self.lower <= 0.0 {
            return Err(bad("log-scale bounds must be positive"));
        }
        Ok(())
    }

    pub fn check(&self, value: f64) -> Result<(), TuneError> {
        if value >= self.lower && value <= self.upper {
            Ok(())
        } else {
            Err(TuneError::OutOfBounds {
                path: self.path.to_string(),
                value,
                lower: self.lower,
                upper: self.upper,
            })
        }
    }

    /// One coordinate step: ×3 / ÷3 on log scale, ±1/9 of the range on linear
    /// scale, clamped to the bounds.
    pub fn step(&self, value: f64, up: bool) -> f64 {
        let next = match (self.scale, up) {
            (Scale::Log, true) => value * 3.0,
            (Scale::Log, false) => value / 3.0,
            (Scale::Linear, true) => value + (self.upper - self.lower) / 9.0,
            (Scale::Linear, false) => value - (self.upper - self.lower) / 9.0,
        };
        next.clamp(self.lower, self.upper)
    }
}

/// Returns a copy of `bp` with only the assigned entries changed. Every path
/// must name a declared tunable and every value must lie in its bounds.
pub fn apply_params(
    bp: &Blueprint,
    assignments: &[(ParamPath, f64)],
    tunables: &[TunableParam],
) -> Result<Blueprint, TuneError> {
    let mut out = bp.clone();
    for (path, value) in assignments {
        let t = tunables
            .iter()
            .find(|t| &t.path == path)
            .ok_or_else(|| TuneError::UnknownPath(path.to_string()))?;
        t.check(*value)?;
        out.set_param(path, *value)?;
    }
    // Re-parse so the parameter schema checks run on the new values.
    Ok(Blueprint::parse(&out.to_canonical())?)
}

/// Gain-like entries of the two controllers, all on log scale.
pub fn default_tunables(bp: &Blueprint) -> Vec<TunableParam> {
    let mut out = Vec::new();
    for section in [Section::TaskController, Section::TrackingController] {
        let Some(t) = bp.template(section) else {
            continue;
        };
        let names: &[&str] = match t.template.as_str() {
            "LQRController" => &["Q", "R"],
            "PIDController"
            | "CartesianStiffnessController"
            | "HybridPositionForceController"
            | "SafeController" => &["kp", "ki", "kd"],
            _ => &[],
        };
        for name in names {
            let Some(value) = t.params.get(*name) else {
                continue;
            };
            let diag = matches!(*name, "Q" | "R");
            let (rows, _) = value.shape();
            let indices: Vec<Vec<usize>> = match value.as_number() {
                Some(_) => vec![vec![]],
                None if diag => (0..rows).map(|i| vec![i, i]).collect(),
                None => (0..value.values().len()).map(|i| vec![i]).collect(),
            };
            for index in indices {
                let path = ParamPath {
                    section,
                    param: name.to_string(),
                    index,
                };
                let Some(v) = bp.get_param(&path) else {
                    continue;
                };
                if v > 0.0 {
                    let (lo, hi): (f64, f64) = if diag { (1e-4, 1e6) } else { (1e-2, 1e5) };
                    out.push(TunableParam::new(path, lo.min(v), hi.max(v), Scale::Log));
                }
            }
        }
    }
    out
}

/// Indices of at most `max` samples out of `n` at a uniform stride, always
/// including the first and the last.
pub fn downsample_indices(n: usize, max: usize) -> Vec<usize> {
    if n == 0 {
        return vec![];
    }
    if n <= max {
        return (0..n).collect();
    }
    let span = n - 1;
    let mut stride = span.div_ceil(max - 1);
    if span % stride != 0 && span / stride + 2 > max {
        stride = span.div_ceil(max - 2);
    }
    let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
    if idx.last() != Some(&span) {
        idx.push(span);
    }
    idx
}

pub const SUMMARY_POINTS: usize = 50;

/// Metric values plus a downsampled series per metric column, rendered
/// deterministically for the tune-stage prompt.
pub fn summarize_trajectory(result: &RunResult, metrics: &[MetricSpec]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "success: {} ({})", result.success, result.reason);
    for m in metrics {
        let v = m
            .evaluate(&result.log)
            .map(|v| format_sig(v, 6))
            .unwrap_or_else(|e| format!("unavailable: {e}"));
        let _ = writeln!(s, "metric {m} = {v}");
    }
    let mut columns: Vec<String> = metrics.iter().map(|m| m.column()).collect();
    columns.dedup();
    for col in columns {
        let Some((channel, index)) = col.strip_suffix(']').and_then(|c| c.split_once('[')) else {
            continue;
        };
        let Some(xs) = index
            .parse()
            .ok()
            .and_then(|i| result.log.series(channel, i))
        else {
            continue;
        };
        let idx = downsample_indices(xs.len(), SUMMARY_POINTS);
        let _ = writeln!(
            s,
            "series {col} ({} of {} ticks), t:value",
            idx.len(),
            xs.len()
        );
        let pts: Vec<String> = idx
            .iter()
            .map(|&i| {
                format!(
                    "{}:{}",
                    format_sig(result.log.time[i], 6),
                    format_sig(xs[i], 6)
                )
            })
            .collect();
        let _ = writeln!(s, "{}", pts.join(" "));
    }
    s
}

#[cfg(test)]
mod tests;
