use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::runner::RunLog;
use super::SimError;

/// How a scalar series is reduced to one number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// `max |x|` over samples with `t > after`.
    MaxAbsAfter {
        after: f64,
    },
    /// Earliest time from which `|x| ≤ threshold` holds to the end of the run
    /// (end time plus one step if the last sample violates it).
    SettleTime {
        threshold: f64,
    },
    MinOverRun,
    /// `sqrt(mean (x − target)²)`.
    RmsError {
        target: f64,
    },
    /// Fraction of samples with `|x − target| ≤ band`.
    FractionWithin {
        target: f64,
        band: f64,
    },
}

/// A named scalar extracted from a run: `channel[index]:reduction(args)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub channel: String,
    pub index: usize,
    pub reduction: Reduction,
}

impl FromStr for MetricSpec {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        let bad = |m: &str| SimError::Metric(format!("metric '{s}': {m}"));
        let s_trim = s.trim();
        let (target, red) = s_trim
            .split_once(':')
            .ok_or_else(|| bad("expected channel[index]:reduction"))?;
        let (channel, index) = match target.split_once('[') {
            Some((c, rest)) => {
                let idx = rest
                    .trim()
                    .strip_suffix(']')
                    .ok_or_else(|| bad("unclosed '['"))?;
                (
                    c.trim(),
                    idx.trim()
                        .parse()
                        .map_err(|_| bad("index is not an integer"))?,
                )
            }
            None => (target.trim(), 0),
        };
        if channel.is_empty() {
            return Err(bad("empty channel name"));
        }
        let (name, args) = match red.split_once('(') {
            Some((n, rest)) => {
                let inner = rest
                    .trim()
                    .strip_suffix(')')
                    .ok_or_else(|| bad("unclosed '('"))?;
                let args: Result<Vec<f64>, _> = inner
                    .split(',')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .map(str::parse::<f64>)
                    .collect();
                (
                    n.trim(),
                    args.map_err(|_| bad("arguments must be numbers"))?,
                )
            }
            None => (red.trim(), vec![]),
        };
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(bad(&format!("{name} takes {n} argument(s)")))
            }
        };
        let reduction = match name {
            "max_abs_after" => {
                arity(1)?;
                Reduction::MaxAbsAfter { after: args[0] }
            }
            "settle_time" => {
                arity(1)?;
                Reduction::SettleTime { threshold: args[0] }
            }
            "min_over_run" => {
                arity(0)?;
                Reduction::MinOverRun
            }
            "rms_error" => {
                arity(1)?;
                Reduction::RmsError { target: args[0] }
            }
            "fraction_within" => {
                arity(2)?;
                Reduction::FractionWithin {
                    target: args[0],
                    band: args[1],
                }
            }
            other => return Err(bad(&format!("unknown reduction '{other}'"))),
        };
        Ok(MetricSpec {
            channel: channel.to_string(),
            index,
            reduction,
        })
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]:", self.channel, self.index)?;
        match self.reduction {
            Reduction::MaxAbsAfter { after } => write!(f, "max_abs_after({after})"),
            Reduction::SettleTime { threshold } => write!(f, "settle_time({threshold})"),
            Reduction::MinOverRun => write!(f, "min_over_run"),
            Reduction::RmsError { target } => write!(f, "rms_error({target})"),
            Reduction::FractionWithin { target, band } => {
                write!(f, "fraction_within({target}, {band})")
            }
        }
    }
}

impl MetricSpec {
    /// Whether larger values of this reduction are better.
    pub fn higher_is_better(&self) -> bool {
        matches!(
            self.reduction,
            Reduction::MinOverRun | Reduction::FractionWithin { .. }
        )
    }

    pub fn column(&self) -> String {
        format!("{}[{}]", self.channel, self.index)
    }

    /// Reduces the series `xs` sampled at `time` (step `dt`).
    pub fn reduce(&self, time: &[f64], xs: &[f64], dt: f64) -> f64 {
        match self.reduction {
            Reduction::MaxAbsAfter { after } => time
                .iter()
                .zip(xs)
                .filter(|(t, _)| **t > after)
                .fold(0.0, |m: f64, (_, x)| m.max(x.abs())),
            Reduction::SettleTime { threshold } => {
                match xs.iter().rposition(|x| !(x.abs() <= threshold)) {
                    None => time.first().copied().unwrap_or(0.0),
                    Some(i) if i + 1 < time.len() => time[i + 1],
                    Some(i) => time[i] + dt,
                }
            }
            Reduction::MinOverRun => xs.iter().copied().fold(f64::INFINITY, f64::min),
            Reduction::RmsError { target } => {
                if xs.is_empty() {
                    return 0.0;
                }
                (xs.iter().map(|x| (x - target).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
            }
            Reduction::FractionWithin { target, band } => {
                if xs.is_empty() {
                    return 0.0;
                }
                xs.iter().filter(|x| (*x - target).abs() <= band).count() as f64 / xs.len() as f64
            }
        }
    }

    /// Evaluates against a logged run.
    pub fn evaluate(&self, log: &RunLog) -> Result<f64, SimError> {
        let xs = log.series(&self.channel, self.index).ok_or_else(|| {
            SimError::Metric(format!("metric '{self}': no column {}", self.column()))
        })?;
        Ok(self.reduce(&log.time, &xs, log.dt))
    }
}
