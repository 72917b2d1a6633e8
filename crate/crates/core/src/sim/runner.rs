use serde::{Deserialize, Serialize};

use super::metrics::MetricSpec;
use super::success::evaluate_success;
use super::{Env, SimError};
use crate::canonical::format_sig;
use crate::composer::ControlSystem;

/// Per-tick trajectory: one row per tick, columns named `channel[i]`
/// (measurements, then `actuation[i]`, then `task_control[i]`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunLog {
    pub dt: f64,
    pub time: Vec<f64>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl RunLog {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn column_index(&self, channel: &str, index: usize) -> Option<usize> {
        let name = format!("{channel}[{index}]");
        self.columns.iter().position(|c| *c == name)
    }

    pub fn series(&self, channel: &str, index: usize) -> Option<Vec<f64>> {
        let c = self.column_index(channel, index)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    /// Number of entries logged for `channel`.
    pub fn channel_dim(&self, channel: &str) -> usize {
        let prefix = format!("{channel}[");
        self.columns
            .iter()
            .filter(|c| c.starts_with(&prefix))
            .count()
    }

    /// Comma-separated export: header `t,<channel>[<i>],...`, 10 significant digits.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (t, row) in self.time.iter().zip(&self.rows) {
            let rec: Vec<String> = std::iter::once(*t)
                .chain(row.iter().copied())
                .map(|x| format_sig(x, 10))
                .collect();
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("ascii")
    }
}

/// Parses a log written by [`RunLog::to_csv`]; `dt` is taken from the first two rows.
pub fn read_csv(text: &str) -> Result<RunLog, SimError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| SimError::Log(e.to_string()))?
        .clone();
    if header.get(0) != Some("t") {
        return Err(SimError::Log("first column must be 't'".into()));
    }
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut log = RunLog {
        columns,
        ..RunLog::default()
    };
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| SimError::Log(format!("row {}: {e}", i + 2)))?;
        let vals: Result<Vec<f64>, _> = rec.iter().map(|f| f.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|_| SimError::Log(format!("row {}: non-numeric field", i + 2)))?;
        if vals.len() != log.columns.len() + 1 {
            return Err(SimError::Log(format!(
                "row {}: expected {} fields",
                i + 2,
                log.columns.len() + 1
            )));
        }
        log.time.push(vals[0]);
        log.rows.push(vals[1..].to_vec());
    }
    log.dt = if log.time.len() >= 2 {
        log.time[1] - log.time[0]
    } else {
        0.0
    };
    Ok(log)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub env_kind: String,
    pub seed: u64,
    pub log: RunLog,
    pub metrics: Vec<(String, f64)>,
    pub success: bool,
    pub reason: String,
    pub failure_reason: Option<String>,
}

impl RunResult {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

/// Runs from the nominal (seed 0) initial conditions.
pub fn run(
    sys: &mut ControlSystem,
    env: &Env,
    duration: f64,
    metrics: &[MetricSpec],
) -> Result<RunResult, SimError> {
    run_with_seed(sys, env, duration, metrics, 0)
}

/// Fixed-step episode of `round(duration / dt)` ticks. Hard errors during the
/// episode end it early and are recorded as the failure reason; setup errors
/// are returned.
pub fn run_with_seed(
    sys: &mut ControlSystem,
    env: &Env,
    duration: f64,
    metrics: &[MetricSpec],
    seed: u64,
) -> Result<RunResult, SimError> {
    let dt = sys.tracking_dt();
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(SimError::InvalidSpec(format!(
            "duration must be positive, got {duration}"
        )));
    }
    if (env.dt() - dt).abs() > 1e-15 {
        return Err(SimError::InvalidSpec(format!(
            "environment dt {} differs from the system's {dt}",
            env.dt()
        )));
    }
    if sys.schema().as_ref() != env.schema().as_ref() {
        return Err(SimError::InvalidSpec(
            "control system was built for a different measurement schema".into(),
        ));
    }
    let ticks = (duration / dt).round() as u64;
    let schema = env.schema().clone();
    let mut columns: Vec<String> = schema.labels();
    columns.extend((0..sys.actuation_dim()).map(|i| format!("actuation[{i}]")));
    columns.extend((0..sys.task_control().len()).map(|i| format!("task_control[{i}]")));
    let mut log = RunLog {
        dt,
        time: Vec::with_capacity(ticks as usize),
        columns,
        rows: Vec::with_capacity(ticks as usize),
    };

    let mut state = env.reset(seed)?;
    let mut bundle = env.measure(&mut state)?;
    let mut failure = None;
    for k in 0..ticks {
        let t = k as f64 * dt;
        let u = match sys.step(&bundle, t) {
            Ok(u) => u.to_vec(),
            Err(e) => {
                failure = Some(format!("tick {k} (t={t:.3} s): {e}"));
                break;
            }
        };
        let mut row = bundle.values().to_vec();
        row.extend_from_slice(&u);
        row.extend_from_slice(sys.task_control());
        log.time.push(t);
        log.rows.push(row);
        match env.step(&state, &u, dt) {
            Ok((s, b)) => {
                state = s;
                bundle = b;
            }
            Err(e) => {
                failure = Some(format!("tick {k} (t={t:.3} s): {e}"));
                break;
            }
        }
    }

    let mut values = Vec::with_capacity(metrics.len());
    for m in metrics {
        values.push((m.to_string(), m.evaluate(&log)?));
    }
    let (ok, reason) = evaluate_success(env.spec(), &log);
    let success = ok && failure.is_none();
    let reason = match &failure {
        Some(f) => format!("run aborted at {f}"),
        None => reason,
    };
    Ok(RunResult {
        env_kind: env.spec().kind_name().to_string(),
        seed,
        log,
        metrics: values,
        success,
        reason,
        failure_reason: failure,
    })
}
