//! Deterministic desk-scale environments, the episode runner, metrics,
//! success predicates and the safety certificate.

pub mod arm;
mod balance;
mod door;
mod metrics;
mod pickplace;
mod runner;
mod success;
mod wipe;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measurement::{MeasurementBundle, MeasurementSchema};
use crate::models::ModelError;

pub use balance::{BalanceSpec, BalanceSuccess};
pub use door::{DoorEnvSpec, DoorSuccess};
pub use metrics::{MetricSpec, Reduction};
pub use pickplace::{Obstacle, PickplaceSpec, PickplaceSuccess};
pub use runner::{read_csv, run, run_with_seed, RunLog, RunResult};
pub use success::{certify_safety, evaluate_success, SafetyCertificate};
pub use wipe::{WipeSpec, WipeSuccess};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid environment: {0}")]
    InvalidSpec(String),
    #[error("non-finite actuation {0:?}")]
    NonFiniteActuation(Vec<f64>),
    #[error("actuation has {got} entries, the environment has {expected} joints")]
    ActuationDim { expected: usize, got: usize },
    #[error("point ({x:.4}, {y:.4}) is outside the arm's reach")]
    Unreachable { x: f64, y: f64 },
    #[error("arm is at a kinematic singularity")]
    Singular,
    #[error("state became non-finite")]
    NonFiniteState,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Metric(String),
    #[error("trajectory log: {0}")]
    Log(String),
}

/// Environment description: kind, physical parameters, initial-condition
/// ranges and success thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvSpec {
    CartpoleArm(BalanceSpec),
    Arm2dPickplace(PickplaceSpec),
    Door(DoorEnvSpec),
    Wipe(WipeSpec),
}

/// Exact simulator state: time, the kind-specific state vector and the
/// measurement-noise stream.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub t: f64,
    pub tick: u64,
    pub x: Vec<f64>,
    noise: Option<(Pcg32, f64)>,
}

/// Initial-condition ranges keyed by variable name: `[lo, hi]`.
pub type InitialRanges = BTreeMap<String, [f64; 2]>;

/// Draws every range: midpoint for seed 0, otherwise uniform from a PCG
/// (linear congruential) stream seeded with `seed`, in name order.
pub fn draw_initial(ranges: &InitialRanges, seed: u64) -> BTreeMap<String, f64> {
    let mut rng = Pcg32::seed_from_u64(seed);
    ranges
        .iter()
        .map(|(k, &[lo, hi])| {
            let v = if seed == 0 || hi <= lo {
                0.5 * (lo + hi)
            } else {
                rng.random_range(lo..=hi)
            };
            (k.clone(), v)
        })
        .collect()
}

fn merge_ranges(
    defaults: &[(&str, [f64; 2])],
    given: &InitialRanges,
) -> Result<InitialRanges, SimError> {
    for (k, [lo, hi]) in given {
        if !defaults.iter().any(|(d, _)| d == k) {
            let names: Vec<&str> = defaults.iter().map(|(d, _)| *d).collect();
            return Err(SimError::InvalidSpec(format!(
                "unknown initial variable '{k}' (expected one of {names:?})"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(SimError::InvalidSpec(format!(
                "initial range for '{k}' must be finite with lo <= hi"
            )));
        }
    }
    let mut out: InitialRanges = defaults.iter().map(|(k, r)| (k.to_string(), *r)).collect();
    out.extend(given.iter().map(|(k, v)| (k.clone(), *v)));
    Ok(out)
}

impl EnvSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            EnvSpec::CartpoleArm(_) => "cartpole_arm",
            EnvSpec::Arm2dPickplace(_) => "arm2d_pickplace",
            EnvSpec::Door(_) => "door",
            EnvSpec::Wipe(_) => "wipe",
        }
    }

    pub fn from_json(text: &str) -> Result<EnvSpec, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::InvalidSpec(e.to_string()))
    }

    fn noise_std(&self) -> f64 {
        match self {
            EnvSpec::CartpoleArm(s) => s.noise_std,
            EnvSpec::Arm2dPickplace(s) => s.noise_std,
            EnvSpec::Door(s) => s.noise_std,
            EnvSpec::Wipe(s) => s.noise_std,
        }
    }

    pub fn initial_ranges(&self) -> Result<InitialRanges, SimError> {
        match self {
            EnvSpec::CartpoleArm(s) => merge_ranges(balance::INITIAL, &s.initial),
            EnvSpec::Arm2dPickplace(s) => merge_ranges(pickplace::INITIAL, &s.initial),
            EnvSpec::Door(s) => merge_ranges(door::INITIAL, &s.initial),
            EnvSpec::Wipe(s) => merge_ranges(wipe::INITIAL, &s.initial),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.noise_std() >= 0.0 && self.noise_std().is_finite()) {
            return Err(SimError::InvalidSpec(
                "noise_std must be finite and >= 0".into(),
            ));
        }
        self.initial_ranges()?;
        match self {
            EnvSpec::CartpoleArm(s) => s.validate(),
            EnvSpec::Arm2dPickplace(s) => s.validate(),
            EnvSpec::Door(s) => s.validate(),
            EnvSpec::Wipe(s) => s.validate(),
        }
    }

    pub fn schema(&self) -> MeasurementSchema {
        match self {
            EnvSpec::CartpoleArm(s) => s.schema(),
            EnvSpec::Arm2dPickplace(s) => s.schema(),
            EnvSpec::Door(s) => s.schema(),
            EnvSpec::Wipe(s) => s.schema(),
        }
    }
}

/// An environment ready to simulate at a fixed step `dt`.
#[derive(Debug, Clone)]
pub struct Env {
    spec: EnvSpec,
    schema: Arc<MeasurementSchema>,
    dt: f64,
}

impl Env {
    pub fn new(spec: EnvSpec, dt: f64) -> Result<Env, SimError> {
        spec.validate()?;
        if !(dt > 0.0 && dt <= 0.01) {
            return Err(SimError::InvalidSpec(format!(
                "dt must lie in (0, 0.01], got {dt}"
            )));
        }
        let schema = Arc::new(spec.schema());
        Ok(Env { spec, schema, dt })
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn schema(&self) -> &Arc<MeasurementSchema> {
        &self.schema
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Initial state for `seed` (seed 0: midpoints of every range).
    pub fn reset(&self, seed: u64) -> Result<EnvState, SimError> {
        let init = draw_initial(&self.spec.initial_ranges()?, seed);
        let x = match &self.spec {
            EnvSpec::CartpoleArm(s) => s.initial_state(&init)?,
            EnvSpec::Arm2dPickplace(s) => s.initial_state(&init)?,
            EnvSpec::Door(s) => s.initial_state(&init)?,
            EnvSpec::Wipe(s) => s.initial_state(&init)?,
        };
        let std = self.spec.noise_std();
        // A separate stream so noise does not perturb the initial draw.
        let noise = (std > 0.0).then(|| (Pcg32::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15), std));
        Ok(EnvState {
            t: 0.0,
            tick: 0,
            x,
            noise,
        })
    }

    /// Noise-free readout of `state`.
    pub fn observe(&self, state: &EnvState) -> Result<MeasurementBundle, SimError> {
        let mut b = MeasurementBundle::zeros(self.schema.clone());
        match &self.spec {
            EnvSpec::CartpoleArm(s) => s.observe(state, &mut b)?,
            EnvSpec::Arm2dPickplace(s) => s.observe(state, self.dt, &mut b)?,
            EnvSpec::Door(s) => s.observe(state, &mut b)?,
            EnvSpec::Wipe(s) => s.observe(state, &mut b)?,
        }
        Ok(b)
    }

    /// Readout with the optional Gaussian channel noise applied.
    pub fn measure(&self, state: &mut EnvState) -> Result<MeasurementBundle, SimError> {
        let b = self.observe(state)?;
        match &mut state.noise {
            None => Ok(b),
            Some((rng, std)) => {
                let normal =
                    Normal::new(0.0, *std).map_err(|e| SimError::InvalidSpec(e.to_string()))?;
                let values: Vec<f64> = b.values().iter().map(|v| v + normal.sample(rng)).collect();
                Ok(MeasurementBundle::from_values(self.schema.clone(), values)
                    .expect("same length"))
            }
        }
    }

    /// Advances one step under `actuation` and returns the new state and its measurements.
    pub fn step(
        &self,
        state: &EnvState,
        actuation: &[f64],
        dt: f64,
    ) -> Result<(EnvState, MeasurementBundle), SimError> {
        let n = self.schema.actuation_dim();
        if actuation.len() != n {
            return Err(SimError::ActuationDim {
                expected: n,
                got: actuation.len(),
            });
        }
        if !actuation.iter().all(|u| u.is_finite()) {
            return Err(SimError::NonFiniteActuation(actuation.to_vec()));
        }
        let x = match &self.spec {
            EnvSpec::CartpoleArm(s) => s.advance(state, actuation, dt)?,
            EnvSpec::Arm2dPickplace(s) => s.advance(state, actuation, dt)?,
            EnvSpec::Door(s) => s.advance(state, actuation, dt)?,
            EnvSpec::Wipe(s) => s.advance(state, actuation, dt)?,
        };
        if !x.iter().all(|v| v.is_finite()) {
            return Err(SimError::NonFiniteState);
        }
        let tick = state.tick + 1;
        let mut next = EnvState {
            t: tick as f64 * dt,
            tick,
            x,
            noise: state.noise.clone(),
        };
        let b = self.measure(&mut next)?;
        Ok((next, b))
    }
}
