//! Instantiates a blueprint into a two-rate control system and steps it.

mod analysis;
mod instance;

use std::sync::Arc;

use thiserror::Error;

use crate::blueprint::{validate_blueprint, Blueprint, Section, ValidationIssue};
use crate::converters::CompiledConverter;
use crate::measurement::{MeasurementBundle, MeasurementSchema};
use instance::Instance;

pub use analysis::{analyze_lqr, safety_index_of, LqrAnalysis, FINE_DT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComposeError {
    #[error("blueprint failed validation:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<ValidationIssue>),
    #[error("{section}: instantiation failed: {message}")]
    Instantiation { section: Section, message: String },
    #[error("bundle does not match the schema the system was built for")]
    SchemaMismatch,
    #[error("tick {tick}: {section}: {message}")]
    Runtime {
        tick: u64,
        section: Section,
        message: String,
    },
    #[error(
        "tick {tick}: {section} produced a non-finite output {output:?}\nmeasurements:\n{dump}"
    )]
    NonFinite {
        tick: u64,
        section: Section,
        output: Vec<f64>,
        dump: String,
    },
}

impl ComposeError {
    /// Section the error is attributed to, if any.
    pub fn section(&self) -> Option<Section> {
        match self {
            ComposeError::Invalid(issues) => issues.first().map(|i| i.section),
            ComposeError::Instantiation { section, .. }
            | ComposeError::Runtime { section, .. }
            | ComposeError::NonFinite { section, .. } => Some(*section),
            ComposeError::SchemaMismatch => None,
        }
    }
}

/// An executable hierarchical controller: the task controller runs every
/// `task_rate_divisor` ticks with its output held in between, the tracking
/// controller runs every tick.
#[derive(Clone, Debug)]
pub struct ControlSystem {
    schema: Arc<MeasurementSchema>,
    task_conv: CompiledConverter,
    track_conv: CompiledConverter,
    task: Instance,
    track: Instance,
    divisor: u64,
    tracking_dt: f64,
    tick: u64,
    task_evals: u64,
    z_in: Vec<f64>,
    v: Vec<f64>,
    u_in: Vec<f64>,
    u: Vec<f64>,
    scratch: Vec<f64>,
}

fn compile(
    section: Section,
    prog: &crate::converters::ConverterProgram,
    schema: &MeasurementSchema,
) -> Result<CompiledConverter, ComposeError> {
    CompiledConverter::compile(prog, schema).map_err(|issues| ComposeError::Instantiation {
        section,
        message: issues
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join("; "),
    })
}

impl ControlSystem {
    /// Validates and instantiates `bp`. LQR gains are solved here.
    pub fn build(
        bp: &Blueprint,
        schema: Arc<MeasurementSchema>,
    ) -> Result<ControlSystem, ComposeError> {
        let issues = validate_blueprint(bp, &schema);
        if !issues.is_empty() {
            return Err(ComposeError::Invalid(issues));
        }
        let task_dt = bp.rates.task_dt();
        let task =
            Instance::build(bp, Section::TaskController, &schema, task_dt).map_err(|message| {
                ComposeError::Instantiation {
                    section: Section::TaskController,
                    message,
                }
            })?;
        let track = Instance::build(
            bp,
            Section::TrackingController,
            &schema,
            bp.rates.tracking_dt,
        )
        .map_err(|message| ComposeError::Instantiation {
            section: Section::TrackingController,
            message,
        })?;
        let task_conv = compile(
            Section::TaskInputConverter,
            &bp.task_input_converter,
            &schema,
        )?;
        let track_conv = compile(
            Section::TrackingInputConverter,
            &bp.tracking_input_converter,
            &schema,
        )?;
        Ok(ControlSystem {
            z_in: vec![0.0; task_conv.dim()],
            v: vec![0.0; task.output_dim()],
            u_in: vec![0.0; track_conv.dim()],
            u: vec![0.0; schema.actuation_dim()],
            scratch: Vec::with_capacity(schema.actuation_dim().max(12)),
            schema,
            task_conv,
            track_conv,
            task,
            track,
            divisor: bp.rates.task_rate_divisor.max(1) as u64,
            tracking_dt: bp.rates.tracking_dt,
            tick: 0,
            task_evals: 0,
        })
    }

    /// A system that always outputs zero torques.
    pub fn null_system(schema: Arc<MeasurementSchema>) -> ControlSystem {
        let bp = Blueprint::null(schema.actuation_dim());
        ControlSystem::build(&bp, schema).expect("the null blueprint is valid for every schema")
    }

    /// One tracking tick. Returns the actuation vector.
    pub fn step(&mut self, bundle: &MeasurementBundle, t: f64) -> Result<&[f64], ComposeError> {
        if !Arc::ptr_eq(bundle.schema(), &self.schema)
            && bundle.schema().as_ref() != self.schema.as_ref()
        {
            return Err(ComposeError::SchemaMismatch);
        }
        let y = bundle.values();
        let tick = self.tick;
        let runtime = |section| {
            move |e: String| ComposeError::Runtime {
                tick,
                section,
                message: e,
            }
        };
        if tick % self.divisor == 0 {
            self.task_conv
                .eval_into(y, &[], &mut self.z_in)
                .map_err(|e| runtime(Section::TaskInputConverter)(e.to_string()))?;
            self.task
                .eval(&self.z_in, y, t, &mut self.scratch)
                .map_err(|e| runtime(Section::TaskController)(e.to_string()))?;
            if !self.scratch.iter().all(|x| x.is_finite()) {
                return Err(self.non_finite(Section::TaskController, bundle));
            }
            self.v.copy_from_slice(&self.scratch);
            self.task_evals += 1;
        }
        self.track_conv
            .eval_into(y, &self.v, &mut self.u_in)
            .map_err(|e| runtime(Section::TrackingInputConverter)(e.to_string()))?;
        self.track
            .eval(&self.u_in, y, t, &mut self.scratch)
            .map_err(|e| runtime(Section::TrackingController)(e.to_string()))?;
        if !self.scratch.iter().all(|x| x.is_finite()) {
            return Err(self.non_finite(Section::TrackingController, bundle));
        }
        self.u.copy_from_slice(&self.scratch);
        self.tick += 1;
        Ok(&self.u)
    }

    fn non_finite(&self, section: Section, bundle: &MeasurementBundle) -> ComposeError {
        ComposeError::NonFinite {
            tick: self.tick,
            section,
            output: self.scratch.clone(),
            dump: bundle.dump(),
        }
    }

    /// Held task control `v`.
    pub fn task_control(&self) -> &[f64] {
        &self.v
    }

    pub fn actuation_dim(&self) -> usize {
        self.u.len()
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn task_evaluations(&self) -> u64 {
        self.task_evals
    }

    pub fn tracking_dt(&self) -> f64 {
        self.tracking_dt
    }

    pub fn schema(&self) -> &Arc<MeasurementSchema> {
        &self.schema
    }
}

#[cfg(test)]
mod tests;
