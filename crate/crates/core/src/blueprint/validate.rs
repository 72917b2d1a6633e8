use std::fmt;

use super::document::{Blueprint, Section, TemplateRef};
use super::registry::{Registry, TemplateDescriptor};
use crate::converters::validate_converter;
use crate::measurement::MeasurementSchema;

/// One problem found by [`validate_blueprint`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationIssue {
    pub section: Section,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.section, self.message)
    }
}

fn descriptor(t: &TemplateRef) -> &'static TemplateDescriptor {
    Registry::standard()
        .lookup(&t.template)
        .expect("parsed blueprints only hold registered templates")
}

/// Checks a parsed blueprint against an environment's measurement schema:
/// rates, converter references and port dimensions, channels read by the
/// controllers, and the task model required by model-based controllers.
/// An empty result means the composer can instantiate it.
pub fn validate_blueprint(bp: &Blueprint, schema: &MeasurementSchema) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let mut push = |section, message: String| issues.push(ValidationIssue { section, message });
    let n_act = schema.actuation_dim();

    if bp.rates.task_rate_divisor < 1 {
        push(Section::Rates, "task_rate_divisor must be >= 1".into());
    }
    if !(bp.rates.tracking_dt > 0.0 && bp.rates.tracking_dt <= 0.01) {
        push(
            Section::Rates,
            format!(
                "tracking_dt must lie in (0, 0.01], got {}",
                bp.rates.tracking_dt
            ),
        );
    }
    for (name, space) in [("task", &bp.spaces.task), ("tracking", &bp.spaces.tracking)] {
        if !space.labels.is_empty() && space.labels.len() != space.dim {
            push(
                Section::Spaces,
                format!(
                    "{name} space has {} labels for dimension {}",
                    space.labels.len(),
                    space.dim
                ),
            );
        }
    }
    if bp.spaces.tracking.dim != n_act {
        push(
            Section::Spaces,
            format!(
                "tracking space dimension {} differs from the {} actuated joints",
                bp.spaces.tracking.dim, n_act
            ),
        );
    }

    let task = descriptor(&bp.task_controller);
    let track = descriptor(&bp.tracking_controller);
    let task_in = task.input.dim.resolve(&bp.task_controller.params, n_act);
    let task_out = task.output.dim.resolve(&bp.task_controller.params, n_act);
    let track_in = track
        .input
        .dim
        .resolve(&bp.tracking_controller.params, n_act);
    let track_out = track
        .output
        .dim
        .resolve(&bp.tracking_controller.params, n_act);

    if let Some(port) = task_in {
        for issue in validate_converter(&bp.task_input_converter, schema, 0, port) {
            push(Section::TaskInputConverter, issue.to_string());
        }
    }
    if let (Some(port), Some(task_dim)) = (track_in, task_out) {
        for issue in validate_converter(&bp.tracking_input_converter, schema, task_dim, port) {
            push(Section::TrackingInputConverter, issue.to_string());
        }
    }
    if let Some(out) = track_out {
        if out != n_act {
            push(
                Section::TrackingController,
                format!("actuation dimension mismatch: {} produces {out} outputs, the environment has {n_act} actuated joints", track.name),
            );
        }
    }

    for (section, desc, tref) in [
        (Section::TaskController, task, &bp.task_controller),
        (Section::TrackingController, track, &bp.tracking_controller),
    ] {
        for req in &desc.requires_channels {
            let want = req.resolve(&tref.params, n_act);
            match (schema.channel(req.name), want) {
                (None, _) => push(
                    section,
                    format!(
                        "{} reads channel '{}' which the environment does not provide",
                        desc.name, req.name
                    ),
                ),
                (Some(ch), Some(w)) if ch.dim != w => push(
                    section,
                    format!(
                        "{} expects channel '{}' of dimension {w}, the environment provides {}",
                        desc.name, req.name, ch.dim
                    ),
                ),
                _ => {}
            }
        }
        if desc.needs_linear_model {
            if section != Section::TaskController {
                push(
                    section,
                    format!(
                        "{} needs the task model and can only be the task controller",
                        desc.name
                    ),
                );
                continue;
            }
            let model = descriptor(&bp.task_model);
            if !model.linear {
                push(
                    Section::TaskModel,
                    format!(
                        "{} needs a linear task model, {} is not one",
                        desc.name, model.name
                    ),
                );
                continue;
            }
            let n = model
                .state
                .and_then(|s| s.resolve(&bp.task_model.params, n_act));
            let m = model.input.dim.resolve(&bp.task_model.params, n_act);
            if task_in.is_some() && n != task_in {
                push(
                    section,
                    format!(
                        "Q is {}x{} but the task model has {} states",
                        task_in.unwrap_or(0),
                        task_in.unwrap_or(0),
                        n.unwrap_or(0)
                    ),
                );
            }
            if task_out.is_some() && m != task_out {
                push(
                    section,
                    format!(
                        "R is {}x{} but the task model has {} inputs",
                        task_out.unwrap_or(0),
                        task_out.unwrap_or(0),
                        m.unwrap_or(0)
                    ),
                );
            }
        }
    }

    if let Err(e) = super::instantiate::linear_model(&bp.task_model) {
        push(Section::TaskModel, e);
    }
    issues
}
