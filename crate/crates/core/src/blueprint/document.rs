use std::collections::BTreeMap;
use std::fmt;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use super::params::{ParamKind, ParamValue, Params};
use super::registry::{Registry, TemplateKind};
use super::BlueprintError;
use crate::canonical::{num, to_canonical_string};
use crate::converters::{parse_converter, ConverterProgram};

pub const FORMAT_VERSION: u32 = 1;
pub const FORMAT_KIND: &str = "blueprint";

/// The nine top-level sections of a blueprint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Section {
    Task,
    Spaces,
    TaskModel,
    TrackingModel,
    TaskController,
    TrackingController,
    TaskInputConverter,
    TrackingInputConverter,
    Rates,
}

impl Section {
    pub const ALL: [Section; 9] = [
        Section::Task,
        Section::Spaces,
        Section::TaskModel,
        Section::TrackingModel,
        Section::TaskController,
        Section::TrackingController,
        Section::TaskInputConverter,
        Section::TrackingInputConverter,
        Section::Rates,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Section::Task => "task",
            Section::Spaces => "spaces",
            Section::TaskModel => "task_model",
            Section::TrackingModel => "tracking_model",
            Section::TaskController => "task_controller",
            Section::TrackingController => "tracking_controller",
            Section::TaskInputConverter => "task_input_converter",
            Section::TrackingInputConverter => "tracking_input_converter",
            Section::Rates => "rates",
        }
    }

    pub fn parse(name: &str) -> Option<Section> {
        Section::ALL.into_iter().find(|s| s.as_str() == name)
    }

    pub(super) fn template_kind(self) -> Option<TemplateKind> {
        match self {
            Section::TaskModel | Section::TrackingModel => Some(TemplateKind::Model),
            Section::TaskController | Section::TrackingController => Some(TemplateKind::Controller),
            _ => None,
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub dim: usize,
    #[serde(default)]
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spaces {
    pub task: SpaceSpec,
    pub tracking: SpaceSpec,
}

/// A template instantiation: canonical template name plus complete parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct TemplateRef {
    pub template: String,
    pub params: Params,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rates {
    #[serde(default = "default_divisor")]
    pub task_rate_divisor: u32,
    #[serde(default = "default_tracking_dt")]
    pub tracking_dt: f64,
}

fn default_divisor() -> u32 {
    10
}

fn default_tracking_dt() -> f64 {
    1e-3
}

impl Default for Rates {
    fn default() -> Self {
        Rates {
            task_rate_divisor: default_divisor(),
            tracking_dt: default_tracking_dt(),
        }
    }
}

impl Rates {
    /// Sampling period of the task controller.
    pub fn task_dt(&self) -> f64 {
        self.tracking_dt * self.task_rate_divisor as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Blueprint {
    pub task_description: String,
    pub spaces: Spaces,
    pub task_model: TemplateRef,
    pub tracking_model: TemplateRef,
    pub task_controller: TemplateRef,
    pub tracking_controller: TemplateRef,
    pub task_input_converter: ConverterProgram,
    pub tracking_input_converter: ConverterProgram,
    pub rates: Rates,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    description: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTemplate {
    template: String,
    #[serde(default)]
    params: BTreeMap<String, ParamValue>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlueprint {
    format: u32,
    format_kind: String,
    task: RawTask,
    spaces: Spaces,
    task_model: RawTemplate,
    tracking_model: RawTemplate,
    task_controller: RawTemplate,
    tracking_controller: RawTemplate,
    task_input_converter: String,
    tracking_input_converter: String,
    #[serde(default)]
    rates: Rates,
}

fn json_error(e: serde_json::Error) -> BlueprintError {
    BlueprintError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn resolve_template(
    section: Section,
    raw: RawTemplate,
) -> Result<TemplateRef, Vec<BlueprintError>> {
    let Some(desc) = Registry::standard().lookup(&raw.template) else {
        return Err(vec![BlueprintError::UnknownTemplate {
            section,
            name: raw.template,
        }]);
    };
    if Some(desc.kind) != section.template_kind() {
        return Err(vec![BlueprintError::Param {
            section,
            param: "template".into(),
            message: format!(
                "{} is not a {}",
                desc.name,
                if section.template_kind() == Some(TemplateKind::Model) {
                    "model"
                } else {
                    "controller"
                }
            ),
        }]);
    }
    let mut errors = Vec::new();
    for name in raw.params.keys() {
        if desc.param(name).is_none() {
            errors.push(BlueprintError::Param {
                section,
                param: name.clone(),
                message: format!("unknown parameter for {}", desc.name),
            });
        }
    }
    let mut params: Params = raw
        .params
        .into_iter()
        .filter(|(k, _)| desc.param(k).is_some())
        .collect();
    // Fill defaults in declaration order so derived shapes see earlier params.
    for schema in &desc.params {
        if !params.contains_key(schema.name) {
            match schema.default_value(&params) {
                Some(v) => {
                    params.insert(schema.name.to_string(), v);
                }
                None => errors.push(BlueprintError::Param {
                    section,
                    param: schema.name.into(),
                    message: "missing required parameter".into(),
                }),
            }
        }
    }
    for schema in &desc.params {
        if let Some(v) = params.get(schema.name) {
            if let Err(message) = schema.check(v, &params) {
                errors.push(BlueprintError::Param {
                    section,
                    param: schema.name.into(),
                    message,
                });
            }
        }
    }
    if errors.is_empty() {
        Ok(TemplateRef {
            template: desc.name.to_string(),
            params,
        })
    } else {
        Err(errors)
    }
}

fn converter(section: Section, text: &str) -> Result<ConverterProgram, BlueprintError> {
    parse_converter(text).map_err(|source| BlueprintError::Converter { section, source })
}

fn collect(errors: Vec<BlueprintError>) -> BlueprintError {
    if errors.len() == 1 {
        errors.into_iter().next().expect("one error")
    } else {
        BlueprintError::Many(errors)
    }
}

fn template_to_json(t: &TemplateRef) -> Value {
    let desc = Registry::standard().lookup(&t.template);
    let mut params = Map::new();
    for (k, v) in &t.params {
        let integer = desc
            .and_then(|d| d.param(k))
            .is_some_and(|s| s.kind == ParamKind::Integer);
        let value = match v {
            ParamValue::Number(x) if integer => json!(*x as u64),
            ParamValue::Number(x) => num(*x),
            ParamValue::Vector(xs) => Value::Array(xs.iter().map(|x| num(*x)).collect()),
            ParamValue::Matrix(rows) => Value::Array(
                rows.iter()
                    .map(|r| Value::Array(r.iter().map(|x| num(*x)).collect()))
                    .collect(),
            ),
        };
        params.insert(k.clone(), value);
    }
    json!({ "template": t.template, "params": Value::Object(params) })
}

fn space_to_json(s: &SpaceSpec) -> Value {
    json!({ "dim": s.dim, "labels": s.labels })
}

impl Blueprint {
    /// Parses a blueprint document; template names may be aliases, omitted
    /// parameters take their defaults. Errors are aggregated.
    pub fn parse(text: &str) -> Result<Blueprint, BlueprintError> {
        let raw: RawBlueprint = serde_json::from_str(text).map_err(json_error)?;
        if raw.format != FORMAT_VERSION || raw.format_kind != FORMAT_KIND {
            return Err(BlueprintError::Format(format!(
                "expected format {FORMAT_VERSION} / \"{FORMAT_KIND}\", got {} / \"{}\"",
                raw.format, raw.format_kind
            )));
        }
        let mut errors = Vec::new();
        let mut template = |section, raw| match resolve_template(section, raw) {
            Ok(t) => Some(t),
            Err(mut e) => {
                errors.append(&mut e);
                None
            }
        };
        let task_model = template(Section::TaskModel, raw.task_model);
        let tracking_model = template(Section::TrackingModel, raw.tracking_model);
        let task_controller = template(Section::TaskController, raw.task_controller);
        let tracking_controller = template(Section::TrackingController, raw.tracking_controller);
        let task_conv = converter(Section::TaskInputConverter, &raw.task_input_converter)
            .map_err(|e| errors.push(e))
            .ok();
        let track_conv = converter(
            Section::TrackingInputConverter,
            &raw.tracking_input_converter,
        )
        .map_err(|e| errors.push(e))
        .ok();
        match (
            task_model,
            tracking_model,
            task_controller,
            tracking_controller,
            task_conv,
            track_conv,
        ) {
            (Some(a), Some(b), Some(c), Some(d), Some(e), Some(f)) if errors.is_empty() => {
                Ok(Blueprint {
                    task_description: raw.task.description,
                    spaces: raw.spaces,
                    task_model: a,
                    tracking_model: b,
                    task_controller: c,
                    tracking_controller: d,
                    task_input_converter: e,
                    tracking_input_converter: f,
                    rates: raw.rates,
                })
            }
            _ => Err(collect(errors)),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "format": FORMAT_VERSION,
            "format_kind": FORMAT_KIND,
            "task": { "description": self.task_description },
            "spaces": { "task": space_to_json(&self.spaces.task), "tracking": space_to_json(&self.spaces.tracking) },
            "task_model": template_to_json(&self.task_model),
            "tracking_model": template_to_json(&self.tracking_model),
            "task_controller": template_to_json(&self.task_controller),
            "tracking_controller": template_to_json(&self.tracking_controller),
            "task_input_converter": self.task_input_converter.to_canonical(),
            "tracking_input_converter": self.tracking_input_converter.to_canonical(),
            "rates": {
                "task_rate_divisor": self.rates.task_rate_divisor,
                "tracking_dt": num(self.rates.tracking_dt),
            },
        })
    }

    /// Canonical, byte-stable serialization.
    pub fn to_canonical(&self) -> String {
        to_canonical_string(&self.to_json())
    }

    /// JSON (or converter text, for converter sections) of one section.
    pub fn section_text(&self, section: Section) -> String {
        match section {
            Section::TaskInputConverter => self.task_input_converter.to_canonical(),
            Section::TrackingInputConverter => self.tracking_input_converter.to_canonical(),
            _ => to_canonical_string(&self.to_json()[section.as_str()]),
        }
    }

    pub fn template(&self, section: Section) -> Option<&TemplateRef> {
        match section {
            Section::TaskModel => Some(&self.task_model),
            Section::TrackingModel => Some(&self.tracking_model),
            Section::TaskController => Some(&self.task_controller),
            Section::TrackingController => Some(&self.tracking_controller),
            _ => None,
        }
    }

    pub fn template_mut(&mut self, section: Section) -> Option<&mut TemplateRef> {
        match section {
            Section::TaskModel => Some(&mut self.task_model),
            Section::TrackingModel => Some(&mut self.tracking_model),
            Section::TaskController => Some(&mut self.task_controller),
            Section::TrackingController => Some(&mut self.tracking_controller),
            _ => None,
        }
    }

    /// Replaces one section from its text form (JSON for structured
    /// sections, converter source for converter sections).
    pub fn replace_section(&mut self, section: Section, body: &str) -> Result<(), BlueprintError> {
        match section {
            Section::Task => {
                let t: RawTask = serde_json::from_str(body).map_err(json_error)?;
                self.task_description = t.description;
            }
            Section::Spaces => self.spaces = serde_json::from_str(body).map_err(json_error)?,
            Section::Rates => self.rates = serde_json::from_str(body).map_err(json_error)?,
            Section::TaskInputConverter => self.task_input_converter = converter(section, body)?,
            Section::TrackingInputConverter => {
                self.tracking_input_converter = converter(section, body)?
            }
            _ => {
                let raw: RawTemplate = serde_json::from_str(body).map_err(json_error)?;
                let t = resolve_template(section, raw).map_err(collect)?;
                *self.template_mut(section).expect("template section") = t;
            }
        }
        Ok(())
    }

    /// A blueprint whose controllers emit zeros: `NullModel`s, `NullController`s
    /// and all-zero converters.
    pub fn null(actuation_dim: usize) -> Blueprint {
        let null_model = TemplateRef {
            template: "NullModel".into(),
            params: Params::new(),
        };
        let null_ctl = |n: usize| TemplateRef {
            template: "NullController".into(),
            params: [("output_dim".to_string(), ParamValue::Number(n as f64))]
                .into_iter()
                .collect(),
        };
        Blueprint {
            task_description: "null system".into(),
            spaces: Spaces {
                task: SpaceSpec {
                    dim: 0,
                    labels: vec![],
                },
                tracking: SpaceSpec {
                    dim: actuation_dim,
                    labels: vec![],
                },
            },
            task_model: null_model.clone(),
            tracking_model: null_model,
            task_controller: null_ctl(0),
            tracking_controller: null_ctl(actuation_dim),
            task_input_converter: ConverterProgram::zeros(0),
            tracking_input_converter: ConverterProgram::zeros(0),
            rates: Rates::default(),
        }
    }
}
