//! Declarative control-system blueprints: the document format, the template
//! registry and its summary, and cross-validation against an environment.

mod document;
pub mod instantiate;
mod params;
mod path;
mod registry;
mod validate;

pub use document::{
    Blueprint, Rates, Section, SpaceSpec, Spaces, TemplateRef, FORMAT_KIND, FORMAT_VERSION,
};
pub use params::{Bound, Dim, ParamDefault, ParamKind, ParamSchema, ParamValue, Params};
pub use path::ParamPath;
pub use registry::{
    library_summary, ChannelRequirement, PortDim, PortSpec, Registry, TemplateDescriptor,
    TemplateKind,
};
pub use validate::{validate_blueprint, ValidationIssue};

use thiserror::Error;

use crate::converters::ConverterError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlueprintError {
    #[error("malformed document at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported document: {0}")]
    Format(String),
    #[error("{section}: unknown template \"{name}\"")]
    UnknownTemplate { section: Section, name: String },
    #[error("{section}: parameter {param}: {message}")]
    Param {
        section: Section,
        param: String,
        message: String,
    },
    #[error("{section}: {source}")]
    Converter {
        section: Section,
        source: ConverterError,
    },
    #[error("parameter path {0}")]
    Path(String),
    #[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
    Many(Vec<BlueprintError>),
}

impl BlueprintError {
    /// Flattened list of individual errors.
    pub fn errors(&self) -> Vec<&BlueprintError> {
        match self {
            BlueprintError::Many(v) => v.iter().flat_map(|e| e.errors()).collect(),
            e => vec![e],
        }
    }
}

#[cfg(test)]
mod tests;
