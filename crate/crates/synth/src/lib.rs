//! Blueprint synthesis: prompt templates, tagged-block extraction, staged
//! dialogues with reflection, and chat backends (live, replay, oracle).

mod backend;
mod extract;
mod oracle;
mod pipeline;
mod prompt;
mod proposer;
mod stage;
mod transcript;

pub use backend::{BackendConfig, BackendKind, Session, ENV_API_KEY, ENV_BASE_URL, ENV_MODEL};
pub use extract::{extract_blocks, partial_update, ExtractedBlock, Extraction};
pub use pipeline::{run_pipeline, PipelineContext, PipelineOptions, PipelineResult};
pub use prompt::{bindings, render_prompt, PromptSet, PromptTemplate};
pub use proposer::LlmProposer;
pub use stage::{run_stage, AttemptLog, DialogueState, Stage, StageOutcome, MAX_REFLECTIONS};
pub use transcript::{request_digest, Exchange, Message, Transcript};

use metactl_core::sim::SimError;
use metactl_core::tune::TuneError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("missing prompt bindings: {}", .0.join(", "))]
    MissingBindings(Vec<String>),
    #[error("prompt template: {0}")]
    Template(String),
    #[error("{}", .0.join("\n"))]
    Update(Vec<String>),
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("backend: {0}")]
    Backend(String),
    #[error("replay digest mismatch at exchange {exchange}: message {message_index} differs from the recording")]
    DigestMismatch {
        exchange: usize,
        message_index: usize,
    },
    #[error("{stage} stage exhausted after {} attempts:\n{}", attempts.len(), describe_attempts(attempts))]
    Exhausted {
        stage: String,
        attempts: Vec<AttemptLog>,
    },
    #[error("build: {0}")]
    Build(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Tune(#[from] TuneError),
    #[error("{0}")]
    Io(String),
}

fn describe_attempts(attempts: &[AttemptLog]) -> String {
    attempts
        .iter()
        .map(|a| format!("attempt {}: {}", a.attempt, a.errors.join("; ")))
        .collect::<Vec<_>>()
        .join("\n")
}
