use std::collections::BTreeSet;

use metactl_core::blueprint::{validate_blueprint, Blueprint, Section};
use metactl_core::composer::ControlSystem;

use crate::extract::{extract_blocks, partial_update, Extraction};
use crate::pipeline::PipelineContext;
use crate::prompt::{bindings, render_prompt, PromptSet};
use crate::transcript::Message;
use crate::{Session, SynthError};

pub const MAX_REFLECTIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Design,
    Dataflow,
    Tune,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Design => "design",
            Stage::Dataflow => "dataflow",
            Stage::Tune => "tune",
        }
    }

    /// Sections a response may name at this stage.
    pub fn steps(self) -> &'static [Section] {
        match self {
            Stage::Design => &[
                Section::Spaces,
                Section::TaskModel,
                Section::TrackingModel,
                Section::TaskController,
                Section::TrackingController,
                Section::Rates,
            ],
            Stage::Dataflow => &[Section::TaskInputConverter, Section::TrackingInputConverter],
            Stage::Tune => &[],
        }
    }
}

/// Errors reported for one rejected response.
#[derive(Debug, Clone, PartialEq)]
pub struct AttemptLog {
    pub attempt: usize,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DialogueState {
    pub stage: Stage,
    pub messages: Vec<Message>,
    pub extractions: Vec<Extraction>,
    /// Reflection rounds triggered so far.
    pub reflections: usize,
    /// Responses requested so far (the next one's attempt number).
    pub exchanges: usize,
    pub failures: Vec<AttemptLog>,
    pub summary: Option<String>,
}

impl DialogueState {
    pub fn new(stage: Stage, system: &str, prompt: String) -> DialogueState {
        DialogueState {
            stage,
            messages: vec![Message::system(system), Message::user(prompt)],
            extractions: vec![],
            reflections: 0,
            exchanges: 0,
            failures: vec![],
            summary: None,
        }
    }

    /// Requests responses until `evaluate` accepts one. Each rejection adds a
    /// reflection message with the checklist and the verbatim errors; after
    /// `max_reflections` rejections in this call the stage is exhausted.
    pub fn converse<T>(
        &mut self,
        session: &mut Session,
        prompts: &PromptSet,
        max_reflections: usize,
        mut evaluate: impl FnMut(&Extraction) -> Result<T, Vec<String>>,
    ) -> Result<T, SynthError> {
        let stage = self.stage.as_str();
        let start = self.failures.len();
        loop {
            let attempt = self.exchanges;
            let response = session.respond(stage, attempt, &self.messages)?;
            self.exchanges += 1;
            self.messages.push(Message::assistant(response.clone()));
            let extraction = extract_blocks(&response);
            let verdict = if extraction.blocks.is_empty() {
                let mut e = vec!["no tagged blocks found: each step needs a <step_name> line followed by a fenced block".to_string()];
                e.extend(extraction.notes.iter().cloned());
                Err(e)
            } else {
                evaluate(&extraction)
            };
            self.extractions.push(extraction);
            let errors = match verdict {
                Ok(v) => return Ok(v),
                Err(e) => e,
            };
            self.failures.push(AttemptLog {
                attempt,
                errors: errors.clone(),
            });
            if self.failures.len() - start >= max_reflections {
                return Err(SynthError::Exhausted {
                    stage: stage.into(),
                    attempts: self.failures[start..].to_vec(),
                });
            }
            self.reflections += 1;
            let msg = render_prompt(
                &prompts.reflection,
                &bindings([
                    ("errors", errors.join("\n")),
                    ("checklist", prompts.checklist(stage).to_string()),
                ]),
            )?;
            self.messages.push(Message::user(msg));
        }
    }

    /// Asks for and stores the stage summary.
    pub fn summarize(
        &mut self,
        session: &mut Session,
        prompts: &PromptSet,
        fallback: &str,
    ) -> Result<String, SynthError> {
        let stage = self.stage.as_str();
        self.messages.push(Message::user(render_prompt(
            &prompts.summary,
            &bindings([("stage", stage.to_string())]),
        )?));
        let response = session.respond(&format!("{stage}_summary"), 0, &self.messages)?;
        self.messages.push(Message::assistant(response.clone()));
        let s = match response.trim() {
            "" => fallback.to_string(),
            s => s.to_string(),
        };
        self.summary = Some(s.clone());
        Ok(s)
    }
}

pub struct StageOutcome {
    pub blueprint: Blueprint,
    pub summary: String,
    pub dialogue: DialogueState,
}

/// Runs the design or dataflow stage on top of `draft`. The tune stage goes
/// through [`crate::LlmProposer`] instead.
pub fn run_stage(
    stage: Stage,
    ctx: &PipelineContext,
    session: &mut Session,
    draft: &Blueprint,
) -> Result<StageOutcome, SynthError> {
    let prompt = match stage {
        Stage::Design => ctx.design_prompt()?,
        Stage::Dataflow => ctx.dataflow_prompt(draft)?,
        Stage::Tune => {
            return Err(SynthError::Config(
                "the tune stage runs through tune_loop with an LlmProposer".into(),
            ))
        }
    };
    let mut dialogue = DialogueState::new(stage, &ctx.prompts.system, prompt);
    let mut current = draft.clone();
    let mut supplied: BTreeSet<Section> = BTreeSet::new();
    let steps = stage.steps();
    let blueprint =
        dialogue.converse(session, &ctx.prompts, ctx.options.max_reflections, |ex| {
            let mut errors: Vec<String> = ex
                .blocks
                .iter()
                .filter(|b| Section::parse(&b.step_name).is_none_or(|s| !steps.contains(&s)))
                .map(|b| {
                    let names: Vec<&str> = steps.iter().map(|s| s.as_str()).collect();
                    format!(
                        "<{}> is not a {} step; expected one of {}",
                        b.step_name,
                        stage.as_str(),
                        names.join(", ")
                    )
                })
                .collect();
            if !errors.is_empty() {
                return Err(errors);
            }
            let candidate = match partial_update(&current, &ex.blocks) {
                Ok(c) => c,
                Err(SynthError::Update(e)) => return Err(e),
                Err(e) => return Err(vec![e.to_string()]),
            };
            current = candidate.clone();
            supplied.extend(
                ex.blocks
                    .iter()
                    .filter_map(|b| Section::parse(&b.step_name)),
            );
            for s in steps.iter().filter(|s| !supplied.contains(s)) {
                errors.push(format!("no choice made for <{s}>"));
            }
            let converters = [Section::TaskInputConverter, Section::TrackingInputConverter];
            errors.extend(
                validate_blueprint(&candidate, &ctx.schema)
                    .into_iter()
                    .filter(|i| stage == Stage::Dataflow || !converters.contains(&i.section))
                    .map(|i| i.to_string()),
            );
            if errors.is_empty() && stage == Stage::Dataflow {
                if let Err(e) = ControlSystem::build(&candidate, ctx.schema.clone()) {
                    errors.push(format!("building the control system failed: {e}"));
                }
            }
            if errors.is_empty() {
                Ok(candidate)
            } else {
                Err(errors)
            }
        })?;
    let fallback = steps
        .iter()
        .map(|s| format!("{s}: {}", blueprint.section_text(*s)))
        .collect::<Vec<_>>()
        .join("\n");
    let summary = dialogue.summarize(session, &ctx.prompts, &fallback)?;
    Ok(StageOutcome {
        blueprint,
        summary,
        dialogue,
    })
}
