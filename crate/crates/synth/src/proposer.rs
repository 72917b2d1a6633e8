use metactl_core::blueprint::ParamPath;
use metactl_core::canonical::format_sig;
use metactl_core::tune::{ProposalContext, Proposer, Scale};

use crate::extract::Extraction;
use crate::pipeline::{describe_metrics, PipelineContext};
use crate::prompt::{bindings, render_prompt};
use crate::stage::{DialogueState, Stage};
use crate::{Session, SynthError};

/// Tune-stage strategy: one dialogue across rounds, each proposal answered
/// with a `<parameters>` block of `path = value` lines.
pub struct LlmProposer<'a> {
    ctx: &'a PipelineContext,
    session: &'a mut Session,
    summaries: String,
    dialogue: Option<DialogueState>,
    calls: usize,
}

impl<'a> LlmProposer<'a> {
    pub fn new(
        ctx: &'a PipelineContext,
        session: &'a mut Session,
        summaries: String,
    ) -> LlmProposer<'a> {
        LlmProposer {
            ctx,
            session,
            summaries,
            dialogue: None,
            calls: 0,
        }
    }

    /// Whether any proposal was requested.
    pub fn consulted(&self) -> bool {
        self.calls > 0
    }

    pub fn summarize(&mut self, fallback: &str) -> Result<String, SynthError> {
        match &mut self.dialogue {
            Some(d) => d.summarize(self.session, &self.ctx.prompts, fallback),
            None => Ok(fallback.to_string()),
        }
    }

    pub fn into_dialogue(self) -> DialogueState {
        self.dialogue.unwrap_or_else(|| DialogueState {
            stage: Stage::Tune,
            messages: vec![],
            extractions: vec![],
            reflections: 0,
            exchanges: 0,
            failures: vec![],
            summary: None,
        })
    }

    fn first_prompt(&self, p: &ProposalContext<'_>) -> Result<String, SynthError> {
        let params: String = p
            .params
            .iter()
            .map(|t| {
                let scale = if t.scale == Scale::Log {
                    "log"
                } else {
                    "linear"
                };
                let v = p
                    .best
                    .get_param(&t.path)
                    .map(|v| format_sig(v, 6))
                    .unwrap_or_else(|| "?".into());
                format!(
                    "{} in [{}, {}] {scale}, current {v}\n",
                    t.path,
                    format_sig(t.lower, 6),
                    format_sig(t.upper, 6)
                )
            })
            .collect();
        let names: Vec<String> = p.metrics.iter().map(|m| m.to_string()).collect();
        let values = p
            .best_round
            .evaluation
            .as_ref()
            .map(|e| e.metrics.as_slice());
        render_prompt(
            &self.ctx.prompts.tune,
            &bindings([
                ("task", self.ctx.task.description.clone()),
                ("summaries", self.summaries.clone()),
                ("blueprint", p.best.to_canonical()),
                ("params", params),
                ("metrics", describe_metrics(&names, values)),
                ("trajectory", p.summary.to_string()),
                ("checklist", self.ctx.prompts.checklist("tune").to_string()),
            ]),
        )
    }

    fn followup(&self, p: &ProposalContext<'_>) -> Result<String, SynthError> {
        let last = p
            .history
            .last()
            .expect("proposals follow an evaluated start round");
        let outcome = match (&last.evaluation, &last.error) {
            (Some(e), _) => {
                let names: Vec<String> = e.metrics.iter().map(|(n, _)| n.clone()).collect();
                format!(
                    "success = {}\n{}{}",
                    e.success,
                    describe_metrics(&names, Some(&e.metrics)),
                    e.reasons.join("\n")
                )
            }
            (None, Some(err)) => format!("not run: {err}"),
            (None, None) => "not run".into(),
        };
        render_prompt(
            &self.ctx.prompts.tune_followup,
            &bindings([
                ("round", last.index.to_string()),
                ("outcome", outcome),
                ("trajectory", p.summary.to_string()),
            ]),
        )
    }
}

/// Parses the `<parameters>` block, checking names and bounds.
fn parse_assignments(
    ex: &Extraction,
    p: &ProposalContext<'_>,
) -> Result<Vec<(ParamPath, f64)>, Vec<String>> {
    let Some(block) = ex.blocks.iter().find(|b| b.step_name == "parameters") else {
        return Err(vec!["no <parameters> block found".into()]);
    };
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in block.body.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((path, value)) = line.split_once('=') else {
            errors.push(format!(
                "line {}: expected `path = value`, got '{line}'",
                i + 1
            ));
            continue;
        };
        let path: ParamPath = match path.trim().parse() {
            Ok(p) => p,
            Err(e) => {
                errors.push(format!("line {}: {e}", i + 1));
                continue;
            }
        };
        let Ok(value) = value.trim().parse::<f64>() else {
            errors.push(format!(
                "line {}: '{}' is not a number",
                i + 1,
                value.trim()
            ));
            continue;
        };
        match p.params.iter().find(|t| t.path == path) {
            None => errors.push(format!(
                "line {}: '{path}' is not a tunable parameter",
                i + 1
            )),
            Some(t) => match t.check(value) {
                Ok(()) => out.push((path, value)),
                Err(e) => errors.push(format!("line {}: {e}", i + 1)),
            },
        }
    }
    if out.is_empty() && errors.is_empty() {
        errors.push("the <parameters> block assigns nothing".into());
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

impl Proposer for LlmProposer<'_> {
    fn name(&self) -> &str {
        "llm"
    }

    fn propose(
        &mut self,
        p: &ProposalContext<'_>,
    ) -> Result<Option<Vec<(ParamPath, f64)>>, String> {
        self.calls += 1;
        match &self.dialogue {
            None => {
                let prompt = self.first_prompt(p).map_err(|e| e.to_string())?;
                self.dialogue = Some(DialogueState::new(
                    Stage::Tune,
                    &self.ctx.prompts.system,
                    prompt,
                ));
            }
            Some(_) => {
                let msg = self.followup(p).map_err(|e| e.to_string())?;
                self.dialogue
                    .as_mut()
                    .expect("set above")
                    .messages
                    .push(crate::transcript::Message::user(msg));
            }
        }
        let dialogue = self.dialogue.as_mut().expect("set above");
        dialogue
            .converse(
                self.session,
                &self.ctx.prompts,
                self.ctx.options.max_reflections,
                |ex| parse_assignments(ex, p),
            )
            .map(Some)
            .map_err(|e| e.to_string())
    }
}
