use std::sync::Arc;

use metactl_core::blueprint::{library_summary, Blueprint, Registry, TemplateRef};
use metactl_core::canonical::format_sig;
use metactl_core::composer::ControlSystem;
use metactl_core::measurement::MeasurementSchema;
use metactl_core::sim::{run, Env, EnvSpec, RunResult};
use metactl_core::tune::{default_tunables, tune_loop, TaskSpec, TuneReport, TuneSetup};

use crate::prompt::{bindings, render_prompt, PromptSet};
use crate::proposer::LlmProposer;
use crate::stage::{run_stage, DialogueState, Stage, MAX_REFLECTIONS};
use crate::{Session, SynthError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub max_reflections: usize,
    /// Round budget of the tune stage.
    pub tune_rounds: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            max_reflections: MAX_REFLECTIONS,
            tune_rounds: 3,
        }
    }
}

/// Everything the prompts draw on: the task, the environment's channels and a
/// sample measurement, the template library, and earlier stage summaries.
pub struct PipelineContext {
    pub task: TaskSpec,
    pub env: EnvSpec,
    pub schema: Arc<MeasurementSchema>,
    pub samples: String,
    pub library: String,
    pub prompts: PromptSet,
    pub options: PipelineOptions,
    pub summaries: Vec<(Stage, String)>,
}

impl PipelineContext {
    pub fn new(
        task: TaskSpec,
        prompts: PromptSet,
        options: PipelineOptions,
    ) -> Result<PipelineContext, SynthError> {
        let env_spec = task.env_spec()?;
        let env = Env::new(env_spec.clone(), 1e-3)?;
        let mut state = env.reset(0)?;
        let samples = env.measure(&mut state)?.dump();
        Ok(PipelineContext {
            task,
            env: env_spec,
            schema: env.schema().clone(),
            samples,
            library: library_summary(),
            prompts,
            options,
            summaries: vec![],
        })
    }

    pub fn schema_text(&self) -> String {
        self.schema
            .channels()
            .iter()
            .map(|c| format!("{} {} {}\n", c.name, c.dim, c.unit))
            .collect()
    }

    pub fn summaries_text(&self) -> String {
        if self.summaries.is_empty() {
            return "none".into();
        }
        self.summaries
            .iter()
            .map(|(s, text)| format!("{}: {text}", s.as_str()))
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn summary(&self, stage: Stage) -> String {
        self.summaries
            .iter()
            .find(|(s, _)| *s == stage)
            .map(|(_, t)| t.clone())
            .unwrap_or_else(|| "none".into())
    }

    pub fn design_prompt(&self) -> Result<String, SynthError> {
        render_prompt(
            &self.prompts.design,
            &bindings([
                ("task", self.task.description.clone()),
                ("actuation_dim", self.schema.actuation_dim().to_string()),
                ("schema", self.schema_text()),
                ("samples", self.samples.clone()),
                ("library", self.library.clone()),
                ("checklist", self.prompts.checklist("design").to_string()),
            ]),
        )
    }

    pub fn dataflow_prompt(&self, design: &Blueprint) -> Result<String, SynthError> {
        let n = self.schema.actuation_dim();
        let port = |t: &TemplateRef, input: bool| {
            Registry::standard()
                .lookup(&t.template)
                .and_then(|d| if input { d.input.dim } else { d.output.dim }.resolve(&t.params, n))
                .map(|d| d.to_string())
                .unwrap_or_else(|| "unknown".into())
        };
        let chosen: String = Stage::Design
            .steps()
            .iter()
            .map(|s| format!("{s}: {}\n", design.section_text(*s)))
            .collect();
        render_prompt(
            &self.prompts.dataflow,
            &bindings([
                ("task", self.task.description.clone()),
                ("design_summary", self.summary(Stage::Design)),
                ("design", chosen),
                ("schema", self.schema_text()),
                ("samples", self.samples.clone()),
                (
                    "converter_language",
                    self.prompts.converter_language.clone(),
                ),
                (
                    "task_port",
                    format!("dimension {}", port(&design.task_controller, true)),
                ),
                (
                    "tracking_port",
                    format!("dimension {}", port(&design.tracking_controller, true)),
                ),
                ("task_output", port(&design.task_controller, false)),
                ("checklist", self.prompts.checklist("dataflow").to_string()),
            ]),
        )
    }

    /// Tune setup from the task file; without declared tunables the
    /// controllers' gain-like entries are used.
    pub fn tune_setup(&self, bp: &Blueprint) -> Result<TuneSetup, SynthError> {
        let params = if self.task.tune.params.is_empty() {
            default_tunables(bp)
        } else {
            self.task.tune.params.clone()
        };
        Ok(TuneSetup {
            env: self.env.clone(),
            duration: self.task.duration,
            metrics: self.task.metric_specs()?,
            params,
            scenarios: self.task.scenarios(),
        })
    }

    /// One nominal episode (seed 0) with the task's metrics.
    pub fn smoke_run(&self, bp: &Blueprint) -> Result<RunResult, SynthError> {
        let env = Env::new(self.env.clone(), bp.rates.tracking_dt)?;
        let mut sys = ControlSystem::build(bp, env.schema().clone())
            .map_err(|e| SynthError::Build(e.to_string()))?;
        Ok(run(
            &mut sys,
            &env,
            self.task.duration,
            &self.task.metric_specs()?,
        )?)
    }
}

pub struct PipelineResult {
    pub blueprint: Blueprint,
    pub run: RunResult,
    pub tune: TuneReport,
    pub dialogues: Vec<DialogueState>,
    pub summaries: Vec<(Stage, String)>,
}

impl PipelineResult {
    /// The final run and at least one tune round met the success criterion.
    pub fn success(&self) -> bool {
        self.run.success && self.tune.succeeded()
    }
}

/// design → dataflow → build and smoke run → tune. The session's transcript
/// holds every exchange, including those of a failed run.
pub fn run_pipeline(
    ctx: &mut PipelineContext,
    session: &mut Session,
) -> Result<PipelineResult, SynthError> {
    let mut draft = Blueprint::null(ctx.schema.actuation_dim());
    draft.task_description = ctx.task.description.clone();
    draft.spaces.tracking.dim = ctx.schema.actuation_dim();

    let mut dialogues = Vec::new();
    for stage in [Stage::Design, Stage::Dataflow] {
        let out = run_stage(stage, ctx, session, &draft)?;
        ctx.summaries.push((stage, out.summary));
        dialogues.push(out.dialogue);
        draft = out.blueprint;
    }

    let smoke = ctx.smoke_run(&draft)?;
    let setup = ctx.tune_setup(&draft)?;
    let (tuned, report, dialogue) = {
        let mut proposer = LlmProposer::new(ctx, session, ctx.summaries_text());
        let (tuned, report) = tune_loop(&draft, &setup, &mut proposer, ctx.options.tune_rounds)?;
        let fallback = format!("tuning stopped: {}", report.stop_reason);
        if proposer.consulted() {
            proposer.summarize(&fallback)?;
        }
        let mut dialogue = proposer.into_dialogue();
        if dialogue.summary.is_none() {
            dialogue.summary = Some(fallback);
        }
        (tuned, report, dialogue)
    };
    ctx.summaries
        .push((Stage::Tune, dialogue.summary.clone().unwrap_or_default()));
    dialogues.push(dialogue);

    let run = if tuned == draft {
        smoke
    } else {
        ctx.smoke_run(&tuned)?
    };
    Ok(PipelineResult {
        blueprint: tuned,
        run,
        tune: report,
        dialogues,
        summaries: ctx.summaries.clone(),
    })
}

/// `name = value` lines for the tune prompt.
pub(crate) fn describe_metrics(names: &[String], values: Option<&[(String, f64)]>) -> String {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| match values.and_then(|v| v.get(i)) {
            Some((_, x)) => format!("{n} = {}\n", format_sig(*x, 6)),
            None => format!("{n}\n"),
        })
        .collect()
}
