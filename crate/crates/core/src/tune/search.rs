use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{apply_params, summarize_trajectory, Scenario, TunableParam, TuneError};
use crate::blueprint::{Blueprint, ParamPath};
use crate::canonical::format_sig;
use crate::composer::ControlSystem;
use crate::sim::{run_with_seed, Env, EnvSpec, MetricSpec};

/// What a tuning run evaluates each candidate on.
#[derive(Debug, Clone)]
pub struct TuneSetup {
    pub env: EnvSpec,
    pub duration: f64,
    /// The first metric ranks candidates that share a success status.
    pub metrics: Vec<MetricSpec>,
    pub params: Vec<TunableParam>,
    pub scenarios: Vec<Scenario>,
}

/// Outcome of one candidate over all scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Success in every scenario.
    pub success: bool,
    /// Worst value of each metric over the scenarios.
    pub metrics: Vec<(String, f64)>,
    /// Primary metric oriented so that lower is better.
    pub score: f64,
    pub reasons: Vec<String>,
    /// Trajectory summary of the first failing scenario (or the first one).
    pub summary: String,
}

/// Runs `bp` on every scenario, concurrently.
pub fn evaluate_candidate(bp: &Blueprint, setup: &TuneSetup) -> Result<Evaluation, TuneError> {
    let dt = bp.rates.tracking_dt;
    let mut jobs = Vec::with_capacity(setup.scenarios.len());
    for sc in &setup.scenarios {
        let env = Env::new(sc.env_spec(&setup.env)?, dt)?;
        let bp = sc.apply(bp)?;
        let sys = ControlSystem::build(&bp, Arc::clone(env.schema()))
            .map_err(|e| TuneError::Task(format!("scenario '{}': {e}", sc.name)))?;
        jobs.push((sc, env, sys));
    }
    let results = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .into_iter()
            .map(|(sc, env, mut sys)| {
                scope.spawn(move || {
                    run_with_seed(&mut sys, &env, setup.duration, &setup.metrics, sc.seed)
                        .map(|r| (sc, r))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect::<Vec<_>>()
    });

    let mut success = true;
    let mut worst: Vec<(String, f64)> = setup
        .metrics
        .iter()
        .map(|m| (m.to_string(), f64::NAN))
        .collect();
    let mut reasons = Vec::new();
    let mut summary = None;
    for (k, res) in results.into_iter().enumerate() {
        let (sc, r) = res?;
        success &= r.success;
        reasons.push(format!("{}: {}", sc.name, r.reason));
        if summary.is_none() && !r.success {
            summary = Some(format!(
                "scenario {}\n{}",
                sc.name,
                summarize_trajectory(&r, &setup.metrics)
            ));
        }
        for (i, m) in setup.metrics.iter().enumerate() {
            let v = r.metrics[i].1;
            let w = &mut worst[i].1;
            let worse = if m.higher_is_better() { v < *w } else { v > *w };
            if k == 0 || v.is_nan() || (!w.is_nan() && worse) {
                *w = v;
            }
        }
    }
    let summary = match summary {
        Some(s) => s,
        None => reasons.join("\n"),
    };
    let score = match (setup.metrics.first(), worst.first()) {
        (Some(m), Some((_, v))) if m.higher_is_better() => -v,
        (Some(_), Some((_, v))) => *v,
        _ => 0.0,
    };
    Ok(Evaluation {
        success,
        metrics: worst,
        score: if score.is_nan() { f64::INFINITY } else { score },
        reasons,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneRound {
    pub index: usize,
    /// Value of every tunable in this round's candidate.
    pub values: Vec<(String, f64)>,
    /// The assignments proposed for this round (empty for the start).
    pub changes: Vec<(String, f64)>,
    pub evaluation: Option<Evaluation>,
    /// Why the candidate was not run.
    pub error: Option<String>,
}

impl TuneRound {
    pub fn success(&self) -> bool {
        self.evaluation.as_ref().is_some_and(|e| e.success)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub rounds: Vec<TuneRound>,
    pub best: Option<usize>,
    pub stop_reason: String,
}

impl TuneReport {
    pub fn causes(&self) -> Vec<String> {
        self.rounds
            .iter()
            .filter_map(|r| r.error.as_ref().map(|e| format!("round {}: {e}", r.index)))
            .collect()
    }

    pub fn succeeded(&self) -> bool {
        self.rounds.iter().any(TuneRound::success)
    }

    /// Per-round table: round, success, tunable values, metrics, score, note.
    pub fn to_csv(&self, params: &[TunableParam], metrics: &[MetricSpec]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["round".to_string(), "success".into()];
        header.extend(params.iter().map(|p| p.path.to_string()));
        header.extend(metrics.iter().map(|m| m.to_string()));
        header.extend(["score".into(), "note".into()]);
        w.write_record(&header).expect("in-memory write");
        for r in &self.rounds {
            let mut row = vec![r.index.to_string(), r.success().to_string()];
            row.extend(r.values.iter().map(|(_, v)| format_sig(*v, 10)));
            match &r.evaluation {
                Some(e) => {
                    row.extend(e.metrics.iter().map(|(_, v)| format_sig(*v, 10)));
                    row.push(format_sig(e.score, 10));
                    row.push(if Some(r.index) == self.best {
                        "best".into()
                    } else {
                        String::new()
                    });
                }
                None => {
                    row.extend(metrics.iter().map(|_| String::new()));
                    row.push(String::new());
                    row.push(r.error.clone().unwrap_or_default());
                }
            }
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Input to a proposal: the best candidate so far and the history.
pub struct ProposalContext<'a> {
    pub round: usize,
    pub best: &'a Blueprint,
    pub best_round: &'a TuneRound,
    pub history: &'a [TuneRound],
    pub params: &'a [TunableParam],
    pub metrics: &'a [MetricSpec],
    /// Summary of the best candidate's trajectory.
    pub summary: &'a str,
}

impl ProposalContext<'_> {
    /// Whether the most recent round became the best one.
    pub fn improved(&self) -> bool {
        self.history
            .last()
            .is_some_and(|r| r.index == self.best_round.index)
    }
}

/// A tuning strategy: proposes assignments applied to the best candidate.
pub trait Proposer {
    fn name(&self) -> &str;

    /// `Ok(None)` ends the search.
    fn propose(
        &mut self,
        ctx: &ProposalContext<'_>,
    ) -> Result<Option<Vec<(ParamPath, f64)>>, String>;
}

fn better(a: &Evaluation, b: &Evaluation) -> bool {
    match (a.success, b.success) {
        (true, false) => true,
        (false, true) => false,
        _ => a.score.partial_cmp(&b.score) == Some(Ordering::Less),
    }
}

fn values_of(bp: &Blueprint, params: &[TunableParam]) -> Vec<(String, f64)> {
    params
        .iter()
        .map(|p| {
            (
                p.path.to_string(),
                bp.get_param(&p.path).unwrap_or(f64::NAN),
            )
        })
        .collect()
}

/// Evaluate, propose, apply, for at most `budget` rounds (rejected
/// proposals use up a round without running); stops at the first successful
/// round. Returns the best candidate.
pub fn tune_loop(
    bp: &Blueprint,
    setup: &TuneSetup,
    proposer: &mut dyn Proposer,
    budget: usize,
) -> Result<(Blueprint, TuneReport), TuneError> {
    if budget == 0 {
        return Err(TuneError::Budget);
    }
    for p in &setup.params {
        p.validate()?;
        if bp.get_param(&p.path).is_none() {
            return Err(TuneError::UnknownPath(p.path.to_string()));
        }
    }
    let mut rounds: Vec<TuneRound> = Vec::new();
    let mut candidates: Vec<Option<Blueprint>> = Vec::new();
    let mut best: Option<usize> = None;
    let mut stop_reason = format!("budget of {budget} rounds exhausted");

    while rounds.len() < budget {
        let index = rounds.len();
        let (cand, changes) = if index == 0 {
            (bp.clone(), vec![])
        } else {
            if rounds[index - 1].success() {
                stop_reason = format!("success at round {}", index - 1);
                break;
            }
            let base = best.unwrap_or(0);
            let base_bp = candidates[base].clone().unwrap_or_else(|| bp.clone());
            let summary = rounds[base]
                .evaluation
                .as_ref()
                .map(|e| e.summary.clone())
                .unwrap_or_default();
            let ctx = ProposalContext {
                round: index,
                best: &base_bp,
                best_round: &rounds[base],
                history: &rounds,
                params: &setup.params,
                metrics: &setup.metrics,
                summary: &summary,
            };
            let proposal = proposer.propose(&ctx);
            let rejected = |changes: Vec<(String, f64)>, msg: String| TuneRound {
                index,
                values: values_of(&base_bp, &setup.params),
                changes,
                evaluation: None,
                error: Some(msg),
            };
            match proposal {
                Ok(None) => {
                    stop_reason = format!("{} has no further proposals", proposer.name());
                    break;
                }
                Err(e) => {
                    rounds.push(rejected(
                        vec![],
                        format!("{} failed to propose: {e}", proposer.name()),
                    ));
                    candidates.push(None);
                    continue;
                }
                Ok(Some(assign)) => {
                    let changes: Vec<(String, f64)> =
                        assign.iter().map(|(p, v)| (p.to_string(), *v)).collect();
                    match apply_params(&base_bp, &assign, &setup.params) {
                        Ok(next) => (next, changes),
                        Err(e) => {
                            rounds.push(rejected(changes, format!("proposal rejected: {e}")));
                            candidates.push(None);
                            continue;
                        }
                    }
                }
            }
        };
        let mut round = TuneRound {
            index,
            values: values_of(&cand, &setup.params),
            changes,
            evaluation: None,
            error: None,
        };
        match evaluate_candidate(&cand, setup) {
            Ok(e) => {
                let replace = match best.and_then(|b| rounds[b].evaluation.as_ref()) {
                    None => true,
                    Some(b) => better(&e, b),
                };
                if replace {
                    best = Some(index);
                }
                round.evaluation = Some(e);
            }
            Err(e) => round.error = Some(e.to_string()),
        }
        rounds.push(round);
        candidates.push(Some(cand));
    }
    if rounds.last().is_some_and(TuneRound::success) {
        stop_reason = format!("success at round {}", rounds.len() - 1);
    }

    let report = TuneReport {
        rounds,
        best,
        stop_reason,
    };
    match best.and_then(|b| candidates[b].clone()) {
        Some(b) => Ok((b, report)),
        None => Err(TuneError::AllFailed(Box::new(report))),
    }
}
