use proptest::prelude::*;

use super::*;
use crate::sim::{EnvSpec, RunLog};

const BALANCE: &str = include_str!("../../fixtures/blueprints/balance.json");
const DETUNED: &str = include_str!("../../fixtures/blueprints/balance_detuned.json");
const BALANCE_TASK: &str = include_str!("../../fixtures/tasks/balance.json");

fn setup(task: &TaskSpec) -> TuneSetup {
    TuneSetup {
        env: task.env_spec().unwrap(),
        duration: task.duration,
        metrics: task.metric_specs().unwrap(),
        params: task.tune.params.clone(),
        scenarios: task.scenarios(),
    }
}

fn path(s: &str) -> ParamPath {
    s.parse().unwrap()
}

fn lqr_tunables() -> Vec<TunableParam> {
    TaskSpec::parse(BALANCE_TASK).unwrap().tune.params
}

fn result_with(series: Vec<f64>, dt: f64) -> RunResult {
    RunResult {
        env_kind: "cartpole_arm".into(),
        seed: 0,
        log: RunLog {
            dt,
            time: (0..series.len()).map(|k| k as f64 * dt).collect(),
            columns: vec!["pole_theta[0]".into()],
            rows: series.into_iter().map(|x| vec![x]).collect(),
        },
        metrics: vec![],
        success: true,
        reason: "ok".into(),
        failure_reason: None,
    }
}

#[test]
fn downsampling_keeps_endpoints() {
    let idx = downsample_indices(10_000, SUMMARY_POINTS);
    assert!(idx.len() <= 50);
    assert_eq!(idx[0], 0);
    assert_eq!(*idx.last().unwrap(), 9_999);
    assert_eq!(downsample_indices(3, 50), vec![0, 1, 2]);
    assert!(downsample_indices(0, 50).is_empty());
}

proptest! {
    #[test]
    fn downsampling_bounds(n in 1usize..30_000) {
        let idx = downsample_indices(n, SUMMARY_POINTS);
        prop_assert!(idx.len() <= SUMMARY_POINTS);
        prop_assert_eq!(idx[0], 0);
        prop_assert_eq!(*idx.last().unwrap(), n - 1);
        prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        if n > SUMMARY_POINTS {
            // Uniform stride apart from the final gap.
            let stride = idx[1] - idx[0];
            prop_assert!(idx[..idx.len() - 1].windows(2).all(|w| w[1] - w[0] == stride));
        }
    }
}

#[test]
fn summary_of_constant_series() {
    let r = result_with(vec![0.25; 10_000], 1e-3);
    let m: Vec<crate::sim::MetricSpec> = vec!["pole_theta[0]:max_abs_after(0)".parse().unwrap()];
    let s = summarize_trajectory(&r, &m);
    assert!(
        s.contains("metric pole_theta[0]:max_abs_after(0) = 0.25"),
        "{s}"
    );
    let points = s.lines().last().unwrap().split(' ').count();
    assert!(points <= 50);
    let last = s.lines().last().unwrap();
    assert!(
        last.starts_with("0.0:0.25") && last.ends_with("9.999:0.25"),
        "{last}"
    );
}

#[test]
fn settle_time_on_exponential() {
    let dt = 1e-3;
    let r = result_with(
        (0..5000).map(|k| 0.3 * (-(k as f64) * dt).exp()).collect(),
        dt,
    );
    let m: crate::sim::MetricSpec = "pole_theta[0]:settle_time(0.05)".parse().unwrap();
    let v = m.evaluate(&r.log).unwrap();
    assert!((v - (0.3f64 / 0.05).ln()).abs() <= dt, "{v}");
    let s = summarize_trajectory(&r, &[m]);
    assert!(s.contains("= 1.79"), "{s}");
}

#[test]
fn apply_changes_only_named_entry() {
    let bp = Blueprint::parse(DETUNED).unwrap();
    let out = apply_params(
        &bp,
        &[(path("task_controller.Q[2][2]"), 100.0)],
        &lqr_tunables(),
    )
    .unwrap();
    let (a, b) = (bp.to_canonical(), out.to_canonical());
    let diff: Vec<_> = a.lines().zip(b.lines()).filter(|(x, y)| x != y).collect();
    assert_eq!(diff.len(), 1, "{diff:?}");
    assert_eq!(out.get_param(&path("task_controller.Q[2][2]")), Some(100.0));
}

#[test]
fn apply_rejects_out_of_bounds_and_unknown() {
    let bp = Blueprint::parse(DETUNED).unwrap();
    let err = apply_params(
        &bp,
        &[(path("task_controller.R[0][0]"), -1.0)],
        &lqr_tunables(),
    )
    .unwrap_err();
    assert!(matches!(err, TuneError::OutOfBounds { .. }), "{err}");
    let err = apply_params(
        &bp,
        &[(path("task_controller.Q[1][1]"), 2.0)],
        &lqr_tunables(),
    )
    .unwrap_err();
    assert!(matches!(err, TuneError::UnknownPath(_)));
}

#[test]
fn apply_reaches_published_weights() {
    let start = Blueprint::parse(DETUNED).unwrap();
    let assign = [
        (path("task_controller.Q[0][0]"), 10.0),
        (path("task_controller.Q[2][2]"), 100.0),
        (path("task_controller.R[0][0]"), 0.01),
    ];
    let out = apply_params(&start, &assign, &lqr_tunables()).unwrap();
    assert_eq!(
        out.to_canonical(),
        Blueprint::parse(BALANCE).unwrap().to_canonical()
    );
}

#[test]
fn coordinate_tunes_detuned_balance() {
    let task = TaskSpec::parse(BALANCE_TASK).unwrap();
    let start = Blueprint::parse(DETUNED).unwrap();
    let s = setup(&task);
    let (tuned, report) = tune_loop(&start, &s, &mut CoordinateProposer::new(), 8).unwrap();
    assert!(!report.rounds[0].success(), "the detuned start must fail");
    assert!(report.succeeded(), "{}", report.stop_reason);
    assert!(report.rounds.len() <= 8);
    assert!(tuned.get_param(&path("task_controller.Q[2][2]")).unwrap() > 1.0);
    let best = report.best.unwrap();
    assert!(report.rounds[best].success());

    // Identical inputs give the identical round sequence.
    let (_, again) = tune_loop(&start, &s, &mut CoordinateProposer::new(), 8).unwrap();
    assert_eq!(again, report);

    let table = report.to_csv(&s.params, &s.metrics);
    assert_eq!(table.lines().count(), report.rounds.len() + 1);
    assert!(table.starts_with("round,success,task_controller.Q[2][2]"));
}

#[test]
fn successful_start_stops_after_one_round() {
    let task = TaskSpec::parse(BALANCE_TASK).unwrap();
    let start = Blueprint::parse(BALANCE).unwrap();
    let (tuned, report) =
        tune_loop(&start, &setup(&task), &mut CoordinateProposer::new(), 8).unwrap();
    assert_eq!(report.rounds.len(), 1);
    assert!(report.rounds[0].changes.is_empty());
    assert_eq!(tuned.to_canonical(), start.to_canonical());
    assert_eq!(report.stop_reason, "success at round 0");
}

#[test]
fn zero_budget_is_an_error() {
    let task = TaskSpec::parse(BALANCE_TASK).unwrap();
    let start = Blueprint::parse(DETUNED).unwrap();
    assert!(matches!(
        tune_loop(&start, &setup(&task), &mut CoordinateProposer::new(), 0),
        Err(TuneError::Budget)
    ));
}

/// Proposes an out-of-bounds value first, then the published weights.
struct Scripted(usize);

impl Proposer for Scripted {
    fn name(&self) -> &str {
        "scripted"
    }

    fn propose(
        &mut self,
        _: &ProposalContext<'_>,
    ) -> Result<Option<Vec<(ParamPath, f64)>>, String> {
        self.0 += 1;
        Ok(Some(match self.0 {
            1 => vec![(path("task_controller.R[0][0]"), -1.0)],
            _ => vec![
                (path("task_controller.Q[0][0]"), 10.0),
                (path("task_controller.Q[2][2]"), 100.0),
                (path("task_controller.R[0][0]"), 0.01),
            ],
        }))
    }
}

#[test]
fn invalid_proposals_are_logged_not_run() {
    let task = TaskSpec::parse(BALANCE_TASK).unwrap();
    let start = Blueprint::parse(DETUNED).unwrap();
    let (_, report) = tune_loop(&start, &setup(&task), &mut Scripted(0), 5).unwrap();
    assert_eq!(report.rounds.len(), 3);
    assert!(report.rounds[1].evaluation.is_none());
    assert!(report.rounds[1]
        .error
        .as_deref()
        .unwrap()
        .contains("outside"));
    assert!(report.rounds[2].success());
    assert_eq!(report.best, Some(2));
}

#[test]
fn best_is_never_worse_than_evaluated_rounds() {
    let task = TaskSpec::parse(BALANCE_TASK).unwrap();
    let start = Blueprint::parse(DETUNED).unwrap();
    let s = setup(&task);
    let (tuned, report) = tune_loop(&start, &s, &mut CoordinateProposer::new(), 3).unwrap();
    let best = report.rounds[report.best.unwrap()]
        .evaluation
        .clone()
        .unwrap();
    for r in report.rounds.iter().filter_map(|r| r.evaluation.as_ref()) {
        assert!(best.success >= r.success);
        if best.success == r.success {
            assert!(best.score <= r.score);
        }
    }
    assert_eq!(evaluate_candidate(&tuned, &s).unwrap(), best);
}

#[test]
fn task_files_parse() {
    for (text, kind) in [
        (BALANCE_TASK, "cartpole_arm"),
        (
            include_str!("../../fixtures/tasks/pickplace.json"),
            "arm2d_pickplace",
        ),
        (include_str!("../../fixtures/tasks/door.json"), "door"),
        (include_str!("../../fixtures/tasks/wipe.json"), "wipe"),
    ] {
        let t = TaskSpec::parse(text).unwrap();
        assert_eq!(t.env_spec().unwrap().kind_name(), kind);
        assert!(!t.metric_specs().unwrap().is_empty());
    }
    let wrong = BALANCE_TASK.replace(
        "\"format_kind\": \"task\"",
        "\"format_kind\": \"blueprint\"",
    );
    assert!(TaskSpec::parse(&wrong).is_err());
}

#[test]
fn scenario_patches_environment() {
    let task = TaskSpec::parse(BALANCE_TASK).unwrap();
    let base = task.env_spec().unwrap();
    let heavy = &task.scenarios()[1];
    let EnvSpec::CartpoleArm(spec) = heavy.env_spec(&base).unwrap() else {
        panic!("kind changed")
    };
    assert_eq!(
        (
            spec.cartpole.m_cart,
            spec.cartpole.m_pole,
            spec.cartpole.l_pole
        ),
        (0.5, 0.5, 0.5)
    );
    assert_eq!(spec.initial["pole_theta"], [0.5, 0.5]);
    let bp = heavy.apply(&Blueprint::parse(BALANCE).unwrap()).unwrap();
    assert_eq!(bp.get_param(&path("task_model.m_cart")), Some(0.5));
}

#[test]
fn default_tunables_cover_weights() {
    let bp = Blueprint::parse(BALANCE).unwrap();
    let names: Vec<String> = default_tunables(&bp)
        .iter()
        .map(|t| t.path.to_string())
        .collect();
    assert!(names.contains(&"task_controller.Q[2][2]".to_string()));
    assert!(names.contains(&"task_controller.R[0][0]".to_string()));
    assert!(names.contains(&"tracking_controller.kp[3]".to_string()));
    assert!(!names.contains(&"tracking_controller.kp[0]".to_string()));
}
