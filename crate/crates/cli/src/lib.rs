//! `metactl`: synthesize, run, analyze, tune and validate control-system
//! blueprints.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use metactl_core::blueprint::{validate_blueprint, Blueprint, BlueprintError};
use metactl_core::canonical::format_sig;
use metactl_core::composer::{analyze_lqr, safety_index_of, ControlSystem};
use metactl_core::controllers::safety_index_eval;
use metactl_core::sim::{
    certify_safety, read_csv, run_with_seed, Env, EnvSpec, MetricSpec, RunLog,
};
use metactl_core::tune::{
    default_tunables, tune_loop, CoordinateProposer, Proposer, Scenario, TaskSpec, TuneError,
    TuneSetup,
};
use metactl_synth::{
    run_pipeline, BackendConfig, LlmProposer, PipelineContext, PipelineOptions, PromptSet, Session,
    SynthError, Transcript,
};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// I/O, parse or backend failure.
    pub const FAILURE: i32 = 1;
    /// Synthesis exhausted, or the run / tuning did not reach the goal.
    pub const EXHAUSTED: i32 = 2;
    /// Validation or certificate failure.
    pub const INVALID: i32 = 3;
    pub const NOTHING_TO_CERTIFY: i32 = 4;
}

#[derive(Parser, Debug)]
#[command(
    name = "metactl",
    version,
    about = "Compose, run, tune and certify control-system blueprints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a blueprint from a task file.
    Synthesize(SynthesizeArgs),
    /// Run one episode and write the trajectory log.
    Run(RunArgs),
    /// Closed-loop eigenvalues and, given a log, the safety certificate.
    Analyze(AnalyzeArgs),
    /// Tune blueprint parameters against the task's success criterion.
    Tune(TuneArgs),
    /// Report every problem with a blueprint.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct EnvArgs {
    /// Task file (environment, duration, metrics, tunables).
    #[arg(long)]
    task: Option<PathBuf>,
    /// Environment document, or an environment kind such as `cartpole_arm`.
    #[arg(long, conflicts_with = "task")]
    env: Option<String>,
}

#[derive(Args, Debug)]
struct SynthesizeArgs {
    #[arg(long)]
    task: PathBuf,
    /// `oracle`, `replay:PATH` or `llm`.
    #[arg(long, default_value = "oracle")]
    backend: String,
    #[arg(long)]
    out: PathBuf,
    /// Transcript path (default: `<out>.transcript.jsonl`).
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    rounds: u32,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    blueprint: PathBuf,
    #[command(flatten)]
    env: EnvArgs,
    /// Trajectory log (CSV).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Episode length in seconds (default: the task's, else 10).
    #[arg(long)]
    duration: Option<f64>,
    /// Overrides the blueprint's tracking period.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Metric such as `pole_theta[0]:max_abs_after(5)`; repeatable.
    #[arg(long)]
    metric: Vec<String>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    blueprint: PathBuf,
    /// Trajectory log to certify against the blueprint's safety index.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Strategy {
    Coordinate,
    Llm,
}

#[derive(Args, Debug)]
struct TuneArgs {
    #[arg(long)]
    blueprint: PathBuf,
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long, value_enum, default_value = "coordinate")]
    strategy: Strategy,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    rounds: u32,
    /// Backend for the llm strategy.
    #[arg(long, default_value = "oracle")]
    backend: String,
    /// Tuned blueprint.
    #[arg(long)]
    out: PathBuf,
    /// Per-round table (default: `<out>.rounds.csv`).
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    metric: Vec<String>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long)]
    blueprint: PathBuf,
    #[command(flatten)]
    env: EnvArgs,
}

/// A failure carrying its exit code.
struct Fail(i32, String);

type Outcome = Result<i32, Fail>;

fn fail(msg: impl Into<String>) -> Fail {
    Fail(exit::FAILURE, msg.into())
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| fail(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Fail> {
    fs::write(path, text).map_err(|e| fail(format!("cannot write {}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Malformed documents are parse failures; unknown templates and bad
/// parameters or converters are validation failures.
fn load_blueprint(path: &Path) -> Result<Blueprint, Fail> {
    let text = read(path)?;
    Blueprint::parse(&text).map_err(|e| {
        let code = match &e {
            BlueprintError::Json { .. } | BlueprintError::Format(_) => exit::FAILURE,
            _ => exit::INVALID,
        };
        let lines: Vec<String> = e.errors().iter().map(|x| format!("  {x}")).collect();
        Fail(code, format!("{}:\n{}", path.display(), lines.join("\n")))
    })
}

fn load_task(path: &Path) -> Result<TaskSpec, Fail> {
    TaskSpec::parse(&read(path)?).map_err(|e| fail(format!("{}: {e}", path.display())))
}

/// The environment plus task-derived defaults.
struct EnvChoice {
    env: EnvSpec,
    task: Option<TaskSpec>,
}

fn load_env(args: &EnvArgs) -> Result<Option<EnvChoice>, Fail> {
    if let Some(t) = &args.task {
        let task = load_task(t)?;
        let env = task
            .env_spec()
            .map_err(|e| fail(format!("{}: {e}", t.display())))?;
        return Ok(Some(EnvChoice {
            env,
            task: Some(task),
        }));
    }
    let Some(e) = &args.env else { return Ok(None) };
    let text = if Path::new(e).is_file() {
        read(Path::new(e))?
    } else if e.ends_with(".json") {
        return Err(fail(format!("cannot read {e}: no such file")));
    } else {
        serde_json::json!({ "kind": e }).to_string()
    };
    let env = EnvSpec::from_json(&text).map_err(|err| fail(format!("{e}: {err}")))?;
    Ok(Some(EnvChoice { env, task: None }))
}

fn metrics(flags: &[String], task: Option<&TaskSpec>) -> Result<Vec<MetricSpec>, Fail> {
    if flags.is_empty() {
        return match task {
            Some(t) => t.metric_specs().map_err(|e| fail(e.to_string())),
            None => Ok(vec![]),
        };
    }
    flags
        .iter()
        .map(|m| {
            m.parse()
                .map_err(|e: metactl_core::sim::SimError| fail(e.to_string()))
        })
        .collect()
}

fn check(bp: &Blueprint, env: &Env) -> Result<(), Fail> {
    let issues = validate_blueprint(bp, env.schema());
    if issues.is_empty() {
        return Ok(());
    }
    let lines: Vec<String> = issues.iter().map(|i| format!("  {i}")).collect();
    Err(Fail(
        exit::INVALID,
        format!(
            "blueprint has {} issue(s):\n{}",
            issues.len(),
            lines.join("\n")
        ),
    ))
}

fn backend(spec: &str, task: &TaskSpec) -> Result<BackendConfig, Fail> {
    let cfg = match spec {
        "oracle" => BackendConfig::oracle(&task.task_id),
        "llm" => BackendConfig::live_from_env(),
        s => match s.strip_prefix("replay:") {
            Some(p) if !p.is_empty() => BackendConfig::replay(p),
            _ => {
                return Err(fail(format!(
                    "unknown backend '{s}'; expected oracle, replay:PATH or llm"
                )))
            }
        },
    };
    cfg.validate().map_err(|e| fail(e.to_string()))?;
    Ok(cfg)
}

fn synth_fail(e: SynthError) -> Fail {
    match e {
        SynthError::Exhausted { .. } => Fail(exit::EXHAUSTED, e.to_string()),
        e => fail(e.to_string()),
    }
}

fn cmd_synthesize(a: &SynthesizeArgs) -> Outcome {
    let task = load_task(&a.task)?;
    let cfg = backend(&a.backend, &task)?;
    let log = a
        .log
        .clone()
        .unwrap_or_else(|| with_suffix(&a.out, ".transcript.jsonl"));
    let transcript = Transcript::to_file(&log).map_err(|e| fail(e.to_string()))?;
    let mut session = Session::new(cfg, transcript).map_err(|e| fail(e.to_string()))?;
    let options = PipelineOptions {
        tune_rounds: a.rounds as usize,
        ..PipelineOptions::default()
    };
    let mut ctx = PipelineContext::new(task, PromptSet::builtin(), options)
        .map_err(|e| fail(e.to_string()))?;
    let result = run_pipeline(&mut ctx, &mut session).map_err(synth_fail)?;
    write(&a.out, &result.blueprint.to_canonical())?;
    for (stage, summary) in &result.summaries {
        eprintln!("{}: {summary}", stage.as_str());
    }
    println!("success: {} ({})", result.success(), result.run.reason);
    for (name, v) in &result.run.metrics {
        println!("{name} = {}", format_sig(*v, 6));
    }
    println!("tune rounds: {}", result.tune.rounds.len());
    Ok(if result.success() {
        exit::OK
    } else {
        exit::EXHAUSTED
    })
}

fn cmd_run(a: &RunArgs) -> Outcome {
    let mut bp = load_blueprint(&a.blueprint)?;
    let choice = load_env(&a.env)?.ok_or_else(|| fail("run needs --task or --env"))?;
    if let Some(dt) = a.dt {
        bp.rates.tracking_dt = dt;
    }
    let env = Env::new(choice.env, bp.rates.tracking_dt).map_err(|e| fail(e.to_string()))?;
    check(&bp, &env)?;
    let duration = a
        .duration
        .or(choice.task.as_ref().map(|t| t.duration))
        .unwrap_or(10.0);
    let metrics = metrics(&a.metric, choice.task.as_ref())?;
    let mut sys = ControlSystem::build(&bp, Arc::clone(env.schema()))
        .map_err(|e| Fail(exit::INVALID, e.to_string()))?;
    let result = run_with_seed(&mut sys, &env, duration, &metrics, a.seed)
        .map_err(|e| fail(e.to_string()))?;
    if let Some(log) = &a.log {
        write(log, &result.log.to_csv())?;
    }
    println!("success: {}", result.success);
    println!("reason: {}", result.reason);
    println!("ticks: {}", result.log.len());
    for (name, v) in &result.metrics {
        println!("{name} = {}", format_sig(*v, 6));
    }
    Ok(if result.success {
        exit::OK
    } else {
        exit::EXHAUSTED
    })
}

fn cmd_analyze(a: &AnalyzeArgs) -> Outcome {
    let bp = load_blueprint(&a.blueprint)?;
    let lqr =
        analyze_lqr(&bp).map_err(|e| Fail(exit::INVALID, format!("LQR analysis failed: {e}")))?;
    let safety = safety_index_of(&bp);
    let mut checked = 0;
    let mut passed = true;
    if let Some(an) = &lqr {
        checked += 1;
        println!(
            "closed-loop eigenvalues (discrete, period {} s):",
            format_sig(bp.rates.task_dt(), 6)
        );
        for z in &an.discrete.eigenvalues {
            let sign = if z.im < 0.0 { '-' } else { '+' };
            println!(
                "  {} {sign} {}i  |z| = {}",
                format_sig(z.re, 8),
                format_sig(z.im.abs(), 8),
                format_sig(z.norm(), 8)
            );
        }
        println!(
            "spectral radius: {}",
            format_sig(an.discrete.spectral_radius(), 8)
        );
        println!(
            "continuous max real part: {}",
            format_sig(an.continuous.max_real_part(), 8)
        );
        let ok = an.discrete.stable && an.continuous.stable;
        println!(
            "stability: {}",
            if ok { "certified" } else { "NOT certified" }
        );
        passed &= ok;
    }
    match (&safety, &a.log) {
        (Some(spec), Some(path)) => {
            checked += 1;
            let log =
                read_csv(&read(path)?).map_err(|e| fail(format!("{}: {e}", path.display())))?;
            let cert =
                certify_safety(&log, spec).map_err(|e| fail(format!("{}: {e}", path.display())))?;
            let (lo, hi) = phi_range(&log, spec);
            println!("safety ticks checked: {}", cert.ticks_checked);
            println!(
                "min phi = {}, max phi = {}",
                format_sig(lo, 8),
                format_sig(hi, 8)
            );
            if let Some(w) = &cert.warning {
                eprintln!("warning: {w}");
            }
            match cert.first_violation {
                None => println!("safety: certified"),
                Some(tick) => {
                    let t = log.time.get(tick).copied().unwrap_or(f64::NAN);
                    println!(
                        "safety: violated at tick {tick} (t = {} s, obstacle {})",
                        format_sig(t, 6),
                        cert.obstacle.unwrap_or(0)
                    );
                }
            }
            passed &= cert.certified;
        }
        (Some(_), None) => eprintln!("note: pass --log to certify the safety index"),
        (None, Some(_)) => eprintln!("note: the blueprint has no safety index; --log ignored"),
        (None, None) => {}
    }
    if checked == 0 {
        return Err(Fail(exit::NOTHING_TO_CERTIFY, "nothing to certify".into()));
    }
    Ok(if passed { exit::OK } else { exit::INVALID })
}

fn phi_range(log: &RunLog, spec: &metactl_core::controllers::SafetyIndexSpec<f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..log.channel_dim("d") {
        if let (Some(d), Some(dd)) = (log.series("d", j), log.series("d_dot", j)) {
            for (a, b) in d.iter().zip(&dd) {
                let p = safety_index_eval(spec, *a, *b).phi;
                lo = lo.min(p);
                hi = hi.max(p);
            }
        }
    }
    (lo, hi)
}

fn cmd_tune(a: &TuneArgs) -> Outcome {
    let bp = load_blueprint(&a.blueprint)?;
    let choice = load_env(&a.env)?.ok_or_else(|| fail("tune needs --task or --env"))?;
    let env =
        Env::new(choice.env.clone(), bp.rates.tracking_dt).map_err(|e| fail(e.to_string()))?;
    check(&bp, &env)?;
    let task = choice.task.as_ref();
    let params = match task {
        Some(t) if !t.tune.params.is_empty() => t.tune.params.clone(),
        _ => default_tunables(&bp),
    };
    let setup = TuneSetup {
        env: choice.env.clone(),
        duration: a.duration.or(task.map(|t| t.duration)).unwrap_or(10.0),
        metrics: metrics(&a.metric, task)?,
        params,
        scenarios: task.map(TaskSpec::scenarios).unwrap_or_else(|| {
            vec![Scenario {
                name: "nominal".into(),
                ..Scenario::default()
            }]
        }),
    };
    let rounds = a.rounds as usize;
    let result = match a.strategy {
        Strategy::Coordinate => tune_loop(&bp, &setup, &mut CoordinateProposer::new(), rounds),
        Strategy::Llm => {
            let task = task
                .cloned()
                .ok_or_else(|| fail("the llm strategy needs --task"))?;
            let cfg = backend(&a.backend, &task)?;
            let mut session =
                Session::new(cfg, Transcript::in_memory()).map_err(|e| fail(e.to_string()))?;
            let ctx = PipelineContext::new(task, PromptSet::builtin(), PipelineOptions::default())
                .map_err(|e| fail(e.to_string()))?;
            let mut p = LlmProposer::new(&ctx, &mut session, "none".into());
            let r = tune_loop(&bp, &setup, &mut p as &mut dyn Proposer, rounds);
            if p.consulted() {
                if let Err(e) = p.summarize("") {
                    eprintln!("warning: no tune summary: {e}");
                }
            }
            r
        }
    };
    let (tuned, report) = match result {
        Ok(r) => r,
        Err(TuneError::AllFailed(report)) => {
            let table = a
                .log
                .clone()
                .unwrap_or_else(|| with_suffix(&a.out, ".rounds.csv"));
            write(&table, &report.to_csv(&setup.params, &setup.metrics))?;
            return Err(Fail(
                exit::EXHAUSTED,
                TuneError::AllFailed(report).to_string(),
            ));
        }
        Err(e) => return Err(fail(e.to_string())),
    };
    write(&a.out, &tuned.to_canonical())?;
    let table = a
        .log
        .clone()
        .unwrap_or_else(|| with_suffix(&a.out, ".rounds.csv"));
    write(&table, &report.to_csv(&setup.params, &setup.metrics))?;
    for r in &report.rounds {
        let status = match (&r.evaluation, &r.error) {
            (Some(e), _) => format!("success={} score={}", e.success, format_sig(e.score, 6)),
            (None, Some(err)) => format!("not run: {err}"),
            (None, None) => "not run".into(),
        };
        let changes: Vec<String> = r
            .changes
            .iter()
            .map(|(p, v)| format!("{p}={}", format_sig(*v, 6)))
            .collect();
        println!("round {}: {status} [{}]", r.index, changes.join(", "));
    }
    println!("stop: {}", report.stop_reason);
    Ok(if report.succeeded() {
        exit::OK
    } else {
        exit::EXHAUSTED
    })
}

fn cmd_validate(a: &ValidateArgs) -> Outcome {
    let bp = load_blueprint(&a.blueprint)?;
    if let Some(choice) = load_env(&a.env)? {
        let env = Env::new(choice.env, bp.rates.tracking_dt).map_err(|e| fail(e.to_string()))?;
        check(&bp, &env)?;
    }
    println!("{}: ok", a.blueprint.display());
    Ok(exit::OK)
}

/// Parses `args` (including the program name) and runs the subcommand;
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::FAILURE
            } else {
                exit::OK
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Synthesize(a) => cmd_synthesize(a),
        Command::Run(a) => cmd_run(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match outcome {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}
