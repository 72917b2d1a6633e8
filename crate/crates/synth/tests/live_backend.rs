use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use metactl_core::tune::TaskSpec;
use metactl_synth::{
    run_pipeline, BackendConfig, Message, PipelineContext, PipelineOptions, PromptSet, Session,
    Transcript,
};
use serde_json::{json, Value};

struct Seen {
    auth: Vec<String>,
    bodies: Vec<Value>,
}

/// Serves one scripted (status, content) pair per connection.
fn serve(script: Vec<(u16, String)>) -> (String, Arc<Mutex<Seen>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Seen {
        auth: vec![],
        bodies: vec![],
    }));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for (status, content) in script {
            let (stream, _) = listener.accept().unwrap();
            let mut r = BufReader::new(stream);
            let mut len = 0;
            loop {
                let mut line = String::new();
                r.read_line(&mut line).unwrap();
                let l = line.trim_end().to_ascii_lowercase();
                if l.is_empty() {
                    break;
                }
                if let Some(v) = l.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if l.starts_with("authorization:") {
                    log.lock()
                        .unwrap()
                        .auth
                        .push(line.trim_end()["authorization:".len()..].trim().to_string());
                }
            }
            let mut body = vec![0; len];
            r.read_exact(&mut body).unwrap();
            log.lock()
                .unwrap()
                .bodies
                .push(serde_json::from_slice(&body).unwrap());
            let payload = if status == 200 {
                json!({"choices": [{"message": {"role": "assistant", "content": content}}]})
                    .to_string()
            } else {
                json!({"error": content}).to_string()
            };
            let mut s = r.into_inner();
            write!(
                s,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            )
            .unwrap();
        }
    });
    (url, seen)
}

fn config(url: &str) -> BackendConfig {
    let mut c = BackendConfig::live_from_env();
    c.base_url = Some(url.into());
    c.api_key = Some("test-key".into());
    c.model = "stub-model".into();
    c.backoff = Duration::from_millis(5);
    c
}

#[test]
fn retries_transient_failures() {
    let (url, seen) = serve(vec![
        (503, "busy".into()),
        (429, "slow down".into()),
        (200, "hello".into()),
    ]);
    let mut s = Session::new(config(&url), Transcript::in_memory()).unwrap();
    let out = s
        .respond("design", 0, &[Message::system("sys"), Message::user("hi")])
        .unwrap();
    assert_eq!(out, "hello");
    let seen = seen.lock().unwrap();
    assert_eq!(seen.bodies.len(), 3);
    assert_eq!(seen.auth[0], "Bearer test-key");
    let body = &seen.bodies[2];
    assert_eq!(body["model"], "stub-model");
    assert_eq!(body["temperature"], 1.0);
    assert_eq!(
        body["messages"][1],
        json!({"role": "user", "content": "hi"})
    );
    assert_eq!(s.transcript.exchanges.len(), 1);
}

#[test]
fn auth_errors_are_not_retried() {
    let (url, seen) = serve(vec![(401, "bad key".into())]);
    let mut s = Session::new(config(&url), Transcript::in_memory()).unwrap();
    let e = s.respond("design", 0, &[Message::user("hi")]).unwrap_err();
    assert!(e.to_string().contains("401"), "{e}");
    assert_eq!(seen.lock().unwrap().bodies.len(), 1);
    assert!(s.transcript.exchanges.is_empty());
}

#[test]
fn gives_up_after_three_retries() {
    let (url, seen) = serve(vec![(500, "down".into()); 4]);
    let mut s = Session::new(config(&url), Transcript::in_memory()).unwrap();
    let e = s.respond("design", 0, &[Message::user("hi")]).unwrap_err();
    assert!(e.to_string().contains("after 3 retries"), "{e}");
    assert_eq!(seen.lock().unwrap().bodies.len(), 4);
}

#[test]
fn live_recording_replays_identically() {
    let assets = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/oracle/wipe");
    let script: Vec<(u16, String)> = [
        "design_0",
        "design_summary_0",
        "dataflow_0",
        "dataflow_summary_0",
    ]
    .iter()
    .map(|k| {
        (
            200,
            std::fs::read_to_string(format!("{assets}/{k}.txt")).unwrap(),
        )
    })
    .collect();
    let (url, _) = serve(script);
    let task = TaskSpec::parse(include_str!("../../core/fixtures/tasks/wipe.json")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("live.jsonl");

    let mut ctx = PipelineContext::new(
        task.clone(),
        PromptSet::builtin(),
        PipelineOptions::default(),
    )
    .unwrap();
    let mut live = Session::new(config(&url), Transcript::to_file(&path).unwrap()).unwrap();
    let recorded = run_pipeline(&mut ctx, &mut live).unwrap();
    assert!(recorded.success());

    let mut ctx =
        PipelineContext::new(task, PromptSet::builtin(), PipelineOptions::default()).unwrap();
    let mut replay = Session::new(BackendConfig::replay(&path), Transcript::in_memory()).unwrap();
    let replayed = run_pipeline(&mut ctx, &mut replay).unwrap();
    assert_eq!(
        replayed.blueprint.to_canonical(),
        recorded.blueprint.to_canonical()
    );
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(!text.contains("test-key"));
}

/// Talks to the endpoint in METACTL_LLM_BASE_URL; run with `--ignored`.
#[test]
#[ignore]
fn live_smoke() {
    let c = BackendConfig::live_from_env();
    if c.validate().is_err() {
        eprintln!("METACTL_LLM_BASE_URL / METACTL_LLM_API_KEY not set; skipping");
        return;
    }
    let task = TaskSpec::parse(include_str!("../../core/fixtures/tasks/balance.json")).unwrap();
    let mut ctx =
        PipelineContext::new(task, PromptSet::builtin(), PipelineOptions::default()).unwrap();
    let mut s = Session::new(c, Transcript::in_memory()).unwrap();
    match run_pipeline(&mut ctx, &mut s) {
        Ok(r) => eprintln!("success = {}\n{}", r.success(), r.blueprint.to_canonical()),
        Err(e) => eprintln!("pipeline stopped: {e}"),
    }
    assert!(!s.transcript.exchanges.is_empty());
}
