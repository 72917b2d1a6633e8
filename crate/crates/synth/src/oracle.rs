//! Canned responses keyed by (task id, stage, attempt).

macro_rules! fixtures {
    ($($task:literal / $key:literal),* $(,)?) => {
        &[$(($task, $key, include_str!(concat!("../assets/oracle/", $task, "/", $key, ".txt")))),*]
    };
}

const FIXTURES: &[(&str, &str, &str)] = fixtures![
    "balance" / "design_0",
    "balance" / "design_summary_0",
    "balance" / "dataflow_0",
    "balance" / "dataflow_summary_0",
    "balance" / "tune_0",
    "balance" / "tune_summary_0",
    "pickplace" / "design_0",
    "pickplace" / "design_summary_0",
    "pickplace" / "dataflow_0",
    "pickplace" / "dataflow_summary_0",
    "door" / "design_0",
    "door" / "design_summary_0",
    "door" / "dataflow_0",
    "door" / "dataflow_summary_0",
    "wipe" / "design_0",
    "wipe" / "design_summary_0",
    "wipe" / "dataflow_0",
    "wipe" / "dataflow_summary_0",
];

pub fn known_task(task_id: &str) -> bool {
    FIXTURES.iter().any(|(t, _, _)| *t == task_id)
}

pub fn response(task_id: &str, stage: &str, attempt: usize) -> Option<&'static str> {
    let key = format!("{stage}_{attempt}");
    FIXTURES
        .iter()
        .find(|(t, k, _)| *t == task_id && *k == key)
        .map(|(_, _, text)| *text)
}
