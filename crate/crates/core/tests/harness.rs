use treewalk::engine::Stop;
use treewalk::harness::config::{Algo, ExperimentConfig, InitSource, LabelingSource, StartSource, TreeSource};
use treewalk::harness::report::{body_lines, without_timestamp};
use treewalk::harness::simulate::{simulate, simulate_to_files, EXIT_INCOMPLETE, EXIT_OK};
use treewalk::harness::sweep::{sweep, sweep_to_file};
use treewalk::harness::HarnessError;

fn config(command: &str, algo: &str, tree: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(command, algo.parse().unwrap(), tree.parse().unwrap());
    c.workers = 2;
    c
}

#[test]
fn token_on_a_dirty_path_from_the_middle() {
    let mut c = config("simulate", "token", "path:5");
    c.init = InitSource::Dirty(1);
    c.start = StartSource::Middle;
    let r = simulate(&c).unwrap();
    assert_eq!(r.status, "terminated");
    assert_eq!(r.final_position, 2);
    assert!(r.steps <= 24, "{}", r.steps);
    assert!(r.violations.is_empty());
    assert_eq!(r.exit_code(), EXIT_OK);
}

#[test]
fn rotor_on_an_edge_covers_in_one_step() {
    let mut c = config("simulate", "rotor", "path:2");
    c.stop = Stop::AllVisited;
    let r = simulate(&c).unwrap();
    assert_eq!(r.steps, 1);
    assert_eq!(r.exit_code(), EXIT_OK);
}

#[test]
fn table_runs_are_repeatable() {
    let mut c = config("simulate", "table:0", "path:4");
    c.stop = Stop::AllVisited;
    let a = simulate(&c).unwrap();
    let b = simulate(&c).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.status, "loop");
    assert_eq!(a.exit_code(), EXIT_INCOMPLETE);
}

#[test]
fn exhausted_budget_is_not_a_clean_exit() {
    let mut c = config("simulate", "cleanmem", "path:6");
    c.budget = Some(3);
    let r = simulate(&c).unwrap();
    assert_eq!(r.status, "budget-exhausted");
    assert_ne!(r.exit_code(), EXIT_OK);
}

#[test]
fn malformed_tree_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tree.json");
    std::fs::write(&path, "{\"n\": 3,\n\"ports\": [[1], [0, 2]\n").unwrap();
    let c = ExperimentConfig::new("simulate", Algo::Token, TreeSource::File(path));
    let err = simulate(&c).unwrap_err();
    assert!(matches!(err, HarnessError::Topology(_)));
    assert!(err.to_string().contains("line"), "{err}");
}

#[test]
fn trace_file_has_one_record_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config("simulate", "x", "path:6");
    c.stop = Stop::AllVisited;
    c.output = Some(dir.path().join("report.json"));
    c.trace = Some(dir.path().join("trace.jsonl"));
    let r = simulate_to_files(&c).unwrap();
    let text = std::fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = body_lines(&text).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len() as u64, r.steps);
    assert_eq!(records[0]["step"], 1);
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.starts_with("# treewalk "));
}

#[test]
fn token_sweep_is_clean_up_to_five_nodes() {
    let mut c = config("sweep", "token", "all:2..5");
    c.labeling = LabelingSource::Enumerate;
    c.init = InitSource::Enumerate;
    c.start = StartSource::All;
    let r = sweep(&c).unwrap();
    assert!(r.summary.clean(), "{:?}", r.summary.examples);
    for (n, s) in &r.summary.per_size {
        assert!(s.max_steps <= 6 * (*n as u64 - 1));
    }
    assert!(r.summary.max_edge_use <= 3);
}

#[test]
fn cleanmem_sweep_terminates_at_the_start() {
    let mut c = config("sweep", "cleanmem", "all:2..6");
    c.labeling = LabelingSource::Enumerate;
    c.start = StartSource::All;
    let r = sweep(&c).unwrap();
    assert_eq!(r.summary.failures, 0);
    assert!(r.summary.clean(), "{:?}", r.summary.examples);
}

#[test]
fn sweep_files_are_reproducible_and_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config("sweep", "token", "samples:20:200:5");
    c.init = InitSource::Dirty(9);
    c.start = StartSource::Random;
    c.rows = true;
    let mut bodies = Vec::new();
    c.output = Some(dir.path().join("s.csv"));
    for workers in [1, 1, 3] {
        c.workers = workers;
        sweep_to_file(&c).unwrap();
        bodies.push(std::fs::read_to_string(c.output.as_ref().unwrap()).unwrap());
    }
    assert_eq!(without_timestamp(&bodies[0]), without_timestamp(&bodies[1]));
    let rows = |t: &str| body_lines(t).map(str::to_string).collect::<Vec<_>>();
    assert_eq!(rows(&bodies[0]), rows(&bodies[2]));
    assert_eq!(rows(&bodies[0]).len(), 201);
    assert!(rows(&bodies[0])[0].starts_with("n,shape,labeling"));
}

#[test]
fn header_config_reproduces_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config("sweep", "rotor", "paths:3..5");
    c.labeling = LabelingSource::Enumerate;
    c.init = InitSource::Enumerate;
    c.start = StartSource::All;
    c.output = Some(dir.path().join("a.csv"));
    sweep_to_file(&c).unwrap();
    let first = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let line = first.lines().find_map(|l| l.strip_prefix("# config: ")).unwrap();
    let back: ExperimentConfig = serde_json::from_str(line).unwrap();
    assert_eq!(back, c);
    sweep_to_file(&back).unwrap();
    let second = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(without_timestamp(&first), without_timestamp(&second));
}
