use std::path::Path;
use std::process::{Command, Output};

fn treewalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treewalk"))
        .args(args)
        .env_remove("TREEWALK_WORKERS")
        .output()
        .expect("binary runs")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn simulate_token_prints_a_report() {
    let out = treewalk(&["simulate", "--algo", "token", "--tree", "path:5", "--init", "dirty:1", "--start", "middle"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# treewalk "));
    let json: String = text.lines().filter(|l| !l.starts_with('#')).collect();
    let report: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(report["status"], "terminated");
    assert!(report["steps"].as_u64().unwrap() <= 24);
}

#[test]
fn simulate_exit_codes() {
    let looping = treewalk(&["simulate", "--algo", "z", "--tree", "path:9", "--start", "middle"]);
    assert_eq!(looping.status.code(), Some(4));
    let budget = treewalk(&["simulate", "--algo", "cleanmem", "--tree", "path:6", "--budget", "3"]);
    assert_eq!(budget.status.code(), Some(4));
    let bad = treewalk(&["simulate", "--algo", "token", "--tree", "path:5", "--start", "9"]);
    assert_eq!(bad.status.code(), Some(1));
    let unknown = treewalk(&["simulate", "--algo", "table:4096", "--tree", "path:5"]);
    assert_ne!(unknown.status.code(), Some(0));
}

#[test]
fn malformed_tree_file_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("t.json");
    std::fs::write(&tree, "{\"n\": 2,\n \"ports\": [[1], [0]").unwrap();
    let out = treewalk(&["simulate", "--algo", "rotor", "--tree", &format!("file:{}", tree.display())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn sweep_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let args = [
        "sweep", "--algo", "token", "--tree", "all:2..4", "--labeling", "enumerate", "--init", "enumerate", "--rows", "--workers", "2", "-o",
    ];
    let mut texts = Vec::new();
    for _ in 0..2 {
        let mut a = args.to_vec();
        a.push(out.to_str().unwrap());
        let r = treewalk(&a);
        assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
        texts.push(read(&out));
    }
    let strip = |t: &str| t.lines().filter(|l| !l.starts_with("# generated_at:")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&texts[0]), strip(&texts[1]));
    let header: Vec<&str> = texts[0].lines().take(4).collect();
    assert!(header[0].starts_with("# treewalk "));
    assert!(header[1].starts_with("# config: {"));
    assert_eq!(header[2], "# seed: 0");
    assert!(header[3].starts_with("# generated_at: "));
    assert!(texts[0].lines().last().unwrap().starts_with("# summary: "));
}

#[test]
fn trace_is_written_as_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let out = treewalk(&["simulate", "--algo", "rotor", "--tree", "path:4", "--trace", trace.to_str().unwrap(), "-o", dir.path().join("r.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let records = read(&trace).lines().filter(|l| !l.starts_with('#')).count();
    assert!(records >= 3);
}

#[test]
fn gadgets_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    let r = treewalk(&["gadgets", "-o", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let json: String = read(&out).lines().filter(|l| !l.starts_with('#')).collect();
    let report: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(report["pass"], true);
}
