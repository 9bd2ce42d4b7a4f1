use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qubobench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_code_graph(dir: &Path) -> String {
    let path = dir.join("1tc.8.txt");
    let p = path.to_str().unwrap().to_string();
    let o = qb(&["generate", "mis", "--code", "1tc", "--length", "3", "-o", &p]);
    assert!(o.status.success(), "{o:?}");
    p
}

#[test]
fn generate_convert_and_exact_solve() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_code_graph(dir.path());
    let text = fs::read_to_string(&graph).unwrap();
    assert!(text.starts_with("p 8\n"));

    let o = qb(&["convert", &graph, "--family", "mis"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("8 "));

    let o = qb(&["solve", &graph, "--family", "mis", "--method", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    let rec: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rec["objective"], 4.0);
    assert_eq!(rec["feasible"], true);
}

#[test]
fn preprocess_reports_one_based_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seven.txt");
    fs::write(&path, "p 7\n1 2\n1 3\n2 3\n2 4\n3 5\n4 6\n5 6\n6 7\n").unwrap();
    let o = qb(&["preprocess", "mis", path.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("sweep 1: added [1 7] removed [2 3 6]"), "{out}");
    assert!(out.contains("fixed [1 4 5 7]"), "{out}");
}

#[test]
fn pce_solve_writes_round_log() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_code_graph(dir.path());
    let log = dir.path().join("rounds.jsonl");
    let o = qb(&[
        "solve",
        &graph,
        "--family",
        "mis",
        "--method",
        "pce",
        "--seed",
        "1",
        "--rounds",
        "2",
        "--log",
        log.to_str().unwrap(),
    ]);
    assert!(o.status.code().is_some_and(|c| c <= 1), "{o:?}");
    let lines = fs::read_to_string(&log).unwrap();
    assert_eq!(lines.lines().count(), 2);
    for l in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert!(v["branch"].is_string());
    }
}

#[test]
fn exit_codes() {
    let o = qb(&[
        "solve",
        "/nonexistent/graph.txt",
        "--family",
        "mis",
        "--method",
        "exact",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = qb(&["solve", "x.txt", "--family", "nope", "--method", "exact"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "p 3\n1 two\n").unwrap();
    let o = qb(&["solve", bad.to_str().unwrap(), "--family", "mis", "--method", "exact"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.txt:2:3"), "{err}");
}

#[test]
fn out_of_scale_instance_is_reported_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("msp.txt");
    let p = path.to_str().unwrap();
    assert!(qb(&["generate", "msp", "--retailers", "3", "--seed", "1", "-o", p])
        .status
        .success());
    let o = qb(&["solve", p, "--family", "msp", "--method", "vqe"]);
    assert_eq!(o.status.code(), Some(1));
    let rec: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rec["status"], "out_of_scale");
}

#[test]
fn bench_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    write_code_graph(dir.path());
    let suite = dir.path().join("suite.toml");
    fs::write(
        &suite,
        r#"
seed = 11
timing = false

[[instances]]
source = "file"
path = "1tc.8.txt"
family = "mis"

[[instances]]
source = "mdkp"
items = 6
dimensions = 2
tightness = 0.5
seed = 3

[[methods]]
method = "exact"

[[methods]]
method = "pce"
swap_width = 1
[methods.multistep]
max_rounds = 2
"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = qb(&["bench", suite.to_str().unwrap(), "-o", out.to_str().unwrap()]);
        assert!(o.status.success(), "{o:?}");
        outputs.push(
            ["records.jsonl", "results.csv", "summary.md"]
                .map(|f| fs::read(out.join(f)).unwrap())
                .to_vec(),
        );
    }
    assert_eq!(outputs[0], outputs[1]);

    let csv = String::from_utf8(outputs[0][1].clone()).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("instance,method,seed,status"));
    assert!(lines[1].starts_with("1tc.8,exact,"));

    let o = qb(&[
        "report",
        dir.path().join("a/records.jsonl").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), csv);
}
