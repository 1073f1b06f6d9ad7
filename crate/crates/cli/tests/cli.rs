use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nfv-orch"))
}

fn t1() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/t1.json")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn cluster_run_on_t1() {
    let o = run(&[
        "run",
        t1().to_str().unwrap(),
        "--algo",
        "cluster",
        "--clusters",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("a -> h1"), "{text}");
    assert!(text.contains("b -> h1"), "{text}");
    assert!(text.contains("total cost: 2\n"), "{text}");
    assert!(text.contains("total delay: 2 ms"), "{text}");
    assert!(text.contains("verdict: feasible"), "{text}");
}

#[test]
fn brute_force_delay_agrees_with_cluster() {
    let t1 = t1();
    let bf = run(&[
        "--no-timing",
        "run",
        t1.to_str().unwrap(),
        "--algo",
        "brute-force",
        "--objective",
        "delay",
    ]);
    assert_eq!(bf.status.code(), Some(0));
    let body = |s: String| {
        s.lines()
            .skip(1)
            .filter(|l| !l.starts_with("wall time"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let cl = run(&[
        "--no-timing",
        "run",
        t1.to_str().unwrap(),
        "--algo",
        "cluster",
    ]);
    assert_eq!(body(stdout(&bf)), body(stdout(&cl)));
}

#[test]
fn missing_file_is_an_input_error() {
    let o = run(&["run", "/nonexistent/scenario.json", "--algo", "cluster"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["validate", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_scenario_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = std::fs::read_to_string(t1())
        .unwrap()
        .replace("\"cpu\": 4", "\"cpu\": -4");
    std::fs::write(&path, text).unwrap();
    let o = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("negative"));
}

#[test]
fn infeasible_placement_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tight.json");
    // b no longer fits on either host
    let text = std::fs::read_to_string(t1())
        .unwrap()
        .replace("\"cpu\": 8", "\"cpu\": 13");
    std::fs::write(&path, text).unwrap();
    for algo in [
        "cluster",
        "min-distance",
        "min-latency",
        "ga",
        "brute-force",
    ] {
        let o = run(&["run", path.to_str().unwrap(), "--algo", algo]);
        assert_eq!(o.status.code(), Some(1), "{algo}");
    }
}

#[test]
fn sweep_rows_and_header() {
    let o = run(&[
        "--no-timing",
        "sweep",
        t1().to_str().unwrap(),
        "--k-max",
        "2",
        "--ga-generations",
        "20",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "label,param,total_cost,total_delay,runtime_ms,feasible"
    );
    assert_eq!(lines.len(), 1 + 2 + 2);
    assert_eq!(lines[1], "cluster,1,2.0,2.0,0.0,true");
    assert_eq!(lines[2], "cluster,2,3.0,4.0,0.0,true");
    assert!(text.ends_with('\n'));

    let o = run(&["sweep", t1().to_str().unwrap(), "--k-max", "1", "--no-ga"]);
    assert_eq!(stdout(&o).lines().count(), 2);

    let o = run(&["sweep", t1().to_str().unwrap(), "--k-max", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generated_reference_sweep_has_nine_rows_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("ref.json");
    let o = run(&[
        "--seed",
        "5",
        "generate",
        "--output",
        scenario.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        run(&["validate", scenario.to_str().unwrap()]).status.code(),
        Some(0)
    );

    let outputs: Vec<String> = (0..3)
        .map(|i| {
            let out = dir.path().join(format!("rows{i}.csv"));
            let o = run(&[
                "--seed",
                "5",
                "--no-timing",
                "--output",
                out.to_str().unwrap(),
                "sweep",
                scenario.to_str().unwrap(),
            ]);
            assert_eq!(o.status.code(), Some(0));
            std::fs::read_to_string(out).unwrap()
        })
        .collect();
    assert_eq!(outputs[0].lines().count(), 1 + 7 + 2);
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn json_lines_output() {
    let o = run(&[
        "--format",
        "json-lines",
        "--no-timing",
        "sweep",
        t1().to_str().unwrap(),
        "--k-max",
        "1",
        "--no-ga",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["label"], "cluster");
    assert_eq!(v["total_cost"], 2.0);
    assert_eq!(v["feasible"], true);
}

#[test]
fn generate_is_seed_deterministic() {
    let a = run(&[
        "--seed",
        "3",
        "generate",
        "--fat-tree-k",
        "2",
        "--services",
        "1",
    ]);
    let b = run(&[
        "--seed",
        "3",
        "generate",
        "--fat-tree-k",
        "2",
        "--services",
        "1",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
