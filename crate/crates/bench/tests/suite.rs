use std::path::{Path, PathBuf};
use std::process::Command;

use tamper_bench::replay::{replay, rerun_matches};
use tamper_bench::suite::{run_suite, table_csv, table_markdown, trace_file_name, RunOptions, Suite, SuiteError};
use tamper_core::scenario::Scenario;
use tamper_core::trace::{Method, RunTrace};

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("tamper-bench-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn write_suite(dir: &Path, body: &str) -> Suite {
    let p = dir.join("s.toml");
    std::fs::write(&p, body).unwrap();
    Suite::load(&p).unwrap()
}

#[test]
fn empty_suite_gives_an_empty_table() {
    let dir = scratch("empty");
    let s = write_suite(&dir, "schema_version = 1\nname = \"nothing\"\nmethods = [\"tamper\"]\nproblems = []\n");
    let r = run_suite(&s, &RunOptions::default()).unwrap();
    assert!(r.rows.is_empty());
    assert!(r.passed());
    let csv = table_csv(&r);
    assert!(csv.starts_with("method,metric,Mean\n"));
    assert_eq!(csv.lines().count(), 10);
    assert!(table_markdown(&r).starts_with("## nothing"));
}

#[test]
fn runs_write_traces_and_tables() {
    let dir = scratch("small");
    let h = data("scenarios/hstack/h03.toml");
    let s = write_suite(
        &dir,
        &format!(
            "schema_version = 1\nname = \"small\"\nmethods = [\"tamper\", \"baseline\"]\nproblems = [{{ scenario = {:?}, seed = 3 }}]\n[expect]\nsuccess = {{ tamper = \"all\" }}\n",
            h.display().to_string()
        ),
    );
    let out = dir.join("out");
    let r = run_suite(
        &s,
        &RunOptions {
            out_dir: Some(out.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(r.rows.len(), 2);
    assert!(r.passed(), "{:?}", r.checks);
    for m in [Method::Tamper, Method::Baseline] {
        let p = out.join("traces").join(trace_file_name("hstack-03", m, 3));
        let t = RunTrace::from_jsonl(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(t.header.method, m);
    }
    let csv = std::fs::read_to_string(out.join("small.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 9);
    assert!(csv.lines().next().unwrap().ends_with("P1,Mean"));
    assert!(out.join("small.md").exists());

    // overrides
    let r = run_suite(
        &s,
        &RunOptions {
            methods: Some(vec![Method::Tamp]),
            seed: Some(9),
            epsilon: Some(0.3),
            out_dir: None,
        },
    )
    .unwrap();
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.rows[0].seed, 9);
    assert_eq!(r.rows[0].trace.header.epsilon, 0.3);
}

#[test]
fn invalid_scenario_stops_the_suite() {
    let dir = scratch("invalid");
    let sc = Scenario::load(&data("scenarios/hstack/h01.toml")).unwrap();
    let mut text = std::fs::read_to_string(data("scenarios/hstack/h01.toml")).unwrap();
    text = text.replace("../../domains/hstack.toml", &data("domains/hstack.toml").display().to_string());
    let m = sc.file.objects[1].pose.0;
    text = text.replace(&format!("pose = [{:.3}, {:.3}, 0.0]", m.x, m.y), "pose = [0.450, 0.380, 0.0]");
    std::fs::write(dir.join("bad.toml"), text).unwrap();
    let s = write_suite(
        &dir,
        "schema_version = 1\nname = \"bad\"\nmethods = [\"tamper\"]\nproblems = [{ scenario = \"bad.toml\", seed = 1 }]\n",
    );
    match run_suite(&s, &RunOptions::default()) {
        Err(SuiteError::ScenarioInvalid { message, .. }) => assert!(message.contains("overlaps"), "{message}"),
        other => panic!("{:?}", other.map(|r| r.rows.len())),
    }
}

#[test]
fn replay_prints_every_event() {
    let sc = Scenario::load(&data("scenarios/kitchen/k02.toml")).unwrap();
    let r = tamper_core::executor::run_tamper(&sc, 2);
    let dir = scratch("plots");
    let lines = replay(&r.trace, Some(&sc), Some(&dir)).unwrap();
    assert_eq!(lines.len(), r.trace.events.len() + 1);
    assert!(lines[0].contains("seed=2") && lines[0].contains("method=tamper"));
    assert!(lines.last().unwrap().contains("finished Success"));
    assert!(lines.iter().any(|l| l.contains("behavior push_pick")));
    let pngs = std::fs::read_dir(&dir).unwrap().count();
    assert!(pngs > 0);
    assert!(rerun_matches(&r.trace, &sc));
    let mut other = r.trace.clone();
    other.header.seed += 1;
    assert!(!rerun_matches(&other, &sc));
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tamper-bench")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let ok = data("scenarios/hstack/h01.toml");
    let o = cli(&["validate", ok.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains(": ok"));

    let missing = cli(&["validate", "/nonexistent.toml"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = scratch("cli");
    let out = dir.join("out");
    let o = cli(&[
        "run",
        data("suites/grocery.toml").to_str().unwrap(),
        "--seed",
        "4",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let trace = out.join("traces").join(trace_file_name("grocery-01", Method::Tamper, 4));
    let o = cli(&[
        "replay",
        trace.to_str().unwrap(),
        "--scenario",
        data("scenarios/grocery/g01.toml").to_str().unwrap(),
        "--verify",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("matches byte for byte"));

    // the baseline cannot do the kitchen, so this expectation fails
    let k = data("scenarios/kitchen/k01.toml");
    std::fs::write(
        dir.join("k.toml"),
        format!(
            "schema_version = 1\nname = \"k\"\nmethods = [\"baseline\"]\nproblems = [{{ scenario = {:?}, seed = 1 }}]\n[expect]\nsuccess = {{ baseline = \"all\" }}\n",
            k.display().to_string()
        ),
    )
    .unwrap();
    let o = cli(&["run", dir.join("k.toml").to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
