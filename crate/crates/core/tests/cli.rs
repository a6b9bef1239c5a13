mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use common::fixture_path;

fn hlsdse(db: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hlsdse"))
        .arg("--db")
        .arg(db)
        .args(args)
        .env_remove("DB4HLS_DB")
        .env_remove("DB4HLS_JOBS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn validate_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let db = tmp.path().join("db");
    assert_eq!(hlsdse(&db, &["validate", &fixture_path("last_step_scan.csd")]).status.code(), Some(0));

    let bad = tmp.path().join("bad.csd");
    std::fs::write(&bad, "unroll;f;a;{1,2}@bind_x\nunroll;f;b;{1,2,4}@bind_x\nclock;{10}\n").unwrap();
    let o = hlsdse(&db, &["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.contains(":2:"), "{stderr}");

    assert_eq!(hlsdse(&db, &["validate", "/no/such/file.csd"]).status.code(), Some(2));
    assert_eq!(hlsdse(&db, &["count", "/no/such/file.csd"]).status.code(), Some(2));
    assert_eq!(hlsdse(&db, &["count", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn count_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let db = tmp.path().join("db");
    assert_eq!(stdout(&hlsdse(&db, &["count", &fixture_path("last_step_scan.csd")])).trim(), "1600");
    assert_eq!(stdout(&hlsdse(&db, &["count", &fixture_path("last_step_scan_unbound.csd")])).trim(), "12800");
    let clock = tmp.path().join("clock.csd");
    std::fs::write(&clock, "clock;{10}\n").unwrap();
    assert_eq!(stdout(&hlsdse(&db, &["count", clock.to_str().unwrap()])).trim(), "1");
}

#[test]
fn expand_json_and_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let db = tmp.path().join("db");
    let toy = fixture_path("toy_24.csd");
    let v = json(&hlsdse(&db, &["--format", "json", "expand", &toy]));
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 24);
    assert_eq!(arr[0]["directives"][0]["knob"], "array_partition;toy;buf;1");
    let o = hlsdse(&db, &["--format", "csv", "expand", &toy, "--offset", "20", "--limit", "10"]);
    assert_eq!(stdout(&o).lines().count(), 5);
    let a = stdout(&hlsdse(&db, &["expand", &toy, "--sample", "5", "--seed", "3"]));
    let b = stdout(&hlsdse(&db, &["expand", &toy, "--sample", "5", "--seed", "3"]));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 5);
}

#[test]
fn run_requires_initialized_db() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hlsdse(&tmp.path().join("db"), &["run", &fixture_path("toy_24.csd")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("init-db"));
}

#[test]
fn campaign_query_analyze_export_import() {
    let tmp = tempfile::tempdir().unwrap();
    let db = tmp.path().join("db");
    let toy = fixture_path("toy_24.csd");
    json(&hlsdse(&db, &["--format", "json", "init-db"]));

    let r = json(&hlsdse(&db, &["--format", "json", "run", &toy, "--jobs", "4", "--seed", "1"]));
    assert_eq!((r["ok"].as_u64(), r["pending"].as_u64()), (Some(24), Some(0)));
    let again = json(&hlsdse(&db, &["--format", "json", "run", &toy, "--jobs", "4", "--seed", "1"]));
    assert_eq!((again["ok"].as_u64(), again["pending"].as_u64()), (Some(0), Some(0)));

    let spaces = json(&hlsdse(&db, &["--format", "json", "query"]));
    assert_eq!(spaces[0]["ok"], 24);
    let rows = json(&hlsdse(&db, &["--format", "json", "query", "--space", "1", "--status", "ok"]));
    assert_eq!(rows.as_array().unwrap().len(), 24);
    assert_eq!(hlsdse(&db, &["query", "--space", "1", "--status", "great"]).status.code(), Some(2));

    let out = tmp.path().join("analysis");
    let s = json(&hlsdse(
        &db,
        &[
            "--format",
            "json",
            "analyze",
            "eval",
            "--space",
            "1",
            "--budget-frac",
            "0.1",
            "--out-dir",
            out.to_str().unwrap(),
            "--gnuplot",
        ],
    ));
    assert_eq!(s["queries"], 3); // ceil(0.1 * 24)
    assert!(out.join("points.csv").exists() && out.join("summary.json").exists() && out.join("front.dat").exists());
    let csv = std::fs::read_to_string(out.join("points.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "configuration_id,latency,lut,on_front,queried");
    assert_eq!(csv.lines().count(), 25);

    let s = json(&hlsdse(&db, &["--format", "json", "analyze", "adrs", "--space", "1"]));
    assert_eq!(s["adrs"], 0.0);
    let s = json(&hlsdse(
        &db,
        &[
            "--format",
            "json",
            "analyze",
            "hv",
            "--space",
            "1",
            "--objectives",
            "latency_ns,area",
            "--weights",
            "1,1,1,1",
        ],
    ));
    assert!(s["hypervolume"].as_f64().unwrap() > 0.0);
    assert_eq!(hlsdse(&db, &["analyze", "pareto", "--space", "1", "--objectives", "speed"]).status.code(), Some(1));

    let dump = tmp.path().join("space.jsonl");
    json(&hlsdse(&db, &["--format", "json", "export", "--space", "1", "--out", dump.to_str().unwrap()]));
    let db2 = tmp.path().join("db2");
    let imp = json(&hlsdse(&db2, &["--format", "json", "import", dump.to_str().unwrap()]));
    assert_eq!(imp["rows"]["implementation"], 24);
    let q1 = json(&hlsdse(&db, &["--format", "json", "query"]));
    let q2 = json(&hlsdse(&db2, &["--format", "json", "query"]));
    assert_eq!(q1, q2);
}

/// Final database content (minus timestamps and durations) does not depend
/// on the number of workers.
#[test]
fn jobs_do_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let toy = fixture_path("toy_24.csd");
    let mut dumps = Vec::new();
    for jobs in ["1", "8"] {
        let db = tmp.path().join(format!("db{jobs}"));
        json(&hlsdse(&db, &["--format", "json", "init-db"]));
        json(&hlsdse(&db, &["--format", "json", "run", &toy, "--jobs", jobs, "--seed", "11", "--fail-rate", "0.2"]));
        let mut rows: Vec<Value> = json(&hlsdse(&db, &["--format", "json", "query", "--space", "1"]))
            .as_array()
            .unwrap()
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.as_object_mut().unwrap().remove("implementation_id");
                r
            })
            .collect();
        rows.sort_by_key(|r| r["index"].as_u64());
        dumps.push(rows);
    }
    assert_eq!(dumps[0], dumps[1]);
}

#[test]
fn env_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let db = tmp.path().join("env.db");
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_hlsdse"))
            .args(args)
            .env("DB4HLS_DB", &db)
            .env("DB4HLS_JOBS", "3")
            .output()
            .unwrap()
    };
    assert!(run(&["init-db"]).status.success());
    let o = run(&["--format", "json", "run", &fixture_path("toy_24.csd")]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ok"], 24);
    assert!(v["max_in_flight"].as_u64().unwrap() <= 3);
    assert!(db.exists());
}

#[test]
fn external_tool_backend() {
    let tmp = tempfile::tempdir().unwrap();
    let db = tmp.path().join("db");
    json(&hlsdse(&db, &["--format", "json", "init-db"]));
    // a fake tool: copies a canned report into place, fails for unroll factor 4
    let tool = tmp.path().join("fake_hls.sh");
    std::fs::write(
        &tool,
        format!(
            "#!/bin/sh\nset -e\ntest -f \"$1\"\nif grep -q 'loop_b\" *$' directives.tcl && grep -q 'factor 4 \"toy/loop_b' directives.tcl; then exit 1; fi\nmkdir -p rpt\ncp {} rpt/csynth.xml\n",
            fixture_path("csynth.xml")
        ),
    )
    .unwrap();
    let work = tmp.path().join("work");
    let r = json(&hlsdse(
        &db,
        &[
            "--format",
            "json",
            "run",
            &fixture_path("toy_24.csd"),
            "--backend",
            "external",
            "--command",
            &format!("sh {} {{script}}", tool.display()),
            "--report",
            "rpt/csynth.xml",
            "--work-dir",
            work.to_str().unwrap(),
            "--jobs",
            "4",
        ],
    ));
    assert_eq!(r["ok"].as_u64().unwrap() + r["failed"].as_u64().unwrap(), 24);
    assert_eq!(r["failed"], 8);
    assert_eq!(std::fs::read_dir(&work).unwrap().count(), 24);
    let rows = json(&hlsdse(&db, &["--format", "json", "query", "--space", "1", "--status", "ok"]));
    assert_eq!(rows[0]["latency_cycles"], 4121);
    assert_eq!(rows[0]["tool"], "vivado_hls 2018.2 xczu9eg-ffvb1156-2-e");
}

#[test]
fn help_and_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let db = tmp.path().join("db");
    assert_eq!(hlsdse(&db, &["--help"]).status.code(), Some(0));
    assert_eq!(hlsdse(&db, &[]).status.code(), Some(2));
    assert_eq!(hlsdse(&db, &["run"]).status.code(), Some(2));
    assert_eq!(hlsdse(&db, &["--format", "yaml", "count", "x"]).status.code(), Some(2));
}
