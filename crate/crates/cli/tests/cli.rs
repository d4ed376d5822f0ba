use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hwtm_core::bench::parse_report_csv;
use hwtm_core::{EventTrace, Mode, RunReport};

fn hwtm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hwtm"))
        .args(args)
        .output()
        .expect("spawn hwtm")
}

fn scenario_with_tasks(dir: &Path, n: usize, n_slots: usize) -> String {
    let mut text = format!("duration_ns = 200_000_000\nmode = \"hardware\"\n[device]\nn_slots = {n_slots}\n");
    for i in 0..n {
        text += &format!("[[tasks]]\nid = {i}\nperiod_ns = 50_000_000\n");
    }
    let path = dir.join(format!("tasks{n}.toml"));
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_default_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = hwtm(&["run", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["trace_software.csv", "trace_hardware.csv", "report.csv"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let reports = parse_report_csv(&fs::read_to_string(out.join("report.csv")).unwrap()).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports[0].speedup.unwrap() >= 10.0);
}

#[test]
fn valid_twelve_task_scenario_writes_two_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario_with_tasks(dir.path(), 12, 12);
    let out = dir.path().join("o");
    let o = hwtm(&["run", "--scenario", &sc, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut files: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    assert_eq!(files, ["report.csv", "trace_hardware.csv"]);
    let trace = EventTrace::from_csv(&fs::read_to_string(out.join("trace_hardware.csv")).unwrap()).unwrap();
    assert_eq!(trace.release_count(), 48);
}

#[test]
fn over_capacity_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario_with_tasks(dir.path(), 13, 12);
    let out = dir.path().join("o");
    let o = hwtm(&["run", "--scenario", &sc, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("capacity"), "{}", stderr(&o));
    assert!(!out.exists(), "nothing is written before validation passes");

    // the same file is fine for the software manager alone
    let o = hwtm(&[
        "run",
        "--scenario",
        &sc,
        "--mode",
        "software",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.toml");
    let o = hwtm(&[
        "run",
        "--scenario",
        missing.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = hwtm(&["run", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_key_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("typo.toml");
    fs::write(&sc, "[cost]\nsw_fixed = 10\n").unwrap();
    let o = hwtm(&[
        "run",
        "--scenario",
        sc.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sw_fixed"), "{}", stderr(&o));
}

#[test]
fn sweep_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = hwtm(&["sweep", "--tasks", "1..12", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let latency = fs::read_to_string(out.join("sweep_latency.csv")).unwrap();
    let mut lines = latency.lines();
    assert_eq!(lines.next(), Some("n_tasks,mode,mean_latency_ns"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.iter().filter(|l| l.contains(",software,")).count(), 12);
    assert_eq!(rows.iter().filter(|l| l.contains(",hardware,")).count(), 12);
    let report = parse_report_csv(&fs::read_to_string(out.join("sweep_report.csv")).unwrap()).unwrap();
    assert_eq!(report.len(), 24);

    let o = hwtm(&["sweep", "--tasks", "1..1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let latency = fs::read_to_string(out.join("sweep_latency.csv")).unwrap();
    let per_mode: Vec<&str> = latency.lines().skip(1).filter(|l| l.contains(",hardware,")).collect();
    assert_eq!(per_mode, ["1,hardware,3500"]);
}

#[test]
fn sweep_rejects_bad_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(hwtm(&["sweep", "--tasks", "5..2", "--out", out]).status.code(), Some(1));
    assert_eq!(
        hwtm(&["sweep", "--tasks", "1..13", "--out", out]).status.code(),
        Some(1)
    );
}

#[test]
fn resources_table() {
    let o = hwtm(&["resources", "--tasks", "1..12", "--width", "64"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<u64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0][1], 129);
    assert_eq!(rows[11][1], 844);

    let o = hwtm(&["resources", "--tasks", "1..1", "--width", "1"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "n_tasks,flip_flops,luts\n1,3,4\n");

    assert_eq!(
        hwtm(&["resources", "--tasks", "1..4", "--width", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(hwtm(&["resources", "--tasks", "4..1"]).status.code(), Some(1));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("mixed.toml");
    fs::write(
        &sc,
        "duration_ns = 300_000_000\n\
         [[tasks]]\nid = 0\nperiod_ns = 10_500_000\n\
         [[tasks]]\nid = 1\nperiod_ns = 33_000_000\noffset_ns = 1_234_567\n\
         [[tasks]]\nid = 2\nperiod_ns = 7_000_001\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = hwtm(&[
            "run",
            "--scenario",
            sc.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            name.len().to_string().as_str(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let (a, b) = (run("a"), run("bb"));
    for f in ["trace_software.csv", "trace_hardware.csv", "report.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn report_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let written = hwtm_cli::cmd_run(None, &out, None).unwrap();
    assert_eq!(written.len(), 3);
    let text = fs::read_to_string(out.join("report.csv")).unwrap();
    let parsed = parse_report_csv(&text).unwrap();

    let loaded = hwtm_cli::LoadedScenario::platform();
    let sc = &loaded.scenario;
    let mut sw = RunReport::from_trace(
        "platform",
        Mode::Software,
        sc,
        &hwtm_core::run_scenario(sc, Mode::Software).unwrap(),
    );
    let mut hw = RunReport::from_trace(
        "platform",
        Mode::Hardware,
        sc,
        &hwtm_core::run_scenario(sc, Mode::Hardware).unwrap(),
    );
    RunReport::pair(&mut sw, &mut hw);
    assert_eq!(parsed, vec![sw, hw]);
}
