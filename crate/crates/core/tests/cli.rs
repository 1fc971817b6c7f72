mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{strip_csv_timing, strip_json_timing};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_momapf"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, agents: &[([u32; 2], [u32; 2])], objectives: usize, time_limit_s: f64) -> PathBuf {
    let agents: Vec<String> = agents
        .iter()
        .map(|(s, g)| format!("{{ start = [{}, {}], goal = [{}, {}] }}", s[0], s[1], g[0], g[1]))
        .collect();
    let text = format!(
        "map = {:?}\nobjectives = {objectives}\nseed = 3\ntime_limit_s = {time_limit_s}\nagents = [{}]\n",
        data("room-32-32-4.map").display().to_string(),
        agents.join(", ")
    );
    let path = dir.join("instance.toml");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn solve_writes_a_solution_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &[([0, 0], [2, 2]), ([2, 0], [0, 2])], 2, 60.0);
    let out = dir.path().join("solution.json");
    for backend in ["sipp", "tx"] {
        let o = run(bin().args(["solve", "--backend", backend, "--config"]).arg(&config).arg("--out").arg(&out));
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(json["complete"], true);
        assert_eq!(json["backend"], backend);
        assert!(!json["solutions"].as_array().unwrap().is_empty());
        assert!(json["stats"]["call_times_s"].as_array().unwrap().len() as u64 >= 2);
    }
}

#[test]
fn solve_reports_a_missing_map() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "map = \"nowhere.map\"\nobjectives = 2\nseed = 1\ntime_limit_s = 1.0\nagents = []\n").unwrap();
    let o = run(bin().args(["solve", "--config"]).arg(&config));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nowhere.map"));
}

#[test]
fn solve_flags_a_partial_result() {
    let dir = tempfile::tempdir().unwrap();
    let agents: Vec<([u32; 2], [u32; 2])> = (0..8).map(|i| ([i * 4, 0], [28 - i * 4, 28])).collect();
    let config = write_config(dir.path(), &agents, 3, 0.001);
    let out = dir.path().join("partial.json");
    let o = run(bin().args(["solve", "--config"]).arg(&config).arg("--out").arg(&out));
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["complete"], false);
}

#[test]
fn empty_scenario_gives_a_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let scen = dir.path().join("empty.scen");
    fs::write(&scen, "version 1\n").unwrap();
    for cmd in ["bench-lowlevel", "bench-success"] {
        let o = run(bin().arg(cmd).arg("--map").arg(data("room-32-32-4.map")).arg("--scen").arg(&scen));
        assert_eq!(o.status.code(), Some(0));
        let text = String::from_utf8(o.stdout).unwrap();
        assert_eq!(text.lines().count(), 1, "{text}");
        assert!(text.starts_with("schema,row,"));
        assert!(!text.contains('\r'));
    }
}

fn lowlevel(out: &Path) -> Output {
    run(bin()
        .arg("bench-lowlevel")
        .arg("--map")
        .arg(data("room-32-32-4.map"))
        .arg("--scen")
        .arg(data("room-32-32-4.scen"))
        .args(["--objectives", "1,2", "--instances", "2", "--time-limit-s", "60", "--out"])
        .arg(out))
}

#[test]
fn lowlevel_aggregates_are_recomputable_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(lowlevel(&a).status.code(), Some(0));
    assert_eq!(lowlevel(&b).status.code(), Some(0));
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(strip_csv_timing(&text), strip_csv_timing(&fs::read_to_string(&b).unwrap()));

    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<momapf::bench::LowLevelRow> = reader.deserialize().map(Result::unwrap).collect();
    let aggregates: Vec<_> = rows.iter().filter(|r| r.row == "map").collect();
    assert_eq!(aggregates.len(), 4);
    for agg in aggregates {
        let times: Vec<f64> = rows
            .iter()
            .filter(|r| r.row == "instance" && r.objectives == agg.objectives && r.backend == agg.backend)
            .filter_map(|r| r.mean_call_time_s)
            .collect();
        assert_eq!(agg.n, Some(times.len()));
        assert_eq!(agg.mean_call_time_s, Some(times.iter().sum::<f64>() / times.len() as f64));
    }
    for r in rows.iter().filter(|r| r.row == "instance") {
        assert_eq!(r.agree, Some(true));
    }
}

#[test]
fn success_sweep_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = |out: &Path| {
        run(bin()
            .arg("bench-success")
            .arg("--map")
            .arg(data("room-32-32-4.map"))
            .arg("--scen")
            .arg(data("room-32-32-4.scen"))
            .args(["--agents", "2", "--instances", "2", "--time-limit-s", "60", "--out"])
            .arg(out))
    };
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(sweep(&a).status.code(), Some(0));
    assert_eq!(sweep(&b).status.code(), Some(0));
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(strip_csv_timing(&text), strip_csv_timing(&fs::read_to_string(&b).unwrap()));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<momapf::bench::SuccessRow> = reader.deserialize().map(Result::unwrap).collect();
    // One aggregate per (agents, backend, metric).
    assert_eq!(rows.iter().filter(|r| r.row == "rate").count(), 2 * 2);
    for r in rows.iter().filter(|r| r.row == "instance") {
        assert!(r.elapsed_s.unwrap() <= 60.0 + 5.0);
    }
}

#[test]
fn solve_output_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &[([0, 0], [5, 6]), ([5, 4], [0, 1])], 2, 60.0);
    let solve = || {
        let o = run(bin().args(["solve", "--config"]).arg(&config));
        assert_eq!(o.status.code(), Some(0));
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        strip_json_timing(&mut v);
        v
    };
    assert_eq!(solve(), solve());
}

#[test]
fn oracle_check_agrees() {
    let o = run(bin().args(["oracle-check", "--count", "5", "--horizon", "6", "--max-side", "3"]));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("5 of 5 instances agree"));
}

#[test]
fn bundled_room_map_is_regenerated_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (map, scen) = (dir.path().join("room-32-32-4.map"), dir.path().join("room-32-32-4.scen"));
    let o = run(bin().args(["gen-room", "--seed", "4", "--map-out"]).arg(&map).arg("--scen-out").arg(&scen));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&map).unwrap(), fs::read(data("room-32-32-4.map")).unwrap());
    assert_eq!(fs::read(&scen).unwrap(), fs::read(data("room-32-32-4.scen")).unwrap());
}
