use std::process::Command;

use uav_multicast::analysis::{coverage_probability, transmission_success_probability};
use uav_multicast::cli;
use uav_multicast::{ClusterGeometry, ScenarioConfig};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("uavmc").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn config_from_stdout(stdout: &str) -> ScenarioConfig {
    ScenarioConfig::from_text(stdout).unwrap()
}

#[test]
fn defaults_without_config_file() {
    let (code, out, _) = run(&["config"]);
    assert_eq!(code, 0);
    let cfg = config_from_stdout(&out);
    assert_eq!(cfg.radio.p_bs_mw, 1000.0);
    assert_eq!(cfg.radio.p_uav_mw, 10.0);
    assert_eq!(cfg.radio.bandwidth_hz, 20e6);
    assert_eq!(cfg.radio.snr_threshold, 20.0);
    assert_eq!(cfg.sim.packet_len_ms, 10.0);
}

#[test]
fn far_deployment_violation_names_the_constraint() {
    let (code, _, err) = run(&["--r", "200", "--v-norm", "100", "metrics"]);
    assert_eq!(code, 2);
    let line = err.trim();
    assert_eq!(line.lines().count(), 1);
    assert!(line.starts_with("error kind=config field=v_norm"), "{line}");
    assert!(line.contains("far-deployment"), "{line}");
}

#[test]
fn binary_exits_nonzero_on_bad_input() {
    let bin = env!("CARGO_BIN_EXE_uavmc");
    let bad = Command::new(bin).args(["--set", "radio.nope=1", "config"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let stderr = String::from_utf8(bad.stderr).unwrap();
    assert!(stderr.contains("field=radio.nope"), "{stderr}");

    let missing = Command::new(bin).args(["--config", "/nonexistent/uavmc.cfg", "config"]).output().unwrap();
    assert_ne!(missing.status.code(), Some(0));

    let ok = Command::new(bin).arg("metrics").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn flag_overrides_file_value() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.cfg");
    std::fs::write(&path, "# site survey\nd0 = 1000\nradio.p_bs_mw = 500\n").unwrap();
    let path = path.to_str().unwrap();

    let (_, out, _) = run(&["--config", path, "config"]);
    let from_file = config_from_stdout(&out);
    assert_eq!(from_file.d0, 1000.0);
    assert_eq!(from_file.radio.p_bs_mw, 500.0);

    let (_, out, _) = run(&["--config", path, "--d0", "1200", "config"]);
    let cfg = config_from_stdout(&out);
    assert_eq!(cfg.d0, 1200.0);
    assert_eq!(cfg.radio.p_bs_mw, 500.0);
}

#[test]
fn effective_config_round_trips() {
    let (_, out, _) = run(&["--d0", "950", "--num-clusters", "4", "--set", "sim.cw_min=8", "config"]);
    let cfg = config_from_stdout(&out);
    assert_eq!(cfg.to_text(), out);
    assert_eq!(cfg.sim.cw_min, 8);
    assert_eq!(cfg.num_clusters, 4);
}

#[test]
fn metrics_row_matches_library() {
    let (code, out, _) = run(&["metrics", "--v-norm", "800"]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    for m in ["p_cov", "p_suc", "p_req", "delay_aver_ms", "ase_aver"] {
        assert!(header.iter().any(|h| h == m), "missing column {m}");
    }
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    let col = |name: &str| -> f64 { rows[0][header.iter().position(|h| h == name).unwrap()].parse().unwrap() };

    let cfg = ScenarioConfig::default();
    let geom = ClusterGeometry::new(800.0, cfg.radius_r, cfg.h1, cfg.h2).unwrap();
    assert_eq!(col("p_cov"), coverage_probability(&geom, &cfg.radio).unwrap());
    assert_eq!(col("p_suc"), transmission_success_probability(cfg.radius_r, &cfg.radio).unwrap());
    assert!(col("p_req") <= col("p_suc"));
}

#[test]
fn distribution_grid_integrates_to_one() {
    let (code, out, err) = run(&["distributions", "--kind", "a", "--r", "50"]);
    assert_eq!(code, 0);
    assert!(err.contains("ks_gap="), "{err}");
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let grid: Vec<(f64, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(grid.first().unwrap().0, 0.0);
    assert_eq!(grid.last().unwrap().0, 50.0);
    let integral: f64 = grid.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    assert!((integral - 1.0).abs() < 1e-6, "{integral}");
}

#[test]
fn d2_requires_offset() {
    let (code, _, err) = run(&["distributions", "--kind", "d2"]);
    assert_eq!(code, 2);
    assert!(err.contains("field=a"), "{err}");
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let args = ["simulate", "--scheme", "clustering", "--seed", "7", "--epochs", "5"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.0, 0);
    assert_eq!(first, second);
    let other = run(&["simulate", "--scheme", "clustering", "--seed", "8", "--epochs", "5"]);
    assert_ne!(first.1, other.1);
}

#[test]
fn out_dir_receives_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let log = dir.path().join("events.csv");
    let (code, out, _) =
        run(&["--out-dir", d, "simulate", "--scheme", "rnc", "--epochs", "3", "--event-log", log.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    for f in ["outcomes.csv", "summary.csv", "events.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let events = std::fs::read_to_string(&log).unwrap();
    assert!(events.starts_with("time_ms,actor,event_kind,packet_id"));

    let (code, _, _) = run(&["--out-dir", d, "--replications", "200", "study", "--name", "validation-success"]);
    assert_eq!(code, 0);
    assert!(dir.path().join("validation_success.csv").exists());
}

#[test]
fn topology_rows_cover_every_uav() {
    let (code, out, _) = run(&["--total-uavs", "30", "--num-clusters", "3", "topology", "--drops", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 1 + 2 * 30);
}
