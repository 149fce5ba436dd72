//! End-to-end checks of the `cpnli-sim` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use cpnli::config::{preset, Experiment, RunConfig, PRESET_NAMES};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpnli-sim"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, cfg: &RunConfig) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    path
}

fn quick(experiment: Experiment) -> RunConfig {
    let mut cfg = RunConfig {
        experiment,
        ..RunConfig::default()
    };
    cfg.tomography.resamples = 5;
    cfg
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is a JSON report")
}

#[test]
fn presets_print_parseable_configurations() {
    let out = cli(&["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let sections: Vec<&str> = text.split("# preset: ").filter(|s| !s.is_empty()).collect();
    assert_eq!(sections.len(), PRESET_NAMES.len());
    for (section, name) in sections.iter().zip(PRESET_NAMES) {
        let (header, body) = section.split_once('\n').unwrap();
        assert_eq!(header, name);
        let parsed = RunConfig::from_toml(body).unwrap();
        assert_eq!(parsed, preset(name).unwrap());
        assert!(parsed.validate().is_empty());
    }
}

#[test]
fn validate_accepts_a_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "ok.toml", &RunConfig::default());
    let out = cli(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], Value::Bool(true));
    assert_eq!(report["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn validate_lists_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.source.grid_points = 4;
    cfg.tomography.acquisition_time_s = -1.0;
    let path = write_config(dir.path(), "bad.toml", &cfg);
    let out = cli(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], Value::Bool(false));
    let fields: Vec<&str> = report["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["field"].as_str().unwrap())
        .collect();
    assert!(fields.contains(&"source.grid_points"), "{fields:?}");
    assert!(
        fields.contains(&"tomography.acquisition_time_s"),
        "{fields:?}"
    );
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    fs::write(
        &path,
        "experiment = \"spectrum\"\n[source]\nbogus_key = 3\n",
    )
    .unwrap();
    for cmd in ["validate", "run"] {
        let out = cli(&[cmd, "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{cmd}");
        assert_eq!(stderr_json(&out)["error"]["code"], "config_invalid");
    }
    let missing = dir.path().join("missing.toml");
    let out = cli(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_experiment_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.toml", &RunConfig::default());
    let out = cli(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--experiment",
        "nonsense",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["code"], "config_invalid");
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.toml", &quick(Experiment::ConcurrenceSweep));
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = cli(&[
            "run",
            "--config",
            path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push(files_in(&out_dir));
    }
    assert_eq!(outputs[0].len(), 4);
    // The summary echoes the output directory, so compare it with that field removed.
    for ((name_a, a), (name_b, b)) in outputs[0].iter().zip(&outputs[1]) {
        assert_eq!(name_a, name_b);
        if name_a.ends_with(".json") {
            let mut ja: Value = serde_json::from_slice(a).unwrap();
            let mut jb: Value = serde_json::from_slice(b).unwrap();
            ja["config"]["output_dir"] = Value::Null;
            jb["config"]["output_dir"] = Value::Null;
            assert_eq!(ja, jb);
        } else {
            assert!(a == b, "{name_a} differs");
        }
    }
}

#[test]
fn seed_override_changes_counts_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.toml", &quick(Experiment::Tomography));
    let run = |seed: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = cli(&[
            "run",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            seed,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let counts = fs::read(out_dir.join("tomography.counts.csv")).unwrap();
        let summary: Value =
            serde_json::from_slice(&fs::read(out_dir.join("tomography.summary.json")).unwrap())
                .unwrap();
        (counts, summary)
    };
    let (c5, s5) = run("5", "s5");
    let (c5b, _) = run("5", "s5b");
    let (c6, s6) = run("6", "s6");
    assert_eq!(c5, c5b);
    assert_ne!(c5, c6);
    assert_eq!(s5["config"]["tomography"]["seed"], 5);
    assert_eq!(s6["config"]["tomography"]["seed"], 6);
    assert_eq!(
        s5["derived"]["reduced_concurrence"],
        s6["derived"]["reduced_concurrence"]
    );
}

#[test]
fn runtime_failure_exits_3_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick(Experiment::ConcurrenceSweep);
    cfg.source.grid_points = 257;
    let path = write_config(dir.path(), "coarse.toml", &cfg);
    let out_dir = dir.path().join("out");
    let out = cli(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"]["code"], "grid_too_coarse");
    assert!(!out_dir.exists() || fs::read_dir(&out_dir).unwrap().count() == 0);
}

#[test]
fn case_presets_report_schmidt_structure() {
    let dir = tempfile::tempdir().unwrap();
    for (name, rank) in [("case1", 1), ("case2", 2)] {
        let mut cfg = preset(name).unwrap();
        cfg.tomography.resamples = 5;
        let path = write_config(dir.path(), &format!("{name}.toml"), &cfg);
        let out_dir = dir.path().join(name);
        let out = cli(&[
            "run",
            "--config",
            path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let listed: Vec<String> = String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .map(String::from)
            .collect();
        assert_eq!(listed.len(), 3);
        let summary: Value = serde_json::from_slice(
            &fs::read(out_dir.join(format!("{name}.summary.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(summary["experiment"], name);
        assert_eq!(summary["derived"]["schmidt_rank"], rank);
        let c = summary["derived"]["reduced_concurrence"].as_f64().unwrap();
        if rank == 1 {
            assert!((c - 1.0).abs() < 1e-9, "{c}");
        } else {
            assert!(c < 0.2, "{c}");
        }
    }
}

#[test]
fn config_round_trips_through_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(Experiment::Spectrum);
    let path = write_config(dir.path(), "c.toml", &cfg);
    let out_dir = dir.path().join("out");
    let out = cli(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary: Value =
        serde_json::from_slice(&fs::read(out_dir.join("spectrum.summary.json")).unwrap()).unwrap();
    let echoed: RunConfig = serde_json::from_value(summary["config"].clone()).unwrap();
    let expected = RunConfig {
        output_dir: out_dir.clone(),
        ..cfg.clone()
    };
    assert_eq!(echoed, expected);
    let csv = fs::read_to_string(out_dir.join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("detuning_thz,wavelength_a_nm,wavelength_b_nm,alpha_rad"));
    assert_eq!(csv.lines().count(), 1 + cfg.source.grid_points);
}
