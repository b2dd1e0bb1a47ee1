use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kpplab"));
    for var in ["KPPLAB_JOBS", "KPPLAB_OUTPUT_DIR", "KPPLAB_SEED", "KPPLAB_QUIET"] {
        cmd.env_remove(var);
    }
    cmd
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = "\
seed = 4
[habitat]
dim = 1
L = 10
h = 0.25
[reaction]
r0 = 1
A = 0.5
L0 = 2
[dispersal]
kind = random
[solver]
T = 3
[experiment]
name = comparison
pairs = 3
";

#[test]
fn fisher_speed_passes_and_records_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("fisher");
    let cfg = shipped("fisher_speed.cfg");
    let out = run(&["run", cfg.to_str().unwrap(), "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let summary = json(&out_dir.join("summary.json"));
    assert_eq!(summary["verdict"], "pass");
    let slope = summary["results"]["estimate"]["slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() / 2.0 < 0.05, "slope {slope}");

    let manifest = json(&out_dir.join("manifest.json"));
    let text = fs::read(&cfg).unwrap();
    assert_eq!(manifest["config_sha256"], hex::encode(Sha256::digest(&text)));
    assert_eq!(manifest["config"], String::from_utf8(text).unwrap());
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() > 0.0);
    let names: Vec<_> = manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["name"].as_str().unwrap().to_string())
        .collect();
    for name in ["summary.json", "front.csv", "final_profile.csv"] {
        assert!(names.contains(&name.to_string()), "{names:?}");
        assert!(out_dir.join(name).is_file());
    }
    let front = fs::read_to_string(out_dir.join("front.csv")).unwrap();
    assert!(front.starts_with("t,position\n"));
}

#[test]
fn negative_control_is_confirmed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = shipped("fisher_negative_control.cfg");
    let out = run(&["run", cfg.to_str().unwrap(), "--output-dir", tmp.path().join("neg").to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    let summary = json(&tmp.path().join("neg/summary.json"));
    assert_eq!(summary["verdict"], "expected-fail: confirmed");
    assert!(String::from_utf8_lossy(&out.stdout).contains("expected-fail: confirmed"));
}

#[test]
fn schema_errors_exit_two_with_field_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let no_dispersal = SMALL.replace("[dispersal]\nkind = random\n", "");
    let cfg = write_config(tmp.path(), "a.cfg", &no_dispersal);
    let out = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("dispersal: missing section [dispersal]"), "{}", stderr(&out));

    let cfg = write_config(tmp.path(), "b.cfg", &SMALL.replace("h = 0.25", "h = quarter"));
    let out = run(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("habitat.h (line 5)"), "{}", stderr(&out));

    let cfg = write_config(tmp.path(), "c.cfg", &SMALL.replace("T = 3", "T = 3\ndt = 0.5"));
    let out = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("solver.dt (line 14)"), "{}", stderr(&out));
    assert!(stderr(&out).contains("stability bound"));

    let out = run(&["run", tmp.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn csv_outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.cfg", SMALL);
    let dirs: Vec<PathBuf> = ["one", "two", "three"].iter().map(|d| tmp.path().join(d)).collect();
    for (dir, seed) in dirs.iter().zip(["4", "4", "5"]) {
        let out = run(&["run", cfg.to_str().unwrap(), "--output-dir", dir.to_str().unwrap(), "--seed", seed]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let read = |d: &Path| fs::read(d.join("pairs.csv")).unwrap();
    assert_eq!(read(&dirs[0]), read(&dirs[1]));
    assert_ne!(read(&dirs[0]), read(&dirs[2]));
    assert_eq!(
        fs::read(dirs[0].join("summary.json")).unwrap(),
        fs::read(dirs[1].join("summary.json")).unwrap()
    );
    let manifest = json(&dirs[2].join("manifest.json"));
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["seed_overridden"], true);
}

#[test]
fn environment_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.cfg", SMALL);
    let dir = tmp.path().join("env-out");
    let out = bin()
        .args(["run", cfg.to_str().unwrap()])
        .env("KPPLAB_OUTPUT_DIR", &dir)
        .env("KPPLAB_SEED", "9")
        .env("KPPLAB_QUIET", "true")
        .env("KPPLAB_JOBS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let manifest = json(&dir.join("manifest.json"));
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["jobs"], 1);
}

#[test]
fn batch_runs_write_one_directory_per_config() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write_config(tmp.path(), "first.cfg", SMALL);
    let b = write_config(tmp.path(), "second.cfg", &SMALL.replace("seed = 4", "seed = 8"));
    let dir = tmp.path().join("batch");
    let out = run(&["run", a.to_str().unwrap(), b.to_str().unwrap(), "--jobs", "2", "--output-dir", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for stem in ["first", "second"] {
        assert!(dir.join(stem).join("manifest.json").is_file());
    }
}

#[test]
fn refuses_to_replace_foreign_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.cfg", SMALL);
    let dir = tmp.path().join("precious");
    fs::create_dir(&dir).unwrap();
    fs::write(dir.join("notes.txt"), "keep").unwrap();
    let out = run(&["run", cfg.to_str().unwrap(), "--output-dir", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert_eq!(fs::read_to_string(dir.join("notes.txt")).unwrap(), "keep");
}

#[test]
fn speed_subcommand_matches_fisher() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.cfg", SMALL);
    let dir = tmp.path().join("speed");
    let out = run(&["speed", cfg.to_str().unwrap(), "--output-dir", dir.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = json(&dir.join("summary.json"));
    assert_eq!(summary["experiment"], "speed");
    let c = summary["results"]["speed"]["c_star"].as_f64().unwrap();
    assert!((c - 2.0).abs() < 1e-8, "{c}");
    let curve = fs::read_to_string(dir.join("curve.csv")).unwrap();
    assert!(curve.starts_with("mu,lambda,ratio\n"));
    assert_eq!(curve.lines().count(), 41);
}

#[test]
fn eigen_subcommand_constant_coefficient() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("kind = random", "kind = nonlocal\nprofile = tent\ndelta0 = 1")
        + "mu_points = 5\n";
    let cfg = write_config(tmp.path(), "eig.cfg", &text);
    let dir = tmp.path().join("eig");
    let out = run(&["eigen", cfg.to_str().unwrap(), "--output-dir", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let curve = fs::read_to_string(dir.join("curve.csv")).unwrap();
    let mut lines = curve.lines();
    assert_eq!(lines.next(), Some("mu,lambda,ratio,lambda_average"));
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[1] - v[3]).abs() < 1e-9 * (1.0 + v[3].abs()), "{line}");
    }
}

#[test]
fn stationary_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("L = 10", "L = 30") + "tail_radius = 8\nperturbations = 2\nhorizon = 60\n";
    let cfg = write_config(tmp.path(), "st.cfg", &text.replace("T = 3", "T = 300"));
    let dir = tmp.path().join("st");
    let out = run(&["stationary", cfg.to_str().unwrap(), "--output-dir", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}\n{}", stderr(&out), String::from_utf8_lossy(&out.stdout));
    let summary = json(&dir.join("summary.json"));
    assert_eq!(summary["verdict"], "pass");
    assert!(summary["results"]["u_star_at_origin"].as_f64().unwrap() > 1.0);
    let table = fs::read_to_string(dir.join("stationary.csv")).unwrap();
    assert!(table.starts_with("x,from_above,from_below\n"));
}

#[test]
fn listing_and_validation() {
    let out = run(&["list-experiments"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "front-speed",
        "amplitude-sweep",
        "spreading-features",
        "stationary",
        "comparison",
        "dispersion-curve",
        "speed",
    ] {
        assert!(text.contains(name), "{text}");
    }
    let configs: Vec<String> = fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs"))
        .unwrap()
        .map(|e| e.unwrap().path().to_string_lossy().into_owned())
        .collect();
    assert!(configs.len() >= 5);
    let mut args = vec!["validate".to_string()];
    args.extend(configs);
    let out = bin().args(&args).output().unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}
