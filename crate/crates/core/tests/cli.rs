use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_wavedecay");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn wavedecay(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("WAVEDECAY_THREADS", "2").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const ENVELOPE: &str = r#"
[feedback]
origin = { kind = "power", exponent = 3.0, m0 = 1.0, M0 = 1.0 }
infinity = { kind = "linear", m = 1.0, M = 1.0 }

[envelope]
C_obs = 1.0
E0 = 1.0
t_max = 5.0
dt = 1e-2
"#;

#[test]
fn envelope_mode_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "env.toml", ENVELOPE);
    let out_dir = tmp.path().join("out");
    let out = wavedecay(&["envelope", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("envelope.csv")).unwrap();
    assert!(csv.starts_with("t,S\n"));
    let report = fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(report.starts_with("check,value,threshold,pass\n"));
    assert!(out_dir.join("envelope.svg").exists());
}

#[test]
fn invalid_gamma_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "env.toml", &ENVELOPE.replace("t_max = 5.0", "gamma = 1.5\nt_max = 5.0"));
    let out = wavedecay(&["envelope", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("gamma"), "{}", stderr(&out));
}

#[test]
fn unknown_key_reports_position() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "env.toml", &ENVELOPE.replace("C_obs = 1.0", "C_obs = 1.0\nmeasQt = 2.0"));
    let out = wavedecay(&["envelope", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 8"), "{}", stderr(&out));
}

#[test]
fn missing_config_file() {
    let out = wavedecay(&["envelope", "--config", "/nonexistent/wavedecay.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cfl_violation_is_numeric() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("simulate.toml")).unwrap().replace("dt = 1e-3", "dt = 0.01");
    let cfg = write(tmp.path(), "sim.toml", &text);
    let out = wavedecay(&["simulate", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("CFL"), "{}", stderr(&out));
}

#[test]
fn raytrace_reproduces_collar_time() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("o");
    let cfg = configs().join("gcc_1d.toml");
    let out = wavedecay(&["raytrace", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let gcc = fs::read_to_string(out_dir.join("gcc.csv")).unwrap();
    let mut lines = gcc.lines();
    assert_eq!(lines.next(), Some("ray_id,x0,dir,entry_time"));
    let worst = lines.map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!((worst - 0.8).abs() <= 2e-3, "{worst}");
}

#[test]
fn verify_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "v.toml",
        "seed = 5\n\n[output]\nplots = false\n\n[verify]\ndecay_forms = false\nrandom_cases = 4\n",
    );
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    for d in &dirs {
        let out = wavedecay(&["verify", "--config", &cfg, "--out", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for name in ["report.csv", "golden.csv", "recursion.csv", "energy_trace.csv"] {
        assert_eq!(fs::read(dirs[0].join(name)).unwrap(), fs::read(dirs[1].join(name)).unwrap(), "{name}");
    }
}

#[test]
fn plot_rejects_malformed_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let good = write(tmp.path(), "good.csv", "t,E\n0,1\n1,0.5\n2,0.25\n");
    let svg = tmp.path().join("good.svg");
    let out = wavedecay(&["plot", "--csv", &good, "--svg", svg.to_str().unwrap(), "--axes", "semilogy"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(fs::read_to_string(&svg).unwrap().contains("<svg"));
    let bad = write(tmp.path(), "bad.csv", "t,E\n0,1\n1,x\n");
    let out = wavedecay(&["plot", "--csv", &bad, "--svg", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_thread_count() {
    let out = Command::new(BIN).args(["verify"]).env("WAVEDECAY_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}
