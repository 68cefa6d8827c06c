use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ris-ssk"));
    for (k, _) in std::env::vars() {
        if k.starts_with("RIS_SSK_") {
            c.env_remove(k);
        }
    }
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ris-ssk-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const MINIMAL: &str = "N_t = 2\nL = 16\nkappa_db = 0\nsnr_db = [0, 5]\ntrials = 10000\npolicy = \"blind\"\nsigma_e2 = 0\n";

#[test]
fn selfcheck_passes_with_timings() {
    let o = bin().arg("selfcheck").output().unwrap();
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{out}{}", stderr(&o));
    assert!(out.contains("time_ms") && out.contains("quantization_factor"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn unknown_preset_lists_valid_names() {
    let o = bin().args(["preset", "fig1"]).output().unwrap();
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.starts_with("E_PRESET: "), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
    assert!(err.contains("fig2") && err.contains("fig15"));
}

#[test]
fn usage_errors_are_one_line() {
    let o = bin().arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("E_USAGE: "), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn config_run_writes_csv_and_sidecar() {
    let dir = scratch("config");
    let cfg = dir.join("minimal.toml");
    fs::write(&cfg, MINIMAL).unwrap();
    let o = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&dir)
        .args(["--workers", "2"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.join("minimal.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "snr_db,method,abep,ci95");
    assert_eq!(lines.len(), 1 + 2 * 2);
    assert!(lines[1].starts_with("0,mc,") && !lines[1].ends_with(','));
    assert!(lines[2].starts_with("0,blind_closed,") && lines[2].ends_with(','));
    let meta = fs::read_to_string(dir.join("minimal.meta.json")).unwrap();
    assert!(meta.contains("\"seed\": 1"));
}

#[test]
fn bad_config_reports_code_and_line() {
    let dir = scratch("badcfg");
    let cfg = dir.join("bad.toml");
    fs::write(&cfg, MINIMAL.replace("N_t = 2", "N_t = 3")).unwrap();
    let o = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.starts_with("E_CONFIG: line 1: "), "{err}");

    let o = bin().args(["run", "--config"]).arg(dir.join("missing.toml")).output().unwrap();
    assert!(stderr(&o).starts_with("E_IO: "));
}

#[test]
fn preset_rerun_is_byte_identical_and_sidecar_replays() {
    let dir = scratch("rerun");
    let run = |sub: &str, extra: &[&str]| {
        let out = dir.join(sub);
        let o = bin()
            .args(["preset", "fig12", "--trials", "10000", "--no-escalation", "--seed", "7"])
            .args(extra)
            .arg("--out-dir")
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let a = run("a", &["--workers", "1"]);
    let b = run("b", &["--workers", "3"]);
    let csv_a = fs::read(a.join("fig12.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("fig12.csv")).unwrap());
    assert_eq!(fs::read(a.join("fig12.meta.json")).unwrap(), fs::read(b.join("fig12.meta.json")).unwrap());

    let replay = dir.join("replay");
    let o = bin()
        .args(["run", "--config"])
        .arg(a.join("fig12.meta.json"))
        .arg("--out-dir")
        .arg(&replay)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_a, fs::read(replay.join("fig12.csv")).unwrap());
}

#[test]
fn env_overrides_mirror_flags() {
    let dir = scratch("env");
    let o = bin()
        .args(["preset", "fig6"])
        .env("RIS_SSK_OUT_DIR", &dir)
        .env("RIS_SSK_GCQ_K", "5")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let meta = fs::read_to_string(dir.join("fig6.meta.json")).unwrap();
    assert!(meta.contains("\"gcq_nodes\": 5"));
    let csv = fs::read_to_string(dir.join("fig6.csv")).unwrap();
    // exact + 50 node counts at each of three SNRs
    assert_eq!(csv.lines().count(), 1 + 3 * 51);
    assert!(csv.contains("-32,gcq3,") && csv.contains("-28,exact,"));
}
