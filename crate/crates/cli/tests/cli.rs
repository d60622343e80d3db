use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_photoct"));
    cmd.env_remove("PHOTOCT_WORKERS");
    cmd
}

fn small_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/small.toml")
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Edited copy of `small.toml` written into `dir`.
fn variant(dir: &Path, name: &str, edit: impl Fn(String) -> String) -> PathBuf {
    let text = std::fs::read_to_string(small_config()).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, edit(text)).unwrap();
    path
}

#[test]
fn forward_is_byte_for_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        let out = run(bin().args(["forward"]).arg(small_config()).arg("--output").arg(dir).args(["--workers", workers]));
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 3);
    for name in names {
        assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn forward_invert_info_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let fwd = tmp.path().join("fwd");
    let inv = tmp.path().join("inv");
    let out = run(bin().arg("forward").arg(small_config()).arg("--output").arg(&fwd));
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("forward:"));
    let out = run(bin()
        .arg("invert")
        .arg(small_config())
        .arg(fwd.join("oct_record.csv"))
        .arg(fwd.join("pat_record.json"))
        .arg("--output")
        .arg(&inv));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for artifact in [fwd.join("manifest_forward.json"), fwd.join("oct_record.csv"), inv.join("gamma_estimate.json")] {
        let out = run(bin().arg("info").arg(&artifact));
        assert_eq!(code(&out), 0, "{artifact:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn verify_exit_status_follows_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("report.json");
    let good = variant(tmp.path(), "good.toml", |t| {
        t.replace("suites = [\"symmetry\", \"linearity\", \"plancherel\", \"kramers_kronig\", \"born_scaling\", \"r_cancellation\", \"manufactured\"]", "suites = [\"symmetry\", \"kramers_kronig\"]")
    });
    let out = run(bin().arg("verify").arg(&good).arg("--report").arg(&report));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["entries"].as_array().unwrap().len(), 2);

    let broken = variant(tmp.path(), "broken.toml", |t| {
        t.replace("suites = [\"symmetry\", \"linearity\", \"plancherel\", \"kramers_kronig\", \"born_scaling\", \"r_cancellation\", \"manufactured\"]", "suites = [\"symmetry\"]\nbreak_symmetry = true")
    });
    let out = run(bin().arg("verify").arg(&broken));
    assert_eq!(code(&out), 1);
}

#[test]
fn errors_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(bin().arg("forward").arg(tmp.path().join("missing.toml")));
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let bad_na = variant(tmp.path(), "na.toml", |t| t.replace("numerical_aperture = 0.6", "numerical_aperture = 1.5"));
    assert_eq!(code(&run(bin().arg("forward").arg(&bad_na))), 2);

    let out = run(bin().arg("forward").arg(small_config()).arg("--output").arg(tmp.path()).env("PHOTOCT_WORKERS", "many"));
    assert_eq!(code(&out), 2);

    let out = run(bin().arg("info").arg(tmp.path().join("nothing.json")));
    assert_eq!(code(&out), 4);

    let out = run(bin().arg("frobnicate"));
    assert_eq!(code(&out), 2);
}

#[test]
fn environment_worker_count_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(bin().arg("forward").arg(small_config()).arg("--output").arg(tmp.path()).env("PHOTOCT_WORKERS", "2"));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}
