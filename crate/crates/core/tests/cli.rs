use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fractal-smalldev"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gamma_prints_closed_form_values() {
    let cfg = config("cantor.toml");
    let o = run(&["gamma", "--system", cfg.to_str().unwrap(), "--H", "0.5", "--q", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("0.7737056144690"), "{text}");
    assert!(text.contains("1.2618595071429"), "{text}");
}

#[test]
fn builtin_names_resolve() {
    let o = run(&["dimension", "--system", "sierpinski"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout).unwrap().contains("1.5849625007211"));
}

#[test]
fn unknown_command_lists_valid_ones() {
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("frobnicate") && err.contains("verify") && err.contains("sample-field"), "{err}");
}

#[test]
fn missing_file_names_the_path() {
    let o = run(&["gamma", "--system", "/no/such/dir/system.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("/no/such/dir/system.toml"), "{err}");
}

#[test]
fn invalid_parameters_exit_two_on_one_line() {
    for args in [
        vec!["gamma", "--system", "cantor", "--H", "1.5"],
        vec!["sample-field", "--system", "cantor"],
        vec!["verify", "--system", "cantor", "--seed", "1", "--window", "0.9:0.1"],
        vec!["sample-field", "--system", "cantor", "--seed", "1", "--kernel", "fbm:1.2"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr(&o).lines().count(), 1, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn unwritable_output_is_an_internal_failure() {
    let o = run(&["gamma", "--system", "cantor", "--out", "/dev/null/sub/run"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("/dev/null"));
}

#[test]
fn verify_replay_is_bitwise_identical_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    let cfg = config("cantor.toml");
    let o = run(&[
        "verify", "--system", cfg.to_str().unwrap(), "--kernel", "fbm:0.5", "--q", "2", "--seed", "7",
        "--reps", "30000", "--min-cells", "64", "--threads", "1", "--out", prefix.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = dir.path().join("run.manifest.json");
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(&manifest).unwrap()).unwrap();
    assert_eq!(m["config"]["command"], "verify");
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("run.report.json")).unwrap()).unwrap();
    assert!(["PASS", "FAIL", "INCONCLUSIVE"].contains(&report["verdict"].as_str().unwrap()));

    for threads in ["4", "2"] {
        let again = dir.path().join(format!("again{threads}"));
        let o = run(&[
            "replay", "--manifest", manifest.to_str().unwrap(), "--threads", threads, "--out",
            again.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        for suffix in ["report.json", "curve.csv"] {
            let a = std::fs::read(dir.path().join(format!("run.{suffix}"))).unwrap();
            let b = std::fs::read(dir.path().join(format!("again{threads}.{suffix}"))).unwrap();
            assert!(a == b, "{suffix} differs with {threads} threads");
        }
    }
}

#[test]
fn curve_csv_header_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("sd");
    let o = run(&[
        "smalldev", "--system", "lebesgue-interval", "--seed", "3", "--reps", "2000", "--min-cells", "32",
        "--eps", "0.3,0.6,1.0", "--out", prefix.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("sd.curve.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("eps,p_hat,lo,hi,phi,flag"));
    assert_eq!(csv.lines().count(), 4);
}
