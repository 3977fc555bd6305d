use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qchan::channels::{choi_distance, dephasing, trine, KrausChannel};
use qchan::io::{self, RENORMALIZE_TOL};
use qchan::petz::rank_bounded_complement;
use tempfile::TempDir;

fn qchan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qchan"))
        .args(args)
        .env_remove("QCHAN_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const BASIS_ENSEMBLE: &str = r#"[
  {"prob": 0.5, "state": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},
  {"prob": 0.5, "state": [[[0, 0], [0, 0]], [[0, 0], [1, 0]]]}
]"#;

#[test]
fn info_reports_trine_and_identity() {
    let dir = TempDir::new().unwrap();
    let trine_file = write(&dir, "trine.json", &io::channel_to_json(&trine()));
    let o = qchan(&["info", s(&trine_file)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("3 minimal Kraus ops, ranks [1,1,1], 1-PEB certificate: true"), "{}", stdout(&o));

    let id = write(&dir, "id.json", r#"{"dim_in": 2, "dim_out": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}"#);
    let o = qchan(&["info", s(&id)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1 minimal Kraus op, ranks [2], 1-PEB certificate: false"), "{}", stdout(&o));
}

#[test]
fn completeness_violation_exits_2_with_location() {
    let dir = TempDir::new().unwrap();
    // ΣV†V = diag(1.01, 1) deviates by 0.1 in the 1,1 entry of V†V
    let bad = write(
        &dir,
        "bad.json",
        "{\n  \"dim_in\": 2,\n  \"dim_out\": 2,\n  \"kraus\": [[[[1.0488088481701516, 0], [0, 0]], [[0, 0], [1, 0]]]]\n}\n",
    );
    let o = qchan(&["info", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("‖ΣV†V − I‖ = 1.000e-1"), "{err}");
    assert!(err.contains("bad.json:4:3"), "{err}");
}

#[test]
fn syntax_errors_carry_line_and_column() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "broken.json", "{\n  \"dim_in\": 2,\n  \"dim_out\" 2\n}\n");
    let o = qchan(&["info", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("broken.json:3:"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(qchan(&["demo", "nonsense"]).status.code(), Some(2));
    assert_eq!(qchan(&["info", "builtin:identity:2", "--rank-tol", "0"]).status.code(), Some(2));
    assert_eq!(qchan(&["info", "/nonexistent/channel.json"]).status.code(), Some(2));
    assert_eq!(qchan(&["--help"]).status.code(), Some(0));
}

#[test]
fn demos_pass() {
    for name in ["trine", "bell-partial-trace", "dephasing-equality", "strict-concavity"] {
        let o = qchan(&["demo", name, "--restarts", "2"]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        let o = qchan(&["demo", name, "--restarts", "2", "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(v.is_object());
    }
    let o = qchan(&["demo", "trine", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["grid_min_second_eigenvalue"].as_f64().unwrap() - 1.0 / 6.0).abs() <= 1e-6);
    assert!(v["gap"].as_f64().unwrap() > 0.0);
}

#[test]
fn constructed_channel_round_trips() {
    let dir = TempDir::new().unwrap();
    let chan = write(&dir, "deph.json", &io::channel_to_json(&dephasing(2)));
    let ens = write(&dir, "ens.json", BASIS_ENSEMBLE);
    let out = dir.path().join("comp.json");
    let o = qchan(&["construct", s(&chan), s(&ens), "--rank", "1", "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let emitted = io::read_channel(&out, RENORMALIZE_TOL).unwrap();
    let expected = rank_bounded_complement(&dephasing(2), &io::read_ensemble(&ens).unwrap(), 1).unwrap();
    assert!(choi_distance(&emitted, &expected.channel) <= 1e-12);

    // the machine-format report embeds the same channel
    let o = qchan(&["construct", s(&chan), s(&ens), "-r", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let embedded: KrausChannel = io::parse_channel(&v["channel"].to_string(), "embedded", RENORMALIZE_TOL).unwrap();
    assert!(choi_distance(&embedded, &emitted) <= 1e-12);
}

#[test]
fn construct_rejects_irreversible_instance() {
    let dir = TempDir::new().unwrap();
    let ens = write(&dir, "ens.json", BASIS_ENSEMBLE);
    let o = qchan(&["construct", "builtin:trine", s(&ens), "-r", "1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn machine_output_is_deterministic() {
    let run = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qchan"));
        cmd.args(["capacity", "builtin:trine", "--restarts", "3", "--format", "json"]);
        match seed {
            Some(v) => cmd.env("QCHAN_SEED", v),
            None => cmd.env_remove("QCHAN_SEED"),
        };
        cmd.output().unwrap().stdout
    };
    assert_eq!(run(None), run(None));
    assert_eq!(run(Some("7")), run(Some("7")));
    assert_eq!(run(Some("0")), run(None));
}

#[test]
fn capacity_with_state_and_energy() {
    let dir = TempDir::new().unwrap();
    let half = write(&dir, "half.json", "[[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]");
    let o = qchan(&["capacity", "builtin:dephasing:2", "--state", s(&half), "--restarts", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["constrained_holevo"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["equality_diagnostic"]["kraus_ranks"], serde_json::json!([1, 1]));

    let h = write(&dir, "h.json", "[[[0, 0], [0, 0]], [[0, 0], [1, 0]]]");
    let o = qchan(&["capacity", "builtin:identity:2", "--hamiltonian", s(&h), "--bound", "2", "--restarts", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["holevo"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((v["entanglement_assisted"]["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);

    let shifted = write(&dir, "shifted.json", "[[[1, 0], [0, 0]], [[0, 0], [2, 0]]]");
    let o = qchan(&["capacity", "builtin:identity:2", "--hamiltonian", s(&shifted), "--bound", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("infeasible"), "{}", stderr(&o));
}

#[test]
fn nonconvergence_exits_3() {
    let o = qchan(&["capacity", "builtin:trine", "--max-iter", "1", "--restarts", "1", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn mutinfo_reports_identity_values() {
    let dir = TempDir::new().unwrap();
    let half = write(&dir, "half.json", "[[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]");
    let o = qchan(&["mutinfo", "builtin:identity:2", s(&half), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["mutual_info"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((v["coherent_info"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}
