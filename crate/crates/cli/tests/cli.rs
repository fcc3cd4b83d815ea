use std::path::PathBuf;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_folner-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"))
        .join("cli")
        .join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_is_stable_and_names_every_scenario() {
    let a = lab(&["list"]);
    let b = lab(&["list", "--verbose"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&lab(&["list"])));
    let names: Vec<String> = stdout(&a)
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    assert_eq!(names.len(), folner_cli::scenarios::SCENARIOS.len());
    assert!(names.contains(&"kloosterman-tower".to_string()));
    assert!(stdout(&b).lines().count() > names.len());
}

#[test]
fn malformed_recipe_exits_with_parse_code() {
    let out = tmp("malformed");
    let o = lab(&[
        "run",
        "--scenario",
        "fk-sums",
        "--set",
        "recipe=dilbox:P=2:E=",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse"));
}

#[test]
fn unknown_scenario_and_parameter_exit_with_parse_code() {
    assert_eq!(lab(&["run", "--scenario", "nope"]).status.code(), Some(2));
    let o = lab(&["run", "--scenario", "mixing3-sweep", "--set", "bogus=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(lab(&["run"]).status.code(), Some(2));
}

#[test]
fn usage_error_exits_with_parse_code() {
    assert_eq!(lab(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn cap_exceeded_is_a_runtime_error() {
    let o = lab(&[
        "--cap", "3", "identity", "mixing3", "--field", "F7", "--a", "2",
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn failed_assertion_exits_one_and_still_writes_artifacts() {
    let out = tmp("failing");
    let o = lab(&[
        "run",
        "--scenario",
        "inverse-series",
        "--set",
        "baseline=5,5,5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], false);
}

#[test]
fn config_file_runs_and_manifest_hashes_match() {
    let dir = tmp("config");
    let out = dir.join("run");
    let cfg = dir.join("exp.ini");
    std::fs::write(
        &cfg,
        format!(
            "# weil sweep\n[run]\nscenario = kloosterman-weil\nseed = 3\nout = {}\n[params]\nq = 3,5,7\n",
            out.display()
        ),
    )
    .unwrap();
    let o = lab(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let man: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(man["scenario"], "kloosterman-weil");
    assert!(man["config"].as_str().unwrap().contains("q = 3,5,7"));
    for f in man["files"].as_array().unwrap() {
        let bytes = std::fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
        let digest = hex::encode(<sha2::Sha256 as sha2::Digest>::digest(&bytes));
        assert_eq!(f["sha256"].as_str().unwrap(), digest);
    }
}

#[test]
fn seed_flag_overrides_config_and_changes_hash() {
    let dir = tmp("seed");
    let run = |seed: &str, sub: &str| {
        let out = dir.join(sub);
        let o = lab(&[
            "--seed",
            seed,
            "run",
            "--scenario",
            "mixing3-sweep",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        let man: serde_json::Value =
            serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
        man["config_hash"].as_str().unwrap().to_string()
    };
    assert_eq!(run("4", "a"), run("4", "b"));
    assert_ne!(run("4", "a"), run("5", "c"));
}

#[test]
fn subcommands_print_json_records() {
    let o = lab(&["identity", "power-build", "--n", "2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["holds"], true);

    let o = lab(&[
        "pgl2", "ratio", "--field", "F16", "--set", "all", "--b", "1",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["a_size"], 16);

    let o = lab(&["pattern", "hyperbola3", "--field", "F7"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["hits"].as_array().unwrap().len(), 0);

    let o = lab(&[
        "pattern",
        "laurent-fs",
        "--field",
        "F5",
        "--poly",
        "X",
        "--truncation",
        "all",
        "--set",
        "0,2",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["hits"][0]["a"], "2");
}
