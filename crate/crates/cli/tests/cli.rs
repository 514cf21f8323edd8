use std::path::Path;
use std::process::{Command, Output};

fn qroute(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qroute"))
        .args(args)
        .current_dir(cwd)
        .env_remove("QROUTE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_square(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("sq4.json");
    std::fs::write(
        &p,
        r#"{"name":"sq4","nodes":[[0,0],[1,0],[1,1],[0,1]]}"#,
    )
    .unwrap();
    p
}

#[test]
fn generate_writes_one_deterministic_file() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["generate", "--n", "5", "--kind", "uniform", "--seed", "1", "--out", "a.json"];
    let o = qroute(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let first = std::fs::read(dir.path().join("a.json")).unwrap();
    let o = qroute(&args, dir.path());
    assert!(o.status.success());
    assert_eq!(std::fs::read(dir.path().join("a.json")).unwrap(), first);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    let g: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(g["nodes"].as_array().unwrap().len(), 5);
}

#[test]
fn generate_uses_output_dir_variable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("instances");
    let o = Command::new(env!("CARGO_BIN_EXE_qroute"))
        .args(["generate", "--n", "6", "--kind", "clustered", "--clusters", "2", "--seed", "3"])
        .current_dir(dir.path())
        .env("QROUTE_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("clustered-n6-k2-s3.json").exists());
}

#[test]
fn generate_rejects_two_cities() {
    let dir = tempfile::tempdir().unwrap();
    let o = qroute(&["generate", "--n", "2"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("at least 3"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn generate_converts_tsplib() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("tri.tsp"),
        "NAME: tri\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 0\n3 3 4\nEOF\n",
    )
    .unwrap();
    let o = qroute(&["generate", "--kind", "tsplib", "--input", "tri.tsp", "--out", "tri.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = qroute(&["solve", "--solver", "exact", "--instance", "tri.json"], dir.path());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["best_length"], 12.0);
}

#[test]
fn solve_exact_unit_square() {
    let dir = tempfile::tempdir().unwrap();
    write_square(dir.path());
    let o = qroute(&["solve", "--solver", "exact", "--instance", "sq4.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["best_length"], 4.0);
    assert_eq!(v["solver"], "exact");
}

#[test]
fn solve_sa_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let o = qroute(&["generate", "--n", "8", "--seed", "4", "--out", "g.json"], dir.path());
    assert!(o.status.success());
    let run = || {
        let o = qroute(&["solve", "--solver", "sa", "--instance", "g.json", "--seed", "7"], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        v["best_tour"].clone()
    };
    assert_eq!(run(), run());
}

#[test]
fn solve_qaoa_reports_qubit_cap() {
    let dir = tempfile::tempdir().unwrap();
    let o = qroute(&["generate", "--n", "20", "--seed", "1", "--out", "n20.json"], dir.path());
    assert!(o.status.success());
    let o = qroute(&["solve", "--solver", "qaoa", "--instance", "n20.json"], dir.path());
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("361 qubits"), "{err}");
    assert!(err.contains("cap is 20"), "{err}");
}

#[test]
fn solve_qaoa_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    write_square(dir.path());
    let o = qroute(
        &["solve", "--solver", "qaoa", "--instance", "sq4.json", "--mixer", "swap", "--max-evals", "30", "--seed", "2"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["qaoa"]["feasible_fraction"], 1.0);
    assert_eq!(v["best_length"], 4.0);
}

fn suite_json(seed: u64) -> String {
    format!(
        r#"{{
  "name": "cli",
  "instances": [{{"generator": "uniform", "n": 5, "seed": 2}}],
  "solvers": [
    {{"kind": "sa", "config": {{"moves_per_temp": 20}}}},
    {{"kind": "ga", "config": {{"generations": 30}}}}
  ],
  "trials": 3,
  "master_seed": {seed}
}}"#
    )
}

fn without_wall_clock(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            [&f[..8], &f[10..]].concat().join(",")
        })
        .collect()
}

#[test]
fn benchmark_writes_reports_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("suite.json"), suite_json(11)).unwrap();
    let run = |out: &str| {
        let o = qroute(&["benchmark", "--config", "suite.json", "--out-dir", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("wilcoxon"));
        std::fs::read_to_string(dir.path().join(out).join("results.csv")).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a.lines().count(), 1 + 6);
    assert!(a.starts_with(
        "instance_id,n,solver,trial,seed,best_length,optimal_length,ratio,duration_s,energy_j,evals\n"
    ));
    assert_eq!(without_wall_clock(&a), without_wall_clock(&b));
    for f in ["report.json", "charts/ratio.svg", "charts/runtime.svg", "charts/energy.svg"] {
        assert!(dir.path().join("a").join(f).exists(), "{f}");
    }

    let o = qroute(
        &["report", "--input", "a/report.json", "--format", "csv", "--out-dir", "c"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(dir.path().join("c/results.csv")).unwrap(), a);
}

#[test]
fn benchmark_missing_config_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = qroute(&["benchmark", "--config", "nope.json"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("nope.json"));
}

#[test]
fn benchmark_schema_error_names_key_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = suite_json(1).replace("\"moves_per_temp\"", "\"moves_per_tmp\"");
    std::fs::write(dir.path().join("bad.json"), bad).unwrap();
    let o = qroute(&["benchmark", "--config", "bad.json", "--out-dir", "o"], dir.path());
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("`solvers[0]`"), "{err}");
    assert!(err.contains("config.moves_per_tmp"), "{err}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn impact_defaults_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let o = qroute(&["impact"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    let value = |key: &str| -> f64 {
        out.lines()
            .find_map(|l| l.strip_prefix(key))
            .unwrap()
            .trim()
            .parse()
            .unwrap()
    };
    assert!((value("fuel_saved_ej:") - 2.62).abs() / 2.62 < 0.005);
    assert!((value("co2_avoided_t:") - 1.94e8).abs() / 1.94e8 < 0.005);

    let o = qroute(&["impact", "--improvement", "0.0001"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("fuel_saved_ej: 0.003195"));

    for bad in [["--factor", "-1"], ["--improvement", "1.5"], ["--baseline-ej", "0"]] {
        let o = qroute(&[&["impact"][..], &bad[..]].concat(), dir.path());
        assert!(!o.status.success(), "{bad:?}");
        assert_eq!(o.status.code(), Some(2), "usage errors exit with 2");
    }
}
