use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn ctxq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxq"))
        .args(args)
        .env_remove("CTXQ_TOL")
        .env_remove("CTXQ_EIGENGAP")
        .env_remove("CTXQ_SEED")
        .env_remove("CTXQ_FORMAT")
        .env_remove("CTXQ_OUT")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn matrix(rows: &[[(f64, f64); 2]]) -> Value {
    let entries: Vec<Value> = rows
        .iter()
        .map(|r| {
            Value::Array(
                r.iter()
                    .map(|&(re, im)| json!({"re": re, "im": im}))
                    .collect(),
            )
        })
        .collect();
    json!({"n": rows.len(), "entries": entries})
}

fn sigma_z() -> Value {
    matrix(&[[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (-1.0, 0.0)]])
}

fn sigma_x() -> Value {
    matrix(&[[(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]])
}

fn write(dir: &TempDir, name: &str, value: &Value) -> String {
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn build_poset(dir: &TempDir, files: &[&str]) -> String {
    let out = dir.path().join("poset.json");
    let out = out.to_str().unwrap().to_string();
    let mut args = vec!["contexts", "build"];
    args.extend_from_slice(files);
    args.extend_from_slice(&["--out", &out]);
    let res = ctxq(&args);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    out
}

#[test]
fn single_observable_gives_two_contexts() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "z.json", &json!([sigma_z()]));
    let poset = stdout_json(&ctxq(&["contexts", "build", &file]));
    assert_eq!(poset["contexts"].as_array().unwrap().len(), 2);
    assert_eq!(poset["order"].as_array().unwrap().len(), 1);
}

#[test]
fn mermin_peres_fixture_gives_sixteen_contexts() {
    let poset = stdout_json(&ctxq(&[
        "contexts",
        "build",
        fixture("mermin_peres.json").to_str().unwrap(),
    ]));
    assert_eq!(poset["contexts"].as_array().unwrap().len(), 16);
}

#[test]
fn non_commuting_family_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "bad.json", &json!([sigma_z(), sigma_x()]));
    let out = ctxq(&["contexts", "build", &file]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("bad.json") && stderr.contains("matrices 1 and 2"),
        "{stderr}"
    );
    assert!(stderr.contains("commute"), "{stderr}");
}

#[test]
fn non_hermitian_matrix_is_named() {
    let dir = TempDir::new().unwrap();
    let skew = matrix(&[[(0.0, 0.0), (1.0, 0.0)], [(-1.0, 0.0), (0.0, 0.0)]]);
    let file = write(&dir, "skew.json", &json!([sigma_z(), skew]));
    let out = ctxq(&["contexts", "build", &file]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("matrix 2") && stderr.contains("not Hermitian"),
        "{stderr}"
    );
}

#[test]
fn unreadable_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("junk.json");
    fs::write(&path, "{not json").unwrap();
    assert_eq!(
        ctxq(&["contexts", "build", path.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        ctxq(&["sections", "search", "/nonexistent/poset.json"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn bottom_against_itself_is_a_single_cell() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "z.json", &json!([sigma_z()]));
    let poset = build_poset(&dir, &[&file]);
    let parsed: Value = serde_json::from_str(&fs::read_to_string(&poset).unwrap()).unwrap();
    let bottom = parsed["contexts"][0]["id"].as_str().unwrap();
    let report = stdout_json(&ctxq(&[
        "born", &poset, "--left", bottom, "--right", bottom,
    ]));
    assert_eq!(report["rows"], json!([[2.0]]));
    assert_eq!(report["total"], json!(2.0));
    assert_eq!(report["violations"], json!([]));
}

#[test]
fn orthogonal_qubit_contexts_are_uniform() {
    let dir = TempDir::new().unwrap();
    let z = write(&dir, "z.json", &json!([sigma_z()]));
    let x = write(&dir, "x.json", &json!([sigma_x()]));
    let poset = build_poset(&dir, &[&z, &x]);
    let parsed: Value = serde_json::from_str(&fs::read_to_string(&poset).unwrap()).unwrap();
    let ids: Vec<&str> = parsed["contexts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids.len(), 3);
    let report = stdout_json(&ctxq(&[
        "born",
        &poset,
        "--left",
        ids[1],
        "--right",
        ids[2],
        "--check-coherence",
    ]));
    for row in report["rows"].as_array().unwrap() {
        for cell in row.as_array().unwrap() {
            assert!((cell.as_f64().unwrap() - 0.5).abs() < 1e-12);
        }
    }
    let coherence = report["coherence"].as_array().unwrap();
    assert_eq!(coherence.len(), 4);
    assert!(coherence.iter().all(|r| r["coherent"] == json!(true)));
    assert_eq!(report["violations"], json!([]));

    let csv = ctxq(&[
        "born", &poset, "--left", ids[1], "--right", ids[2], "--format", "csv",
    ]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("record,left,right,value"));
    assert_eq!(text.lines().filter(|l| l.starts_with("cell,")).count(), 4);
}

#[test]
fn unknown_context_id_exits_two() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "z.json", &json!([sigma_z()]));
    let poset = build_poset(&dir, &[&file]);
    assert_eq!(
        ctxq(&["born", &poset, "--left", "x", "--right", "y"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bloch_fixture_has_a_section() {
    let dir = TempDir::new().unwrap();
    let poset = build_poset(&dir, &[fixture("bloch_20_seed7.json").to_str().unwrap()]);
    let report = stdout_json(&ctxq(&["sections", "search", &poset]));
    assert_eq!(report["outcome"], json!("found"));
    assert_eq!(
        report["section"]["assignment"].as_object().unwrap().len(),
        21
    );
}

#[test]
fn mermin_peres_has_no_section() {
    let dir = TempDir::new().unwrap();
    let poset = build_poset(&dir, &[fixture("mermin_peres.json").to_str().unwrap()]);
    let report = stdout_json(&ctxq(&["sections", "search", &poset]));
    assert_eq!(report["outcome"], json!("none"));
    assert!(report.get("section").is_none());
    assert!(report["nodes_visited"].as_u64().unwrap() > 0);
}

#[test]
fn bottom_only_poset_has_trivial_section() {
    let dir = TempDir::new().unwrap();
    let identity = matrix(&[[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)]]);
    let file = write(&dir, "id.json", &json!([identity]));
    let poset = build_poset(&dir, &[&file]);
    let report = stdout_json(&ctxq(&["sections", "search", &poset]));
    assert_eq!(report["contexts"], json!(1));
    let assignment = report["section"]["assignment"].as_object().unwrap();
    assert_eq!(assignment.values().collect::<Vec<_>>(), vec![&json!(1)]);
}

#[test]
fn qubit_table_accepts_nearly_unit_vectors() {
    let report = stdout_json(&ctxq(&[
        "qubit",
        "table",
        "--a",
        "0,0,1.0000001",
        "--b",
        "0.6,0,-0.8",
    ]));
    assert!(report["max_deviation"].as_f64().unwrap() < 1e-12);
    let bad = ctxq(&["qubit", "table", "--a", "0,0,1.1", "--b", "1,0,0"]);
    assert!(!bad.status.success());
}

#[test]
fn stored_fixtures_match_generators() {
    for (name, args) in [
        (
            "mermin_peres.json",
            vec!["fixtures", "generate", "mermin-peres"],
        ),
        (
            "bloch_20_seed7.json",
            vec![
                "fixtures", "generate", "bloch", "--count", "20", "--seed", "7",
            ],
        ),
        (
            "bloch_2_seed1.json",
            vec![
                "fixtures", "generate", "bloch", "--count", "2", "--seed", "1",
            ],
        ),
        (
            "linked_3x4_seed11.json",
            vec![
                "fixtures", "generate", "linked", "--dim", "3", "--count", "4", "--seed", "11",
            ],
        ),
    ] {
        let out = ctxq(&args);
        assert!(out.status.success());
        assert_eq!(
            out.stdout,
            fs::read(fixture(name)).unwrap(),
            "{name} drifted from its generator"
        );
    }
}

#[test]
fn output_is_deterministic_and_env_overrides_apply() {
    let dir = TempDir::new().unwrap();
    let mp = fixture("mermin_peres.json");
    let first = ctxq(&["contexts", "build", mp.to_str().unwrap()]).stdout;
    let second = ctxq(&["contexts", "build", mp.to_str().unwrap()]).stdout;
    assert_eq!(first, second);

    let out = dir.path().join("env.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_ctxq"))
        .args(["qubit", "table", "--a", "0,0,1", "--b", "0,0,1"])
        .env("CTXQ_FORMAT", "csv")
        .env("CTXQ_OUT", &out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("left,right,closed_form,generic"));

    let bad_tol = Command::new(env!("CARGO_BIN_EXE_ctxq"))
        .args(["qubit", "table", "--a", "0,0,1", "--b", "0,0,1"])
        .env("CTXQ_TOL", "-1")
        .output()
        .unwrap();
    assert_eq!(bad_tol.status.code(), Some(2));
}
