use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use treecum::fixtures;
use treecum::io::{DataFile, ParamFile};
use treecum::params::{model_forward, theta_to_omega, ThetaParams};

fn treecum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treecum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn data_file(dir: &TempDir, name: &str, theta: &ThetaParams) -> String {
    let p = model_forward(theta).unwrap();
    write(dir, name, &DataFile::probabilities(theta.tree(), &p).to_json())
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn forward_writes_the_quartet_table() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "q.json", &ParamFile::from_theta(&fixtures::quartet_theta()).to_json());
    let csv = dir.path().join("t.csv");
    let out = dir.path().join("f.json");
    let run = treecum(&[
        "forward",
        "--params",
        &params,
        "--chart",
        "theta",
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 16);
    for (line, row) in rows.iter().zip(fixtures::QUARTET_TABLE.iter()) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], row.pattern);
        assert_eq!(cols[2], row.p);
        assert_eq!(cols[3], row.lambda);
        let k: f64 = cols[4].parse().unwrap();
        assert!((k - row.values()[2]).abs() < 5e-5);
    }
    let json = read_json(&out);
    assert_eq!(json["p"].as_array().unwrap().len(), 16);
    assert!(json["rho"].is_object());
}

#[test]
fn omega_chart_matches_theta_route() {
    let dir = TempDir::new().unwrap();
    let th = fixtures::quartet_theta();
    let a = write(&dir, "t.json", &ParamFile::from_theta(&th).to_json());
    let b = write(&dir, "o.json", &ParamFile::from_omega(&theta_to_omega(&th)).to_json());
    let ra = treecum(&["forward", "--params", &a]);
    let rb = treecum(&["forward", "--params", &b, "--chart", "omega"]);
    assert_eq!(code(&ra), 0);
    assert_eq!(code(&rb), 0);
    let ja: Value = serde_json::from_slice(&ra.stdout).unwrap();
    let jb: Value = serde_json::from_slice(&rb.stdout).unwrap();
    for (x, y) in ja["p"].as_array().unwrap().iter().zip(jb["p"].as_array().unwrap()) {
        assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() < 1e-14);
    }
    let wrong = treecum(&["forward", "--params", &b, "--chart", "theta"]);
    assert_eq!(code(&wrong), 2);
}

#[test]
fn deterministic_tree_has_two_atoms() {
    let dir = TempDir::new().unwrap();
    let text = r#"{"chart":"theta","root":0.5,"edges":{"1":[0,1],"2":[0,1],"3":[0,1]}}"#;
    let params = write(&dir, "d.json", text);
    let run = treecum(&["forward", "--tree", "(1,2,3)h;", "--params", &params]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let json: Value = serde_json::from_slice(&run.stdout).unwrap();
    let support: Vec<usize> = json["p"]
        .as_array()
        .unwrap()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.as_f64().unwrap() > 0.0)
        .map(|(k, _)| k)
        .collect();
    assert_eq!(support, vec![0, 7]);
    assert!(json["rho"].is_null() || json["rho"].is_object());
}

#[test]
fn recover_quartet_gives_four_points() {
    let dir = TempDir::new().unwrap();
    let data = data_file(&dir, "p.json", &fixtures::quartet_theta());
    let out = dir.path().join("r.json");
    let run = treecum(&["recover", "--data", &data, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let json = read_json(&out);
    assert_eq!(json["classification"]["type"], "finite");
    assert_eq!(json["classification"]["count"], 4);
    assert_eq!(json["points"].as_array().unwrap().len(), 4);
    let sq = &json["recovered"];
    for (key, want) in [("r", 0.36), ("a", 0.16)] {
        assert!((sq["mu_bar_sq"][key].as_f64().unwrap() - want).abs() < 1e-10);
    }
    for (key, want) in [("(r,1)", 0.25), ("(r,2)", 0.16), ("(r,a)", 0.25), ("(a,3)", 0.16), ("(a,4)", 0.16)] {
        assert!((sq["eta_sq"][key].as_f64().unwrap() - want).abs() < 1e-10, "{key}");
    }
    for point in json["points"].as_array().unwrap() {
        assert_eq!(point["theta"]["chart"], "theta");
    }
}

#[test]
fn recover_reports_singular_tripod() {
    let dir = TempDir::new().unwrap();
    let data = data_file(&dir, "p.json", &fixtures::tripod_independent_theta());
    let run = treecum(&["recover", "--data", &data]);
    assert_eq!(code(&run), 0);
    let json: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(json["classification"]["type"], "singular");
    assert_eq!(json["classification"]["minimal_pairs"].as_array().unwrap().len(), 4);
    assert_eq!(json["classification"]["constraints"].as_array().unwrap().len(), 4);
}

#[test]
fn fiber_reports_seven_leaf_classes() {
    let dir = TempDir::new().unwrap();
    let data = data_file(&dir, "p.json", &fixtures::seven_leaf_theta());
    let run = treecum(&["fiber", "--data", &data, "--eps", "1e-9"]);
    assert_eq!(code(&run), 0);
    let json: Value = serde_json::from_slice(&run.stdout).unwrap();
    let names = |v: &Value| -> Vec<String> {
        let mut out: Vec<String> = v.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect();
        out.sort();
        out
    };
    assert_eq!(names(&json["isolated"]), ["(b,c)", "(c,d)", "(c,e)", "(e,6)", "(e,7)"]);
    let mut classes: Vec<Vec<String>> = json["classes_active"].as_array().unwrap().iter().map(names).collect();
    classes.sort();
    assert_eq!(
        classes,
        vec![vec!["(a,1)"], vec!["(a,2)"], vec!["(b,3)", "(b,a)"], vec!["(d,4)", "(d,5)"]]
    );
    assert_eq!(names(&json["degenerate_nodes"]), ["c", "e"]);
    assert_eq!(json["classification"]["type"], "singular");
}

#[test]
fn off_model_data_exits_three() {
    let dir = TempDir::new().unwrap();
    let p = model_forward(&fixtures::quartet_theta()).unwrap();
    let mut values = p.values().to_vec();
    values[0] += 0.02;
    values[15] -= 0.02;
    let text = serde_json::json!({"kind": "probabilities", "tree": fixtures::QUARTET_NEWICK, "n": 4, "values": values});
    let data = write(&dir, "bad.json", &text.to_string());
    let run = treecum(&["recover", "--data", &data]);
    assert_eq!(code(&run), 3, "{}", String::from_utf8_lossy(&run.stderr));
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let junk = write(&dir, "junk.json", "{not json");
    assert_eq!(code(&treecum(&["forward", "--params", &junk])), 2);
    assert_eq!(code(&treecum(&["forward", "--params", "/nonexistent/file.json"])), 2);
    let params = write(&dir, "q.json", &ParamFile::from_theta(&fixtures::quartet_theta()).to_json());
    assert_eq!(code(&treecum(&["forward", "--tree", "(1,2,3)h;", "--params", &params])), 2);
    assert_eq!(code(&treecum(&["switch", "--params", &params, "--node", "1"])), 2);
    let data = data_file(&dir, "p.json", &fixtures::quartet_theta());
    assert_eq!(code(&treecum(&["recover", "--data", &data, "--eps", "0"])), 2);
    assert_eq!(code(&treecum(&["selftest", "--suite", "nope"])), 2);
}

#[test]
fn switch_at_root_gives_second_point() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "o.json", &ParamFile::from_omega(&fixtures::quartet_omega()).to_json());
    let run = treecum(&["switch", "--params", &params, "--node", "r"]);
    assert_eq!(code(&run), 0);
    let file = ParamFile::from_json(std::str::from_utf8(&run.stdout).unwrap()).unwrap();
    let omega = match file.resolve(None).unwrap() {
        treecum::io::Parameters::Omega(o) => o,
        other => panic!("expected omega, got {other:?}"),
    };
    let tuple = fixtures::quartet_tuple(&omega);
    for (a, b) in tuple.iter().zip(&fixtures::QUARTET_FIBER[1]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn outputs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let data = data_file(&dir, "p.json", &fixtures::quartet_theta());
    let a = treecum(&["recover", "--data", &data]);
    let b = treecum(&["recover", "--data", &data]);
    assert_eq!(a.stdout, b.stdout);
    let s1 = treecum(&["selftest", "--suite", "roundtrip", "--seed", "9", "--cases", "20"]);
    let s2 = treecum(&["selftest", "--suite", "roundtrip", "--seed", "9", "--cases", "20"]);
    assert_eq!(code(&s1), 0);
    assert_eq!(s1.stdout, s2.stdout);
}

#[test]
fn selftest_table_suite_passes() {
    let run = treecum(&["selftest", "--suite", "table1"]);
    assert_eq!(code(&run), 0);
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with("table1"));
    assert_eq!(text.lines().count(), 1);
}
