use std::process::{Command, Output};

fn dext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dext"))
        .args(args)
        .env_remove("DEXT_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn enumerate_dimension_three() {
    let o = dext(&["enumerate", "--dim", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "[[1,1,1],[1,1,2]]");
}

#[test]
fn enumerate_with_cone_filter_reports_both_sets() {
    let o = dext(&["enumerate", "--dim", "4", "--cone-filter"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["unfiltered"].as_array().unwrap().len(), 9);
    assert_eq!(v["filtered"], v["unfiltered"]);
    assert!(v["removed"].as_array().unwrap().is_empty());
}

#[test]
fn enumerate_refuses_large_dimension() {
    let o = dext(&["enumerate", "--dim", "8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}

#[test]
fn verify_catalog_and_inline_json() {
    let o = dext(&["verify", "--catalog", "table1:4:2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["einstein_constant"], -5.0);

    let inline = r#"{"dim":3,"mu":[{"i":1,"j":2,"k":3,"v":1}],"spectral":[1,1,1]}"#;
    let o = dext(&["verify", "--json", inline]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o)["einstein"], false);
}

#[test]
fn verify_reads_files_and_writes_output() {
    let dir = std::env::temp_dir().join(format!("dext-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let input = dir.join("h.json");
    let out = dir.join("report.json");
    let o = dext(&["catalog", "--name", "heisenberg:2"]);
    std::fs::write(&input, &o.stdout).unwrap();
    let o = dext(&["verify", "--input", input.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["einstein_constant"], -8.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_input_is_an_input_error() {
    let o = dext(&["verify", "--json", "{\"dim\": 3,"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    let o = dext(&["verify", "--json", r#"{"dim":3,"mu":[{"i":1,"j":2,"k":4,"v":1}],"spectral":[1,1,1]}"#]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_wrong_type_is_rejected() {
    let o = dext(&["classify", "--type", "1112", "--catalog", "heisenberg:1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["passed"], true);
    let o = dext(&["classify", "--type", "0001", "--catalog", "heisenberg:1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tolerance_comes_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_dext"))
        .args(["verify", "--catalog", "e2"])
        .env("DEXT_TOL", "1e-3")
        .output()
        .unwrap();
    assert_eq!(json(&o)["tolerance"], 1e-3);
}

#[test]
fn curvature_and_catalog_listing() {
    let o = dext(&["curvature", "--catalog", "heisenberg:1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["extension_ricci"]["ric_00"], -6.0);
    let o = dext(&["catalog", "--list"]);
    let names: Vec<String> = json(&o)
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["name"].as_str().unwrap().to_owned())
        .collect();
    assert!(names.contains(&"e2".to_owned()) && names.contains(&"table1:4:0.5".to_owned()));
    let o = dext(&["catalog", "--counterexample"]);
    let v = json(&o);
    assert_eq!(v["cone_verified"], true);
    assert_eq!(v["consistent"], false);
}

#[test]
fn search_is_deterministic() {
    let args = ["search", "--spectral", "1,1,2", "--seed", "3", "--restarts", "4"];
    let a = dext(&args);
    let b = dext(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["converged"], true);
    assert_eq!(v["best_mu"]["spectral"], serde_json::json!([1, 1, 2]));
}

#[test]
fn pretty_output_is_a_table() {
    let o = dext(&["--pretty", "verify", "--catalog", "h2xr"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("einstein: true"));
    assert!(serde_json::from_str::<serde_json::Value>(&text).is_err());
}
