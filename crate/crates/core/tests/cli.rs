use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pathdensity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathdensity")).args(args).env("PATHDENSITY_THREADS", "1").output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = pathdensity(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

fn header(path: &Path) -> Vec<String> {
    csv::Reader::from_path(path).unwrap().headers().unwrap().iter().map(String::from).collect()
}

#[test]
fn simulate_pentagon_writes_points_and_model() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().to_str().unwrap();
    ok(&["simulate", "--model", "pentagon", "--n", "500", "--seed", "1", "--out", d]);
    assert_eq!(header(&tmp.path().join("points.csv")), ["x", "y"]);
    assert_eq!(rows(&tmp.path().join("points.csv")).len(), 500);
    let model = pathdensity::FilamentModel::from_json(&fs::read_to_string(tmp.path().join("model.json")).unwrap()).unwrap();
    assert_eq!(model.filaments().len(), 5);
}

#[test]
fn simulate_with_background_adds_uniform_points() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["simulate", "--model", "pentagon-bg", "--seed", "1", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(rows(&tmp.path().join("points.csv")).len(), 1000);
}

#[test]
fn simulate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        ok(&["simulate", "--model", "two-gaussian", "--n", "200", "--seed", "9", "--out", dir.path().to_str().unwrap()]);
    }
    assert_eq!(fs::read(a.path().join("points.csv")).unwrap(), fs::read(b.path().join("points.csv")).unwrap());
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().to_str().unwrap();
    assert_eq!(pathdensity(&["simulate", "--model", "hexagon", "--seed", "1", "--out", d]).status.code(), Some(2));
    assert_eq!(pathdensity(&["simulate", "--model", "pentagon", "--out", d]).status.code(), Some(2));
    assert_eq!(pathdensity(&["oracle", "--out", d]).status.code(), Some(2));
    assert_eq!(pathdensity(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn malformed_csv_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("bad.csv");
    fs::write(&input, "x,y\n0.1,0.2\n0.3,zero\n0.5,0.6\n").unwrap();
    let out = pathdensity(&["estimate", "--input", input.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn estimate_writes_every_output() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().to_str().unwrap();
    ok(&["simulate", "--model", "pentagon", "--n", "300", "--seed", "4", "--out", d]);
    let input = tmp.path().join("points.csv");
    ok(&["estimate", "--input", input.to_str().unwrap(), "--grid", "60", "--quantile", "0.9", "--trim", "3", "--out", d]);

    let paths = tmp.path().join("paths.csv");
    assert_eq!(header(&paths), ["path_id", "step", "x", "y"]);
    let ids: std::collections::BTreeSet<String> = rows(&paths).iter().map(|r| r[0].to_string()).collect();
    assert_eq!(ids.len(), 300);
    assert_eq!(header(&tmp.path().join("field.csv")), ["x", "y", "value"]);
    assert_eq!(rows(&tmp.path().join("field.csv")).len(), 3600);
    assert_eq!(header(&tmp.path().join("levelset.csv")), ["i", "j", "x", "y"]);
    assert!(!rows(&tmp.path().join("levelset.csv")).is_empty());

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["quantile"], 0.9);
    assert!(summary["lambda"].as_f64().unwrap() > 0.0);

    let svg = fs::read_to_string(tmp.path().join("figure.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let panels: Vec<&str> = doc.descendants().filter(|n| n.has_tag_name("g")).filter_map(|n| n.attribute("id")).collect();
    assert_eq!(panels, ["data", "paths", "trimmed", "levelset"]);
    assert!(!svg.contains("href"));
}

#[test]
fn explicit_trim_starts_panel_c_at_that_vertex() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().to_str().unwrap();
    ok(&["simulate", "--model", "triangle", "--n", "40", "--seed", "2", "--out", d]);
    let input = tmp.path().join("points.csv");
    ok(&["estimate", "--input", input.to_str().unwrap(), "--grid", "20", "--trim", "3", "--out", d]);
    let paths = pathdensity::io::read_paths_csv(&tmp.path().join("paths.csv")).unwrap();
    let svg = fs::read_to_string(tmp.path().join("figure.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let panel = |id: &str| -> Vec<usize> {
        let g = doc.descendants().find(|n| n.attribute("id") == Some(id)).unwrap();
        g.descendants().filter(|n| n.has_tag_name("polyline")).map(|n| n.attribute("points").unwrap().split(' ').count()).collect()
    };
    let full = panel("paths");
    let trimmed = panel("trimmed");
    let expected_full: Vec<usize> = paths.iter().filter(|p| p.len() >= 2).map(|p| p.len()).collect();
    let expected_trimmed: Vec<usize> = paths.iter().map(|p| p.len() - 3.min(p.len() - 1)).filter(|&k| k >= 2).collect();
    assert_eq!(full, expected_full);
    assert_eq!(trimmed, expected_trimmed);
}

#[test]
fn config_file_supplies_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.json");
    let out = tmp.path().join("out");
    fs::write(&config, serde_json::json!({ "model": "pentagon", "n": 120, "seed": 3, "out": out }).to_string()).unwrap();
    ok(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(rows(&out.join("points.csv")).len(), 120);
    // Flags win over the file.
    ok(&["simulate", "--config", config.to_str().unwrap(), "--n", "50"]);
    assert_eq!(rows(&out.join("points.csv")).len(), 50);
    fs::write(&config, r#"{ "model": "pentagon", "seed": 3, "colour": "red" }"#).unwrap();
    assert_eq!(pathdensity(&["simulate", "--config", config.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn oracle_and_converge_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().to_str().unwrap();
    ok(&["oracle", "--model", "two-gaussian", "--n-mc", "2000", "--grid", "25", "--out", d]);
    assert_eq!(header(&tmp.path().join("oracle_field.csv")), ["x", "y", "value", "std_error", "saturated"]);
    assert_eq!(rows(&tmp.path().join("oracle_field.csv")).len(), 625);
    let crit = rows(&tmp.path().join("critical_points.csv"));
    let kinds: Vec<&str> = crit.iter().map(|r| r.get(2).unwrap()).collect();
    assert_eq!(kinds.iter().filter(|k| **k == "maximum").count(), 2);
    assert_eq!(kinds.iter().filter(|k| **k == "saddle").count(), 1);

    ok(&["converge", "--model", "two-gaussian", "--n", "100,200", "--reps", "3", "--n-mc", "2000", "--probe-grid", "8", "--seed", "7", "--out", d]);
    assert_eq!(header(&tmp.path().join("rate_table.csv")), ["n", "replicate", "sup_error"]);
    assert_eq!(rows(&tmp.path().join("rate_table.csv")).len(), 6);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("rate_summary.json")).unwrap()).unwrap();
    assert!(summary["slope"].as_f64().unwrap().is_finite());
}

#[test]
fn oracle_reads_a_model_file() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().to_str().unwrap();
    ok(&["simulate", "--model", "triangle", "--n", "50", "--seed", "1", "--out", d]);
    let model = tmp.path().join("model.json");
    let points = tmp.path().join("points.csv");
    ok(&["oracle", "--model", model.to_str().unwrap(), "--n-mc", "1000", "--grid", "15", "--points", points.to_str().unwrap(), "--out", d]);
    assert!(tmp.path().join("oracle_levelset.csv").exists());
    let grid = pathdensity::io::read_field_grid(&tmp.path().join("oracle_field.txt")).unwrap();
    assert_eq!((grid.grid().nx, grid.grid().ny), (15, 15));
}
