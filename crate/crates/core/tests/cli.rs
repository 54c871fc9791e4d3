//! End-to-end runs of the `central-configs` binary.

use std::path::Path;
use std::process::Command;

use central_configs::config::MassVector;
use central_configs::dziobek::brehm_pyramid;
use central_configs::solver::{solve, trapezoid_seed, SolveOptions};
use serde_json::{json, Value};
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_central-configs")).args(args).output().expect("binary runs");
    let stdout = String::from_utf8_lossy(&out.stdout).to_string();
    let report = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), report, String::from_utf8_lossy(&out.stderr).to_string())
}

fn write(dir: &TempDir, name: &str, value: &Value) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name} in {report}"))
}

fn passed(report: &Value, name: &str) -> bool {
    check(report, name)["passed"].as_bool().unwrap()
}

fn distances(path: &Path) -> Vec<f64> {
    let file: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let pts: Vec<Vec<f64>> = serde_json::from_value(file["positions"].clone()).unwrap();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            out.push(pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt());
        }
    }
    out
}

#[test]
fn solve_three_equal_masses_gives_unit_triangle() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "m.json", &json!({ "masses": [1.0, 1.0, 1.0] }));
    let out = dir.path().join("classes");
    let (code, report, _) = run(&["solve", &input, "--starts", "30", "--rng", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let classes = report["results"]["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 2, "equilateral and collinear");
    let planar = classes.iter().find(|c| c["dimension"] == 2).unwrap();
    for r in distances(Path::new(planar["file"].as_str().unwrap())) {
        assert!((r - 1.0).abs() < 1e-10, "side {r}");
    }
}

#[test]
fn solve_five_equal_masses_planar_classes_have_rank_two() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "m.json", &json!({ "masses": vec![1.0; 5] }));
    let (code, report, _) = run(&["solve", &input, "--starts", "200", "--rng", "1"]);
    assert_eq!(code, 0);
    let classes = report["results"]["classes"].as_array().unwrap();
    let planar: Vec<&Value> = classes.iter().filter(|c| c["dimension"] == 2).collect();
    assert!(!planar.is_empty());
    assert!(planar.iter().all(|c| c["rank_zhat"] == 2));
}

#[test]
fn solve_from_seed_shape() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "m.json", &json!({ "masses": vec![1.0; 5] }));
    let (code, report, _) = run(&["solve", &input, "--seed-shape", "square-center"]);
    assert_eq!(code, 0);
    assert_eq!(report["results"]["classes"].as_array().unwrap().len(), 1);
    let (code, _, _) = run(&["solve", &input, "--seed-shape", "hexagram"]);
    assert_eq!(code, 1);
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"masses\": [1.0, ").unwrap();
    let (code, _, stderr) = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(!stderr.is_empty());
    let negative = write(&dir, "neg.json", &json!({ "masses": [1.0, -1.0], "positions": [[0.0, 0.0], [1.0, 0.0]] }));
    assert_eq!(run(&["analyze", &negative]).0, 1);
    let unknown = write(&dir, "extra.json", &json!({ "masses": [1.0], "mystery": 1 }));
    assert_eq!(run(&["analyze", &unknown]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["oracle", "5.9"]).0, 1);
}

#[test]
fn analyze_equilateral_triangle_passes_every_check() {
    let dir = TempDir::new().unwrap();
    let h = 3f64.sqrt() / 2.0;
    let input = write(&dir, "tri.json", &json!({ "masses": [1.0, 2.0, 3.0], "positions": [[0.0, 0.0], [1.0, 0.0], [0.5, h]] }));
    let (code, report, _) = run(&["analyze", &input]);
    assert_eq!(code, 0, "{report}");
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert_eq!(report["results"]["rank"]["rank_zhat"], 0);
}

#[test]
fn analyze_brehm_pyramid() {
    let masses = MassVector::new(vec![1.0, 1.0, 2.0, 2.0]).unwrap();
    let base = solve(&trapezoid_seed(0.5, 1.0).unwrap(), &masses, &SolveOptions::default())
        .unwrap()
        .certify(&masses)
        .unwrap();
    let pyr = brehm_pyramid(&base, 0.7).unwrap();
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "pyramid.json",
        &json!({ "masses": pyr.cc.masses.as_slice(), "positions": pyr.cc.config.positions(), "lambda": pyr.cc.lambda }),
    );
    let (code, report, _) = run(&["analyze", &input]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(report["results"]["rank"]["rank_zhat"], 1);
    assert_eq!(report["results"]["dimension"], 3);
    for name in ["dziobek_relations", "vanishing_delta_equidistant", "apex_height_bounds", "no_flat_dziobek"] {
        assert!(passed(&report, name), "{name}");
    }
    let delta = report["results"]["dziobek"]["vector"]["Delta"].as_array().unwrap();
    let top = delta.iter().map(|d| d.as_f64().unwrap().abs()).fold(0.0, f64::max);
    assert!(delta[4].as_f64().unwrap().abs() <= 1e-8 * top);
}

#[test]
fn analyze_noncentral_input_warns_and_exits_three() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "q.json", &json!({ "masses": vec![1.0; 4], "positions": [[0.0, 0.0], [1.0, 0.0], [1.0, 2.0], [0.0, 1.0]] }));
    let (code, report, stderr) = run(&["analyze", &input]);
    assert_eq!(code, 3);
    assert!(!passed(&report, "central"));
    assert!(report["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().contains("not central")));
    assert!(stderr.contains("not central"));
}

#[test]
fn solve_then_analyze_round_trips() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "m.json", &json!({ "masses": [1.0, 2.0, 3.0, 4.0] }));
    let out = dir.path().join("classes");
    let (code, report, _) = run(&["solve", &input, "--starts", "20", "--rng", "9", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    for class in report["results"]["classes"].as_array().unwrap() {
        let (code, analysis, _) = run(&["analyze", class["file"].as_str().unwrap(), "--tol", "1e-10"]);
        assert_eq!(code, 0, "{analysis}");
        assert!(passed(&analysis, "central"));
    }
}

#[test]
fn oracles_report_no_counterexamples() {
    for name in ["5.1", "5.2", "5.3"] {
        let (code, report, _) = run(&["oracle", name, "--samples", "2000", "--rng", "5"]);
        assert_eq!(code, 0, "{name}: {report}");
        assert!(passed(&report, "no_counterexamples"));
        assert!(report["results"]["oracle"]["non_vacuity_per_1000"].as_f64().unwrap() >= 1.0, "{name}");
    }
}

#[test]
fn oracle_54_runs_and_reports_its_search() {
    let (code, report, stderr) = run(&["oracle", "5.4", "--samples", "100", "--rng", "5"]);
    assert_eq!(code, 0, "{report}");
    assert!(passed(&report, "no_counterexamples"));
    let oracle = &report["results"]["oracle"];
    assert_eq!(oracle["samples"], 100);
    assert!(oracle["companion"]["closest_miss"].as_f64().is_some());
    if oracle["non_vacuity_per_1000"].as_f64().unwrap() < 1.0 {
        assert!(stderr.contains("fewer than one"));
    }
}

#[test]
fn signs_of_table_representatives() {
    let dir = TempDir::new().unwrap();
    for (name, cfg) in central_configs::geometry::table_representatives() {
        if !["A1", "A2", "B1"].contains(&name) {
            continue;
        }
        let input = write(&dir, &format!("{name}.json"), &json!({ "masses": vec![1.0; 5], "positions": cfg.positions() }));
        let (code, report, _) = run(&["signs", &input]);
        assert_eq!(code, 0);
        assert_eq!(report["results"]["matching_table"], name);
        assert_eq!(report["results"]["table"].as_array().unwrap().len(), if name.starts_with('B') { 9 } else { 11 });
    }
}

#[test]
fn catalog_lists_tables_and_seeds() {
    let (code, report, _) = run(&["catalog"]);
    assert_eq!(code, 0);
    let tables = report["results"]["tables"].as_array().unwrap();
    let names: Vec<&str> = tables.iter().map(|t| t["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["A1", "A2", "A3", "B1", "B2"]);
    assert_eq!(tables[0]["rows"][0], "0+-+-");
    assert_eq!(tables[1]["rows"][7], "+-+++");
    assert_eq!(tables[3]["rows"][6], "+-+00");
    assert!(!report["results"]["seed_shapes"].as_array().unwrap().is_empty());
}

#[test]
fn reports_are_deterministic_and_written_to_out() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "m.json", &json!({ "masses": [1.0, 1.5, 2.0, 2.5] }));
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("wall_time_s");
        v
    };
    let a = strip(run(&["solve", &input, "--starts", "15", "--rng", "4"]).1);
    let b = strip(run(&["solve", &input, "--starts", "15", "--rng", "4"]).1);
    assert_eq!(a, b);

    let path = dir.path().join("report.json");
    let (code, _, _) = run(&["oracle", "5.1", "--samples", "500", "--rng", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(saved["command"][0], "oracle");
    assert_eq!(saved["seed"], 2);
}
