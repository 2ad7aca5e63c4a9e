use std::f64::consts::PI;
use std::process::Command;

use annihilator::run::{evaluate, ExitStatus};
use annihilator::samples::sample_rows;
use annihilator::spec::{problem_from_json, Outputs};
use annihilator::{export_samples, run, FunctionSpec, Mode, PieceSpec, ProblemSpec};
use annihilator_core::SmoothPhase;
use proptest::prelude::*;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_annihilator"))
}

fn report_json(spec: &ProblemSpec) -> (ExitStatus, Value) {
    let e = evaluate(spec).unwrap();
    (e.status, serde_json::from_str(&e.report).unwrap())
}

#[test]
fn annihilates_constant() {
    let spec = ProblemSpec::from_json(r#"{"functions":[1],"mode":"annihilate"}"#).unwrap();
    let (status, r) = report_json(&spec);
    assert_eq!(status, ExitStatus::Success);
    let sol = &r["solution"];
    assert!(sol["max_input_residual"].as_f64().unwrap() <= 1e-6);
    assert!(sol["norms"]["total_variation"].as_f64().unwrap() <= 5.0 * PI + 1e-6);
    assert_eq!(sol["nodes"].as_array().unwrap().len(), 1);
}

#[test]
fn hobby_rice_for_one_and_t() {
    let spec = problem_from_json(
        r#"[1, {"breakpoints":[0,1],"pieces":[{"re":[0,1]}]}]"#,
        Mode::HobbyRice,
    )
    .unwrap();
    let (status, r) = report_json(&spec);
    assert_eq!(status, ExitStatus::Success);
    let s: Vec<f64> = serde_json::from_value(r["switch_points"].clone()).unwrap();
    assert_eq!(s.len(), 2);
    assert!((s[0] - 0.25).abs() <= 1e-10 && (s[1] - 0.75).abs() <= 1e-10);
    let res: Vec<f64> = serde_json::from_value(r["residuals"].clone()).unwrap();
    assert!(res.iter().all(|v| v.abs() <= 1e-10));
}

#[test]
fn hobby_rice_splits_complex_functions() {
    // t + i t² contributes two real parts.
    let spec = problem_from_json(
        r#"[{"breakpoints":[0,1],"pieces":[{"re":[0,1],"im":[0,0,1]}]}]"#,
        Mode::HobbyRice,
    )
    .unwrap();
    let (_, r) = report_json(&spec);
    assert_eq!(r["parts"], serde_json::json!(["re[0]", "im[0]"]));
    assert!(r["switch_points"].as_array().unwrap().len() <= 2);
}

#[test]
fn empty_function_list_is_an_input_error() {
    let mut spec = ProblemSpec::new(vec![FunctionSpec::Constant(1.0)], Mode::Annihilate);
    spec.functions.clear();
    let out = run(&spec);
    assert_eq!(out.status, ExitStatus::InputError);
    assert!(out.report.is_none());
}

#[test]
fn sample_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.csv");
    export_samples(&SmoothPhase::constant(0.0), 3, &path).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "t,theta,dtheta,re,im\n0.0,0.0,0.0,1.0,0.0\n0.5,0.0,0.0,1.0,0.0\n1.0,0.0,0.0,1.0,0.0\n"
    );
    assert!(export_samples(&SmoothPhase::constant(0.0), 1, &path).is_err());
    assert!(export_samples(
        &SmoothPhase::constant(0.0),
        3,
        dir.path().join("no/such/dir.csv")
    )
    .is_err());

    let spec = ProblemSpec::from_json(r#"{"functions":[1],"mode":"annihilate"}"#).unwrap();
    let theta = evaluate(&spec).unwrap().theta.unwrap();
    for grid in [2, 7, 1000] {
        let rows = sample_rows(&theta, grid).unwrap();
        assert_eq!(rows.len(), grid);
        assert_eq!(rows[0][0], 0.0);
        assert_eq!(rows[grid - 1][0], 1.0);
        for r in rows {
            assert!((r[3] * r[3] + r[4] * r[4] - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn run_writes_report_and_samples() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ProblemSpec::new(vec![FunctionSpec::Constant(1.0)], Mode::Annihilate);
    spec.outputs = Outputs {
        report: Some(dir.path().join("r.json").display().to_string()),
        csv: Some(dir.path().join("s.csv").display().to_string()),
        grid: Some(11),
    };
    let out = run(&spec);
    assert_eq!(out.status, ExitStatus::Success);
    let written = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    assert_eq!(Some(written), out.report);
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"functions\": [1,\n  \"mode\": }").unwrap();
    let out = bin()
        .args(["annihilate", "--in"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "[]").unwrap();
    let out = bin()
        .args(["hobby-rice", "--in"])
        .arg(&empty)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // A one-step budget cannot converge; the report is still written.
    let starved = dir.path().join("starved.json");
    std::fs::write(
        &starved,
        r#"{"functions":[1,{"breakpoints":[0,1],"pieces":[{"re":[0,1]}]}],"mode":"annihilate",
            "options":{"max_iterations":1,"fallback_starts":0}}"#,
    )
    .unwrap();
    let report = dir.path().join("failed.json");
    let out = bin()
        .args(["annihilate", "--in"])
        .arg(&starved)
        .arg("--out")
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["status"], "failed");
    assert!(r["error"].as_str().unwrap().contains("iterations"));
}

#[test]
fn binary_annihilate_to_stdout_with_samples() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("fs.json");
    std::fs::write(
        &input,
        r#"[1, {"breakpoints":[0,1],"pieces":[{"re":[0,1],"im":[0,0,1]}]}]"#,
    )
    .unwrap();
    let samples = dir.path().join("theta.csv");
    let out = bin()
        .args(["annihilate", "--tol", "1e-7", "--grid", "5", "--in"])
        .arg(&input)
        .arg("--samples")
        .arg(&samples)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["tol"], 1e-7);
    assert!(r["solution"]["max_residual"].as_f64().unwrap() <= 1e-7);
    let csv = std::fs::read_to_string(&samples).unwrap();
    assert_eq!(csv.lines().next(), Some("t,theta,dtheta,re,im"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn binary_scaling_with_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    std::fs::write(&f, "1").unwrap();
    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let out_path = dir.path().join(format!("s{threads}.json"));
        let csv = dir.path().join(format!("t{threads}.csv"));
        let status = bin()
            .env("ANNIHILATOR_THREADS", threads)
            .args(["scaling", "--p", "2", "--levels", "1:3", "--f"])
            .arg(&f)
            .arg("--out")
            .arg(&out_path)
            .arg("--csv")
            .arg(&csv)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);
        reports.push(std::fs::read(&out_path).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let r: Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(r["strictly_increasing"], true);
    assert_eq!(r["levels"].as_array().unwrap().len(), 3);
    let bad = bin()
        .args(["scaling", "--levels", "4:2", "--f"])
        .arg(&f)
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2), "clap usage errors exit with 2");
}

fn arb_function() -> impl Strategy<Value = FunctionSpec> {
    let piece = (
        prop::collection::vec(-10.0..10.0f64, 1..5),
        prop::option::of(prop::collection::vec(-10.0..10.0f64, 1..5)),
    )
        .prop_map(|(re, im)| PieceSpec { re, im });
    prop_oneof![
        (-5.0..5.0f64).prop_map(FunctionSpec::Constant),
        (
            prop::collection::vec(0.01..0.99f64, 0..3),
            prop::collection::vec(piece, 3)
        )
            .prop_map(|(mut cuts, pieces)| {
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let mut breakpoints = vec![0.0];
                breakpoints.extend(cuts);
                breakpoints.push(1.0);
                let pieces = pieces
                    .into_iter()
                    .cycle()
                    .take(breakpoints.len() - 1)
                    .collect();
                FunctionSpec::Piecewise {
                    breakpoints,
                    pieces,
                }
            }),
    ]
}

proptest! {
    #[test]
    fn spec_round_trip(
        functions in prop::collection::vec(arb_function(), 1..4),
        mode in prop_oneof![Just(Mode::Annihilate), Just(Mode::HobbyRice), Just(Mode::Scaling)],
        seed in any::<u64>(),
        residual in 1e-12..1e-2f64,
        grid in prop::option::of(2usize..5000),
        report in prop::option::of("[a-z]{1,8}\\.json"),
    ) {
        let mut spec = ProblemSpec::new(functions, mode);
        spec.seed = seed;
        spec.tolerances.residual = residual;
        spec.outputs.grid = grid;
        spec.outputs.report = report;
        let text = spec.to_json();
        let back: ProblemSpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.to_json(), text);
    }
}
