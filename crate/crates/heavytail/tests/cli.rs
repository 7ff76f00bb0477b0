//! Black-box tests of the binary: exit codes, the machine-readable error
//! object on stderr, and the shapes of every emitted artifact.

use heavytail::generated::GeneratedDistribution;
use heavytail::report::RunReport;
use heavytail::transform::TransformSpec;
use std::path::Path;
use std::process::Output;

fn run(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_heavytail"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn stderr_error(output: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&output.stderr);
    let line = text
        .lines()
        .find(|l| l.starts_with('{'))
        .unwrap_or_else(|| panic!("no JSON error on stderr, got: {text}"));
    serde_json::from_str(line).expect("stderr line parses as JSON")
}

fn write_returns(path: &Path, n: usize) {
    let mut text = String::from("return\n");
    let mut state = 0x9e3779b97f4a7c15u64;
    for _ in 0..n {
        // cheap deterministic wobble; the fit only needs plausible spread
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let u = (state >> 11) as f64 / (1u64 << 53) as f64;
        text.push_str(&format!("{}\n", 0.02 * (u - 0.5)));
    }
    std::fs::write(path, text).unwrap();
}

fn write_spec(path: &Path) {
    let spec = TransformSpec::pgml(0.25, 0.01, 1.4, 1.2, 4.0).unwrap();
    std::fs::write(path, serde_json::to_string(&spec).unwrap()).unwrap();
}

#[test]
fn short_series_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("short.csv");
    write_returns(&input, 50);
    let out = run(&["fit", "--input", input.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_error(&out);
    assert_eq!(err["error"]["exit_code"], 3);
    let msg = err["error"]["message"].as_str().unwrap();
    assert!(msg.contains("at least 100"), "unhelpful message: {msg}");
}

#[test]
fn malformed_row_is_reported_by_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    std::fs::write(&input, "return\n0.01\nnot-a-number\n0.02\n").unwrap();
    let out = run(&["fit", "--input", input.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_error(&out);
    assert_eq!(err["error"]["kind"], "ingestion");
    assert!(err["error"]["message"].as_str().unwrap().contains("row 3"));
}

#[test]
fn nonpositive_price_is_reported_by_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("prices.csv");
    std::fs::write(
        &input,
        "date,price\n2024-01-02,10.0\n2024-01-03,0.0\n2024-01-04,11.0\n",
    )
    .unwrap();
    let out = run(&[
        "returns",
        "--input",
        input.to_str().unwrap(),
        "--frequency",
        "daily",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let msg = stderr_error(&out)["error"]["message"]
        .as_str()
        .unwrap()
        .to_string();
    assert!(msg.contains("row 3") && msg.contains("positive"), "{msg}");
}

#[test]
fn usage_errors_exit_2() {
    // clap-level: unknown scenario name, listing the valid ones
    let out = run(&["tailcheck", "--scenario", "prop9_cauchy"]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stderr);
    for name in ["prop4_t3", "prop5_exp", "prop6_gaussian"] {
        assert!(text.contains(name), "valid scenarios not listed: {text}");
    }

    // clap-level: unknown model token and missing required seed
    let out = run(&["fit", "--input", "x.csv", "--models", "normal,cauchy", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["fit", "--input", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));

    // tool-level: a comparison needs at least two distinct models
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("r.csv");
    write_returns(&input, 200);
    let out = run(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--models",
        "pgml,pgml",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_error(&out)["error"]["kind"], "invalid_spec");
}

#[test]
fn invalid_spec_files_map_to_usage_or_numerical_errors() {
    let dir = tempfile::tempdir().unwrap();

    // negative scale: rejected by parameter validation (usage error)
    let bad_scale = dir.path().join("bad_scale.json");
    std::fs::write(
        &bad_scale,
        r#"{"mu":0.0,"sigma":-1.0,"g1":{"family":"zero"},"g2":{"family":"zero"}}"#,
    )
    .unwrap();
    let out = run(&["qq", "--spec", bad_scale.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // a decreasing tabulated side is caught by parameter validation
    let decreasing = dir.path().join("decreasing.json");
    std::fs::write(
        &decreasing,
        r#"{"mu":0.0,"sigma":1.0,
            "g1":{"family":"monotone_table","params":{"xs":[0.5,1.0],"values":[0.0,-0.9]}},
            "g2":{"family":"zero"}}"#,
    )
    .unwrap();
    let out = run(&["sample", "--spec", decreasing.to_str().unwrap(), "--n", "5", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_error(&out)["error"]["kind"], "invalid_spec");

    // a rising table over negative x passes parameter checks but breaks the
    // g + x g' > -1/2 monotonicity scan: a numerical failure, not usage
    let steep = dir.path().join("steep.json");
    std::fs::write(
        &steep,
        r#"{"mu":0.0,"sigma":1.0,
            "g1":{"family":"monotone_table","params":{"xs":[-2.0,-1.0],"values":[0.0,0.9]}},
            "g2":{"family":"zero"}}"#,
    )
    .unwrap();
    let out = run(&["sample", "--spec", steep.to_str().unwrap(), "--n", "5", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_error(&out)["error"]["kind"], "not_monotone");

    // not JSON at all
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "hello").unwrap();
    let out = run(&["qq", "--spec", garbage.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_error(&out)["error"]["kind"], "invalid_spec");
}

#[test]
fn sample_stdout_matches_library_draws_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    write_spec(&spec_path);
    let out = run(&[
        "sample",
        "--spec",
        spec_path.to_str().unwrap(),
        "--n",
        "6",
        "--seed",
        "9",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("return"));
    let emitted: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();

    let spec = TransformSpec::pgml(0.25, 0.01, 1.4, 1.2, 4.0).unwrap();
    let dist =
        GeneratedDistribution::new(heavytail::base::BaseDistribution::Gaussian, spec).unwrap();
    let expected = dist.sample(6, 9).unwrap();
    assert_eq!(emitted, expected, "shortest round-trip printing must be lossless");
}

#[test]
fn qq_midpoint_returns_the_location_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    write_spec(&spec_path);
    let out = run(&["qq", "--spec", spec_path.to_str().unwrap(), "--levels", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "base_quantile,model_quantile\n0,0.25\n");
}

#[test]
fn gof_emits_the_comparison_table() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("r.csv");
    let spec_path = dir.path().join("spec.json");
    write_returns(&input, 400);
    // a spec roughly matched to the data, so every model scores cleanly
    let matched = TransformSpec::pgml(0.0, 0.005, 1.2, 1.2, 4.0).unwrap();
    std::fs::write(&spec_path, serde_json::to_string(&matched).unwrap()).unwrap();
    let out = run(&[
        "gof",
        "--input",
        input.to_str().unwrap(),
        "--spec",
        spec_path.to_str().unwrap(),
        "--models",
        "pgml,normal,laplace,t",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("name,chi2,dof,pvalue,m_ks,m_k,nll,rank_chi2,rank_ks,rank_kuiper,rank_nll")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for name in ["pgml", "normal", "laplace", "student_t"] {
        assert!(rows.iter().any(|r| r.starts_with(name)), "missing {name}");
    }
}

#[test]
fn directory_fit_writes_one_report_per_series() {
    let dir = tempfile::tempdir().unwrap();
    let batch = dir.path().join("batch");
    std::fs::create_dir(&batch).unwrap();
    write_returns(&batch.join("alpha.csv"), 300);
    write_returns(&batch.join("beta.csv"), 300);
    std::fs::write(batch.join("notes.txt"), "not a series").unwrap();
    let out_dir = dir.path().join("reports");

    // without --out the directory form is refused
    let out = run(&["fit", "--input", batch.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[
        "fit",
        "--input",
        batch.to_str().unwrap(),
        "--seed",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, ["alpha.json", "beta.json"]);
    for name in ["alpha", "beta"] {
        let text = std::fs::read_to_string(out_dir.join(format!("{name}.json"))).unwrap();
        let report = RunReport::from_json(&text).unwrap();
        assert_eq!(report.series, name);
        assert_eq!(report.config.seed, 3);
        assert_eq!(report.gof.len(), 4);
        assert!(report.baselines.len() == 3);
    }
}

#[test]
fn directory_fit_reports_failures_per_series_and_keeps_going() {
    let dir = tempfile::tempdir().unwrap();
    let batch = dir.path().join("batch");
    std::fs::create_dir(&batch).unwrap();
    write_returns(&batch.join("good.csv"), 300);
    write_returns(&batch.join("tiny.csv"), 20);
    let out_dir = dir.path().join("reports");
    let out = run(&[
        "fit",
        "--input",
        batch.to_str().unwrap(),
        "--seed",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_error(&out);
    assert_eq!(err["error"]["series"], "tiny");
    // the healthy series still produced its report
    assert!(out_dir.join("good.json").exists());
    assert!(!out_dir.join("tiny.json").exists());
}

#[test]
fn tailcheck_writes_outcome_and_ratio_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("outcome.json");
    let out = run(&[
        "tailcheck",
        "--scenario",
        "prop5_exp",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let outcome: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(outcome["scenario"], "prop5_exp");
    assert_eq!(outcome["monotone_increasing"], true);
    assert_eq!(outcome["report"]["predicted_index"], 2.0);
    assert_eq!(outcome["hill_profile"].as_array().unwrap().len(), 3);
    let hill = outcome["report"]["hill_estimate"].as_f64().unwrap();
    assert!((hill / 2.0 - 1.0).abs() < 0.2, "hill {hill} far from 2.0");

    let csv = std::fs::read_to_string(dir.path().join("outcome.csv")).unwrap();
    assert!(csv.starts_with("x,ratio\n"));
    assert_eq!(csv.lines().count(), 1 + outcome["report"]["ratio_curve"].as_array().unwrap().len());
}

#[test]
fn fit_report_echoes_resolved_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("r.csv");
    write_returns(&input, 250);
    let out = run(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--models",
        "t,normal,pgml",
        "--grid",
        "49",
        "--restarts",
        "2",
        "--seed",
        "77",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = RunReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.config.grid, 49);
    assert_eq!(report.config.restarts, 2);
    assert_eq!(report.config.seed, 77);
    assert_eq!(report.config.models, ["t", "normal", "pgml"]);
    assert_eq!(report.config.trim_per_tail, 0.05);
    assert!(!report.config.version.is_empty());
    // gof rows follow the requested model set; baselines exclude the transform
    assert_eq!(report.gof.len(), 3);
    assert_eq!(report.baselines.len(), 2);
    assert!(report.tail.is_some());
}
