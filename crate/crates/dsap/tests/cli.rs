//! End-to-end runs of the `dsap` binary: file round-trips, exit codes,
//! and byte-identical outputs under fixed seeds.

use std::path::Path;
use std::process::{Command, Output};

use dsap::feasibility::Trace;
use dsap::harness::gen_box_corner;

fn dsap_bin() -> &'static str {
    env!("CARGO_BIN_EXE_dsap")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(dsap_bin())
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_corner_problem(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("corner.json");
    gen_box_corner(2).write_json_file(&path).expect("writable dir");
    path
}

#[test]
fn feasibility_run_writes_a_readable_trace() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_corner_problem(dir.path());
    let out = run_in(
        dir.path(),
        &[
            "feasibility",
            problem.to_str().unwrap(),
            "--plan",
            "cimmino",
            "--tol",
            "1e-8",
            "--out",
            "trace.csv",
        ],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("stopped at k="), "stdout: {stdout}");

    let trace = Trace::read_csv_file(dir.path().join("trace.csv")).unwrap();
    assert!(!trace.is_thinned());
    assert!(trace.final_record().max_violation <= 1e-8);
    // Reference distances for the problem's certified points are present.
    let dists = trace.records[0].ref_distances.as_ref().unwrap();
    assert!(dists.contains_key("interior"));
    assert!(dists.contains_key("minimizer"));
}

#[test]
fn identical_seeds_give_byte_identical_outputs() {
    // Same command in two fresh directories: stdout and trace bytes must
    // match exactly.
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let outputs: Vec<Output> = dirs
        .iter()
        .map(|dir| {
            let problem = write_corner_problem(dir.path());
            run_in(
                dir.path(),
                &[
                    "feasibility",
                    problem.to_str().unwrap(),
                    "--seed",
                    "5",
                    "--out",
                    "trace.csv",
                ],
            )
        })
        .collect();
    assert!(outputs.iter().all(|o| o.status.success()));
    assert_eq!(outputs[0].stdout, outputs[1].stdout);
    let bytes_a = std::fs::read(dirs[0].path().join("trace.csv")).unwrap();
    let bytes_b = std::fs::read(dirs[1].path().join("trace.csv")).unwrap();
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, bytes_b);
}

#[test]
fn superiorize_emits_trace_and_dichotomy_report() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_corner_problem(dir.path());
    let out = run_in(
        dir.path(),
        &[
            "superiorize",
            problem.to_str().unwrap(),
            "--eta0",
            "1.0",
            "--rho",
            "0.99",
            "--N",
            "1",
            "--out",
            "super.csv",
            "--report",
            "report.json",
        ],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert!(report["final_phi"].is_number());
    assert!(report["fejer_interior"]["passed"].is_boolean());
    let verdict = report["dichotomy"]["verdict"].as_str().unwrap();
    assert!(["case_a", "case_b", "inconclusive"].contains(&verdict));

    let trace = Trace::read_csv_file(dir.path().join("super.csv")).unwrap();
    assert!(trace.records.iter().all(|r| r.phi_value.is_some()));
}

#[test]
fn compare_reports_the_gap() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_corner_problem(dir.path());
    let out = run_in(
        dir.path(),
        &["compare", problem.to_str().unwrap(), "--max-iters", "5000"],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("superiority_gap: "), "stdout: {stdout}");
}

#[test]
fn check_fejer_passes_on_a_monotone_trace_and_flags_a_broken_one() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_corner_problem(dir.path());
    let run = run_in(
        dir.path(),
        &[
            "feasibility",
            problem.to_str().unwrap(),
            "--plan",
            "cimmino",
            "--out",
            "trace.csv",
        ],
    );
    assert!(run.status.success());

    // The interior point (2,2) is feasible, so plain runs are monotone
    // toward it.
    std::fs::write(
        dir.path().join("ref.json"),
        r#"{"label": "interior", "point": [2.0, 2.0], "kind": "feasible"}"#,
    )
    .unwrap();
    let check = run_in(
        dir.path(),
        &["check-fejer", "trace.csv", "--ref", "ref.json"],
    );
    assert!(
        check.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&check.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&check.stdout)).unwrap();
    assert_eq!(report["passed"], serde_json::json!(true));

    // A trace moving away from the reference fails with exit code 1.
    std::fs::write(
        dir.path().join("bad.csv"),
        "k,viol,phi,x_0,x_1\n0,1,,0,0\n1,2,,-1,-1\n",
    )
    .unwrap();
    let check = run_in(dir.path(), &["check-fejer", "bad.csv", "--ref", "ref.json"]);
    assert_eq!(check.status.code(), Some(1));
}

#[test]
fn malformed_inputs_exit_nonzero_with_context() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.json"), r#"{"dimension": 2}"#).unwrap();
    let out = run_in(dir.path(), &["feasibility", "broken.json"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("sets"), "stderr: {stderr}");

    let out = run_in(dir.path(), &["feasibility", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));

    // A problem without an objective cannot be superiorized.
    let plain = dsap::harness::gen_consistent_halfspaces(2, 2, 0, 0.1);
    plain.write_json_file(dir.path().join("plain.json")).unwrap();
    let out = run_in(dir.path(), &["superiorize", "plain.json"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("objective"), "stderr: {stderr}");
}

#[test]
fn custom_amalgamator_plan_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_corner_problem(dir.path());
    std::fs::write(
        dir.path().join("plan.json"),
        r#"{ "strings": [[1,2],[2]], "weights": [0.7,0.3] }"#,
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &[
            "feasibility",
            problem.to_str().unwrap(),
            "--plan",
            "plan.json",
        ],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn suite_runs_are_byte_identical_and_green() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_in(dir.path(), &["suite", "--seed", "0"]);
    let b = run_in(dir.path(), &["suite", "--seed", "0"]);
    assert!(a.status.success(), "suite failed: {}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8_lossy(&a.stdout);
    assert!(text.contains("9/9 criteria passed"), "{text}");
}
