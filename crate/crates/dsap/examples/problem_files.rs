//! File formats end to end: write a problem JSON (with an infinite box
//! bound), an amalgamator JSON, run from the files, emit the trace as
//! CSV, read it back, and check monotonicity on the parsed trace.
//!
//! Run with: cargo run --example problem_files

use dsap::diagnostics::{check_fejer, ReferencePoint};
use dsap::feasibility::{StopRule, Trace};
use dsap::geometry::{ConstraintFamily, ConvexSet, Point};
use dsap::harness::{run_feasibility, PlanChoice, ProblemSpec, RunConfig};
use dsap::strings::Amalgamator;
use dsap::superiorize::ObjectiveSpec;

fn main() -> dsap::Result<()> {
    let dir = tempfile::tempdir()?;

    // A 2-D problem: a halfspace, a ball, and a half-open box.
    let spec = ProblemSpec {
        dimension: 2,
        sets: ConstraintFamily::new(vec![
            ConvexSet::halfspace(Point::new(vec![1.0, 1.0])?, 2.0)?,
            ConvexSet::ball(Point::new(vec![0.0, 0.0])?, 1.5)?,
            ConvexSet::axis_box(vec![-1.0, f64::NEG_INFINITY], vec![f64::INFINITY, 1.0])?,
        ])?,
        objective: Some(ObjectiveSpec::Linear { c: vec![1.0, 0.5] }),
        seed: 0,
        known_interior: Some(Point::new(vec![0.0, 0.0])?),
        known_minimizer: None,
    };
    let problem_path = dir.path().join("problem.json");
    spec.write_json_file(&problem_path)?;
    println!("problem.json:\n{}\n", spec.to_json()?);

    let amalgamator: Amalgamator =
        serde_json::from_str(r#"{ "strings": [[1,2,3],[2]], "weights": [0.7,0.3] }"#)
            .map_err(dsap::Error::from)?;

    // Run from the parsed file with the parsed plan.
    let parsed = ProblemSpec::read_json_file(&problem_path)?;
    let config = RunConfig {
        plan: PlanChoice::Custom(amalgamator),
        stop: StopRule::new(1e-9, 10_000, 0.0)?,
        seed: 4,
        ..RunConfig::default()
    };
    let mut trace = run_feasibility(&parsed, &config, None)?;
    let interior = Point::new(vec![0.0, 0.0])?;
    trace.attach_ref_distances(&[("interior", &interior)])?;

    let trace_path = dir.path().join("trace.csv");
    trace.write_csv_file(&trace_path)?;
    let csv = std::fs::read_to_string(&trace_path)?;
    println!("trace.csv ({} rows):", trace.len());
    for line in csv.lines().take(4) {
        println!("  {line}");
    }
    println!("  ...");

    // Round-trip: the parsed trace carries everything diagnostics need.
    let back = Trace::read_csv_file(&trace_path)?;
    let report = check_fejer(&back, &ReferencePoint::feasible("interior", interior), false)?;
    println!(
        "\nread back {} records (thinned: {}), monotone toward interior: {}",
        back.len(),
        back.is_thinned(),
        report.passed
    );
    Ok(())
}
