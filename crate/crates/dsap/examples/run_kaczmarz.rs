//! Feasibility-seeking 101: generate a consistent halfspace family, run
//! the fully-sequential plan, and verify monotone approach toward a
//! certified interior point.
//!
//! Run with: cargo run --example run_kaczmarz

use dsap::diagnostics::check_fejer;
use dsap::feasibility::{run_dsap, PlanSchedule, StopRule};
use dsap::geometry::Point;
use dsap::harness::gen_consistent_halfspaces;

fn main() -> dsap::Result<()> {
    // Ten halfspaces in R^5 with a common interior point, seeded.
    let spec = gen_consistent_halfspaces(5, 10, 42, 0.1);
    let family = spec.family();
    let interior = &spec.reference_points()?[0];

    let plan = PlanSchedule::kaczmarz(family.len());
    let x0 = Point::new(vec![3.0, -2.0, 1.5, 0.0, -3.0])?;
    let stop = StopRule::new(1e-8, 10_000, 0.0)?;

    let trace = run_dsap(family, &plan, &x0, &stop)?;
    println!(
        "start violation {:.3e}, final violation {:.3e} after {} iterations ({:?})",
        trace.records[0].max_violation,
        trace.final_record().max_violation,
        trace.final_record().k,
        trace.stop_reason.unwrap(),
    );

    for record in trace.records.iter().take(5) {
        println!(
            "  k={:<3} violation {:.6e} distance-to-interior {:.6}",
            record.k,
            record.max_violation,
            record.iterate.dist(&interior.point)
        );
    }
    println!("  ...");

    // Distances to any feasible point never increase along the run.
    let report = check_fejer(&trace, interior, false)?;
    println!(
        "monotone toward '{}': {} ({} violations)",
        interior.label, report.passed, report.nonstrict_violations
    );
    Ok(())
}
