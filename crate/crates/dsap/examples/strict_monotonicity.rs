//! Strict monotone approach toward the solution set: when a superiorized
//! run stops short of the minimum, its distances to the minimizer drop
//! strictly from some index on, and the per-iteration drops are bounded
//! below by a positive constant times the consumed step sizes.
//!
//! Run with: cargo run --example strict_monotonicity

use dsap::diagnostics::{check_fejer, fit_c0};
use dsap::feasibility::{PlanSchedule, StopRule};
use dsap::geometry::Point;
use dsap::harness::gen_box_corner;
use dsap::superiorize::{make_beta_schedule, run_superiorized_dsap, InnerLoopPlan};

fn main() -> dsap::Result<()> {
    let spec = gen_box_corner(2);
    let family = spec.family();
    let objective = spec.objective()?.expect("corner problem has an objective");
    let refs = spec.reference_points()?;
    let minimizer = refs.iter().find(|r| r.label == "minimizer").unwrap();

    // A fast-decaying step budget (total 2) cannot reach the corner from
    // (3,3): the run ends above the minimum.
    let plan = PlanSchedule::kaczmarz(family.len());
    let beta = make_beta_schedule(1.0, 0.5)?;
    let inner = InnerLoopPlan::constant(1)?;
    let x0 = Point::new(vec![3.0, 3.0])?;
    let stop = StopRule::new(1e-8, 40, 0.0)?.with_stall_window(0);
    let trace =
        run_superiorized_dsap(family, &plan, &objective, beta, &inner, &x0, &stop, 1e-12)?;
    println!(
        "final phi {} vs minimum {}",
        trace.final_phi().unwrap(),
        minimizer.phi.unwrap()
    );

    let strict = check_fejer(&trace, minimizer, true)?;
    println!(
        "strict decrease toward '{}': {} from k0 = {:?}",
        minimizer.label, strict.passed, strict.k0
    );

    // The trace carries its per-iteration step-size sums; fitting the
    // decrease constant certifies the squared-distance drop inequality.
    let sums = trace.beta_sums.clone().expect("superiorized trace");
    let fit = fit_c0(&trace, minimizer, &sums, strict.k0.unwrap())?;
    println!(
        "fitted decrease constant c0 = {} ({} transitions skipped)",
        fit.c0,
        fit.skipped.len()
    );

    for k in [0usize, 1, 2, 10, 30] {
        let d = trace.records[k].iterate.dist(&minimizer.point);
        println!("  k={k:<3} distance to minimizer {d:.12}");
    }
    Ok(())
}
