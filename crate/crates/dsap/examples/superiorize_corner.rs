//! Superiorization on the corner benchmark: minimize `x1 + x2` over
//! `x >= (1,1)` by interleaving negative-subgradient steps with the
//! projection method. The plain run, started at the feasible point
//! (3,3), goes nowhere; the superiorized run walks the objective down to
//! the corner.
//!
//! Run with: cargo run --example superiorize_corner

use dsap::diagnostics::{dichotomy_report, superiority_gap};
use dsap::feasibility::{run_dsap, PlanSchedule, StopRule};
use dsap::geometry::Point;
use dsap::harness::gen_box_corner;
use dsap::superiorize::{make_beta_schedule, run_superiorized_dsap, InnerLoopPlan};

fn main() -> dsap::Result<()> {
    let spec = gen_box_corner(2);
    let family = spec.family();
    let objective = spec.objective()?.expect("corner problem has an objective");
    let refs = spec.reference_points()?;
    let minimizer = refs.iter().find(|r| r.label == "minimizer").unwrap();

    let plan = PlanSchedule::kaczmarz(family.len());
    let x0 = Point::new(vec![3.0, 3.0])?;
    let stop = StopRule::new(1e-8, 4000, 0.0)?;

    // Plain run: x0 is already feasible, so it stops immediately.
    let mut plain = run_dsap(family, &plan, &x0, &stop)?;
    plain.attach_phi(&objective)?;
    println!(
        "plain:        k={} phi={}",
        plain.final_record().k,
        plain.final_phi().unwrap()
    );

    // Superiorized run: steps eta0 * rho^l along -c/||c||, one per outer
    // iteration, then the projection step.
    let beta = make_beta_schedule(1.0, 0.99)?;
    let inner = InnerLoopPlan::constant(1)?;
    let superiorized =
        run_superiorized_dsap(family, &plan, &objective, beta, &inner, &x0, &stop, 1e-12)?;
    println!(
        "superiorized: k={} phi={} violation={:.3e}",
        superiorized.final_record().k,
        superiorized.final_phi().unwrap(),
        superiorized.final_record().max_violation
    );

    let gap = superiority_gap(&plain, &superiorized)?;
    println!("superiority gap (plain phi - superiorized phi): {gap}");

    // Where did the run land relative to the true minimum (phi* = 2)?
    let verdict = dichotomy_report(&superiorized, minimizer, 1e-3)?;
    println!(
        "dichotomy verdict: {:?} (final phi {}, reference phi {})",
        verdict.verdict, verdict.phi_final, verdict.phi_reference
    );
    Ok(())
}
