//! Bounded perturbation resilience in action: additive perturbations
//! `beta_k v^k` with geometrically decaying step sizes do not break
//! convergence, and the zero schedule reproduces the plain run bit for
//! bit.
//!
//! Run with: cargo run --example perturbation_resilience

use dsap::feasibility::{
    run_dsap, run_perturbed_dsap, DirectionRule, PerturbationSchedule, PlanSchedule, StopRule,
};
use dsap::geometry::Point;
use dsap::harness::gen_consistent_halfspaces;

fn main() -> dsap::Result<()> {
    let spec = gen_consistent_halfspaces(5, 10, 3, 0.1);
    let family = spec.family();
    let plan = PlanSchedule::kaczmarz(family.len());
    let x0 = Point::new(vec![2.0, 2.0, -2.0, -2.0, 2.0])?;
    let stop = StopRule::new(1e-6, 40_000, 0.0)?;

    let plain = run_dsap(family, &plan, &x0, &stop)?;
    println!(
        "unperturbed: {} iterations to violation {:.3e}",
        plain.final_record().k,
        plain.final_record().max_violation
    );

    // beta_k = 0.99^k with seeded random unit directions; total budget
    // sum(beta_k) <= 100.
    let perturb =
        PerturbationSchedule::geometric(1.0, 0.99, DirectionRule::SeededUnit { seed: 11 })?;
    println!(
        "perturbation budget: sum of steps <= {}, direction norms <= {}",
        perturb.summability_bound(),
        perturb.norm_bound()
    );
    let perturbed = run_perturbed_dsap(family, &plan, &perturb, &x0, &stop)?;
    println!(
        "perturbed:   {} iterations to violation {:.3e}",
        perturbed.final_record().k,
        perturbed.final_record().max_violation
    );

    // The zero schedule takes the same code path and the same arithmetic.
    let zeroed = run_perturbed_dsap(family, &plan, &PerturbationSchedule::zero(), &x0, &stop)?;
    let identical = plain.records.len() == zeroed.records.len()
        && plain
            .records
            .iter()
            .zip(&zeroed.records)
            .all(|(a, b)| a.iterate == b.iterate);
    println!("zero perturbation reproduces the plain trace exactly: {identical}");
    Ok(())
}
