//! The same feasibility problem under different string-averaging plans:
//! fully sequential, fully simultaneous, and a custom two-string mix.
//!
//! Run with: cargo run --example plans_compared

use dsap::feasibility::{run_dsap, PlanSchedule, StopRule};
use dsap::geometry::Point;
use dsap::harness::gen_consistent_halfspaces;
use dsap::strings::{validate_m_star, Amalgamator, IndexVector, MStarParams};

fn main() -> dsap::Result<()> {
    let spec = gen_consistent_halfspaces(4, 8, 7, 0.05);
    let family = spec.family();
    let m = family.len();
    let x0 = Point::new(vec![2.5, -2.5, 2.5, -2.5])?;
    let stop = StopRule::new(1e-9, 50_000, 0.0)?;

    // Two strings covering the first and second half of the indices.
    let halves = Amalgamator::new(
        vec![
            IndexVector::new((1..=m / 2).collect())?,
            IndexVector::new((m / 2 + 1..=m).collect())?,
        ],
        vec![0.5, 0.5],
    )?;
    let params = MStarParams::for_family_size(m);
    assert!(validate_m_star(&halves, &params, m));

    let plans = [
        ("kaczmarz (one full string)", PlanSchedule::kaczmarz(m)),
        ("cimmino (m singletons)", PlanSchedule::cimmino(m)),
        ("two half strings", PlanSchedule::constant(halves, params)),
    ];
    for (name, plan) in plans {
        let trace = run_dsap(family, &plan, &x0, &stop)?;
        println!(
            "{name:<28} iterations {:<6} final violation {:.3e}",
            trace.final_record().k,
            trace.final_record().max_violation
        );
    }
    Ok(())
}
