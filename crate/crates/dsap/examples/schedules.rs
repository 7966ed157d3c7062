//! Schedule hooks: varying the amalgamator per iteration (constant,
//! cyclic rotation, seeded random, custom), varying the inner-loop count
//! N_k, and watching the step-size budget drain.
//!
//! Run with: cargo run --example schedules

use dsap::feasibility::{run_dsap, PlanRule, PlanSchedule, StopRule};
use dsap::geometry::Point;
use dsap::harness::gen_consistent_halfspaces;
use dsap::strings::{cimmino_plan, kaczmarz_plan, MStarParams};
use dsap::superiorize::{make_beta_schedule, InnerLoopPlan};

fn main() -> dsap::Result<()> {
    let spec = gen_consistent_halfspaces(3, 6, 19, 0.1);
    let family = spec.family();
    let m = family.len();
    let x0 = Point::new(vec![2.0, -2.0, 2.0])?;
    let stop = StopRule::new(1e-9, 20_000, 0.0)?;
    let params = MStarParams::for_family_size(m);

    // Any rule mapping the iteration index to an admissible amalgamator
    // works; inadmissible ones abort the run with the offending index.
    let pool = vec![kaczmarz_plan(m), cimmino_plan(m)];
    let plans = [
        ("constant kaczmarz", PlanSchedule::kaczmarz(m)),
        (
            "cycle kaczmarz/cimmino",
            PlanSchedule::new(PlanRule::Cycle(pool.clone()), params)?,
        ),
        (
            "seeded random pick",
            PlanSchedule::new(PlanRule::Random { pool, seed: 5 }, params)?,
        ),
        (
            "custom hook (reversed string every 10th)",
            PlanSchedule::new(
                PlanRule::Custom(Box::new(move |k| {
                    if k % 10 == 9 {
                        let reversed: Vec<usize> = (1..=m).rev().collect();
                        dsap::strings::Amalgamator::new(
                            vec![dsap::strings::IndexVector::new(reversed).unwrap()],
                            vec![1.0],
                        )
                        .unwrap()
                    } else {
                        kaczmarz_plan(m)
                    }
                })),
                params,
            )?,
        ),
    ];
    for (name, plan) in plans {
        let trace = run_dsap(family, &plan, &x0, &stop)?;
        println!(
            "{name:<42} iterations {:<6} final violation {:.3e}",
            trace.final_record().k,
            trace.final_record().max_violation
        );
    }

    // Inner-loop count rules for superiorized runs.
    println!("\nN_k over the first 8 iterations:");
    for (name, plan) in [
        ("constant N=3", InnerLoopPlan::constant(3)?),
        ("cycle 1..=3", InnerLoopPlan::cycle(3)?),
        ("seeded random in 1..=3", InnerLoopPlan::seeded_random(3, 2)?),
    ] {
        let counts: Vec<u32> = (0..8).map(|k| plan.n_at(k)).collect();
        println!("  {name:<24} {counts:?}");
    }

    // One summable step budget feeds all inner steps of a run.
    let mut beta = make_beta_schedule(0.5, 0.8)?;
    let emissions: Vec<f64> = (0..6).map(|_| beta.next_beta()).collect();
    println!(
        "\nstep sizes {:?}\n  consumed so far {}, total budget bound {}",
        emissions,
        emissions.iter().sum::<f64>(),
        beta.total_bound()
    );
    Ok(())
}
