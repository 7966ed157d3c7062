//! Brute-force minimization oracles: exhaustive grid search and a long
//! projected-subgradient run, both used to mint certified minimizer
//! reference points for diagnostics.
//!
//! Run with: cargo run --release --example minimize_oracle

use dsap::harness::{gen_box_corner, mint_minimal_reference, oracle_minimize, OracleBudget};

fn main() -> dsap::Result<()> {
    let spec = gen_box_corner(2);
    let closed_form = spec.known_minimizer.as_ref().unwrap();
    println!(
        "closed form: minimizer {:?}, phi {}",
        closed_form.point.as_slice(),
        closed_form.phi.unwrap()
    );

    // Grid mode scans [0, 2]^2 at step 1e-3, keeping feasibility within
    // twice the step.
    let grid = oracle_minimize(&spec, OracleBudget::Grid { lo: 0.0, hi: 2.0 })?;
    println!(
        "grid oracle: point {:?}, phi {}, violation {:.3e} (within tol: {})",
        grid.point.as_slice(),
        grid.phi,
        grid.violation,
        grid.within_tol
    );

    // Long-run mode: diminishing-step subgradient descent with cyclic
    // projection sweeps after every step.
    let long = oracle_minimize(&spec, OracleBudget::LongRun { steps: 5000 })?;
    println!(
        "long-run oracle: point {:?}, phi {}, violation {:.3e}",
        long.point.as_slice(),
        long.phi,
        long.violation
    );

    // Oracle results mint `minimal`-kind reference points directly.
    let reference = mint_minimal_reference(&spec, OracleBudget::Grid { lo: 0.0, hi: 2.0 }, "m")?;
    println!(
        "minted reference '{}' (kind {:?}) with phi {}",
        reference.label,
        reference.kind,
        reference.phi.unwrap()
    );
    Ok(())
}
