//! Dynamic string-averaging projection methods for convex feasibility
//! problems, their superiorized version, and diagnostics that check the
//! promised monotonicity behavior on desk-scale instances.
//!
//! The building blocks, bottom up:
//!
//! - [`geometry`]: points, four exactly-projectable convex set kinds
//!   (hyperplane, halfspace, ball, box), and constraint families.
//! - [`strings`]: index vectors, string operators, amalgamators, and the
//!   admissibility class that bounds string lengths and weights.
//! - [`feasibility`]: the projection run `x^{k+1} = P_{Omega_k,w_k}(x^k)`
//!   with per-iteration plan schedules, its bounded-perturbation variant,
//!   stopping rules, and trace capture.
//! - [`superiorize`]: convex objectives with subgradient oracles, summable
//!   step schedules, and the superiorized run that interleaves objective-
//!   reducing steps with the projections.
//! - [`diagnostics`]: post-hoc Fejér / strict Fejér monotonicity checks,
//!   the convergence dichotomy verdict, and objective-gap reporting.
//! - [`harness`]: seeded problem generators with certified reference
//!   points, brute-force oracles, file formats, the CLI, and the
//!   acceptance battery behind `dsap suite`.
//!
//! Every run is deterministic given its seeds: all randomness flows
//! through per-purpose ChaCha8 streams, and CSV/JSON emission uses
//! shortest round-trip float formatting, so identical commands produce
//! byte-identical outputs.
//!
//! See the `examples/` directory for one runnable walk-through per major
//! capability.

pub mod diagnostics;
pub mod error;
pub mod feasibility;
pub mod geometry;
pub mod harness;
pub mod strings;
pub mod superiorize;

pub use diagnostics::{
    check_fejer, dichotomy_report, fit_c0, superiority_gap, DichotomyReport, FejerReport,
    ReferencePoint, Verdict,
};
pub use error::{Error, Result};
pub use feasibility::{
    dsap_step, run_dsap, run_perturbed_dsap, PerturbationSchedule, PlanSchedule, StopReason,
    StopRule, Trace,
};
pub use geometry::{ConstraintFamily, ConvexSet, Point};
pub use strings::{
    apply_amalgamator, apply_string, cimmino_plan, kaczmarz_plan, validate_fit, validate_m_star,
    Amalgamator, IndexVector, MStarParams,
};
pub use superiorize::{
    make_beta_schedule, negative_unit_subgradient, run_superiorized_dsap, superiorized_inner_loop,
    BetaSchedule, InnerLoopPlan, Objective,
};
