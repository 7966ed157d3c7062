//! Convex objectives with subgradient oracles, summable step schedules,
//! and the superiorized version of the string-averaging run.
//!
//! Each outer iteration interleaves `N_k` objective-reducing perturbation
//! steps along negative unit subgradients, with step sizes consumed from
//! one summable sequence, before the usual projection step. Feasibility
//! in the limit is inherited from bounded perturbation resilience; the
//! objective steps only steer.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{
    check_run_inputs, plan_amalgamator, PlanSchedule, StallTracker, StopReason, StopRule, Trace,
    TraceRecord,
};
use crate::geometry::{ConstraintFamily, Point};
use crate::strings::apply_amalgamator_unchecked;

/// Once the next step size falls at or below this, the remaining
/// perturbation budget is numerically irrelevant and the violation stop
/// applies exactly as in a plain run.
pub const BETA_EXHAUSTED: f64 = 1e-16;

/// A convex function with value and subgradient oracles.
///
/// Built-ins are convex by construction; custom oracles assert convexity
/// on the caller's side. Subgradient selection at kinks is deterministic:
/// the one-norm takes zero on zero coordinates, max-of-linear takes the
/// lowest-index active piece.
#[derive(Clone)]
pub struct Objective {
    kind: ObjectiveKind,
    label: String,
}

#[derive(Clone)]
enum ObjectiveKind {
    Linear {
        c: Point,
    },
    Quadratic {
        center: Point,
    },
    OneNorm,
    MaxLinear {
        pieces: Vec<(Point, f64)>,
    },
    Custom {
        value: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
        subgradient: Arc<dyn Fn(&Point) -> Point + Send + Sync>,
    },
}

impl std::fmt::Debug for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Objective").field("label", &self.label).finish()
    }
}

impl Objective {
    /// `phi(x) = <c, x>`.
    pub fn linear(c: Point) -> Self {
        Self {
            kind: ObjectiveKind::Linear { c },
            label: "linear".into(),
        }
    }

    /// `phi(x) = ||x - r||^2`.
    pub fn quadratic(center: Point) -> Self {
        Self {
            kind: ObjectiveKind::Quadratic { center },
            label: "quadratic".into(),
        }
    }

    /// `phi(x) = ||x||_1`.
    pub fn one_norm() -> Self {
        Self {
            kind: ObjectiveKind::OneNorm,
            label: "one_norm".into(),
        }
    }

    /// `phi(x) = max_i <c_i, x> + d_i`.
    pub fn max_linear(pieces: Vec<(Point, f64)>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::Objective("max_linear needs at least one piece".into()));
        };
        let dim = first.0.dim();
        for (i, (c, d)) in pieces.iter().enumerate() {
            if c.dim() != dim {
                return Err(Error::Objective(format!(
                    "piece {i} has dimension {}, expected {dim}",
                    c.dim()
                )));
            }
            if !d.is_finite() {
                return Err(Error::Objective(format!("piece {i} has non-finite offset {d}")));
            }
        }
        Ok(Self {
            kind: ObjectiveKind::MaxLinear { pieces },
            label: "max_linear".into(),
        })
    }

    /// Caller-supplied oracles; convexity is asserted by the caller.
    pub fn custom(
        label: impl Into<String>,
        value: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
        subgradient: Arc<dyn Fn(&Point) -> Point + Send + Sync>,
    ) -> Self {
        Self {
            kind: ObjectiveKind::Custom { value, subgradient },
            label: label.into(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, x: &Point) -> Result<f64> {
        let v = match &self.kind {
            ObjectiveKind::Linear { c } => {
                self.check_dim(c.dim(), x)?;
                c.dot(x)
            }
            ObjectiveKind::Quadratic { center } => {
                self.check_dim(center.dim(), x)?;
                x.dist_sq(center)
            }
            ObjectiveKind::OneNorm => x.iter().map(|v| v.abs()).sum(),
            ObjectiveKind::MaxLinear { pieces } => {
                self.check_dim(pieces[0].0.dim(), x)?;
                pieces
                    .iter()
                    .map(|(c, d)| c.dot(x) + d)
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            ObjectiveKind::Custom { value, .. } => value(x),
        };
        if !v.is_finite() {
            return Err(Error::Objective(format!(
                "objective '{}' returned non-finite value {v}",
                self.label
            )));
        }
        Ok(v)
    }

    /// Some member of the subgradient set at `x`, selected by the
    /// deterministic kink rules above.
    pub fn subgradient(&self, x: &Point) -> Result<Point> {
        let s = match &self.kind {
            ObjectiveKind::Linear { c } => {
                self.check_dim(c.dim(), x)?;
                c.clone()
            }
            ObjectiveKind::Quadratic { center } => {
                self.check_dim(center.dim(), x)?;
                x.sub(center).scale(2.0)
            }
            ObjectiveKind::OneNorm => Point::new(
                x.iter()
                    .map(|&v| {
                        if v > 0.0 {
                            1.0
                        } else if v < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            )?,
            ObjectiveKind::MaxLinear { pieces } => {
                self.check_dim(pieces[0].0.dim(), x)?;
                let mut best = 0;
                let mut best_val = pieces[0].0.dot(x) + pieces[0].1;
                for (i, (c, d)) in pieces.iter().enumerate().skip(1) {
                    let val = c.dot(x) + d;
                    if val > best_val {
                        best = i;
                        best_val = val;
                    }
                }
                pieces[best].0.clone()
            }
            ObjectiveKind::Custom { subgradient, .. } => subgradient(x),
        };
        if s.dim() != x.dim() {
            return Err(Error::Objective(format!(
                "objective '{}' returned a subgradient of dimension {}, expected {}",
                self.label,
                s.dim(),
                x.dim()
            )));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::Objective(format!(
                "objective '{}' returned a non-finite subgradient entry",
                self.label
            )));
        }
        Ok(s)
    }

    fn check_dim(&self, expected: usize, x: &Point) -> Result<()> {
        if x.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// Serializable form, available for the built-in kinds only.
    pub fn to_spec(&self) -> Option<ObjectiveSpec> {
        match &self.kind {
            ObjectiveKind::Linear { c } => Some(ObjectiveSpec::Linear { c: c.clone().into() }),
            ObjectiveKind::Quadratic { center } => Some(ObjectiveSpec::Quadratic {
                r: center.clone().into(),
            }),
            ObjectiveKind::OneNorm => Some(ObjectiveSpec::OneNorm),
            ObjectiveKind::MaxLinear { pieces } => Some(ObjectiveSpec::MaxLinear {
                pieces: pieces
                    .iter()
                    .map(|(c, d)| PieceSpec {
                        c: c.clone().into(),
                        d: *d,
                    })
                    .collect(),
            }),
            ObjectiveKind::Custom { .. } => None,
        }
    }
}

/// Wire form of the built-in objectives, as stored in problem files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    Linear { c: Vec<f64> },
    Quadratic { r: Vec<f64> },
    OneNorm,
    MaxLinear { pieces: Vec<PieceSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceSpec {
    pub c: Vec<f64>,
    pub d: f64,
}

impl ObjectiveSpec {
    pub fn to_objective(&self) -> Result<Objective> {
        match self {
            ObjectiveSpec::Linear { c } => Ok(Objective::linear(Point::new(c.clone())?)),
            ObjectiveSpec::Quadratic { r } => Ok(Objective::quadratic(Point::new(r.clone())?)),
            ObjectiveSpec::OneNorm => Ok(Objective::one_norm()),
            ObjectiveSpec::MaxLinear { pieces } => Objective::max_linear(
                pieces
                    .iter()
                    .map(|p| Ok((Point::new(p.c.clone())?, p.d)))
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

/// `-s/||s||` for some oracle subgradient `s`, or the zero vector when
/// `||s|| <= zero_tol` (the numeric stand-in for `0` being a subgradient).
pub fn negative_unit_subgradient(obj: &Objective, x: &Point, zero_tol: f64) -> Result<Point> {
    if !(zero_tol > 0.0 && zero_tol.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "zero_tol must be positive and finite, got {zero_tol}"
        )));
    }
    let s = obj.subgradient(x)?;
    let n = s.norm();
    if n <= zero_tol {
        Ok(Point::zeros(x.dim()))
    } else {
        Ok(s.scale(-1.0 / n))
    }
}

/// Geometric step sequence `eta0 * rho^l` with a single cursor advanced
/// once per consumption, across all outer iterations of a run. Partial
/// sums stay below `eta0 / (1 - rho)`, and every emission lies in `]0, 1]`
/// until the terms underflow to zero (numerically exhausted).
#[derive(Debug, Clone)]
pub struct BetaSchedule {
    eta0: f64,
    rho: f64,
    cursor: u64,
}

impl BetaSchedule {
    pub fn new(eta0: f64, rho: f64) -> Result<Self> {
        if !(eta0 > 0.0 && eta0 <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "eta0 must lie in ]0, 1], got {eta0}"
            )));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "rho must lie in ]0, 1[, got {rho}"
            )));
        }
        Ok(Self {
            eta0,
            rho,
            cursor: 0,
        })
    }

    /// The next step size without advancing the cursor.
    pub fn peek(&self) -> f64 {
        self.eta0 * self.rho.powi(self.cursor.min(i32::MAX as u64) as i32)
    }

    pub fn next_beta(&mut self) -> f64 {
        let b = self.peek();
        self.cursor += 1;
        b
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    /// Closed-form bound on the sum of all emissions.
    pub fn total_bound(&self) -> f64 {
        self.eta0 / (1.0 - self.rho)
    }
}

/// Convenience alias for [`BetaSchedule::new`].
pub fn make_beta_schedule(eta0: f64, rho: f64) -> Result<BetaSchedule> {
    BetaSchedule::new(eta0, rho)
}

/// Chooses how many perturbation steps `N_k in {1, ..., N}` each outer
/// iteration performs.
#[derive(Debug, Clone)]
pub struct InnerLoopPlan {
    cap: u32,
    rule: InnerRule,
}

#[derive(Debug, Clone)]
enum InnerRule {
    Constant,
    Cycle,
    SeededRandom { seed: u64 },
}

impl InnerLoopPlan {
    fn checked(cap: u32, rule: InnerRule) -> Result<Self> {
        if cap == 0 {
            return Err(Error::InvalidConfig("inner loop cap must be at least 1".into()));
        }
        Ok(Self { cap, rule })
    }

    /// `N_k = N` for every iteration.
    pub fn constant(cap: u32) -> Result<Self> {
        Self::checked(cap, InnerRule::Constant)
    }

    /// `N_k` cycles through `1, 2, ..., N`.
    pub fn cycle(cap: u32) -> Result<Self> {
        Self::checked(cap, InnerRule::Cycle)
    }

    /// `N_k` drawn uniformly from `{1, ..., N}` per iteration, seeded.
    pub fn seeded_random(cap: u32, seed: u64) -> Result<Self> {
        Self::checked(cap, InnerRule::SeededRandom { seed })
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn n_at(&self, k: u64) -> u32 {
        match &self.rule {
            InnerRule::Constant => self.cap,
            InnerRule::Cycle => (k % self.cap as u64) as u32 + 1,
            InnerRule::SeededRandom { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed ^ k.wrapping_mul(crate::feasibility::SEED_GAMMA),
                );
                rng.random_range(1..=self.cap)
            }
        }
    }
}

/// Local Lipschitz data used by the descent diagnostics: a radius
/// `r0 in ]0, 1]` and a constant `lipschitz >= 1` bounding the objective's
/// variation near the reference minimizer. Never consumed by the
/// algorithm itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConstants {
    pub r0: f64,
    pub lipschitz: f64,
}

impl AnalysisConstants {
    pub fn new(r0: f64, lipschitz: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0 <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "r0 must lie in ]0, 1], got {r0}"
            )));
        }
        if !(lipschitz >= 1.0 && lipschitz.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lipschitz must be at least 1, got {lipschitz}"
            )));
        }
        Ok(Self { r0, lipschitz })
    }
}

/// Runs `n_k` perturbation steps from `y_k`, consuming one step size per
/// pass. Returns the end point and the sum of consumed step sizes; the
/// displacement never exceeds that sum. Steps along a zero direction
/// leave the point untouched (bit for bit) while still consuming their
/// step size.
pub fn superiorized_inner_loop(
    obj: &Objective,
    beta: &mut BetaSchedule,
    y_k: &Point,
    n_k: u32,
    zero_tol: f64,
) -> Result<(Point, f64)> {
    if n_k == 0 {
        return Err(Error::InvalidConfig("n_k must be at least 1".into()));
    }
    let mut y = y_k.clone();
    let mut consumed = 0.0;
    for _ in 0..n_k {
        let b = beta.next_beta();
        consumed += b;
        let v = negative_unit_subgradient(obj, &y, zero_tol)?;
        if b != 0.0 && !v.is_zero() {
            y = y.add_scaled(b, &v);
        }
    }
    Ok((y, consumed))
}

/// The superiorized run: each outer iteration applies the inner
/// perturbation loop and then one projection step.
///
/// Stopping differs from the plain run in one respect: the violation
/// tolerance only halts the run once the upcoming perturbation is inert —
/// the subgradient direction is zero or the next step size is at most
/// [`BETA_EXHAUSTED`]. Otherwise a feasible start would end the run before
/// any objective reduction happened. Iteration cap and stall checks are
/// unchanged.
#[allow(clippy::too_many_arguments)]
pub fn run_superiorized_dsap(
    family: &ConstraintFamily,
    plan: &PlanSchedule,
    obj: &Objective,
    mut beta: BetaSchedule,
    inner: &InnerLoopPlan,
    x0: &Point,
    stop: &StopRule,
    zero_tol: f64,
) -> Result<Trace> {
    check_run_inputs(family, plan, x0)?;
    let m = family.len();

    let mut y = x0.clone();
    let record = |y: &Point, k: u64| -> Result<TraceRecord> {
        let mut r = TraceRecord::new(k, y.clone(), family.max_violation_unchecked(y));
        r.phi_value = Some(obj.value(y)?);
        Ok(r)
    };
    let mut records = vec![record(&y, 0)?];
    let mut beta_sums = Vec::new();
    let mut displacements = Vec::new();
    let mut stall = StallTracker::new(stop);

    let reason = loop {
        let k = (records.len() - 1) as u64;
        if records.last().unwrap().max_violation <= stop.violation_tol {
            let direction = negative_unit_subgradient(obj, &y, zero_tol)?;
            if direction.is_zero() || beta.peek() <= BETA_EXHAUSTED {
                break StopReason::Converged;
            }
        }
        if k >= stop.max_iters {
            break StopReason::IterationCap;
        }
        if stall.stalled() {
            break StopReason::Stalled;
        }
        let n_k = inner.n_at(k);
        let (perturbed, consumed) = superiorized_inner_loop(obj, &mut beta, &y, n_k, zero_tol)?;
        displacements.push(perturbed.dist(&y));
        beta_sums.push(consumed);
        let am = plan_amalgamator(plan, k, m)?;
        let next = apply_amalgamator_unchecked(&am, family, &perturbed);
        stall.observe(next.dist(&y));
        y = next;
        records.push(record(&y, k + 1)?);
    };

    let mut trace = Trace::new(records, reason);
    trace.beta_sums = Some(beta_sums);
    trace.inner_displacements = Some(displacements);
    trace.objective_label = Some(obj.label().to_string());
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::run_dsap;
    use crate::geometry::ConvexSet;
    use crate::strings::kaczmarz_plan;

    fn p(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    /// `{x : x_j >= 1}` for each coordinate, objective `x_1 + ... + x_J`.
    fn corner_family(dim: usize) -> ConstraintFamily {
        let sets = (0..dim)
            .map(|j| ConvexSet::halfspace(Point::unit(dim, j).scale(-1.0), -1.0).unwrap())
            .collect();
        ConstraintFamily::new(sets).unwrap()
    }

    #[test]
    fn negative_unit_subgradient_examples() {
        let obj = Objective::linear(p(&[3.0, 4.0]));
        // Hand-normalized: -(3,4)/5, so <v, c> = -5 and ||v|| = 1.
        let v = negative_unit_subgradient(&obj, &p(&[7.0, -2.0]), 1e-12).unwrap();
        assert!((v[0] + 0.6).abs() < 1e-15);
        assert!((v[1] + 0.8).abs() < 1e-15);
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert!((v.dot(&p(&[3.0, 4.0])) + 5.0).abs() < 1e-12);

        let constant = Objective::linear(p(&[0.0, 0.0]));
        let z = negative_unit_subgradient(&constant, &p(&[1.0, 1.0]), 1e-12).unwrap();
        assert!(z.is_zero());

        let one_norm = Objective::one_norm();
        let v = negative_unit_subgradient(&one_norm, &p(&[0.0, 3.0]), 1e-12).unwrap();
        assert_eq!(v.as_slice(), &[0.0, -1.0]);
    }

    #[test]
    fn beta_schedule_emits_geometric_terms() {
        let mut beta = make_beta_schedule(1.0, 0.5).unwrap();
        assert_eq!(beta.next_beta(), 1.0);
        assert_eq!(beta.next_beta(), 0.5);
        assert_eq!(beta.next_beta(), 0.25);
        assert_eq!(beta.total_bound(), 2.0);
        assert_eq!(beta.cursor(), 3);

        let slow = make_beta_schedule(0.1, 0.9).unwrap();
        assert!((slow.total_bound() - 1.0).abs() < 1e-12);

        assert!(make_beta_schedule(1.5, 0.5).is_err());
        assert!(make_beta_schedule(0.0, 0.5).is_err());
        assert!(make_beta_schedule(0.5, 1.0).is_err());
    }

    #[test]
    fn beta_partial_sums_stay_below_the_bound() {
        let mut beta = make_beta_schedule(0.7, 0.95).unwrap();
        let bound = beta.total_bound();
        let mut sum = 0.0;
        for _ in 0..10_000 {
            sum += beta.next_beta();
            assert!(sum <= bound + 1e-9);
        }
    }

    #[test]
    fn inner_loop_single_step_arithmetic() {
        // Frozen by hand: y - (0.5/sqrt(2)) * (1,1).
        let obj = Objective::linear(p(&[1.0, 1.0]));
        let mut beta = make_beta_schedule(0.5, 0.5).unwrap();
        let (y, consumed) =
            superiorized_inner_loop(&obj, &mut beta, &p(&[3.0, 3.0]), 1, 1e-12).unwrap();
        assert!((y[0] - 2.646446609406726).abs() < 1e-12);
        assert!((y[1] - 2.646446609406726).abs() < 1e-12);
        assert_eq!(consumed, 0.5);
        let before = obj.value(&p(&[3.0, 3.0])).unwrap();
        let after = obj.value(&y).unwrap();
        assert!((before - 6.0).abs() < 1e-15);
        assert!((after - 5.292893218813452).abs() < 1e-12);
    }

    #[test]
    fn inner_loop_constant_objective_consumes_but_does_not_move() {
        let obj = Objective::linear(p(&[0.0, 0.0]));
        let mut beta = make_beta_schedule(1.0, 0.5).unwrap();
        let y0 = p(&[1.5, -2.5]);
        let (y, consumed) = superiorized_inner_loop(&obj, &mut beta, &y0, 3, 1e-12).unwrap();
        assert_eq!(y, y0);
        assert_eq!(consumed, 1.0 + 0.5 + 0.25);
        assert_eq!(beta.cursor(), 3);
    }

    #[test]
    fn inner_loop_displacement_respects_the_beta_budget() {
        let obj = Objective::quadratic(p(&[0.0, 0.0, 0.0]));
        let mut beta = make_beta_schedule(1.0, 0.5).unwrap();
        let y0 = p(&[4.0, -1.0, 2.0]);
        let (y, consumed) = superiorized_inner_loop(&obj, &mut beta, &y0, 2, 1e-12).unwrap();
        assert!(y.dist(&y0) <= consumed + 1e-12);
        assert_eq!(consumed, 1.5);
    }

    #[test]
    fn superiorized_run_beats_the_plain_run_on_the_corner_problem() {
        let family = corner_family(2);
        let obj = Objective::linear(p(&[1.0, 1.0]));
        let plan = PlanSchedule::kaczmarz(2);
        let stop = StopRule::new(1e-6, 4000, 0.0).unwrap();
        let x0 = p(&[3.0, 3.0]);

        // Plain run halts at once: the start is already feasible.
        let plain = run_dsap(&family, &plan, &x0, &stop).unwrap();
        assert_eq!(plain.len(), 1);

        let beta = make_beta_schedule(1.0, 0.99).unwrap();
        let inner = InnerLoopPlan::constant(1).unwrap();
        let trace =
            run_superiorized_dsap(&family, &plan, &obj, beta, &inner, &x0, &stop, 1e-12).unwrap();
        let phi_final = trace.final_phi().unwrap();
        assert!(trace.final_record().max_violation <= 1e-6);
        assert!(phi_final < 6.0);
        // The minimum over this family is 2 at (1,1); the run gets there.
        assert!((phi_final - 2.0).abs() < 1e-9, "phi_final = {phi_final}");
    }

    #[test]
    fn constant_objective_run_matches_plain_run_exactly() {
        let family = ConstraintFamily::new(vec![
            ConvexSet::hyperplane(p(&[1.0, 0.5]), 1.0).unwrap(),
            ConvexSet::hyperplane(p(&[-0.25, 1.0]), 0.5).unwrap(),
        ])
        .unwrap();
        let plan = PlanSchedule::cimmino(2);
        let stop = StopRule::new(1e-9, 500, 0.0).unwrap();
        let x0 = p(&[4.0, -3.0]);
        let plain = run_dsap(&family, &plan, &x0, &stop).unwrap();
        let obj = Objective::linear(p(&[0.0, 0.0])).with_label("constant");
        let beta = make_beta_schedule(1.0, 0.9).unwrap();
        let inner = InnerLoopPlan::constant(1).unwrap();
        let sup =
            run_superiorized_dsap(&family, &plan, &obj, beta, &inner, &x0, &stop, 1e-12).unwrap();
        assert_eq!(plain.len(), sup.len());
        for (a, b) in plain.records.iter().zip(&sup.records) {
            assert_eq!(a.iterate, b.iterate);
            assert_eq!(a.max_violation, b.max_violation);
        }
        assert_eq!(plain.stop_reason, sup.stop_reason);
    }

    #[test]
    fn exhausted_schedule_steps_coincide_with_plain_steps() {
        // Drain the schedule until its terms underflow to zero; from then
        // on the inner loop is a no-op and each outer step is exactly a
        // plain projection step.
        let mut beta = make_beta_schedule(1.0, 0.5).unwrap();
        while beta.next_beta() > 0.0 {}
        assert_eq!(beta.peek(), 0.0);

        let family = ConstraintFamily::new(vec![
            ConvexSet::hyperplane(p(&[1.0, 0.0]), 0.0).unwrap(),
            ConvexSet::hyperplane(p(&[1.0, 1.0]), 0.0).unwrap(),
        ])
        .unwrap();
        let obj = Objective::linear(p(&[1.0, 1.0]));
        let y = p(&[0.7, -1.3]);
        let (stepped, consumed) = superiorized_inner_loop(&obj, &mut beta, &y, 2, 1e-12).unwrap();
        assert_eq!(stepped, y);
        assert_eq!(consumed, 0.0);
        let outer = crate::feasibility::dsap_step(&kaczmarz_plan(2), &family, &stepped).unwrap();
        let plain = crate::feasibility::dsap_step(&kaczmarz_plan(2), &family, &y).unwrap();
        for j in 0..2 {
            assert!((outer[j] - plain[j]).abs() <= 1e-15);
        }
    }

    #[test]
    fn inner_plans_produce_in_range_counts() {
        let constant = InnerLoopPlan::constant(4).unwrap();
        let cycle = InnerLoopPlan::cycle(3).unwrap();
        let random = InnerLoopPlan::seeded_random(5, 42).unwrap();
        for k in 0..50 {
            assert_eq!(constant.n_at(k), 4);
            assert_eq!(cycle.n_at(k), (k % 3) as u32 + 1);
            let n = random.n_at(k);
            assert!((1..=5).contains(&n));
            assert_eq!(n, random.n_at(k));
        }
        assert!(InnerLoopPlan::constant(0).is_err());
    }

    #[test]
    fn objective_spec_round_trip() {
        let spec = ObjectiveSpec::MaxLinear {
            pieces: vec![
                PieceSpec {
                    c: vec![1.0, 0.0],
                    d: 0.5,
                },
                PieceSpec {
                    c: vec![0.0, 1.0],
                    d: -0.5,
                },
            ],
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: ObjectiveSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let obj = back.to_objective().unwrap();
        assert_eq!(obj.value(&p(&[2.0, 1.0])).unwrap(), 2.5);
        // Lowest-index active piece at a tie.
        let tie = obj.subgradient(&p(&[0.0, 1.0])).unwrap();
        assert_eq!(tie.as_slice(), &[1.0, 0.0]);

        assert!(Objective::linear(p(&[1.0])).to_spec().is_some());
        let custom = Objective::custom(
            "custom",
            Arc::new(|x: &Point| x.norm()),
            Arc::new(|x: &Point| x.scale(1.0 / x.norm().max(1e-12))),
        );
        assert!(custom.to_spec().is_none());
    }

    #[test]
    fn analysis_constants_ranges() {
        assert!(AnalysisConstants::new(1.0, 1.0).is_ok());
        assert!(AnalysisConstants::new(0.0, 1.0).is_err());
        assert!(AnalysisConstants::new(1.5, 1.0).is_err());
        assert!(AnalysisConstants::new(0.5, 0.5).is_err());
    }

    #[test]
    fn subgradient_inequality_on_sampled_pairs() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let objectives = vec![
            Objective::linear(p(&[1.5, -2.0, 0.5])),
            Objective::quadratic(p(&[0.5, 0.5, -1.0])),
            Objective::one_norm(),
            Objective::max_linear(vec![
                (p(&[1.0, 0.0, 0.0]), 0.0),
                (p(&[0.0, -1.0, 2.0]), 1.0),
            ])
            .unwrap(),
        ];
        for _ in 0..200 {
            let x = p(&[
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            ]);
            let y = p(&[
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            ]);
            for obj in &objectives {
                let s = obj.subgradient(&x).unwrap();
                let lhs = obj.value(&y).unwrap();
                let rhs = obj.value(&x).unwrap() + s.dot(&y.sub(&x));
                assert!(lhs >= rhs - 1e-9, "{}: {lhs} < {rhs}", obj.label());
                // Direct consequence: a value drop larger than delta
                // forces the subgradient to point that strictly uphill.
                let delta = 0.05;
                if obj.value(&x).unwrap() - obj.value(&y).unwrap() > delta {
                    let along = s.dot(&y.sub(&x));
                    assert!(
                        along < -delta + 1e-9,
                        "{}: <s, y-x> = {along} not below {}",
                        obj.label(),
                        -delta
                    );
                }
            }
        }
    }
}
