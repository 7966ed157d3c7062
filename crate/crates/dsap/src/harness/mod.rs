//! Problem generators with certified reference points, brute-force
//! minimization oracles, run configuration, CLI, and persistence.

pub mod cli;
pub mod reference;
pub mod suite;

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::ReferencePoint;
use crate::error::{Error, Result};
use crate::feasibility::{PlanSchedule, StopRule, Trace};
use crate::geometry::{ConstraintFamily, ConvexSet, Point};
use crate::strings::{Amalgamator, MStarParams};
use crate::superiorize::{
    run_superiorized_dsap, BetaSchedule, InnerLoopPlan, Objective, ObjectiveSpec,
};

/// How a stored minimizer was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimizerProvenance {
    ClosedForm,
    Oracle,
}

/// A known minimizer of the problem's objective over the feasible set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownMinimizer {
    pub point: Point,
    pub provenance: MinimizerProvenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

/// A desk-scale problem instance: a constraint family, an optional
/// objective, and optional certified reference points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dimension: usize,
    pub sets: ConstraintFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_interior: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_minimizer: Option<KnownMinimizer>,
}

/// Feasibility slack allowed of a stored interior point.
pub const INTERIOR_TOL: f64 = 1e-10;
/// Feasibility slack allowed of a stored minimizer.
pub const MINIMIZER_TOL: f64 = 1e-8;

impl ProblemSpec {
    /// Consistency of all stored parts: dimensions agree and the
    /// certified points are feasible to their tolerances.
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if self.sets.dim() != self.dimension {
            return Err(Error::InvalidConfig(format!(
                "sets have dimension {}, problem declares {}",
                self.sets.dim(),
                self.dimension
            )));
        }
        if let Some(obj) = &self.objective {
            let objective = obj.to_objective()?;
            objective.value(&Point::zeros(self.dimension)).map_err(|e| {
                Error::InvalidConfig(format!("objective incompatible with problem dimension: {e}"))
            })?;
        }
        if let Some(z) = &self.known_interior {
            let viol = self.sets.max_violation(z)?;
            if viol > INTERIOR_TOL {
                return Err(Error::InvalidConfig(format!(
                    "known_interior violates the constraints by {viol}"
                )));
            }
        }
        if let Some(min) = &self.known_minimizer {
            let viol = self.sets.max_violation(&min.point)?;
            if viol > MINIMIZER_TOL {
                return Err(Error::InvalidConfig(format!(
                    "known_minimizer violates the constraints by {viol}"
                )));
            }
        }
        Ok(())
    }

    pub fn family(&self) -> &ConstraintFamily {
        &self.sets
    }

    pub fn objective(&self) -> Result<Option<Objective>> {
        self.objective.as_ref().map(|o| o.to_objective()).transpose()
    }

    /// The labelled reference points this problem certifies: the interior
    /// point as `interior`, the minimizer as `minimizer` (with its
    /// objective value attached when computable).
    pub fn reference_points(&self) -> Result<Vec<ReferencePoint>> {
        let mut refs = Vec::new();
        if let Some(z) = &self.known_interior {
            refs.push(ReferencePoint::feasible("interior", z.clone()));
        }
        if let Some(min) = &self.known_minimizer {
            let phi = match min.phi {
                Some(phi) => Some(phi),
                None => self
                    .objective()?
                    .map(|obj| obj.value(&min.point))
                    .transpose()?,
            };
            let mut r = ReferencePoint::minimal("minimizer", min.point.clone(), phi.unwrap_or(0.0));
            r.phi = phi;
            refs.push(r);
        }
        Ok(refs)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read_json_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Draws `m` halfspaces around a random interior point `z`: unit normals
/// `a_i`, offsets `b_i = <a_i, z> + margin_i` with `margin_i` uniform in
/// `[margin, 2*margin]`. The intersection is nonempty by construction and
/// `z` is recorded as the certified interior point. Deterministic per seed.
pub fn gen_consistent_halfspaces(dim: usize, m: usize, seed: u64, margin: f64) -> ProblemSpec {
    assert!(dim >= 1 && m >= 1 && margin >= 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Point::new((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .expect("interior draw is finite");
    let mut sets = Vec::with_capacity(m);
    for _ in 0..m {
        let normal = loop {
            let raw = Point::new(
                (0..dim)
                    .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect(),
            )
            .expect("normal draw is finite");
            let n = raw.norm();
            if n > 1e-9 {
                break raw.scale(1.0 / n);
            }
        };
        let slack = rng.random_range(margin..=(2.0 * margin));
        let offset = normal.dot(&z) + slack;
        sets.push(ConvexSet::halfspace(normal, offset).expect("unit normal is nonzero"));
    }
    let family = ConstraintFamily::new(sets).expect("m >= 1");
    debug_assert!(family.max_violation(&z).unwrap() <= INTERIOR_TOL);
    ProblemSpec {
        dimension: dim,
        sets: family,
        objective: None,
        seed,
        known_interior: Some(z),
        known_minimizer: None,
    }
}

/// The corner benchmark: constraints `x_j >= 1` for every coordinate and
/// the objective `x_1 + ... + x_J`, minimized at the corner `(1, ..., 1)`
/// with value `J` (componentwise forced, hence closed-form provenance).
pub fn gen_box_corner(dim: usize) -> ProblemSpec {
    assert!(dim >= 1);
    let sets = (0..dim)
        .map(|j| {
            ConvexSet::halfspace(Point::unit(dim, j).scale(-1.0), -1.0).expect("unit normal")
        })
        .collect();
    let ones = Point::new(vec![1.0; dim]).unwrap();
    ProblemSpec {
        dimension: dim,
        sets: ConstraintFamily::new(sets).expect("dim >= 1"),
        objective: Some(ObjectiveSpec::Linear { c: vec![1.0; dim] }),
        seed: 0,
        known_interior: Some(Point::new(vec![2.0; dim]).unwrap()),
        known_minimizer: Some(KnownMinimizer {
            point: ones,
            provenance: MinimizerProvenance::ClosedForm,
            phi: Some(dim as f64),
        }),
    }
}

/// Search budget for [`oracle_minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleBudget {
    /// Exhaustive scan of `[lo, hi]^J` at the dimension-graded step
    /// (1e-3 up to 2-D, 1e-2 for 3..=5-D), keeping feasibility within
    /// twice the step. Only available for `J <= 5`.
    Grid { lo: f64, hi: f64 },
    /// Projected subgradient descent with steps `1/sqrt(n)`, projecting
    /// through 200 cyclic projection sweeps per step.
    LongRun { steps: u64 },
}

/// Outcome of a brute-force minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub point: Point,
    pub phi: f64,
    pub violation: f64,
    /// Feasibility tolerance the oracle aimed for.
    pub tol: f64,
    /// False flags a result that never reached the tolerance.
    pub within_tol: bool,
}

/// Grid step for the exhaustive mode, graded by dimension.
pub fn grid_step(dim: usize) -> f64 {
    if dim <= 2 {
        1e-3
    } else {
        1e-2
    }
}

/// Brute-force minimization of the problem's objective over its feasible
/// set; mints `minimal` reference points.
pub fn oracle_minimize(spec: &ProblemSpec, budget: OracleBudget) -> Result<OracleResult> {
    let objective = spec.objective()?.ok_or_else(|| {
        Error::InvalidConfig("oracle_minimize needs a problem with an objective".into())
    })?;
    let family = spec.family();
    match budget {
        OracleBudget::Grid { lo, hi } => {
            if spec.dimension > 5 {
                return Err(Error::InvalidConfig(format!(
                    "grid mode supports up to 5 dimensions, problem has {}",
                    spec.dimension
                )));
            }
            if hi <= lo {
                return Err(Error::InvalidConfig(format!(
                    "empty grid range [{lo}, {hi}]"
                )));
            }
            let h = grid_step(spec.dimension);
            let tol = 2.0 * h;
            let dim = spec.dimension;
            let count = ((hi - lo) / h).floor() as usize + 1;
            let mut idx = vec![0usize; dim];
            let mut best_feasible: Option<(Vec<f64>, f64, f64)> = None;
            let mut least_violating: Option<(Vec<f64>, f64, f64)> = None;
            let mut g = vec![0.0; dim];
            'grid: loop {
                for j in 0..dim {
                    g[j] = lo + idx[j] as f64 * h;
                }
                let point = Point::new(g.clone()).expect("grid nodes are finite");
                let viol = family.max_violation_unchecked(&point);
                if viol <= tol {
                    let phi = objective.value(&point)?;
                    if best_feasible.as_ref().is_none_or(|(_, p, _)| phi < *p) {
                        best_feasible = Some((g.clone(), phi, viol));
                    }
                } else if least_violating.as_ref().is_none_or(|(_, _, v)| viol < *v) {
                    let phi = objective.value(&point)?;
                    least_violating = Some((g.clone(), phi, viol));
                }
                let mut j = 0;
                loop {
                    idx[j] += 1;
                    if idx[j] < count {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                    if j == dim {
                        break 'grid;
                    }
                }
            }
            let (coords, phi, violation, within) = match (best_feasible, least_violating) {
                (Some((g, phi, viol)), _) => (g, phi, viol, true),
                (None, Some((g, phi, viol))) => (g, phi, viol, false),
                (None, None) => unreachable!("grid holds at least one node"),
            };
            Ok(OracleResult {
                point: Point::new(coords)?,
                phi,
                violation,
                tol,
                within_tol: within,
            })
        }
        OracleBudget::LongRun { steps } => {
            let tol = 1e-8;
            let mut x = spec
                .known_interior
                .clone()
                .unwrap_or_else(|| Point::zeros(spec.dimension));
            let project = |mut y: Point| -> Point {
                for _ in 0..200 {
                    for set in family.sets() {
                        y = set.project_unchecked(&y);
                    }
                }
                y
            };
            x = project(x);
            let mut best: Option<(Point, f64, f64)> = None;
            let mut consider = |x: &Point| -> Result<()> {
                let viol = family.max_violation_unchecked(x);
                let phi = objective.value(x)?;
                let better = match &best {
                    None => true,
                    Some((_, bphi, bviol)) => {
                        if (viol <= tol) != (*bviol <= tol) {
                            viol <= tol
                        } else if viol <= tol {
                            phi < *bphi
                        } else {
                            viol < *bviol
                        }
                    }
                };
                if better {
                    best = Some((x.clone(), phi, viol));
                }
                Ok(())
            };
            consider(&x)?;
            for n in 1..=steps {
                let s = objective.subgradient(&x)?;
                let norm = s.norm();
                if norm > 1e-12 {
                    x = x.add_scaled(-1.0 / ((n as f64).sqrt() * norm), &s);
                }
                x = project(x);
                consider(&x)?;
            }
            let (point, phi, violation) = best.expect("considered at least the start");
            Ok(OracleResult {
                within_tol: violation <= tol,
                point,
                phi,
                violation,
                tol,
            })
        }
    }
}

/// Runs the oracle and wraps the result as a `minimal` reference point.
pub fn mint_minimal_reference(
    spec: &ProblemSpec,
    budget: OracleBudget,
    label: impl Into<String>,
) -> Result<ReferencePoint> {
    let result = oracle_minimize(spec, budget)?;
    if !result.within_tol {
        return Err(Error::InvalidConfig(format!(
            "oracle stopped at violation {} above its tolerance {}",
            result.violation, result.tol
        )));
    }
    Ok(ReferencePoint::minimal(label, result.point, result.phi))
}

/// Which plan the run uses.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanChoice {
    Kaczmarz,
    Cimmino,
    Custom(Amalgamator),
}

/// How `N_k` varies over outer iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerKind {
    Constant,
    Cycle,
    Random,
}

/// One bundle of run parameters, shared by the CLI and the suite.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub plan: PlanChoice,
    pub stop: StopRule,
    pub eta0: f64,
    pub rho: f64,
    pub inner_cap: u32,
    pub inner_kind: InnerKind,
    pub zero_tol: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            plan: PlanChoice::Kaczmarz,
            stop: StopRule::default(),
            eta0: 1.0,
            rho: 0.99,
            inner_cap: 1,
            inner_kind: InnerKind::Constant,
            zero_tol: 1e-12,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn plan_schedule(&self, m: usize) -> Result<PlanSchedule> {
        match &self.plan {
            PlanChoice::Kaczmarz => Ok(PlanSchedule::kaczmarz(m)),
            PlanChoice::Cimmino => Ok(PlanSchedule::cimmino(m)),
            PlanChoice::Custom(am) => {
                let qbar = am.strings().iter().map(|t| t.len()).max().unwrap_or(1);
                let min_weight = am.weights().iter().cloned().fold(f64::INFINITY, f64::min);
                let delta = (min_weight / 2.0).min(0.5 / m as f64);
                Ok(PlanSchedule::constant(
                    am.clone(),
                    MStarParams::new(delta, qbar.max(m))?,
                ))
            }
        }
    }

    pub fn beta_schedule(&self) -> Result<BetaSchedule> {
        BetaSchedule::new(self.eta0, self.rho)
    }

    pub fn inner_plan(&self) -> Result<InnerLoopPlan> {
        match self.inner_kind {
            InnerKind::Constant => InnerLoopPlan::constant(self.inner_cap),
            InnerKind::Cycle => InnerLoopPlan::cycle(self.inner_cap),
            InnerKind::Random => InnerLoopPlan::seeded_random(self.inner_cap, self.seed),
        }
    }

    /// Deterministic start point: uniform in `[-3, 3]^J` from the run seed.
    pub fn start_point(&self, dim: usize) -> Point {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Point::new((0..dim).map(|_| rng.random_range(-3.0..3.0)).collect())
            .expect("uniform draw is finite")
    }
}

/// Plain feasibility run of a problem under a configuration, starting at
/// `x0` (or the configuration's seeded start when `None`).
pub fn run_feasibility(spec: &ProblemSpec, config: &RunConfig, x0: Option<Point>) -> Result<Trace> {
    spec.validate()?;
    let plan = config.plan_schedule(spec.sets.len())?;
    let x0 = x0.unwrap_or_else(|| config.start_point(spec.dimension));
    crate::feasibility::run_dsap(spec.family(), &plan, &x0, &config.stop)
}

/// Superiorized run of a problem under a configuration. The problem must
/// carry an objective.
pub fn run_superiorized(spec: &ProblemSpec, config: &RunConfig, x0: Option<Point>) -> Result<Trace> {
    spec.validate()?;
    let objective = spec.objective()?.ok_or_else(|| {
        Error::InvalidConfig("superiorized runs need a problem with an objective".into())
    })?;
    let plan = config.plan_schedule(spec.sets.len())?;
    let x0 = x0.unwrap_or_else(|| config.start_point(spec.dimension));
    run_superiorized_dsap(
        spec.family(),
        &plan,
        &objective,
        config.beta_schedule()?,
        &config.inner_plan()?,
        &x0,
        &config.stop,
        config.zero_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halfspace_generator_certifies_its_interior_point() {
        for seed in [0, 1, 42] {
            let spec = gen_consistent_halfspaces(2, 1, seed, 0.2);
            let z = spec.known_interior.as_ref().unwrap();
            assert_eq!(spec.sets.max_violation(z).unwrap(), 0.0);
            assert_eq!(spec.sets.len(), 1);
            // Slack of at least the margin.
            let ConvexSet::Halfspace { normal, offset } = &spec.sets.sets()[0] else {
                panic!("generator emits halfspaces");
            };
            assert!(offset - normal.dot(z) >= 0.2 - 1e-12);
        }
        let spec = gen_consistent_halfspaces(5, 10, 7, 0.1);
        assert_eq!(spec.dimension, 5);
        assert_eq!(spec.sets.len(), 10);
        assert_eq!(
            spec.sets
                .max_violation(spec.known_interior.as_ref().unwrap())
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn generator_is_deterministic_per_seed() {
        let a = gen_consistent_halfspaces(4, 6, 99, 0.15);
        let b = gen_consistent_halfspaces(4, 6, 99, 0.15);
        assert_eq!(a, b);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = gen_consistent_halfspaces(4, 6, 100, 0.15);
        assert_ne!(a, c);
    }

    #[test]
    fn box_corner_problem_shape() {
        let spec = gen_box_corner(2);
        let min = spec.known_minimizer.as_ref().unwrap();
        assert_eq!(min.point.as_slice(), &[1.0, 1.0]);
        assert_eq!(min.phi, Some(2.0));
        assert_eq!(spec.sets.max_violation(&min.point).unwrap(), 0.0);
        let five = gen_box_corner(5);
        assert_eq!(five.known_minimizer.as_ref().unwrap().phi, Some(5.0));
        spec.validate().unwrap();
        five.validate().unwrap();
    }

    #[test]
    fn problem_json_round_trip() {
        let spec = gen_box_corner(3);
        let json = spec.to_json().unwrap();
        let back = ProblemSpec::from_json(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn invalid_problems_are_rejected() {
        let mut spec = gen_box_corner(2);
        spec.known_interior = Some(Point::new(vec![0.0, 0.0]).unwrap());
        assert!(spec.validate().is_err());

        let json = r#"{"dimension": 2, "sets": []}"#;
        assert!(ProblemSpec::from_json(json).is_err());

        let mismatched = r#"{"dimension": 3, "sets": [{"kind":"ball","c":[0.0,0.0],"r":1.0}]}"#;
        assert!(ProblemSpec::from_json(mismatched).is_err());
    }

    #[test]
    fn grid_oracle_recovers_the_corner_minimizer() {
        let spec = gen_box_corner(2);
        let result = oracle_minimize(&spec, OracleBudget::Grid { lo: 0.0, hi: 2.0 }).unwrap();
        assert!(result.within_tol);
        let h = grid_step(2);
        assert!(result.point.dist(&Point::new(vec![1.0, 1.0]).unwrap()) <= 2.0 * h * 2f64.sqrt());
        assert!((result.phi - 2.0).abs() <= 2.0 * h * 2.0);
    }

    #[test]
    fn grid_oracle_on_quadratic_over_single_halfspace() {
        // phi = ||x||^2 over <a, x> >= b, origin infeasible: the minimizer
        // is b * a / ||a||^2, frozen here for a = (1, 1), b = 2 as (1, 1).
        let a = Point::new(vec![1.0, 1.0]).unwrap();
        let set = ConvexSet::halfspace(a.scale(-1.0), -2.0).unwrap();
        let spec = ProblemSpec {
            dimension: 2,
            sets: ConstraintFamily::new(vec![set]).unwrap(),
            objective: Some(ObjectiveSpec::Quadratic { r: vec![0.0, 0.0] }),
            seed: 0,
            known_interior: None,
            known_minimizer: None,
        };
        let result = oracle_minimize(&spec, OracleBudget::Grid { lo: 0.0, hi: 2.0 }).unwrap();
        assert!(result.within_tol);
        let expected = Point::new(vec![1.0, 1.0]).unwrap();
        assert!(result.point.dist(&expected) <= 5e-3);
        // Verify the active-constraint identity <a, x*> = b.
        assert!((a.dot(&result.point) - 2.0).abs() <= 5e-3);
    }

    #[test]
    fn long_run_oracle_matches_grid_on_the_corner() {
        let spec = gen_box_corner(2);
        let result = oracle_minimize(&spec, OracleBudget::LongRun { steps: 2000 }).unwrap();
        assert!(result.within_tol, "violation {}", result.violation);
        assert!((result.phi - 2.0).abs() <= 5e-2, "phi {}", result.phi);
    }

    #[test]
    fn constant_objective_oracle_returns_any_feasible_point() {
        let mut spec = gen_box_corner(2);
        spec.objective = Some(ObjectiveSpec::Linear { c: vec![0.0, 0.0] });
        spec.known_minimizer = None;
        let result = oracle_minimize(&spec, OracleBudget::Grid { lo: 0.0, hi: 2.0 }).unwrap();
        assert!(result.within_tol);
        assert!(result.violation <= result.tol);
        assert_eq!(result.phi, 0.0);
    }

    #[test]
    fn oracle_requires_an_objective() {
        let spec = gen_consistent_halfspaces(2, 2, 0, 0.1);
        assert!(oracle_minimize(&spec, OracleBudget::Grid { lo: -1.0, hi: 1.0 }).is_err());
    }

    #[test]
    fn minted_reference_is_minimal_kind_with_phi() {
        let spec = gen_box_corner(2);
        let reference =
            mint_minimal_reference(&spec, OracleBudget::Grid { lo: 0.0, hi: 2.0 }, "oracle_min")
                .unwrap();
        assert_eq!(reference.kind, crate::diagnostics::RefKind::Minimal);
        assert!(reference.phi.is_some());
    }

    #[test]
    fn run_config_produces_working_components() {
        let spec = gen_consistent_halfspaces(3, 4, 5, 0.1);
        let config = RunConfig::default();
        let trace = run_feasibility(&spec, &config, None).unwrap();
        assert!(trace.final_record().max_violation <= config.stop.violation_tol);
        let again = run_feasibility(&spec, &config, None).unwrap();
        assert_eq!(trace.records, again.records);
    }
}
