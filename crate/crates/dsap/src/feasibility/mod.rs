//! The dynamic string-averaging projection method and its bounded-
//! perturbation variant, with stopping control and trace emission.
//!
//! The underlying recursion never halts on its own; runs stop on a
//! violation tolerance, an iteration cap, or a movement stall, whichever
//! fires first. These are finite proxies for statements that are
//! asymptotic by nature.
//!
//! Everything here works in finite dimension, where consistent families
//! are boundedly regular: on bounded regions, driving every per-set
//! distance below a threshold drives the distance to the intersection
//! itself below any given tolerance. That is what makes the max-violation
//! stopping proxy sound; no runtime check is needed.

mod trace;

pub use trace::{StopReason, Trace, TraceRecord};

use std::borrow::Cow;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{ConstraintFamily, Point};
use crate::strings::{
    apply_amalgamator, apply_amalgamator_unchecked, validate_m_star, Amalgamator, MStarParams,
};

/// Number of consecutive low-movement iterations that counts as a stall.
pub const STALL_WINDOW: u64 = 50;

/// Splitting constant for deriving per-iteration RNG streams.
pub(crate) const SEED_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Finite stopping proxies: violation tolerance, iteration cap, and the
/// minimum per-step movement below which [`STALL_WINDOW`] consecutive
/// iterations trigger a stall stop. `stall_window = 0` disables the stall
/// check entirely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub violation_tol: f64,
    pub max_iters: u64,
    pub stall_tol: f64,
    pub stall_window: u64,
}

impl StopRule {
    pub fn new(violation_tol: f64, max_iters: u64, stall_tol: f64) -> Result<Self> {
        if !(violation_tol > 0.0 && violation_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "violation_tol must be positive and finite, got {violation_tol}"
            )));
        }
        if max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        if !(stall_tol >= 0.0 && stall_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "stall_tol must be nonnegative and finite, got {stall_tol}"
            )));
        }
        Ok(Self {
            violation_tol,
            max_iters,
            stall_tol,
            stall_window: STALL_WINDOW,
        })
    }

    pub fn with_stall_window(mut self, window: u64) -> Self {
        self.stall_window = window;
        self
    }
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            violation_tol: 1e-8,
            max_iters: 100_000,
            stall_tol: 0.0,
            stall_window: STALL_WINDOW,
        }
    }
}

pub(crate) struct StallTracker {
    tol: f64,
    window: u64,
    consecutive: u64,
}

impl StallTracker {
    pub(crate) fn new(stop: &StopRule) -> Self {
        Self {
            tol: stop.stall_tol,
            window: stop.stall_window,
            consecutive: 0,
        }
    }

    pub(crate) fn observe(&mut self, movement: f64) {
        if movement <= self.tol {
            self.consecutive += 1;
        } else {
            self.consecutive = 0;
        }
    }

    pub(crate) fn stalled(&self) -> bool {
        self.window > 0 && self.consecutive >= self.window
    }
}

/// Rule choosing the amalgamator for each iteration index.
pub enum PlanRule {
    /// The same amalgamator every iteration.
    Constant(Amalgamator),
    /// Rotates through a pool in order, `pool[k % len]`.
    Cycle(Vec<Amalgamator>),
    /// Picks uniformly from a pool with a per-iteration seeded stream.
    Random { pool: Vec<Amalgamator>, seed: u64 },
    /// Arbitrary user hook; every produced amalgamator must stay inside
    /// the admissible class or the run errors out at that iteration.
    Custom(Box<dyn Fn(u64) -> Amalgamator + Send + Sync>),
}

impl std::fmt::Debug for PlanRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlanRule::Constant(am) => f.debug_tuple("Constant").field(am).finish(),
            PlanRule::Cycle(pool) => f.debug_tuple("Cycle").field(pool).finish(),
            PlanRule::Random { pool, seed } => f
                .debug_struct("Random")
                .field("pool", pool)
                .field("seed", seed)
                .finish(),
            PlanRule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Maps each iteration index to an admissible amalgamator.
#[derive(Debug)]
pub struct PlanSchedule {
    rule: PlanRule,
    params: MStarParams,
}

impl PlanSchedule {
    pub fn new(rule: PlanRule, params: MStarParams) -> Result<Self> {
        match &rule {
            PlanRule::Cycle(pool) | PlanRule::Random { pool, .. } if pool.is_empty() => {
                return Err(Error::InvalidConfig("plan pool must be nonempty".into()))
            }
            _ => {}
        }
        Ok(Self { rule, params })
    }

    pub fn constant(am: Amalgamator, params: MStarParams) -> Self {
        Self {
            rule: PlanRule::Constant(am),
            params,
        }
    }

    /// Constant fully-sequential plan with canonical admissibility bounds.
    pub fn kaczmarz(m: usize) -> Self {
        Self::constant(
            crate::strings::kaczmarz_plan(m),
            MStarParams::for_family_size(m),
        )
    }

    /// Constant fully-simultaneous plan with canonical admissibility bounds.
    pub fn cimmino(m: usize) -> Self {
        Self::constant(
            crate::strings::cimmino_plan(m),
            MStarParams::for_family_size(m),
        )
    }

    pub fn params(&self) -> &MStarParams {
        &self.params
    }

    pub fn amalgamator_at(&self, k: u64) -> Cow<'_, Amalgamator> {
        match &self.rule {
            PlanRule::Constant(am) => Cow::Borrowed(am),
            PlanRule::Cycle(pool) => Cow::Borrowed(&pool[(k % pool.len() as u64) as usize]),
            PlanRule::Random { pool, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ k.wrapping_mul(SEED_GAMMA));
                Cow::Borrowed(&pool[rng.random_range(0..pool.len())])
            }
            PlanRule::Custom(f) => Cow::Owned(f(k)),
        }
    }
}

/// Step sizes with a structural summability certificate. Runtime checks
/// cannot cover infinitely many indices, so only closed forms are accepted:
/// geometric decay, finite support, or an explicit caller-certified
/// partial-sum bound.
#[derive(Clone)]
enum BetaRule {
    Geometric { beta0: f64, ratio: f64 },
    FiniteSupport(Vec<f64>),
    Certified {
        betas: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
        partial_sum_bound: f64,
    },
}

/// Direction sequence with a declared norm bound.
#[derive(Clone)]
pub enum DirectionRule {
    /// The same vector every iteration.
    Constant(Point),
    /// Unit vectors from a per-iteration seeded stream.
    SeededUnit { seed: u64 },
    /// Arbitrary hook with a declared norm bound, checked per emission.
    Custom {
        directions: Arc<dyn Fn(u64) -> Point + Send + Sync>,
        norm_bound: f64,
    },
}

impl std::fmt::Debug for DirectionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DirectionRule::Constant(p) => f.debug_tuple("Constant").field(p).finish(),
            DirectionRule::SeededUnit { seed } => {
                f.debug_struct("SeededUnit").field("seed", seed).finish()
            }
            DirectionRule::Custom { norm_bound, .. } => f
                .debug_struct("Custom")
                .field("norm_bound", norm_bound)
                .finish(),
        }
    }
}

/// Additive perturbations `beta_k v^k` with summable step sizes and norm-
/// bounded directions.
#[derive(Clone)]
pub struct PerturbationSchedule {
    betas: BetaRule,
    directions: DirectionRule,
}

impl std::fmt::Debug for PerturbationSchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let betas = match &self.betas {
            BetaRule::Geometric { beta0, ratio } => format!("geometric({beta0}, {ratio})"),
            BetaRule::FiniteSupport(v) => format!("finite({} terms)", v.len()),
            BetaRule::Certified {
                partial_sum_bound, ..
            } => format!("certified(bound {partial_sum_bound})"),
        };
        f.debug_struct("PerturbationSchedule")
            .field("betas", &betas)
            .field("directions", &self.directions)
            .finish()
    }
}

impl PerturbationSchedule {
    /// `beta_k = beta0 * ratio^k` with `0 < ratio < 1`.
    pub fn geometric(beta0: f64, ratio: f64, directions: DirectionRule) -> Result<Self> {
        if !(beta0 >= 0.0 && beta0.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta0 must be nonnegative and finite, got {beta0}"
            )));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "geometric ratio must lie in ]0, 1[, got {ratio}"
            )));
        }
        Self::check_directions(&directions)?;
        Ok(Self {
            betas: BetaRule::Geometric { beta0, ratio },
            directions,
        })
    }

    /// Finitely many nonzero steps; trivially summable.
    pub fn finite_support(betas: Vec<f64>, directions: DirectionRule) -> Result<Self> {
        for (k, b) in betas.iter().enumerate() {
            if !(b.is_finite() && *b >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "beta_{k} must be nonnegative and finite, got {b}"
                )));
            }
        }
        Self::check_directions(&directions)?;
        Ok(Self {
            betas: BetaRule::FiniteSupport(betas),
            directions,
        })
    }

    /// Caller-certified schedule: `partial_sum_bound` must bound every
    /// partial sum of the emitted steps.
    pub fn certified(
        betas: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
        partial_sum_bound: f64,
        directions: DirectionRule,
    ) -> Result<Self> {
        if !(partial_sum_bound >= 0.0 && partial_sum_bound.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "partial_sum_bound must be nonnegative and finite, got {partial_sum_bound}"
            )));
        }
        Self::check_directions(&directions)?;
        Ok(Self {
            betas: BetaRule::Certified {
                betas,
                partial_sum_bound,
            },
            directions,
        })
    }

    /// The zero perturbation: reproduces the unperturbed run bit for bit.
    pub fn zero() -> Self {
        Self {
            betas: BetaRule::FiniteSupport(Vec::new()),
            directions: DirectionRule::SeededUnit { seed: 0 },
        }
    }

    fn check_directions(directions: &DirectionRule) -> Result<()> {
        match directions {
            DirectionRule::Constant(_) | DirectionRule::SeededUnit { .. } => Ok(()),
            DirectionRule::Custom { norm_bound, .. } => {
                if norm_bound.is_finite() && *norm_bound >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "direction norm bound must be nonnegative and finite, got {norm_bound}"
                    )))
                }
            }
        }
    }

    /// Declared bound on the norms of the direction sequence.
    pub fn norm_bound(&self) -> f64 {
        match &self.directions {
            DirectionRule::Constant(p) => p.norm(),
            DirectionRule::SeededUnit { .. } => 1.0,
            DirectionRule::Custom { norm_bound, .. } => *norm_bound,
        }
    }

    /// Closed-form bound on the total of all step sizes.
    pub fn summability_bound(&self) -> f64 {
        match &self.betas {
            BetaRule::Geometric { beta0, ratio } => beta0 / (1.0 - ratio),
            BetaRule::FiniteSupport(v) => v.iter().sum(),
            BetaRule::Certified {
                partial_sum_bound, ..
            } => *partial_sum_bound,
        }
    }

    pub fn beta_at(&self, k: u64) -> Result<f64> {
        let b = match &self.betas {
            BetaRule::Geometric { beta0, ratio } => {
                beta0 * ratio.powi(k.min(i32::MAX as u64) as i32)
            }
            BetaRule::FiniteSupport(v) => v.get(k as usize).copied().unwrap_or(0.0),
            BetaRule::Certified { betas, .. } => {
                let b = betas(k);
                if !(b.is_finite() && b >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "certified schedule emitted beta_{k} = {b}"
                    )));
                }
                b
            }
        };
        Ok(b)
    }

    pub fn direction_at(&self, k: u64, dim: usize) -> Result<Point> {
        match &self.directions {
            DirectionRule::Constant(p) => {
                if p.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: p.dim(),
                    });
                }
                Ok(p.clone())
            }
            DirectionRule::SeededUnit { seed } => Ok(seeded_unit_vector(*seed, k, dim)),
            DirectionRule::Custom {
                directions,
                norm_bound,
            } => {
                let v = directions(k);
                if v.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: v.dim(),
                    });
                }
                if v.norm() > norm_bound + 1e-9 {
                    return Err(Error::InvalidConfig(format!(
                        "direction at k={k} has norm {} above the declared bound {norm_bound}",
                        v.norm()
                    )));
                }
                Ok(v)
            }
        }
    }
}

/// Deterministic unit vector stream: per-index ChaCha8 stream seeded from
/// `seed` and the index, standard-normal draws normalized to length one.
pub(crate) fn seeded_unit_vector(seed: u64, k: u64, dim: usize) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k.wrapping_add(1)).wrapping_mul(SEED_GAMMA));
    loop {
        let coords: Vec<f64> = (0..dim)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let p = Point::new(coords).expect("normal draws are finite");
        let n = p.norm();
        if n > 1e-9 {
            return p.scale(1.0 / n);
        }
    }
}

/// One iteration of the method: applies the chosen amalgamator to `x`.
pub fn dsap_step(am: &Amalgamator, family: &ConstraintFamily, x: &Point) -> Result<Point> {
    apply_amalgamator(am, family, x)
}

pub(crate) fn plan_amalgamator<'a>(
    plan: &'a PlanSchedule,
    k: u64,
    m: usize,
) -> Result<Cow<'a, Amalgamator>> {
    let am = plan.amalgamator_at(k);
    am.check_indices(m)?;
    if !validate_m_star(&am, plan.params(), m) {
        return Err(Error::InvalidConfig(format!(
            "plan produced an inadmissible amalgamator at k={k} \
             (fit, string length <= {}, weights >= {} required)",
            plan.params().qbar,
            plan.params().delta
        )));
    }
    Ok(am)
}

pub(crate) fn check_run_inputs(
    family: &ConstraintFamily,
    plan: &PlanSchedule,
    x0: &Point,
) -> Result<()> {
    if x0.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: x0.dim(),
        });
    }
    if !plan.params().valid_for(family.len()) {
        return Err(Error::InvalidConfig(format!(
            "admissibility bounds (delta {}, qbar {}) are invalid for m = {}",
            plan.params().delta,
            plan.params().qbar,
            family.len()
        )));
    }
    Ok(())
}

/// Runs the unperturbed method `x^{k+1} = P_{Omega_k,w_k}(x^k)` from `x0`.
pub fn run_dsap(
    family: &ConstraintFamily,
    plan: &PlanSchedule,
    x0: &Point,
    stop: &StopRule,
) -> Result<Trace> {
    run_perturbed_dsap(family, plan, &PerturbationSchedule::zero(), x0, stop)
}

/// Runs the perturbed method `y^{k+1} = P_{Omega_k,w_k}(y^k + beta_k v^k)`.
///
/// With the zero schedule the computation is identical to [`run_dsap`]
/// bit for bit: zero steps skip the perturbation arithmetic entirely.
pub fn run_perturbed_dsap(
    family: &ConstraintFamily,
    plan: &PlanSchedule,
    perturb: &PerturbationSchedule,
    x0: &Point,
    stop: &StopRule,
) -> Result<Trace> {
    check_run_inputs(family, plan, x0)?;
    let m = family.len();
    let dim = family.dim();

    let mut x = x0.clone();
    let mut records = vec![TraceRecord::new(
        0,
        x.clone(),
        family.max_violation_unchecked(&x),
    )];
    let mut stall = StallTracker::new(stop);
    let reason = loop {
        let k = (records.len() - 1) as u64;
        if records.last().unwrap().max_violation <= stop.violation_tol {
            break StopReason::Converged;
        }
        if k >= stop.max_iters {
            break StopReason::IterationCap;
        }
        if stall.stalled() {
            break StopReason::Stalled;
        }
        let am = plan_amalgamator(plan, k, m)?;
        let beta = perturb.beta_at(k)?;
        let input = if beta == 0.0 {
            x.clone()
        } else {
            let v = perturb.direction_at(k, dim)?;
            x.add_scaled(beta, &v)
        };
        let next = apply_amalgamator_unchecked(&am, family, &input);
        stall.observe(next.dist(&x));
        x = next;
        records.push(TraceRecord::new(
            k + 1,
            x.clone(),
            family.max_violation_unchecked(&x),
        ));
    };
    Ok(Trace::new(records, reason))
}
