//! Elementary convex sets with exact metric projections, distances, and
//! membership tests.
//!
//! Four primitives are supported, each with a closed-form projection:
//! hyperplanes, halfspaces, Euclidean balls, and axis-aligned boxes
//! (bounds may be infinite). Exact projections keep every downstream
//! operator property checkable without inner iterative solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense point of `R^J`. Entries are finite 64-bit reals; `J >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Builds a point, rejecting empty or non-finite coordinate vectors.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("empty coordinate vector".into()));
        }
        if let Some(j) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!(
                "non-finite entry {} at coordinate {j}",
                coords[j]
            )));
        }
        Ok(Self { coords })
    }

    /// The origin of `R^dim`.
    pub fn zeros(dim: usize) -> Self {
        debug_assert!(dim >= 1);
        Self {
            coords: vec![0.0; dim],
        }
    }

    /// The `j`-th standard basis vector of `R^dim`.
    pub fn unit(dim: usize, j: usize) -> Self {
        debug_assert!(j < dim);
        let mut coords = vec![0.0; dim];
        coords[j] = 1.0;
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.coords.iter()
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// `self + t * dir`, entrywise.
    pub fn add_scaled(&self, t: f64, dir: &Point) -> Point {
        debug_assert_eq!(self.dim(), dir.dim());
        Point {
            coords: self
                .coords
                .iter()
                .zip(&dir.coords)
                .map(|(a, d)| a + t * d)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, t: f64) -> Point {
        Point {
            coords: self.coords.iter().map(|a| a * t).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Self { coords }
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.coords[j]
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.coords
    }
}

/// Box bound entry in problem files; infinite bounds are written as the
/// strings `"inf"` / `"-inf"` since JSON has no infinity literal.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Bound {
    Num(f64),
    Named(String),
}

impl Bound {
    fn to_f64(&self) -> Result<f64> {
        match self {
            Bound::Num(v) => Ok(*v),
            Bound::Named(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(Error::Parse(format!(
                    "box bound must be a number, \"inf\" or \"-inf\", got \"{other}\""
                ))),
            },
        }
    }

    fn from_f64(v: f64) -> Bound {
        if v == f64::INFINITY {
            Bound::Named("inf".into())
        } else if v == f64::NEG_INFINITY {
            Bound::Named("-inf".into())
        } else {
            Bound::Num(v)
        }
    }
}

/// Wire form of [`ConvexSet`] used in problem files.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ConvexSetRepr {
    Hyperplane { a: Vec<f64>, b: f64 },
    Halfspace { a: Vec<f64>, b: f64 },
    Ball { c: Vec<f64>, r: f64 },
    Box { l: Vec<Bound>, u: Vec<Bound> },
}

/// A nonempty closed convex subset of `R^J` with an exact metric projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConvexSetRepr", into = "ConvexSetRepr")]
pub enum ConvexSet {
    /// `{x : <a, x> = b}` with `a != 0`.
    Hyperplane { normal: Point, offset: f64 },
    /// `{x : <a, x> <= b}` with `a != 0`.
    Halfspace { normal: Point, offset: f64 },
    /// `B(c; r) = {x : ||x - c|| <= r}` with `r > 0`.
    Ball { center: Point, radius: f64 },
    /// `{x : l <= x <= u}` componentwise; bounds may be infinite.
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl ConvexSet {
    pub fn hyperplane(normal: Point, offset: f64) -> Result<Self> {
        Self::check_normal(&normal, offset)?;
        Ok(ConvexSet::Hyperplane { normal, offset })
    }

    pub fn halfspace(normal: Point, offset: f64) -> Result<Self> {
        Self::check_normal(&normal, offset)?;
        Ok(ConvexSet::Halfspace { normal, offset })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidSet(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    /// An axis-aligned box; entries of `lower`/`upper` may be infinite but
    /// must satisfy `lower[j] <= upper[j]` for every coordinate.
    pub fn axis_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidSet(format!(
                "box bounds must be nonempty and of equal length ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        for j in 0..lower.len() {
            if lower[j].is_nan() || upper[j].is_nan() {
                return Err(Error::InvalidSet(format!("NaN box bound at coordinate {j}")));
            }
            if lower[j] > upper[j] {
                return Err(Error::InvalidSet(format!(
                    "inverted box bounds at coordinate {j}: {} > {}",
                    lower[j], upper[j]
                )));
            }
        }
        Ok(ConvexSet::Box { lower, upper })
    }

    fn check_normal(normal: &Point, offset: f64) -> Result<()> {
        if normal.norm_sq() == 0.0 {
            return Err(Error::InvalidSet("zero normal vector".into()));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidSet(format!("non-finite offset {offset}")));
        }
        Ok(())
    }

    /// Ambient dimension of the set.
    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Hyperplane { normal, .. } | ConvexSet::Halfspace { normal, .. } => {
                normal.dim()
            }
            ConvexSet::Ball { center, .. } => center.dim(),
            ConvexSet::Box { lower, .. } => lower.len(),
        }
    }

    /// Metric projection of `x` onto the set: the unique nearest point.
    pub fn project(&self, x: &Point) -> Result<Point> {
        self.check_dim(x)?;
        Ok(self.project_unchecked(x))
    }

    /// `||x - P(x)||`; zero exactly when `x` is a member.
    pub fn distance(&self, x: &Point) -> Result<f64> {
        Ok(x.dist(&self.project(x)?))
    }

    /// True iff `distance(x) <= tol`.
    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    fn check_dim(&self, x: &Point) -> Result<()> {
        if self.dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// Projection without the dimension guard; run loops validate once
    /// up front and then stay on this path.
    pub(crate) fn project_unchecked(&self, x: &Point) -> Point {
        debug_assert_eq!(self.dim(), x.dim());
        match self {
            ConvexSet::Hyperplane { normal, offset } => {
                let t = (normal.dot(x) - offset) / normal.norm_sq();
                x.add_scaled(-t, normal)
            }
            ConvexSet::Halfspace { normal, offset } => {
                let s = normal.dot(x);
                if s <= *offset {
                    x.clone()
                } else {
                    x.add_scaled(-(s - offset) / normal.norm_sq(), normal)
                }
            }
            ConvexSet::Ball { center, radius } => {
                let d = x.dist(center);
                // d == 0 covers x at the center: already a member.
                if d <= *radius {
                    x.clone()
                } else {
                    center.add_scaled(radius / d, &x.sub(center))
                }
            }
            ConvexSet::Box { lower, upper } => Point::from_raw(
                x.iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(&v, (&l, &u))| v.clamp(l, u))
                    .collect(),
            ),
        }
    }
}

impl TryFrom<ConvexSetRepr> for ConvexSet {
    type Error = Error;
    fn try_from(repr: ConvexSetRepr) -> Result<Self> {
        match repr {
            ConvexSetRepr::Hyperplane { a, b } => ConvexSet::hyperplane(Point::new(a)?, b),
            ConvexSetRepr::Halfspace { a, b } => ConvexSet::halfspace(Point::new(a)?, b),
            ConvexSetRepr::Ball { c, r } => ConvexSet::ball(Point::new(c)?, r),
            ConvexSetRepr::Box { l, u } => {
                let lower = l.iter().map(Bound::to_f64).collect::<Result<_>>()?;
                let upper = u.iter().map(Bound::to_f64).collect::<Result<_>>()?;
                ConvexSet::axis_box(lower, upper)
            }
        }
    }
}

impl From<ConvexSet> for ConvexSetRepr {
    fn from(set: ConvexSet) -> ConvexSetRepr {
        match set {
            ConvexSet::Hyperplane { normal, offset } => ConvexSetRepr::Hyperplane {
                a: normal.into(),
                b: offset,
            },
            ConvexSet::Halfspace { normal, offset } => ConvexSetRepr::Halfspace {
                a: normal.into(),
                b: offset,
            },
            ConvexSet::Ball { center, radius } => ConvexSetRepr::Ball {
                c: center.into(),
                r: radius,
            },
            ConvexSet::Box { lower, upper } => ConvexSetRepr::Box {
                l: lower.into_iter().map(Bound::from_f64).collect(),
                u: upper.into_iter().map(Bound::from_f64).collect(),
            },
        }
    }
}

/// An ordered family `C_1, ..., C_m` of convex sets sharing one ambient
/// dimension. A nonempty intersection is a caller-side assumption; the
/// generators in [`crate::harness`] construct families that satisfy it
/// by design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ConvexSet>", into = "Vec<ConvexSet>")]
pub struct ConstraintFamily {
    sets: Vec<ConvexSet>,
    dim: usize,
}

impl ConstraintFamily {
    pub fn new(sets: Vec<ConvexSet>) -> Result<Self> {
        let Some(first) = sets.first() else {
            return Err(Error::InvalidFamily("family must contain at least one set".into()));
        };
        let dim = first.dim();
        for (i, set) in sets.iter().enumerate() {
            if set.dim() != dim {
                return Err(Error::InvalidFamily(format!(
                    "set {i} has dimension {}, expected {dim}",
                    set.dim()
                )));
            }
        }
        Ok(Self { sets, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of sets `m`.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one set
    }

    pub fn sets(&self) -> &[ConvexSet] {
        &self.sets
    }

    pub fn get(&self, i: usize) -> Option<&ConvexSet> {
        self.sets.get(i)
    }

    /// `max_i d(x, C_i)`: the proximity measure driving stopping rules.
    pub fn max_violation(&self, x: &Point) -> Result<f64> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(self.max_violation_unchecked(x))
    }

    pub(crate) fn max_violation_unchecked(&self, x: &Point) -> f64 {
        self.sets
            .iter()
            .map(|s| x.dist(&s.project_unchecked(x)))
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<ConvexSet>> for ConstraintFamily {
    type Error = Error;
    fn try_from(sets: Vec<ConvexSet>) -> Result<Self> {
        ConstraintFamily::new(sets)
    }
}

impl From<ConstraintFamily> for Vec<ConvexSet> {
    fn from(f: ConstraintFamily) -> Vec<ConvexSet> {
        f.sets
    }
}
