//! Index vectors, string operators, and amalgamators.
//!
//! A string operator applies the projections named by an index vector in
//! order; an amalgamator combines the end-points of several strings by a
//! convex weight function. The admissible per-iteration choices are the
//! pairs whose string lengths are bounded by `qbar` and whose weights stay
//! at or above `delta` (see [`MStarParams`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConstraintFamily, Point};

/// A finite sequence `t = (t_1, ..., t_q)` of 1-based constraint indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexVector {
    indices: Vec<usize>,
}

impl IndexVector {
    /// Builds an index vector; entries are 1-based and must be positive.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidIndexVector("length must be at least 1".into()));
        }
        if indices.contains(&0) {
            return Err(Error::InvalidIndexVector(
                "indices are 1-based; 0 is not a valid entry".into(),
            ));
        }
        Ok(Self { indices })
    }

    /// String length `q`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one index
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// True iff every entry lies in `1..=m`.
    pub fn valid_for(&self, m: usize) -> bool {
        self.indices.iter().all(|&i| i >= 1 && i <= m)
    }

    fn first_out_of_range(&self, m: usize) -> Option<usize> {
        self.indices.iter().copied().find(|&i| i < 1 || i > m)
    }
}

impl TryFrom<Vec<usize>> for IndexVector {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        IndexVector::new(v)
    }
}

impl From<IndexVector> for Vec<usize> {
    fn from(t: IndexVector) -> Vec<usize> {
        t.indices
    }
}

/// A pair `(Omega, w)`: an ordered set of distinct index vectors together
/// with positive weights summing to one.
///
/// Construction normalizes the weights once (their exact sum is not
/// reachable in floating point) and rejects non-positive entries, so a
/// built value always satisfies the weight-sum invariant to `1e-12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AmalgamatorRepr", into = "AmalgamatorRepr")]
pub struct Amalgamator {
    strings: Vec<IndexVector>,
    weights: Vec<f64>,
}

/// Wire form: parallel arrays, indices 1-based.
#[derive(Serialize, Deserialize)]
struct AmalgamatorRepr {
    strings: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

impl Amalgamator {
    pub fn new(strings: Vec<IndexVector>, weights: Vec<f64>) -> Result<Self> {
        if strings.is_empty() {
            return Err(Error::InvalidAmalgamator("no strings".into()));
        }
        if strings.len() != weights.len() {
            return Err(Error::InvalidAmalgamator(format!(
                "{} strings but {} weights",
                strings.len(),
                weights.len()
            )));
        }
        for (i, w) in weights.iter().enumerate() {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::InvalidAmalgamator(format!(
                    "weight {w} for string {i} is not a positive finite real"
                )));
            }
        }
        for i in 0..strings.len() {
            for j in 0..i {
                if strings[i] == strings[j] {
                    return Err(Error::InvalidAmalgamator(format!(
                        "duplicate index vector at positions {j} and {i}"
                    )));
                }
            }
        }
        // Normalize once; weights already summing to one (within the
        // 1e-12 invariant) are kept bit-exact.
        let total: f64 = weights.iter().sum();
        let weights = if (total - 1.0).abs() <= 1e-12 {
            weights
        } else {
            weights.iter().map(|w| w / total).collect()
        };
        Ok(Self { strings, weights })
    }

    pub fn strings(&self) -> &[IndexVector] {
        &self.strings
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of strings in `Omega`.
    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one string
    }

    /// Largest constraint index referenced by any string.
    pub fn max_index(&self) -> usize {
        self.strings
            .iter()
            .flat_map(|t| t.indices().iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn check_indices(&self, m: usize) -> Result<()> {
        for t in &self.strings {
            if let Some(index) = t.first_out_of_range(m) {
                return Err(Error::IndexOutOfRange { index, m });
            }
        }
        Ok(())
    }
}

impl TryFrom<AmalgamatorRepr> for Amalgamator {
    type Error = Error;
    fn try_from(repr: AmalgamatorRepr) -> Result<Self> {
        let strings = repr
            .strings
            .into_iter()
            .map(IndexVector::new)
            .collect::<Result<_>>()?;
        Amalgamator::new(strings, repr.weights)
    }
}

impl From<Amalgamator> for AmalgamatorRepr {
    fn from(am: Amalgamator) -> AmalgamatorRepr {
        AmalgamatorRepr {
            strings: am.strings.into_iter().map(Vec::from).collect(),
            weights: am.weights,
        }
    }
}

/// Admissibility bounds: weights at least `delta`, string lengths at most
/// `qbar`. For a family of `m` sets the usable range is `0 < delta < 1/m`
/// and `qbar >= m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MStarParams {
    pub delta: f64,
    pub qbar: usize,
}

impl MStarParams {
    pub fn new(delta: f64, qbar: usize) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta must lie in ]0, 1[, got {delta}"
            )));
        }
        if qbar == 0 {
            return Err(Error::InvalidConfig("qbar must be at least 1".into()));
        }
        Ok(Self { delta, qbar })
    }

    /// Canonical parameters for a family of `m` sets: `delta = 1/(2m)`,
    /// `qbar = m`. Both shipped plans pass validation under these.
    pub fn for_family_size(m: usize) -> Self {
        debug_assert!(m >= 1);
        Self {
            delta: 1.0 / (2.0 * m as f64),
            qbar: m,
        }
    }

    /// Range constraints relative to the family size.
    pub fn valid_for(&self, m: usize) -> bool {
        self.delta > 0.0 && self.delta < 1.0 / m as f64 && self.qbar >= m
    }
}

/// Applies the string operator `P[t] = P_{t_q} ... P_{t_1}` to `x`
/// (index `t_1` first).
pub fn apply_string(t: &IndexVector, family: &ConstraintFamily, x: &Point) -> Result<Point> {
    if let Some(index) = t.first_out_of_range(family.len()) {
        return Err(Error::IndexOutOfRange {
            index,
            m: family.len(),
        });
    }
    if x.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: x.dim(),
        });
    }
    Ok(apply_string_unchecked(t, family, x))
}

pub(crate) fn apply_string_unchecked(
    t: &IndexVector,
    family: &ConstraintFamily,
    x: &Point,
) -> Point {
    let mut y = x.clone();
    for &i in t.indices() {
        y = family.sets()[i - 1].project_unchecked(&y);
    }
    y
}

/// Applies `P_{Omega,w}(x) = sum_t w(t) P[t](x)`, the convex combination of
/// string end-points. Accumulation is fixed left-to-right in string order
/// so results are deterministic.
pub fn apply_amalgamator(
    am: &Amalgamator,
    family: &ConstraintFamily,
    x: &Point,
) -> Result<Point> {
    am.check_indices(family.len())?;
    if x.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: x.dim(),
        });
    }
    Ok(apply_amalgamator_unchecked(am, family, x))
}

pub(crate) fn apply_amalgamator_unchecked(
    am: &Amalgamator,
    family: &ConstraintFamily,
    x: &Point,
) -> Point {
    let mut acc = Point::zeros(x.dim());
    for (t, &w) in am.strings().iter().zip(am.weights()) {
        let end = apply_string_unchecked(t, family, x);
        acc = acc.add_scaled(w, &end);
    }
    acc
}

/// True iff every index in `1..=m` occurs in at least one string.
pub fn validate_fit(strings: &[IndexVector], m: usize) -> bool {
    let mut seen = vec![false; m];
    for t in strings {
        for &i in t.indices() {
            if i >= 1 && i <= m {
                seen[i - 1] = true;
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// True iff `am` is fit for `m` sets, every string length is at most
/// `params.qbar`, and every weight is at least `params.delta`.
pub fn validate_m_star(am: &Amalgamator, params: &MStarParams, m: usize) -> bool {
    validate_fit(am.strings(), m)
        && am.strings().iter().all(|t| t.len() <= params.qbar)
        && am.weights().iter().all(|&w| w >= params.delta)
}

/// The fully-sequential plan: a single string `(1, 2, ..., m)` with
/// weight one. Cyclic projections fall out of the general scheme this way.
pub fn kaczmarz_plan(m: usize) -> Amalgamator {
    assert!(m >= 1, "kaczmarz_plan requires m >= 1");
    let t = IndexVector::new((1..=m).collect()).unwrap();
    Amalgamator::new(vec![t], vec![1.0]).unwrap()
}

/// The fully-simultaneous plan: `m` singleton strings `(i)`, each with
/// weight `1/m`.
pub fn cimmino_plan(m: usize) -> Amalgamator {
    assert!(m >= 1, "cimmino_plan requires m >= 1");
    let strings = (1..=m).map(|i| IndexVector::new(vec![i]).unwrap()).collect();
    Amalgamator::new(strings, vec![1.0 / m as f64; m]).unwrap()
}
