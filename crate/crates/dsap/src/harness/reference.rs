//! Independent reference implementations used to cross-check the main
//! operators.
//!
//! Nothing here calls [`ConvexSet::project`] to decide membership or
//! composes operators through [`crate::strings`]: the grid search tests
//! membership by the defining inequalities directly, and the projection
//! loops are hand-rolled. They exist to be compared against, not to be
//! fast.

use crate::error::Result;
use crate::geometry::{ConstraintFamily, ConvexSet, Point};

/// Result of a grid nearest-point search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridNearest {
    pub point: Point,
    pub distance: f64,
}

fn slice_dot(a: &Point, g: &[f64]) -> f64 {
    a.iter().zip(g).map(|(x, y)| x * y).sum()
}

fn slice_dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Membership by the defining inequalities. Hyperplanes get a band of
/// normal-distance `band` so that a grid of comparable spacing always
/// holds member nodes; the other kinds are exact.
fn is_member(set: &ConvexSet, g: &[f64], band: f64) -> bool {
    match set {
        ConvexSet::Hyperplane { normal, offset } => {
            (slice_dot(normal, g) - offset).abs() <= band * normal.norm()
        }
        ConvexSet::Halfspace { normal, offset } => slice_dot(normal, g) <= *offset,
        ConvexSet::Ball { center, radius } => {
            slice_dist_sq(center.as_slice(), g) <= radius * radius
        }
        ConvexSet::Box { lower, upper } => g
            .iter()
            .zip(lower.iter().zip(upper))
            .all(|(&v, (&l, &u))| l <= v && v <= u),
    }
}

fn scan(
    set: &ConvexSet,
    x: &[f64],
    window: &[(f64, f64)],
    s: f64,
    band: f64,
) -> Option<(Vec<f64>, f64)> {
    let dim = window.len();
    let counts: Vec<usize> = window
        .iter()
        .map(|(lo, hi)| ((hi - lo) / s).floor() as usize + 1)
        .collect();
    let mut idx = vec![0usize; dim];
    let mut g = vec![0.0; dim];
    let mut best: Option<(Vec<f64>, f64)> = None;
    'grid: loop {
        for j in 0..dim {
            g[j] = window[j].0 + idx[j] as f64 * s;
        }
        if is_member(set, &g, band) {
            let d2 = slice_dist_sq(&g, x);
            if best.as_ref().is_none_or(|(_, bd)| d2 < *bd) {
                best = Some((g.clone(), d2));
            }
        }
        let mut j = 0;
        loop {
            idx[j] += 1;
            if idx[j] < counts[j] {
                break;
            }
            idx[j] = 0;
            j += 1;
            if j == dim {
                break 'grid;
            }
        }
    }
    best.map(|(g, d2)| (g, d2.sqrt()))
}

/// Dense grid search for the feasible point of `set` nearest to `x`
/// within the box `[lo, hi]^J`, at an effective resolution of `step`.
///
/// Runs coarse-to-fine: after each pass the search window shrinks to a
/// ball that provably contains the true constrained minimizer. If the
/// best node found so far is within `delta` of optimal, the obtuse-angle
/// property of projections bounds its lateral offset from the minimizer
/// by `sqrt(2*d*delta + delta^2)`; the window uses that radius plus
/// safety margins, so the refinement is equivalent to one dense scan of
/// the whole box at the final spacing. The final pass runs at `step/2`,
/// keeping the reported distance within `2*step` of the true one. Returns
/// `None` when no feasible node exists in the box at the final resolution.
///
/// The box should contain the nearest feasible point in its interior;
/// callers pick `lo`/`hi` with slack.
pub fn grid_nearest_point(
    set: &ConvexSet,
    x: &Point,
    lo: f64,
    hi: f64,
    step: f64,
) -> Option<GridNearest> {
    assert!(hi > lo && step > 0.0);
    assert_eq!(set.dim(), x.dim());
    let dim = set.dim();
    let target = step / 2.0;
    let mut window = vec![(lo, hi); dim];
    let mut s = ((hi - lo) / 128.0).max(target);
    loop {
        let band = match set {
            ConvexSet::Hyperplane { .. } => s,
            _ => 0.0,
        };
        match scan(set, x.as_slice(), &window, s, band) {
            None => {
                if s <= target {
                    return None;
                }
                // Set thinner than the current spacing: refine in place.
                s = (s / 4.0).max(target);
            }
            Some((g, dist)) => {
                if s <= target {
                    return Some(GridNearest {
                        point: Point::new(g).expect("grid nodes are finite"),
                        distance: dist,
                    });
                }
                let slack = band;
                let delta = 1.5 * s * (dim as f64).sqrt() + 2.0 * slack;
                let radius = (2.0 * dist * delta + delta * delta).sqrt() + delta;
                window = window
                    .iter()
                    .zip(&g)
                    .map(|(&(wlo, whi), &gj)| ((gj - radius).max(wlo), (gj + radius).min(whi)))
                    .collect();
                s = (s / 4.0).max(target);
            }
        }
    }
}

/// Sequential cyclic projections: one pass projects onto `C_1, ..., C_m`
/// in order. Returns the iterates after each full pass, starting with
/// `x0` itself.
pub fn cyclic_projection_reference(
    family: &ConstraintFamily,
    x0: &Point,
    sweeps: usize,
) -> Result<Vec<Point>> {
    let mut iterates = vec![x0.clone()];
    let mut x = x0.clone();
    for _ in 0..sweeps {
        for set in family.sets() {
            x = set.project(&x)?;
        }
        iterates.push(x.clone());
    }
    Ok(iterates)
}

/// Simultaneous averaging: each iteration replaces `x` by the arithmetic
/// mean of its `m` projections, accumulated left to right with weight
/// `1/m`.
pub fn simultaneous_average_reference(
    family: &ConstraintFamily,
    x0: &Point,
    iters: usize,
) -> Result<Vec<Point>> {
    let w = 1.0 / family.len() as f64;
    let mut iterates = vec![x0.clone()];
    let mut x = x0.clone();
    for _ in 0..iters {
        let mut mean = Point::zeros(x.dim());
        for set in family.sets() {
            mean = mean.add_scaled(w, &set.project(&x)?);
        }
        x = mean;
        iterates.push(x.clone());
    }
    Ok(iterates)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn grid_search_agrees_with_closed_forms() {
        // Halfspace x1 + x2 <= 2 from (2,2): nearest point (1,1), distance sqrt(2).
        let hs = ConvexSet::halfspace(p(&[1.0, 1.0]), 2.0).unwrap();
        let found = grid_nearest_point(&hs, &p(&[2.0, 2.0]), -4.0, 4.0, 1e-2).unwrap();
        assert!((found.distance - 2f64.sqrt()).abs() <= 2e-2);
        assert!(found.point.dist(&p(&[1.0, 1.0])) <= 0.35);

        // Unit ball from (3,4): distance 4.
        let ball = ConvexSet::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        let found = grid_nearest_point(&ball, &p(&[3.0, 4.0]), -4.0, 4.0, 1e-2).unwrap();
        assert!((found.distance - 4.0).abs() <= 2e-2);

        // Hyperplane x1 = 0 from (3, 0.5): distance 3.
        let hp = ConvexSet::hyperplane(p(&[1.0, 0.0]), 0.0).unwrap();
        let found = grid_nearest_point(&hp, &p(&[3.0, 0.5]), -4.0, 4.0, 1e-2).unwrap();
        assert!((found.distance - 3.0).abs() <= 2e-2);

        // Box [0,1]^2 from (-1, 0.5): distance 1.
        let boxy = ConvexSet::axis_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let found = grid_nearest_point(&boxy, &p(&[-1.0, 0.5]), -4.0, 4.0, 1e-2).unwrap();
        assert!((found.distance - 1.0).abs() <= 2e-2);
    }

    #[test]
    fn grid_search_reports_absence() {
        let ball = ConvexSet::ball(p(&[10.0, 10.0]), 0.5).unwrap();
        assert!(grid_nearest_point(&ball, &p(&[0.0, 0.0]), -4.0, 4.0, 0.05).is_none());
    }

    #[test]
    fn reference_loops_shrink_violation() {
        let family = ConstraintFamily::new(vec![
            ConvexSet::hyperplane(p(&[1.0, 0.0]), 0.0).unwrap(),
            ConvexSet::hyperplane(p(&[0.0, 1.0]), 0.0).unwrap(),
        ])
        .unwrap();
        let cyclic = cyclic_projection_reference(&family, &p(&[2.0, 4.0]), 3).unwrap();
        assert_eq!(cyclic.len(), 4);
        assert_eq!(cyclic[1].as_slice(), &[0.0, 0.0]);

        let simultaneous = simultaneous_average_reference(&family, &p(&[2.0, 4.0]), 50).unwrap();
        let last = simultaneous.last().unwrap();
        assert!(family.max_violation(last).unwrap() < 1e-6);
    }
}
