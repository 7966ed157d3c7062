//! Post-hoc trace analyses: Fejér and strict Fejér monotonicity checks,
//! the convergence dichotomy verdict, and plain-vs-superiorized objective
//! comparison.
//!
//! Finite traces can witness asymptotic statements only approximately, so
//! the dichotomy verdict admits `inconclusive` alongside the two genuine
//! cases, and the decrease constant is fitted from the data rather than
//! assumed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::Trace;
use crate::geometry::Point;

/// Provenance of a reference point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefKind {
    /// A member of the feasible intersection.
    Feasible,
    /// A minimizer of the objective over the feasible intersection,
    /// minted by an oracle or a closed form.
    Minimal,
    Custom,
}

/// A labelled point that iterate distances are measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub label: String,
    pub point: Point,
    pub kind: RefKind,
    /// Objective value at the point; required of `minimal` references
    /// entering dichotomy verdicts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

impl ReferencePoint {
    pub fn feasible(label: impl Into<String>, point: Point) -> Self {
        Self {
            label: label.into(),
            point,
            kind: RefKind::Feasible,
            phi: None,
        }
    }

    pub fn minimal(label: impl Into<String>, point: Point, phi: f64) -> Self {
        Self {
            label: label.into(),
            point,
            kind: RefKind::Minimal,
            phi: Some(phi),
        }
    }

    pub fn custom(label: impl Into<String>, point: Point) -> Self {
        Self {
            label: label.into(),
            point,
            kind: RefKind::Custom,
            phi: None,
        }
    }
}

/// Margins separating monotone from non-monotone in floating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FejerConfig {
    /// Slack allowed on the non-strict comparison of plain distances.
    pub nonstrict_slack: f64,
    /// Minimum drop of squared distances that counts as strict decrease.
    pub strict_margin: f64,
}

impl Default for FejerConfig {
    fn default() -> Self {
        Self {
            nonstrict_slack: 1e-12,
            strict_margin: 1e-15,
        }
    }
}

/// Outcome of a monotonicity check against one reference point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FejerReport {
    pub strict: bool,
    pub passed: bool,
    /// First index from which strict decrease holds through the end of
    /// the trace; absent when no such index exists (or in non-strict mode).
    pub k0: Option<u64>,
    pub strict_violations_after_k0: u64,
    /// Count of non-strict violations over the whole trace.
    pub nonstrict_violations: u64,
    /// Largest decrease constant certified by the squared-distance drops
    /// and the per-iteration step-size sums, when the trace carries them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_c0: Option<f64>,
    /// Squared-distance drops `d_k^2 - d_{k+1}^2` per transition.
    pub margins: Vec<f64>,
}

fn distances(trace: &Trace, reference: &ReferencePoint) -> Result<Vec<f64>> {
    if trace.is_thinned() {
        return Err(Error::ThinnedTrace(trace.stride));
    }
    let dim = trace.records[0].iterate.dim();
    if reference.point.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: reference.point.dim(),
        });
    }
    Ok(trace
        .records
        .iter()
        .map(|r| r.iterate.dist(&reference.point))
        .collect())
}

/// Checks (strict) Fejér monotonicity of the iterate distances to
/// `reference`. Distances are recomputed from the stored iterates, so
/// traces read back from CSV work directly.
pub fn check_fejer(trace: &Trace, reference: &ReferencePoint, strict: bool) -> Result<FejerReport> {
    check_fejer_with(trace, reference, strict, FejerConfig::default())
}

pub fn check_fejer_with(
    trace: &Trace,
    reference: &ReferencePoint,
    strict: bool,
    config: FejerConfig,
) -> Result<FejerReport> {
    let dists = distances(trace, reference)?;
    let margins: Vec<f64> = dists
        .windows(2)
        .map(|w| w[0] * w[0] - w[1] * w[1])
        .collect();
    let nonstrict_violations = dists
        .windows(2)
        .filter(|w| w[1] > w[0] + config.nonstrict_slack)
        .count() as u64;

    if !strict {
        return Ok(FejerReport {
            strict: false,
            passed: nonstrict_violations == 0,
            k0: None,
            strict_violations_after_k0: 0,
            nonstrict_violations,
            fitted_c0: None,
            margins,
        });
    }

    // Minimal k0: scan from the end for the longest suffix of strict drops.
    let mut k0 = None;
    for (k, margin) in margins.iter().enumerate().rev() {
        if *margin > config.strict_margin {
            k0 = Some(k as u64);
        } else {
            break;
        }
    }
    let passed = k0.is_some();
    let fitted_c0 = match (k0, &trace.beta_sums) {
        (Some(k0), Some(betas)) if betas.len() >= margins.len() => {
            Some(fit_c0(trace, reference, betas, k0)?.c0)
        }
        _ => None,
    };
    Ok(FejerReport {
        strict: true,
        passed,
        k0,
        strict_violations_after_k0: 0,
        nonstrict_violations,
        fitted_c0,
        margins,
    })
}

/// Result of fitting the decrease constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C0Fit {
    /// `min_{k >= k0} (d_k^2 - d_{k+1}^2) / sum_n beta_{k,n}`, clamped
    /// below at zero. A positive value certifies the decrease inequality
    /// with that constant.
    pub c0: f64,
    /// Iterations skipped because their step-size sum was zero.
    pub skipped: Vec<u64>,
}

/// Fits the largest constant `c0` such that every transition from `k0` on
/// drops the squared distance by at least `c0` times that iteration's
/// step-size sum.
pub fn fit_c0(
    trace: &Trace,
    reference: &ReferencePoint,
    betas_per_k: &[f64],
    k0: u64,
) -> Result<C0Fit> {
    let dists = distances(trace, reference)?;
    let transitions = dists.len().saturating_sub(1);
    if (k0 as usize) >= transitions {
        return Err(Error::InvalidConfig(format!(
            "k0 = {k0} leaves no transitions in a trace of {} records",
            dists.len()
        )));
    }
    if betas_per_k.len() < transitions {
        return Err(Error::InvalidConfig(format!(
            "{} step-size sums for {} transitions",
            betas_per_k.len(),
            transitions
        )));
    }
    let mut c0 = f64::INFINITY;
    let mut skipped = Vec::new();
    for k in (k0 as usize)..transitions {
        let drop = dists[k] * dists[k] - dists[k + 1] * dists[k + 1];
        let sum = betas_per_k[k];
        if sum <= 0.0 {
            skipped.push(k as u64);
        } else {
            c0 = c0.min(drop / sum);
        }
    }
    let c0 = if c0.is_finite() { c0.max(0.0) } else { 0.0 };
    Ok(C0Fit { c0, skipped })
}

/// The two genuine outcomes plus the honest finite-trace fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The final objective value matches the reference minimum.
    CaseA,
    /// The final value stays above the minimum and strict decrease toward
    /// the reference held from some index on.
    CaseB,
    /// The final value stays above the minimum but strict decrease was
    /// not observed within the finite trace.
    Inconclusive,
}

/// Post-hoc classification of a superiorized run against a minimal
/// reference point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub verdict: Verdict,
    pub phi_final: f64,
    pub phi_reference: f64,
    pub phi_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fejer: Option<FejerReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Classifies the trace: the final objective value either reaches the
/// reference minimum within `phi_tol`, or the strict monotonicity check
/// with respect to the minimal reference decides between the other two
/// verdicts. Exactly one verdict is emitted.
pub fn dichotomy_report(
    trace: &Trace,
    minimal_ref: &ReferencePoint,
    phi_tol: f64,
) -> Result<DichotomyReport> {
    if minimal_ref.kind != RefKind::Minimal {
        return Err(Error::InvalidConfig(format!(
            "dichotomy reference '{}' must be of minimal kind",
            minimal_ref.label
        )));
    }
    let phi_reference = minimal_ref.phi.ok_or_else(|| {
        Error::InvalidConfig(format!(
            "minimal reference '{}' lacks an objective value",
            minimal_ref.label
        ))
    })?;
    for record in &trace.records {
        if record.phi_value.is_none() {
            return Err(Error::MissingPhi(format!("record k={}", record.k)));
        }
    }
    let phi_final = trace.final_phi().expect("checked above");

    if phi_final <= phi_reference + phi_tol {
        return Ok(DichotomyReport {
            verdict: Verdict::CaseA,
            phi_final,
            phi_reference,
            phi_tol,
            k0: None,
            c0: None,
            fejer: None,
            note: None,
        });
    }

    let fejer = check_fejer(trace, minimal_ref, true)?;
    let (verdict, note) = if fejer.passed {
        (Verdict::CaseB, None)
    } else {
        (
            Verdict::Inconclusive,
            Some(
                "final objective stays above the reference minimum but strict \
                 decrease was not observed within the finite trace"
                    .to_string(),
            ),
        )
    };
    Ok(DichotomyReport {
        verdict,
        phi_final,
        phi_reference,
        phi_tol,
        k0: fejer.k0,
        c0: fejer.fitted_c0,
        fejer: Some(fejer),
        note,
    })
}

/// `phi(plain final) - phi(superiorized final)`. Positive means the
/// superiorized run ended at a better objective value. Reported, never
/// asserted: the reduction is an empirical observation, not a theorem.
pub fn superiority_gap(plain: &Trace, superiorized: &Trace) -> Result<f64> {
    let left = plain
        .objective_label
        .as_deref()
        .ok_or_else(|| Error::MissingPhi("plain trace has no objective".into()))?;
    let right = superiorized
        .objective_label
        .as_deref()
        .ok_or_else(|| Error::MissingPhi("superiorized trace has no objective".into()))?;
    if left != right {
        return Err(Error::ObjectiveMismatch {
            left: left.to_string(),
            right: right.to_string(),
        });
    }
    let phi_plain = plain
        .final_phi()
        .ok_or_else(|| Error::MissingPhi("plain trace final record".into()))?;
    let phi_super = superiorized
        .final_phi()
        .ok_or_else(|| Error::MissingPhi("superiorized trace final record".into()))?;
    Ok(phi_plain - phi_super)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::{StopReason, TraceRecord};

    fn p(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    /// Trace along the x-axis whose distances to the origin are given.
    fn trace_with_distances(dists: &[f64]) -> Trace {
        let records = dists
            .iter()
            .enumerate()
            .map(|(k, &d)| TraceRecord::new(k as u64, p(&[d, 0.0]), 0.0))
            .collect();
        Trace::new(records, StopReason::IterationCap)
    }

    fn origin_ref() -> ReferencePoint {
        ReferencePoint::feasible("origin", p(&[0.0, 0.0]))
    }

    #[test]
    fn strict_decrease_from_the_start() {
        let trace = trace_with_distances(&[3.0, 2.0, 1.0, 0.5]);
        let report = check_fejer(&trace, &origin_ref(), true).unwrap();
        assert!(report.passed);
        assert_eq!(report.k0, Some(0));
        assert_eq!(report.strict_violations_after_k0, 0);
    }

    #[test]
    fn flat_distances_fail_strict_but_pass_nonstrict() {
        let trace = trace_with_distances(&[1.0, 1.0]);
        let strict = check_fejer(&trace, &origin_ref(), true).unwrap();
        assert!(!strict.passed);
        assert_eq!(strict.k0, None);
        let nonstrict = check_fejer(&trace, &origin_ref(), false).unwrap();
        assert!(nonstrict.passed);
    }

    #[test]
    fn increase_fails_nonstrict() {
        let trace = trace_with_distances(&[2.0, 3.0, 1.0]);
        let report = check_fejer(&trace, &origin_ref(), false).unwrap();
        assert!(!report.passed);
        assert_eq!(report.nonstrict_violations, 1);
    }

    #[test]
    fn k0_found_mid_trace() {
        // Rises at the first transition, then strictly falls.
        let trace = trace_with_distances(&[2.0, 3.0, 2.0, 1.0]);
        let report = check_fejer(&trace, &origin_ref(), true).unwrap();
        assert!(report.passed);
        assert_eq!(report.k0, Some(1));
    }

    #[test]
    fn thinned_traces_are_rejected() {
        let trace = trace_with_distances(&[3.0, 2.0, 1.0, 0.5]).thin(2);
        assert!(matches!(
            check_fejer(&trace, &origin_ref(), false),
            Err(Error::ThinnedTrace(2))
        ));
    }

    #[test]
    fn c0_fitting_examples() {
        // Squared distances 4 -> 1 with step sum 1: c0 = 3.
        let trace = trace_with_distances(&[2.0, 1.0]);
        let fit = fit_c0(&trace, &origin_ref(), &[1.0], 0).unwrap();
        assert!((fit.c0 - 3.0).abs() < 1e-12);

        // No drop: c0 clamps to 0.
        let flat = trace_with_distances(&[2.0, 2.0]);
        let fit = fit_c0(&flat, &origin_ref(), &[1.0], 0).unwrap();
        assert_eq!(fit.c0, 0.0);

        // Squared distances 4, 2, 1 with sums (1, 0.5): min(2, 2) = 2.
        let two = trace_with_distances(&[2.0, 2f64.sqrt(), 1.0]);
        let fit = fit_c0(&two, &origin_ref(), &[1.0, 0.5], 0).unwrap();
        assert!((fit.c0 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_beta_sums_are_skipped_and_reported() {
        let trace = trace_with_distances(&[3.0, 2.0, 1.0]);
        let fit = fit_c0(&trace, &origin_ref(), &[0.0, 1.0], 0).unwrap();
        assert_eq!(fit.skipped, vec![0]);
        assert!((fit.c0 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fit_is_scale_consistent() {
        // Scaling the trace geometry (iterates and reference) by lambda
        // scales every squared-distance drop by lambda^2; with the step
        // sums unchanged, the fitted constant scales by lambda^2.
        let trace = trace_with_distances(&[3.0, 2.0, 1.2, 0.7]);
        let sums = [0.5, 0.25, 0.125];
        let base = fit_c0(&trace, &origin_ref(), &sums, 0).unwrap();

        let lambda = 3.5;
        let mut scaled = trace.clone();
        for record in &mut scaled.records {
            scaled_record(record, lambda);
        }
        let scaled_fit = fit_c0(&scaled, &origin_ref(), &sums, 0).unwrap();
        assert!(
            (scaled_fit.c0 - lambda * lambda * base.c0).abs() <= 1e-9 * base.c0.max(1.0),
            "{} vs {}",
            scaled_fit.c0,
            lambda * lambda * base.c0
        );
    }

    fn scaled_record(record: &mut crate::feasibility::TraceRecord, lambda: f64) {
        let coords: Vec<f64> = record.iterate.iter().map(|c| c * lambda).collect();
        record.iterate = Point::new(coords).unwrap();
    }

    #[test]
    fn fit_rejects_out_of_range_k0_and_short_beta_vectors() {
        let trace = trace_with_distances(&[3.0, 2.0, 1.0]);
        assert!(fit_c0(&trace, &origin_ref(), &[1.0, 1.0], 2).is_err());
        assert!(fit_c0(&trace, &origin_ref(), &[1.0], 0).is_err());
    }

    fn with_phi(mut trace: Trace, phis: &[f64]) -> Trace {
        for (r, &phi) in trace.records.iter_mut().zip(phis) {
            r.phi_value = Some(phi);
        }
        trace
    }

    #[test]
    fn dichotomy_case_a_when_minimum_reached() {
        let trace = with_phi(trace_with_distances(&[2.0, 1.0, 0.0]), &[6.0, 4.0, 2.0]);
        let reference = ReferencePoint::minimal("min", p(&[0.0, 0.0]), 2.0);
        let report = dichotomy_report(&trace, &reference, 1e-6).unwrap();
        assert_eq!(report.verdict, Verdict::CaseA);
        assert!(report.fejer.is_none());
    }

    #[test]
    fn dichotomy_case_b_with_strict_decrease() {
        let trace = with_phi(trace_with_distances(&[3.0, 2.0, 1.5]), &[7.0, 6.0, 5.5]);
        let reference = ReferencePoint::minimal("min", p(&[0.0, 0.0]), 2.0);
        let report = dichotomy_report(&trace, &reference, 1e-6).unwrap();
        assert_eq!(report.verdict, Verdict::CaseB);
        assert_eq!(report.k0, Some(0));
    }

    #[test]
    fn dichotomy_inconclusive_without_strict_decrease() {
        let trace = with_phi(trace_with_distances(&[3.0, 3.0, 3.0]), &[7.0, 7.0, 7.0]);
        let reference = ReferencePoint::minimal("min", p(&[0.0, 0.0]), 2.0);
        let report = dichotomy_report(&trace, &reference, 1e-6).unwrap();
        assert_eq!(report.verdict, Verdict::Inconclusive);
        assert!(report.note.is_some());
    }

    #[test]
    fn dichotomy_rejects_bad_inputs() {
        let trace = with_phi(trace_with_distances(&[1.0, 0.5]), &[1.0, 0.5]);
        let feasible = ReferencePoint::feasible("z", p(&[0.0, 0.0]));
        assert!(dichotomy_report(&trace, &feasible, 1e-6).is_err());

        let no_phi = trace_with_distances(&[1.0, 0.5]);
        let minimal = ReferencePoint::minimal("min", p(&[0.0, 0.0]), 0.0);
        assert!(matches!(
            dichotomy_report(&no_phi, &minimal, 1e-6),
            Err(Error::MissingPhi(_))
        ));
    }

    #[test]
    fn superiority_gap_basics() {
        let mut a = with_phi(trace_with_distances(&[2.0, 1.0]), &[6.0, 6.0]);
        let mut b = with_phi(trace_with_distances(&[2.0, 1.0]), &[6.0, 4.0]);
        a.objective_label = Some("linear".into());
        b.objective_label = Some("linear".into());
        assert_eq!(superiority_gap(&a, &a).unwrap(), 0.0);
        assert_eq!(superiority_gap(&a, &b).unwrap(), 2.0);

        let mut c = b.clone();
        c.objective_label = Some("quadratic".into());
        assert!(matches!(
            superiority_gap(&a, &c),
            Err(Error::ObjectiveMismatch { .. })
        ));
    }

    #[test]
    fn reports_serialize_with_verdict_strings() {
        let trace = with_phi(trace_with_distances(&[3.0, 2.0, 1.5]), &[7.0, 6.0, 5.5]);
        let reference = ReferencePoint::minimal("min", p(&[0.0, 0.0]), 2.0);
        let report = dichotomy_report(&trace, &reference, 1e-6).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"verdict\":\"case_b\""));
        assert!(json.contains("\"k0\":0"));
    }
}
