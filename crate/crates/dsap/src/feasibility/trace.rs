//! Per-iteration run records and their CSV persistence.
//!
//! CSV layout: header `k,viol,phi[,dist_<label>...],x_0..x_{J-1}`, one row
//! per iterate, missing objective values as empty fields. Floats are
//! written in shortest round-trip form, so identical runs produce
//! byte-identical files.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::superiorize::Objective;

/// Why a run halted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Constraint violation reached the tolerance.
    Converged,
    /// Iteration cap reached.
    IterationCap,
    /// Iterate movement stayed at or below the stall tolerance for a full
    /// window of consecutive iterations.
    Stalled,
}

/// One iterate of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: u64,
    pub iterate: Point,
    pub max_violation: f64,
    pub phi_value: Option<f64>,
    pub ref_distances: Option<BTreeMap<String, f64>>,
}

impl TraceRecord {
    pub(crate) fn new(k: u64, iterate: Point, max_violation: f64) -> Self {
        Self {
            k,
            iterate,
            max_violation,
            phi_value: None,
            ref_distances: None,
        }
    }
}

/// The full record sequence of a run. Record 0 holds the initial point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    /// Capture stride; 1 means every iterate is present. Diagnostics
    /// reject anything else.
    pub stride: u64,
    /// `None` for traces read back from CSV, which does not carry it.
    pub stop_reason: Option<StopReason>,
    /// Per outer iteration, the sum of perturbation step sizes consumed
    /// between records `k` and `k+1` (superiorized runs only).
    pub beta_sums: Option<Vec<f64>>,
    /// Per outer iteration, `||y^{k,N_k} - y^k||` (superiorized runs only).
    pub inner_displacements: Option<Vec<f64>>,
    /// Label of the objective whose values fill `phi_value`, if any.
    pub objective_label: Option<String>,
}

impl Trace {
    pub(crate) fn new(records: Vec<TraceRecord>, stop_reason: StopReason) -> Self {
        debug_assert!(!records.is_empty());
        Self {
            records,
            stride: 1,
            stop_reason: Some(stop_reason),
            beta_sums: None,
            inner_displacements: None,
            objective_label: None,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_record(&self) -> &TraceRecord {
        self.records.last().expect("traces hold at least the initial point")
    }

    pub fn final_phi(&self) -> Option<f64> {
        self.final_record().phi_value
    }

    pub fn is_thinned(&self) -> bool {
        self.stride != 1
    }

    /// Keeps record 0, every `stride`-th record, and the final record.
    /// The result is rejected by diagnostics, which need every iterate.
    pub fn thin(&self, stride: u64) -> Trace {
        if stride <= 1 {
            return self.clone();
        }
        let last = self.records.len() - 1;
        let records = self
            .records
            .iter()
            .enumerate()
            .filter(|(i, _)| *i == last || (*i as u64).is_multiple_of(stride))
            .map(|(_, r)| r.clone())
            .collect();
        Trace {
            records,
            stride,
            stop_reason: self.stop_reason,
            beta_sums: None,
            inner_displacements: None,
            objective_label: self.objective_label.clone(),
        }
    }

    /// Computes distances from every iterate to each labelled reference
    /// point and stores them on the records (and in any CSV written later).
    pub fn attach_ref_distances(&mut self, refs: &[(&str, &Point)]) -> Result<()> {
        if refs.is_empty() {
            return Ok(());
        }
        let dim = self.records[0].iterate.dim();
        for (label, point) in refs {
            if point.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: point.dim(),
                });
            }
            if label.is_empty() || label.contains(',') {
                return Err(Error::InvalidConfig(format!(
                    "reference label {label:?} must be nonempty and comma-free"
                )));
            }
        }
        for record in &mut self.records {
            let map = record.ref_distances.get_or_insert_with(BTreeMap::new);
            for (label, point) in refs {
                map.insert(label.to_string(), record.iterate.dist(point));
            }
        }
        Ok(())
    }

    /// Evaluates `objective` at every iterate, filling `phi_value` and the
    /// objective label. Lets plain feasibility traces enter objective
    /// comparisons.
    pub fn attach_phi(&mut self, objective: &Objective) -> Result<()> {
        for record in &mut self.records {
            record.phi_value = Some(objective.value(&record.iterate)?);
        }
        self.objective_label = Some(objective.label().to_string());
        Ok(())
    }

    fn dist_labels(&self) -> Vec<String> {
        self.records[0]
            .ref_distances
            .as_ref()
            .map(|m| m.keys().cloned().collect())
            .unwrap_or_default()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let labels = self.dist_labels();
        let dim = self.records[0].iterate.dim();
        let mut header = String::from("k,viol,phi");
        for label in &labels {
            header.push_str(",dist_");
            header.push_str(label);
        }
        for j in 0..dim {
            header.push_str(&format!(",x_{j}"));
        }
        writeln!(w, "{header}")?;
        for record in &self.records {
            let mut row = format!("{},{},", record.k, record.max_violation);
            if let Some(phi) = record.phi_value {
                row.push_str(&format!("{phi}"));
            }
            for label in &labels {
                let d = record
                    .ref_distances
                    .as_ref()
                    .and_then(|m| m.get(label))
                    .ok_or_else(|| {
                        Error::InvalidConfig(format!(
                            "record k={} lacks reference distance {label:?}",
                            record.k
                        ))
                    })?;
                row.push_str(&format!(",{d}"));
            }
            for j in 0..dim {
                row.push_str(&format!(",{}", record.iterate[j]));
            }
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write_csv_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Trace> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty trace file".into()))??;
        let cols: Vec<&str> = header.trim_end().split(',').collect();
        if cols.len() < 4 || cols[0] != "k" || cols[1] != "viol" || cols[2] != "phi" {
            return Err(Error::Parse(
                "trace header must start with k,viol,phi".into(),
            ));
        }
        let mut labels = Vec::new();
        let mut idx = 3;
        while idx < cols.len() {
            if let Some(label) = cols[idx].strip_prefix("dist_") {
                labels.push(label.to_string());
                idx += 1;
            } else {
                break;
            }
        }
        let dim = cols.len() - idx;
        for (j, col) in cols[idx..].iter().enumerate() {
            if *col != format!("x_{j}") {
                return Err(Error::Parse(format!(
                    "unexpected trace column {col:?}, expected x_{j}"
                )));
            }
        }
        if dim == 0 {
            return Err(Error::Parse("trace has no coordinate columns".into()));
        }

        let mut records = Vec::new();
        for (line_no, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim_end().split(',').collect();
            if fields.len() != cols.len() {
                return Err(Error::Parse(format!(
                    "row {}: expected {} fields, found {}",
                    line_no + 2,
                    cols.len(),
                    fields.len()
                )));
            }
            let parse = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| {
                    Error::Parse(format!("row {}: bad {what} value {s:?}", line_no + 2))
                })
            };
            let k = fields[0]
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("row {}: bad k value {:?}", line_no + 2, fields[0])))?;
            let viol = parse(fields[1], "viol")?;
            let phi = if fields[2].is_empty() {
                None
            } else {
                Some(parse(fields[2], "phi")?)
            };
            let mut dists = BTreeMap::new();
            for (label, field) in labels.iter().zip(&fields[3..3 + labels.len()]) {
                dists.insert(label.clone(), parse(field, "distance")?);
            }
            let coords = fields[3 + labels.len()..]
                .iter()
                .map(|f| parse(f, "coordinate"))
                .collect::<Result<Vec<f64>>>()?;
            records.push(TraceRecord {
                k,
                iterate: Point::new(coords)
                    .map_err(|e| Error::Parse(format!("row {}: {e}", line_no + 2)))?,
                max_violation: viol,
                phi_value: phi,
                ref_distances: if labels.is_empty() { None } else { Some(dists) },
            });
        }
        if records.is_empty() {
            return Err(Error::Parse("trace has no rows".into()));
        }
        // Infer the stride from the k gaps so thinned files stay rejected
        // by diagnostics.
        let stride = records
            .windows(2)
            .map(|w| w[1].k.saturating_sub(w[0].k))
            .max()
            .unwrap_or(1)
            .max(1);
        Ok(Trace {
            records,
            stride,
            stop_reason: None,
            beta_sums: None,
            inner_displacements: None,
            objective_label: None,
        })
    }

    pub fn read_csv_file<P: AsRef<Path>>(path: P) -> Result<Trace> {
        let file = std::fs::File::open(path)?;
        Trace::read_csv(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    fn toy_trace() -> Trace {
        let mut records = Vec::new();
        for k in 0..5u64 {
            let t = k as f64;
            let mut rec = TraceRecord::new(k, p(&[t, 1.0 - t]), 1.0 / (t + 1.0));
            if k % 2 == 0 {
                rec.phi_value = Some(2.0 * t);
            }
            records.push(rec);
        }
        Trace::new(records, StopReason::IterationCap)
    }

    #[test]
    fn csv_round_trip_preserves_records() {
        let mut trace = toy_trace();
        trace
            .attach_ref_distances(&[("origin", &p(&[0.0, 0.0]))])
            .unwrap();
        let csv = trace.to_csv_string().unwrap();
        assert!(csv.starts_with("k,viol,phi,dist_origin,x_0,x_1\n"));
        let back = Trace::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(back.records.len(), trace.records.len());
        for (a, b) in back.records.iter().zip(&trace.records) {
            assert_eq!(a.k, b.k);
            assert_eq!(a.iterate, b.iterate);
            assert_eq!(a.max_violation, b.max_violation);
            assert_eq!(a.phi_value, b.phi_value);
            assert_eq!(a.ref_distances, b.ref_distances);
        }
        assert_eq!(back.stride, 1);
        // Byte-identical when rewritten.
        assert_eq!(back.to_csv_string().unwrap(), csv);
    }

    #[test]
    fn missing_phi_round_trips_as_empty_field() {
        let trace = toy_trace();
        let csv = trace.to_csv_string().unwrap();
        let with_empty: Vec<&str> = csv.lines().filter(|l| l.contains(",,")).collect();
        assert!(!with_empty.is_empty());
        let back = Trace::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(back.records[1].phi_value, None);
        assert_eq!(back.records[2].phi_value, Some(4.0));
    }

    #[test]
    fn thinning_is_detected_after_round_trip() {
        let trace = toy_trace();
        let thinned = trace.thin(2);
        assert!(thinned.is_thinned());
        assert_eq!(
            thinned.records.iter().map(|r| r.k).collect::<Vec<_>>(),
            vec![0, 2, 4]
        );
        let csv = thinned.to_csv_string().unwrap();
        let back = Trace::read_csv(csv.as_bytes()).unwrap();
        assert!(back.is_thinned());

        let full_back = Trace::read_csv(trace.to_csv_string().unwrap().as_bytes()).unwrap();
        assert!(!full_back.is_thinned());
    }

    #[test]
    fn malformed_csv_is_rejected_with_context() {
        assert!(Trace::read_csv("".as_bytes()).is_err());
        assert!(Trace::read_csv("a,b,c\n".as_bytes()).is_err());
        let bad_row = "k,viol,phi,x_0\n0,0.5,,oops\n";
        let err = Trace::read_csv(bad_row.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("coordinate"));
    }
}
