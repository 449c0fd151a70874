//! Calibration of the seal model against recorded grasp attempts.
//!
//! The two free parameters are the ring-to-elastic stiffness ratio and the
//! break threshold ratio ([`SealModel`]). Each record holds a vacuum grasp on
//! a mesh and whether the real cup sealed; the objective is the fraction of
//! records whose predicted verdict matches. A Gaussian-process Bayesian
//! optimiser searches the two-dimensional parameter box.

mod gp;
mod optimize;
pub mod synthetic;

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;
use crate::mesh::TriMesh;
use crate::par::Parallelism;
use crate::suction::{check_seal, project_cup, solve_equilibrium, CupProjection};
use crate::suction::{CupGeometry, SealModel, SuctionCupParams, VacuumGraspCandidate};

pub use gp::GaussianProcess;
pub use optimize::{bayes_optimize, random_search, OptimizerConfig, MIN_BUDGET};

/// Recorded contacts farther than this from the mesh are rejected, m.
pub const SNAP_DISTANCE: f64 = 0.005;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("no usable records")]
    EmptyRecordSet,
    #[error("row {row}: {message}")]
    Row { row: u64, message: String },
    #[error("CSV header must be `{expected}`")]
    Header { expected: &'static str },
    #[error("mesh {mesh:?}: {message}")]
    Mesh { mesh: String, message: String },
    #[error("invalid search box: {0}")]
    SearchBox(String),
    #[error("budget must be at least {min}, got {budget}")]
    Budget { budget: usize, min: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const CSV_HEADER: &str = "mesh,contact_x,contact_y,contact_z,approach_x,approach_y,approach_z,label,tearoff_n";

/// One recorded grasp attempt, as stored in the measurement CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SealAttemptRecord {
    pub mesh: String,
    pub contact: Vec3,
    pub approach: Vec3,
    pub sealed: bool,
    pub tearoff_n: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct CsvRow {
    mesh: String,
    contact_x: f64,
    contact_y: f64,
    contact_z: f64,
    approach_x: f64,
    approach_y: f64,
    approach_z: f64,
    label: u8,
    tearoff_n: Option<f64>,
}

/// Parses measurement records. Row numbers in errors count the header as
/// row 1.
pub fn read_records_csv(reader: impl Read) -> Result<Vec<SealAttemptRecord>, CalibrationError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| CalibrationError::Row {
        row: 1,
        message: e.to_string(),
    })?;
    if header.is_empty() {
        return Err(CalibrationError::EmptyRecordSet);
    }
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(CalibrationError::Header { expected: CSV_HEADER });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| CalibrationError::Row {
            row: e.position().map_or(line, |p| p.line()),
            message: match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                _ => e.to_string(),
            },
        })?;
        let bad = |message: &str| CalibrationError::Row {
            row: line,
            message: message.to_string(),
        };
        let sealed = match row.label {
            0 => false,
            1 => true,
            _ => return Err(bad("label must be 0 or 1")),
        };
        let contact = Vec3::new(row.contact_x, row.contact_y, row.contact_z);
        let approach = Vec3::new(row.approach_x, row.approach_y, row.approach_z);
        if !contact.iter().chain(approach.iter()).all(|c| c.is_finite()) {
            return Err(bad("non-finite coordinate"));
        }
        if approach.norm() < 1e-12 {
            return Err(bad("approach direction is zero"));
        }
        out.push(SealAttemptRecord {
            mesh: row.mesh,
            contact,
            approach: approach.normalize(),
            sealed,
            tearoff_n: row.tearoff_n,
        });
    }
    Ok(out)
}

pub fn write_records_csv(writer: impl Write, records: &[SealAttemptRecord]) -> Result<(), CalibrationError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(CsvRow {
            mesh: r.mesh.clone(),
            contact_x: r.contact.x,
            contact_y: r.contact.y,
            contact_z: r.contact.z,
            approach_x: r.approach.x,
            approach_y: r.approach.y,
            approach_z: r.approach.z,
            label: r.sealed as u8,
            tearoff_n: r.tearoff_n,
        })
        .map_err(|e| CalibrationError::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

/// A record ready for repeated evaluation. The rim projection depends only
/// on the cup geometry, so it is computed once.
#[derive(Debug, Clone)]
struct PreparedRecord {
    sealed: bool,
    projection: Option<CupProjection>,
}

/// Records snapped onto their meshes, with cached rim projections.
#[derive(Debug, Clone)]
pub struct RecordSet {
    geometry: CupGeometry,
    records: Vec<PreparedRecord>,
    /// Indices of input records dropped because their contact lay farther
    /// than [`SNAP_DISTANCE`] from the mesh.
    pub rejected: Vec<usize>,
}

impl RecordSet {
    /// Snaps each contact to the closest mesh point and projects the rim.
    /// `resolve` maps a record's mesh reference to its mesh.
    pub fn prepare(
        records: &[SealAttemptRecord],
        geometry: CupGeometry,
        mut resolve: impl FnMut(&str) -> Result<Arc<TriMesh>, String>,
        exec: Parallelism,
    ) -> Result<Self, CalibrationError> {
        let params = SuctionCupParams::from_model(&geometry, &SealModel::default());
        let mut snapped = Vec::with_capacity(records.len());
        let mut rejected = Vec::new();
        for (i, r) in records.iter().enumerate() {
            let mesh = resolve(&r.mesh).map_err(|message| CalibrationError::Mesh {
                mesh: r.mesh.clone(),
                message,
            })?;
            let (p, _, d) = mesh.closest_point(&r.contact);
            if d > SNAP_DISTANCE {
                rejected.push(i);
                continue;
            }
            snapped.push((mesh, VacuumGraspCandidate::new(p, r.approach), r.sealed));
        }
        if snapped.is_empty() {
            return Err(CalibrationError::EmptyRecordSet);
        }
        let records = exec.map_slice(&snapped, |(mesh, cand, sealed)| PreparedRecord {
            sealed: *sealed,
            projection: project_cup(mesh, &params, cand).ok(),
        });
        Ok(Self {
            geometry,
            records,
            rejected,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn geometry(&self) -> CupGeometry {
        self.geometry
    }

    pub fn labels(&self) -> Vec<bool> {
        self.records.iter().map(|r| r.sealed).collect()
    }

    /// Seal verdicts of the model at `model`, in record order.
    pub fn predict(&self, model: &SealModel, exec: Parallelism) -> Vec<bool> {
        let params = SuctionCupParams::from_model(&self.geometry, model);
        exec.map_slice(&self.records, |r| match &r.projection {
            None => false,
            Some(p) => solve_equilibrium(p, &params).map(|e| check_seal(&e).0).unwrap_or(false),
        })
    }

    /// A copy with every label inverted.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        for r in &mut out.records {
            r.sealed = !r.sealed;
        }
        out
    }
}

/// Verdict accuracy of `model` on `set`.
pub fn objective(set: &RecordSet, model: &SealModel, exec: Parallelism) -> Result<f64, CalibrationError> {
    if set.is_empty() {
        return Err(CalibrationError::EmptyRecordSet);
    }
    let hits = set
        .predict(model, exec)
        .iter()
        .zip(&set.records)
        .filter(|(p, r)| **p == r.sealed)
        .count();
    Ok(hits as f64 / set.len() as f64)
}

/// Axis-aligned parameter box; either axis may be searched in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBox {
    pub ring_ratio: [f64; 2],
    pub break_ratio: [f64; 2],
    pub log_ring_ratio: bool,
}

impl Default for SearchBox {
    fn default() -> Self {
        Self {
            ring_ratio: [0.01, 100.0],
            break_ratio: [0.0, 0.5],
            log_ring_ratio: true,
        }
    }
}

impl SearchBox {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        let [a, b] = self.ring_ratio;
        let [c, d] = self.break_ratio;
        if ![a, b, c, d].iter().all(|x| x.is_finite()) || !(a < b) || !(c < d) {
            return Err(CalibrationError::SearchBox("bounds must be finite with lower < upper".into()));
        }
        if self.log_ring_ratio && a <= 0.0 {
            return Err(CalibrationError::SearchBox("log-scaled bounds must be positive".into()));
        }
        if a <= 0.0 || c < 0.0 {
            return Err(CalibrationError::SearchBox(
                "ring ratio must be positive and break ratio non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Maps a point of the unit square into the box.
    pub fn from_unit(&self, u: [f64; 2]) -> SealModel {
        let [a, b] = self.ring_ratio;
        let ring_ratio = if self.log_ring_ratio {
            (a.ln() + u[0] * (b.ln() - a.ln())).exp().clamp(a, b)
        } else {
            a + u[0] * (b - a)
        };
        let [c, d] = self.break_ratio;
        SealModel {
            ring_ratio,
            break_ratio: (c + u[1] * (d - c)).clamp(c, d),
        }
    }

    pub fn to_unit(&self, m: &SealModel) -> [f64; 2] {
        let [a, b] = self.ring_ratio;
        let u0 = if self.log_ring_ratio {
            (m.ring_ratio.ln() - a.ln()) / (b.ln() - a.ln())
        } else {
            (m.ring_ratio - a) / (b - a)
        };
        let [c, d] = self.break_ratio;
        [u0, (m.break_ratio - c) / (d - c)]
    }

    pub fn contains(&self, m: &SealModel) -> bool {
        let [a, b] = self.ring_ratio;
        let [c, d] = self.break_ratio;
        (a..=b).contains(&m.ring_ratio) && (c..=d).contains(&m.break_ratio)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub ring_ratio: f64,
    pub break_ratio: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub best: SealModel,
    pub best_objective: f64,
    pub trace: Vec<TraceEntry>,
    pub search_box: SearchBox,
}

impl CalibrationResult {
    pub(crate) fn from_trace(trace: Vec<TraceEntry>, search_box: SearchBox) -> Self {
        // Earliest entry wins ties so the result is stable under budget
        // extension.
        let mut best = 0;
        for (i, e) in trace.iter().enumerate() {
            if e.objective > trace[best].objective {
                best = i;
            }
        }
        let b = trace[best];
        Self {
            best: SealModel {
                ring_ratio: b.ring_ratio,
                break_ratio: b.break_ratio,
            },
            best_objective: b.objective,
            trace,
            search_box,
        }
    }
}
