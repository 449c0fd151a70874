//! On-disk grasp label formats and schema-checked JSON loading.
//!
//! `pj_grasps.json` is an array of [`PjGraspLabel`]; `vacuum_grasps.json` is
//! a [`VacuumGraspFile`]. Poses are 16 row-major floats of a rigid transform
//! in the mesh frame. Parallel-jaw poses have x along the closing direction
//! and z along the approach; vacuum poses have the rim tangents as x and y
//! and the approach as z, with the origin at the contact.

use std::path::Path;

use ambigrasp::geometry::{RigidTransform, Vec3};
use ambigrasp::pj::PjGraspCandidate;
use ambigrasp::suction::{FailureReason, SealEvaluation, VacuumGraspCandidate};
use ambigrasp::wrench::contact_frame;
use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{CmdResult, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GripperKind {
    ParallelJaw,
    Vacuum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PjScores {
    pub antip: f64,
    pub pj_anal: f64,
    pub pj_soft: Option<f64>,
    /// Reserved for a dynamic simulation score; always null.
    pub pj_sim: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PjGraspLabel {
    pub gripper: GripperKind,
    pub pose: [f64; 16],
    /// Jaw opening at the contacts, m.
    pub width: f64,
    pub contacts: [[f64; 3]; 2],
    pub scores: PjScores,
    pub collision_free: bool,
}

impl PjGraspLabel {
    pub fn from_candidate(g: &PjGraspCandidate) -> Self {
        Self {
            gripper: GripperKind::ParallelJaw,
            pose: g.pose.to_row_major(),
            width: g.width,
            contacts: [g.contact_a.into(), g.contact_b.into()],
            scores: PjScores {
                antip: g.s_antip,
                pj_anal: g.s_pj_anal,
                pj_soft: g.s_pj_soft,
                pj_sim: None,
            },
            collision_free: g.collision_free,
        }
    }

    pub fn to_candidate(&self, index: usize) -> Result<PjGraspCandidate, String> {
        let pose = RigidTransform::from_row_major(&self.pose).map_err(|e| e.to_string())?;
        Ok(PjGraspCandidate {
            contact_a: Vec3::from(self.contacts[0]),
            contact_b: Vec3::from(self.contacts[1]),
            closing: pose.rotation.column(0).into_owned(),
            pose,
            width: self.width,
            s_antip: self.scores.antip,
            s_pj_anal: self.scores.pj_anal,
            s_pj_soft: self.scores.pj_soft,
            collision_free: self.collision_free,
            contact_index: index,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SealSummary {
    pub success: bool,
    pub failure_reason: FailureReason,
    /// Largest liftoff force over the rim, N; null when the rim did not
    /// project.
    pub max_liftoff: Option<f64>,
    pub equilibrium_residual: Option<f64>,
    pub delta_l_max: Option<f64>,
    pub vacuum_force: f64,
    pub offending: Vec<usize>,
}

impl SealSummary {
    pub fn from_evaluation(e: &SealEvaluation) -> Self {
        let projected = !e.points.is_empty();
        Self {
            success: e.success,
            failure_reason: e.failure_reason,
            max_liftoff: projected.then(|| e.max_liftoff()),
            equilibrium_residual: projected.then(|| e.equilibrium_residual()),
            delta_l_max: projected.then_some(e.delta_l_max),
            vacuum_force: e.vacuum_force,
            offending: e.offending.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VacuumScores {
    /// 1 when the seal holds, 0 otherwise.
    pub sc_seal: f64,
    /// Gravity wrench score in the mesh frame; null without mass properties.
    pub sc_sim: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VacuumGraspLabel {
    pub gripper: GripperKind,
    pub pose: [f64; 16],
    pub contact: [f64; 3],
    pub approach: [f64; 3],
    pub seal: SealSummary,
    pub scores: VacuumScores,
}

impl VacuumGraspLabel {
    pub fn new(c: &VacuumGraspCandidate, e: &SealEvaluation, sc_sim: Option<f64>) -> Self {
        let pose = RigidTransform {
            rotation: contact_frame(c),
            translation: c.contact,
        };
        Self {
            gripper: GripperKind::Vacuum,
            pose: pose.to_row_major(),
            contact: c.contact.into(),
            approach: c.approach.into(),
            seal: SealSummary::from_evaluation(e),
            scores: VacuumScores {
                sc_seal: if e.success { 1.0 } else { 0.0 },
                sc_sim,
            },
        }
    }

    pub fn to_candidate(&self) -> Result<VacuumGraspCandidate, String> {
        let pose = RigidTransform::from_row_major(&self.pose).map_err(|e| e.to_string())?;
        let approach = Vec3::from(self.approach);
        if !(approach.norm() > 0.0) {
            return Err("approach direction is zero".into());
        }
        Ok(VacuumGraspCandidate {
            contact: Vec3::from(self.contact),
            approach: approach.normalize(),
            rim_axis: Some(pose.rotation.column(0).into_owned()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VacuumSummary {
    pub count: usize,
    pub successes: usize,
    pub success_fraction: f64,
    pub ray_miss: usize,
    pub depth_exceeded: usize,
    pub force_liftoff: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VacuumGraspFile {
    pub summary: VacuumSummary,
    pub grasps: Vec<VacuumGraspLabel>,
}

/// Either grasp file format, as accepted by `label-scene --grasps`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GraspFile {
    ParallelJaw(Vec<PjGraspLabel>),
    Vacuum(VacuumGraspFile),
}

/// Turns a `serde_path_to_error` path into an RFC 6901 JSON pointer.
pub fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Parses JSON text into `T`; schema violations report the JSON pointer of
/// the offending value.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        let pointer = if pointer.is_empty() { "/".to_string() } else { pointer };
        format!("{what}: at {pointer}: {}", e.inner())
    })
}

/// Reads and parses a JSON file. A missing file is a runtime error; bad
/// content is a usage error.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> CmdResult<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_json(&text, &path.display().to_string()).map_err(Failure::usage)
}
