//! Vacuum seal evaluation with a projected spring-mass suction cup.
//!
//! A ring of `n` mass points is cast along the approach direction onto the
//! object. Every point hangs from the rigid cup base on an axial elastic
//! spring and is tied to its two neighbours by ring springs. The elastic
//! forces follow from the global equilibrium against the vacuum force
//! `F_p = Δp·π·r²`, the contact forces from the local equilibrium at each
//! point, and the seal breaks where a contact force would have to pull the
//! rim into the surface.

mod model;
mod params;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{tangent_basis, RigidTransform, Vec3};
use crate::mesh::{sample_surface, TriMesh};
use crate::par::Parallelism;

pub use model::{
    build_cup_rim, check_seal, evaluate_seal, project_cup, solve_equilibrium, CupProjection, FailureReason,
    MassPointForces, ProjectedPoint, ProjectionFailure, SealEvaluation,
};
pub use params::{CupGeometry, SealModel, SuctionCupParams, NOMINAL_COMPRESSION_RATIO};

#[derive(Debug, Error, PartialEq)]
pub enum SuctionError {
    #[error("invalid cup parameter {field}: {reason}")]
    InvalidParams { field: &'static str, reason: &'static str },
    #[error("spring stiffness must be positive")]
    NonPositiveStiffness,
    #[error("candidate count must be at least 1")]
    ZeroCount,
    #[error("invalid cup parameter file: {0}")]
    Json(String),
}

/// Where and from which direction the cup approaches the object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacuumGraspCandidate {
    pub contact: Vec3,
    /// Unit vector pointing from the cup toward the surface.
    pub approach: Vec3,
    /// Tangent direction of the first rim mass point. Defaults to a fixed
    /// basis derived from `approach`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rim_axis: Option<Vec3>,
}

impl VacuumGraspCandidate {
    pub fn new(contact: Vec3, approach: Vec3) -> Self {
        Self {
            contact,
            approach: approach.normalize(),
            rim_axis: None,
        }
    }

    /// Orthonormal rim tangents `(t1, t2)` with `t1 × t2 = approach`.
    pub fn rim_basis(&self) -> (Vec3, Vec3) {
        let v = self.approach;
        match self.rim_axis {
            Some(axis) => {
                let t1 = (axis - v * v.dot(&axis)).normalize();
                (t1, v.cross(&t1))
            }
            None => tangent_basis(&v),
        }
    }

    /// The same grasp after a rigid motion, rim orientation included.
    pub fn transformed(&self, tf: &RigidTransform) -> Self {
        let (t1, _) = self.rim_basis();
        Self {
            contact: tf.apply_point(&self.contact),
            approach: tf.apply_vector(&self.approach),
            rim_axis: Some(tf.apply_vector(&t1)),
        }
    }
}

/// Area-uniform vacuum candidates approaching along the inward surface
/// normal, each evaluated with [`evaluate_seal`].
pub fn sample_vacuum_candidates(
    mesh: &TriMesh,
    params: &SuctionCupParams,
    count: usize,
    seed: u64,
) -> Result<Vec<(VacuumGraspCandidate, SealEvaluation)>, SuctionError> {
    sample_vacuum_candidates_with(mesh, params, count, seed, Parallelism::default())
}

pub fn sample_vacuum_candidates_with(
    mesh: &TriMesh,
    params: &SuctionCupParams,
    count: usize,
    seed: u64,
    exec: Parallelism,
) -> Result<Vec<(VacuumGraspCandidate, SealEvaluation)>, SuctionError> {
    if count == 0 {
        return Err(SuctionError::ZeroCount);
    }
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = sample_surface(mesh, count, rng.random());
    let candidates: Vec<VacuumGraspCandidate> = samples
        .iter()
        .map(|s| VacuumGraspCandidate::new(s.point, -s.normal))
        .collect();
    let evals = exec.map_slice(&candidates, |c| evaluate_seal(mesh, params, c));
    candidates
        .into_iter()
        .zip(evals)
        .map(|(c, e)| e.map(|e| (c, e)))
        .collect()
}

/// Evaluates a batch of candidates in order.
pub fn evaluate_batch(
    mesh: &TriMesh,
    params: &SuctionCupParams,
    candidates: &[VacuumGraspCandidate],
    exec: Parallelism,
) -> Result<Vec<SealEvaluation>, SuctionError> {
    exec.map_slice(candidates, |c| evaluate_seal(mesh, params, c))
        .into_iter()
        .collect()
}
