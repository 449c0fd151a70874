use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::mesh::{Ray, TriMesh};

use super::{SuctionCupParams, SuctionError, VacuumGraspCandidate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    None,
    RayMiss,
    DepthExceeded,
    ForceLiftoff,
}

/// One rim mass point after projection onto the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedPoint {
    pub rest: Vec3,
    pub projected: Vec3,
    /// Outward surface normal at the projected point, facing the cup.
    pub normal: Vec3,
    pub hit_distance: f64,
    /// Hit distance beyond the first-touching mass point.
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CupProjection {
    pub approach: Vec3,
    pub points: Vec<ProjectedPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionFailure {
    pub reason: FailureReason,
    pub rest: Vec<Vec3>,
    /// Mass points that missed the surface or went too deep.
    pub offending: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassPointForces {
    pub rest: Vec3,
    pub projected: Vec3,
    pub l: f64,
    pub ring_force: Vec3,
    pub elastic_force: Vec3,
    pub contact_force: Vec3,
    pub normal: Vec3,
    /// Contact force component into the surface minus the break threshold;
    /// positive values lift the cup off.
    pub normal_component_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SealEvaluation {
    pub success: bool,
    pub failure_reason: FailureReason,
    pub points: Vec<MassPointForces>,
    /// m
    pub delta_l_max: f64,
    /// N
    pub vacuum_force: f64,
    /// Mass points responsible for a failure.
    pub offending: Vec<usize>,
}

impl SealEvaluation {
    fn from_projection_failure(f: ProjectionFailure, params: &SuctionCupParams) -> Self {
        SealEvaluation {
            success: false,
            failure_reason: f.reason,
            points: Vec::new(),
            delta_l_max: f64::NAN,
            vacuum_force: params.vacuum_force(),
            offending: f.offending,
        }
    }

    /// `‖Σf_r + Σf_p + Σf_e‖`.
    pub fn equilibrium_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.ring_force + p.contact_force + p.elastic_force)
            .sum::<Vec3>()
            .norm()
    }

    /// Largest liftoff force component over all mass points.
    pub fn max_liftoff(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.normal_component_residual)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Rest positions of the `n` rim mass points: a circle of radius `r` in the
/// plane perpendicular to the approach direction, centred on the approach
/// axis at `max_projection_depth` before the contact point.
pub fn build_cup_rim(params: &SuctionCupParams, candidate: &VacuumGraspCandidate) -> Vec<Vec3> {
    let v = candidate.approach;
    let (t1, t2) = candidate.rim_basis();
    let center = candidate.contact - v * params.max_projection_depth;
    let n = params.mass_point_count;
    (0..n)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / n as f64;
            center + (t1 * phi.cos() + t2 * phi.sin()) * params.radius
        })
        .collect()
}

/// Casts every rim point along the approach direction onto the mesh.
pub fn project_cup(
    mesh: &TriMesh,
    params: &SuctionCupParams,
    candidate: &VacuumGraspCandidate,
) -> Result<CupProjection, ProjectionFailure> {
    let rest = build_cup_rim(params, candidate);
    project_rim(mesh, params, candidate.approach, rest)
}

fn project_rim(
    mesh: &TriMesh,
    params: &SuctionCupParams,
    approach: Vec3,
    rest: Vec<Vec3>,
) -> Result<CupProjection, ProjectionFailure> {
    let hits: Vec<_> = rest
        .iter()
        .map(|p| mesh.raycast(&Ray { origin: *p, direction: approach }))
        .collect();
    let missed: Vec<usize> = hits.iter().enumerate().filter(|(_, h)| h.is_none()).map(|(i, _)| i).collect();
    if !missed.is_empty() {
        return Err(ProjectionFailure {
            reason: FailureReason::RayMiss,
            rest,
            offending: missed,
        });
    }
    let hits: Vec<_> = hits.into_iter().map(Option::unwrap).collect();
    let min_d = hits.iter().map(|h| h.distance).fold(f64::INFINITY, f64::min);
    let deep: Vec<usize> = hits
        .iter()
        .enumerate()
        .filter(|(_, h)| h.distance - min_d > params.max_projection_depth)
        .map(|(i, _)| i)
        .collect();
    if !deep.is_empty() {
        return Err(ProjectionFailure {
            reason: FailureReason::DepthExceeded,
            rest,
            offending: deep,
        });
    }
    let points = rest
        .iter()
        .zip(&hits)
        .map(|(r, h)| {
            let flip = h.face_normal.dot(&approach) > 0.0;
            let raw = if params.flat_normals { h.face_normal } else { h.normal };
            ProjectedPoint {
                rest: *r,
                projected: h.point,
                normal: if flip { -raw } else { raw },
                hit_distance: h.distance,
                l: h.distance - min_d,
            }
        })
        .collect();
    Ok(CupProjection { approach, points })
}

/// Solves the global and local force equilibrium of the projected
/// spring-mass ring. The liftoff verdict is filled in by [`check_seal`].
pub fn solve_equilibrium(projection: &CupProjection, params: &SuctionCupParams) -> Result<SealEvaluation, SuctionError> {
    let k_e = params.elastic_stiffness;
    let k_r = params.ring_stiffness;
    if !(k_e > 0.0) || !(k_r > 0.0) {
        return Err(SuctionError::NonPositiveStiffness);
    }
    let pts = &projection.points;
    let n = pts.len();
    let v = projection.approach;
    let f_p = params.vacuum_force();
    let sum_l: f64 = pts.iter().map(|p| p.l).sum();
    let delta_l_max = (f_p / k_e + sum_l) / n as f64;
    let rest_len = 2.0 * params.radius * (PI / n as f64).sin();

    // Each ring spring joins i and i+1; its force acts equal and opposite.
    let mut ring = vec![Vec3::zeros(); n];
    for i in 0..n {
        let j = (i + 1) % n;
        let d = pts[j].projected - pts[i].projected;
        let len = d.norm();
        if len > 0.0 {
            let f = d * (k_r * (len - rest_len) / len);
            ring[i] += f;
            ring[j] -= f;
        }
    }

    let points = pts
        .iter()
        .zip(ring)
        .map(|(p, f_r)| {
            let f_e = v * (k_e * (delta_l_max - p.l));
            let f_c = -(f_r + f_e);
            MassPointForces {
                rest: p.rest,
                projected: p.projected,
                l: p.l,
                ring_force: f_r,
                elastic_force: f_e,
                contact_force: f_c,
                normal: p.normal,
                normal_component_residual: -f_c.dot(&p.normal) - params.break_threshold,
            }
        })
        .collect();
    Ok(SealEvaluation {
        success: false,
        failure_reason: FailureReason::None,
        points,
        delta_l_max,
        vacuum_force: f_p,
        offending: Vec::new(),
    })
}

/// Seal holds iff no mass point's contact force pulls into the surface by
/// more than the break threshold. Returns the offending mass points.
pub fn check_seal(evaluation: &SealEvaluation) -> (bool, Vec<usize>) {
    let offending: Vec<usize> = evaluation
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.normal_component_residual > 0.0)
        .map(|(i, _)| i)
        .collect();
    (offending.is_empty(), offending)
}

/// Full seal evaluation: rim, projection, equilibrium and liftoff test.
pub fn evaluate_seal(
    mesh: &TriMesh,
    params: &SuctionCupParams,
    candidate: &VacuumGraspCandidate,
) -> Result<SealEvaluation, SuctionError> {
    let projection = match project_cup(mesh, params, candidate) {
        Ok(p) => p,
        Err(f) => return Ok(SealEvaluation::from_projection_failure(f, params)),
    };
    let mut eval = solve_equilibrium(&projection, params)?;
    let (success, offending) = check_seal(&eval);
    eval.success = success;
    eval.failure_reason = if success { FailureReason::None } else { FailureReason::ForceLiftoff };
    eval.offending = offending;
    Ok(eval)
}
