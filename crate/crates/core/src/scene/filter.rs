use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{Obb, RigidTransform, Vec3};
use crate::mesh::{Ray, TriMesh};
use crate::pj::{gripper_boxes, obb_hits_mesh, GripperGeometry, PjGraspCandidate};
use crate::suction::{SuctionCupParams, VacuumGraspCandidate};
use crate::wrench::{contact_frame, soft_finger_score, vacuum_candidate_score, WrenchConfig};

use super::keypoints::unobstructed;
use super::{Camera, Scene};

/// Object-level grasp labels in the mesh's own frame.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectGrasps {
    #[serde(default)]
    pub vacuum: Vec<VacuumGraspCandidate>,
    #[serde(default)]
    pub pj: Vec<PjGraspCandidate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Distance along the approach axis at which the sweep starts, m.
    pub standoff: f64,
    /// Sweep sampling step, m; at most 5 mm.
    pub step: f64,
    /// Length of the cup and tool body behind the rim, m.
    pub cup_length: f64,
    /// Gap between the rim and the start of the cup volume, m.
    pub cup_clearance: f64,
    pub cup: SuctionCupParams,
    pub gripper: GripperGeometry,
    pub wrench: WrenchConfig,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            standoff: 0.3,
            step: 0.005,
            cup_length: 0.1,
            cup_clearance: 0.002,
            cup: SuctionCupParams::default(),
            gripper: GripperGeometry::default(),
            wrench: WrenchConfig::default(),
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.step > 0.0 && self.step <= 0.005) {
            return Err("step must lie in (0, 0.005]".into());
        }
        if !(self.standoff >= 0.0 && self.cup_length > 0.0 && self.cup_clearance >= 0.0) {
            return Err("standoff, cup_length and cup_clearance must be non-negative".into());
        }
        Ok(())
    }

    fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        let steps = (self.standoff / self.step).ceil() as usize;
        (0..=steps).map(move |i| (i as f64 * self.step).min(self.standoff))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspKind {
    Vacuum,
    ParallelJaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterCause {
    /// The grasp point projects outside the image or behind the camera.
    OutsideView,
    /// Another surface hides the grasp point from the camera.
    Visibility,
    /// The approach sweep hits another object or the tote.
    ApproachCollision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Obstacle {
    Instance { instance_id: u32 },
    Tote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredGrasp {
    pub instance_id: u32,
    pub kind: GraspKind,
    /// Index into the object's grasp list of this kind.
    pub index: usize,
    /// World grasp pose; for vacuum grasps the columns are the rim tangents
    /// and the approach direction, origin at the contact.
    pub pose: RigidTransform,
    pub passed: bool,
    /// Every failed check, in the order visibility, approach.
    pub causes: Vec<FilterCause>,
    /// First obstacle hit by the approach sweep.
    pub obstacle: Option<Obstacle>,
    /// Gravity wrench score in scene context (`sc_sim` for vacuum, `pj_soft`
    /// for parallel-jaw); absent when the mesh has no mass properties.
    pub wrench_score: Option<f64>,
}

/// Checks every object-level grasp of every instance against the scene.
///
/// A grasp passes when its grasp point is visible from the camera and the
/// tool, swept along the approach axis from `standoff` down to the grasp pose,
/// touches neither the tote nor another instance. Parallel-jaw sweeps also
/// test the target itself, since the closed-in approach must clear it.
pub fn filter_grasps_in_scene(
    scene: &Scene,
    camera: &Camera,
    grasps: &BTreeMap<String, ObjectGrasps>,
    config: &FilterConfig,
) -> Vec<FilteredGrasp> {
    let wrench = config.wrench.with_gravity(scene.gravity);
    let mut out = Vec::new();
    for (k, inst) in scene.instances.iter().enumerate() {
        let Some(labels) = grasps.get(&inst.mesh_ref) else {
            continue;
        };
        let mass_com = inst.mass_and_com().ok();
        for (index, local) in labels.vacuum.iter().enumerate() {
            let g = local.transformed(&inst.pose);
            let pose = RigidTransform::new(contact_frame(&g), g.contact).expect("rim basis is orthonormal");
            let seen = visibility_point(scene, camera, &g.contact);
            let swept = {
                let r = config.cup.radius;
                sweep(scene, k, false, config, |s| {
                    let z0 = -(config.cup_clearance + s + config.cup_length);
                    let z1 = -(config.cup_clearance + s);
                    vec![Obb::from_local_bounds(
                        &pose,
                        Vec3::new(-r, -r, z0),
                        Vec3::new(r, r, z1),
                    )]
                })
            };
            let wrench_score = mass_com
                .and_then(|(m, com)| vacuum_candidate_score(&g, &com, m, &config.cup, &wrench).ok())
                .map(|w| w.s);
            out.push(record(inst.instance_id, GraspKind::Vacuum, index, pose, seen, swept, wrench_score));
        }
        for (index, local) in labels.pj.iter().enumerate() {
            let g = local.transformed(&inst.pose);
            let seen = visibility_own(scene, camera, k, &g.midpoint());
            let swept = {
                let approach = g.approach();
                sweep(scene, k, true, config, |s| {
                    let frame = RigidTransform {
                        translation: g.pose.translation - approach * s,
                        ..g.pose
                    };
                    gripper_boxes(&frame, g.width, &config.gripper).all().to_vec()
                })
            };
            let wrench_score = mass_com
                .and_then(|(m, com)| soft_finger_score(&g, &com, m, &wrench).ok())
                .map(|w| w.s);
            out.push(record(inst.instance_id, GraspKind::ParallelJaw, index, g.pose, seen, swept, wrench_score));
        }
    }
    out
}

type Verdict = Option<(FilterCause, Option<Obstacle>)>;

fn record(
    instance_id: u32,
    kind: GraspKind,
    index: usize,
    pose: RigidTransform,
    seen: Verdict,
    swept: Verdict,
    wrench_score: Option<f64>,
) -> FilteredGrasp {
    let causes: Vec<FilterCause> = seen.iter().chain(swept.iter()).map(|v| v.0).collect();
    FilteredGrasp {
        instance_id,
        kind,
        index,
        pose,
        passed: causes.is_empty(),
        causes,
        obstacle: swept.and_then(|v| v.1),
        wrench_score,
    }
}

fn visibility_point(scene: &Scene, camera: &Camera, p: &Vec3) -> Verdict {
    match camera.project(p) {
        Some((x, y, _)) if camera.in_image(x, y) => {
            (!unobstructed(scene, &camera.center(), p)).then_some((FilterCause::Visibility, None))
        }
        _ => Some((FilterCause::OutsideView, None)),
    }
}

/// The line of sight to `p` must first enter instance `k`.
fn visibility_own(scene: &Scene, camera: &Camera, k: usize, p: &Vec3) -> Verdict {
    match camera.project(p) {
        Some((x, y, _)) if camera.in_image(x, y) => {
            let eye = camera.center();
            let hit = scene.raycast_within(&Ray::new(eye, p - eye), (p - eye).norm());
            match hit {
                Some((Some(j), _)) if j == k => None,
                _ => Some((FilterCause::Visibility, None)),
            }
        }
        _ => Some((FilterCause::OutsideView, None)),
    }
}

/// Tests the tool volumes at every sampled approach offset `s`.
fn sweep(
    scene: &Scene,
    target: usize,
    include_target: bool,
    config: &FilterConfig,
    volumes: impl Fn(f64) -> Vec<Obb>,
) -> Verdict {
    let obstacles: Vec<(Obstacle, &TriMesh)> = scene
        .instances
        .iter()
        .enumerate()
        .filter(|&(j, _)| include_target || j != target)
        .map(|(_, i)| (Obstacle::Instance { instance_id: i.instance_id }, &i.world))
        .chain(scene.tote.iter().map(|t| (Obstacle::Tote, &t.world)))
        .collect();
    for s in config.offsets() {
        for obb in volumes(s) {
            for (who, mesh) in &obstacles {
                if obb_hits_mesh(&obb, mesh) {
                    return Some((FilterCause::ApproachCollision, Some(*who)));
                }
            }
        }
    }
    None
}
