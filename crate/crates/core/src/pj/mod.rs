//! Robust antipodal sampling for parallel-jaw grippers.
//!
//! Contacts are drawn area-uniformly from the mesh. Each contact is tested
//! `N` times with a jittered closing line; the fraction of antipodal
//! attempts is its robust score. Scoring contacts are expanded into `L`
//! gripper poses around the closing axis and kept when the gripper boxes
//! stay clear of the object.

mod collision;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::{tangent_basis, RigidTransform, Vec3};
use crate::mesh::{sample_surface, Ray, SurfaceSample, TriMesh};
use crate::par::{item_seed, Parallelism};

pub use collision::{gripper_boxes, gripper_collision_check, GripperBoxes};
pub(crate) use collision::obb_hits_mesh;

/// Parallel-jaw gripper dimensions in meters. Fingers are boxes of
/// `finger_depth` (closing axis) × `finger_width` × `finger_height`
/// (approach axis) whose tips reach `tip_overhang` past the contact line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GripperGeometry {
    pub finger_width: f64,
    pub finger_depth: f64,
    pub finger_height: f64,
    pub max_opening: f64,
    /// Palm box along (closing, lateral, approach).
    pub palm: [f64; 3],
    pub friction: f64,
    /// Gap between each finger pad and its contact when the collision
    /// volume is placed.
    pub finger_clearance: f64,
    pub tip_overhang: f64,
}

impl Default for GripperGeometry {
    fn default() -> Self {
        Self {
            finger_width: 0.02,
            finger_depth: 0.01,
            finger_height: 0.045,
            max_opening: 0.08,
            palm: [0.2, 0.06, 0.07],
            friction: 0.4,
            finger_clearance: 0.001,
            tip_overhang: 0.01,
        }
    }
}

impl GripperGeometry {
    pub fn validate(&self) -> Result<(), String> {
        let dims = [
            ("finger_width", self.finger_width),
            ("finger_depth", self.finger_depth),
            ("finger_height", self.finger_height),
            ("max_opening", self.max_opening),
            ("palm[0]", self.palm[0]),
            ("palm[1]", self.palm[1]),
            ("palm[2]", self.palm[2]),
            ("friction", self.friction),
        ];
        for (name, v) in dims {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive"));
            }
        }
        if !(self.finger_clearance >= 0.0) || !(self.tip_overhang >= 0.0) {
            return Err("finger_clearance and tip_overhang must be non-negative".into());
        }
        Ok(())
    }
}

/// Two contacts whose connecting line lies in both friction cones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntipodalPair {
    pub contact_a: Vec3,
    pub normal_a: Vec3,
    pub contact_b: Vec3,
    pub normal_b: Vec3,
}

impl AntipodalPair {
    pub fn width(&self) -> f64 {
        (self.contact_b - self.contact_a).norm()
    }

    pub fn closing_direction(&self) -> Vec3 {
        (self.contact_b - self.contact_a).normalize()
    }
}

/// Antipodal test along the line `origin + s·dir`. The first contact is the
/// surface entry closest to `origin`; the second is the farthest exit within
/// `max_width` of it.
pub fn antipodal_line(mesh: &TriMesh, origin: &Vec3, dir: &Vec3, friction: f64, max_width: f64) -> Option<AntipodalPair> {
    let dir = dir.normalize();
    let back = max_width;
    let ray = Ray {
        origin: origin - dir * back,
        direction: dir,
    };
    let hits = mesh.raycast_all(&ray, back + 2.0 * max_width);
    let entry = hits
        .iter()
        .filter(|h| h.face_normal.dot(&dir) < 0.0)
        .min_by(|a, b| (a.distance - back).abs().total_cmp(&(b.distance - back).abs()))?;
    let exit = hits
        .iter()
        .filter(|h| h.face_normal.dot(&dir) > 0.0 && h.distance > entry.distance && h.distance - entry.distance <= max_width)
        .max_by(|a, b| a.distance.total_cmp(&b.distance))?;
    let line = exit.point - entry.point;
    let width = line.norm();
    if width <= 0.0 || width > max_width {
        return None;
    }
    let u = line / width;
    let cos_cone = friction.atan().cos();
    if u.dot(&-entry.normal) >= cos_cone && u.dot(&exit.normal) >= cos_cone {
        Some(AntipodalPair {
            contact_a: entry.point,
            normal_a: entry.normal,
            contact_b: exit.point,
            normal_b: exit.normal,
        })
    } else {
        None
    }
}

/// Looks for the antipodal partner of a surface contact by closing along the
/// inward normal.
pub fn antipodal_check(mesh: &TriMesh, contact: &Vec3, normal: &Vec3, friction: f64, max_width: f64) -> Option<AntipodalPair> {
    antipodal_line(mesh, contact, &-normal, friction, max_width)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobustParams {
    pub attempts: usize,
    /// Standard deviation of the closing-direction tilt, radians.
    pub sigma_angle: f64,
    /// Standard deviation of the tangential contact offset, meters.
    pub sigma_translation: f64,
}

impl Default for RobustParams {
    fn default() -> Self {
        Self {
            attempts: 5,
            sigma_angle: 8f64.to_radians(),
            sigma_translation: 0.002,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustScore {
    pub score: f64,
    pub successes: usize,
    /// Grasp axis used for pose expansion: the unperturbed pair when it is
    /// antipodal, otherwise the first successful attempt.
    pub pair: Option<AntipodalPair>,
}

/// Fraction of `attempts` jittered antipodal checks that succeed.
pub fn robust_antipodal_score(
    mesh: &TriMesh,
    sample: &SurfaceSample,
    params: &RobustParams,
    friction: f64,
    max_width: f64,
    seed: u64,
) -> RobustScore {
    let attempts = params.attempts.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sample.normal;
    let (t1, t2) = tangent_basis(&n);
    let angle = Normal::new(0.0, params.sigma_angle.max(0.0)).expect("finite sigma");
    let shift = Normal::new(0.0, params.sigma_translation.max(0.0)).expect("finite sigma");
    let nominal = antipodal_check(mesh, &sample.point, &n, friction, max_width);
    let mut successes = 0;
    let mut first = None;
    for _ in 0..attempts {
        let psi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let axis = t1 * psi.cos() + t2 * psi.sin();
        let tilt = angle.sample(&mut rng);
        let dir = RigidTransform::from_axis_angle(&axis, tilt, Vec3::zeros()).apply_vector(&-n);
        let origin = sample.point + t1 * shift.sample(&mut rng) + t2 * shift.sample(&mut rng);
        if let Some(pair) = antipodal_line(mesh, &origin, &dir, friction, max_width) {
            successes += 1;
            first.get_or_insert(pair);
        }
    }
    RobustScore {
        score: successes as f64 / attempts as f64,
        successes,
        pair: if successes > 0 { nominal.or(first) } else { None },
    }
}

/// A parallel-jaw grasp. Pose frame: origin at the contact midpoint,
/// x along the closing direction, z along the approach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PjGraspCandidate {
    pub contact_a: Vec3,
    pub contact_b: Vec3,
    pub closing: Vec3,
    pub pose: RigidTransform,
    pub width: f64,
    pub s_antip: f64,
    pub s_pj_anal: f64,
    pub s_pj_soft: Option<f64>,
    pub collision_free: bool,
    /// Index of the surface sample the grasp was expanded from.
    pub contact_index: usize,
}

impl PjGraspCandidate {
    pub fn approach(&self) -> Vec3 {
        self.pose.rotation.column(2).into_owned()
    }

    pub fn midpoint(&self) -> Vec3 {
        self.pose.translation
    }

    pub fn transformed(&self, tf: &RigidTransform) -> Self {
        Self {
            contact_a: tf.apply_point(&self.contact_a),
            contact_b: tf.apply_point(&self.contact_b),
            closing: tf.apply_vector(&self.closing),
            pose: tf.compose(&self.pose),
            ..*self
        }
    }
}

/// `L` poses evenly spaced in `[0, 2π)` around the closing axis, each
/// inheriting `s_pj_anal = s_antip`. Empty when the score is zero.
pub fn expand_poses(pair: &AntipodalPair, s_antip: f64, rotations: usize, contact_index: usize) -> Vec<PjGraspCandidate> {
    if s_antip <= 0.0 || rotations == 0 {
        return Vec::new();
    }
    let x = pair.closing_direction();
    let mid = (pair.contact_a + pair.contact_b) * 0.5;
    let (z0, _) = tangent_basis(&x);
    (0..rotations)
        .map(|l| {
            let angle = std::f64::consts::TAU * l as f64 / rotations as f64;
            let spin = RigidTransform::from_axis_angle(&x, angle, Vec3::zeros());
            let z = spin.apply_vector(&z0);
            let y = z.cross(&x);
            let rotation = nalgebra::Matrix3::from_columns(&[x, y, z]);
            PjGraspCandidate {
                contact_a: pair.contact_a,
                contact_b: pair.contact_b,
                closing: x,
                pose: RigidTransform {
                    rotation,
                    translation: mid,
                },
                width: pair.width(),
                s_antip,
                s_pj_anal: s_antip,
                s_pj_soft: None,
                collision_free: false,
                contact_index,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PjConfig {
    pub max_grasps: usize,
    /// Surface contacts sampled before the robust test.
    pub contacts: usize,
    pub rotations: usize,
    pub robust: RobustParams,
}

impl Default for PjConfig {
    fn default() -> Self {
        Self {
            max_grasps: 5000,
            contacts: 1000,
            rotations: 12,
            robust: RobustParams::default(),
        }
    }
}

/// Full analytic pipeline: sampling, robust antipodal scoring, pose
/// expansion and collision filtering. Output is sorted by descending
/// `s_pj_anal`, ties kept in sampling order, and capped at `max_grasps`.
pub fn sample_pj_grasps(mesh: &TriMesh, gripper: &GripperGeometry, config: &PjConfig, seed: u64) -> Vec<PjGraspCandidate> {
    sample_pj_grasps_with(mesh, gripper, config, seed, Parallelism::default())
}

pub fn sample_pj_grasps_with(
    mesh: &TriMesh,
    gripper: &GripperGeometry,
    config: &PjConfig,
    seed: u64,
    exec: Parallelism,
) -> Vec<PjGraspCandidate> {
    let samples = sample_surface(mesh, config.contacts, item_seed(seed, u64::MAX));
    let per_contact = exec.map_range(samples.len(), |i| {
        let score = robust_antipodal_score(
            mesh,
            &samples[i],
            &config.robust,
            gripper.friction,
            gripper.max_opening,
            item_seed(seed, i as u64),
        );
        let Some(pair) = score.pair else {
            return Vec::new();
        };
        expand_poses(&pair, score.score, config.rotations, i)
            .into_iter()
            .filter_map(|mut g| {
                g.collision_free = gripper_collision_check(mesh, &g.pose, g.width, gripper);
                g.collision_free.then_some(g)
            })
            .collect::<Vec<_>>()
    });
    let mut grasps: Vec<PjGraspCandidate> = per_contact.into_iter().flatten().collect();
    grasps.sort_by(|a, b| b.s_pj_anal.total_cmp(&a.s_pj_anal));
    grasps.truncate(config.max_grasps);
    grasps
}
