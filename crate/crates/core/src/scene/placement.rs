use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{triangles_interpenetrate, Aabb, RigidTransform, Vec3};
use crate::mesh::{primitives, Ray, TriMesh};

use super::{Instance, Scene, SceneError, Tote};

/// An object that may be dropped into a test scene.
#[derive(Debug, Clone)]
pub struct PlacementObject {
    pub class_id: u32,
    pub mesh_ref: String,
    pub mesh: Arc<TriMesh>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementConfig {
    /// Inner floor size of the tote, m.
    pub bin_extents: [f64; 2],
    pub wall_height: f64,
    pub wall_thickness: f64,
    pub max_attempts: usize,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            bin_extents: [0.4, 0.3],
            wall_height: 0.15,
            wall_thickness: 0.01,
            max_attempts: 200,
        }
    }
}

/// Builds a test scene by placing `count` objects one after another at a
/// random yaw and floor position, lowered vertically until they rest on the
/// tote floor or on what has already been placed.
///
/// The lowering distance is the smallest vertical gap between a vertex of
/// one side and a face of the other; placements that still interpenetrate
/// (edge-on-edge support) are rejected and redrawn.
pub fn sample_test_scene(
    objects: &[PlacementObject],
    count: usize,
    seed: u64,
    config: &PlacementConfig,
) -> Result<Scene, SceneError> {
    if objects.is_empty() || count == 0 {
        return Err(SceneError::Invalid {
            what: "placement".into(),
            reason: "needs at least one object and count ≥ 1".into(),
        });
    }
    let [bx, by] = config.bin_extents;
    let tote_mesh = Arc::new(primitives::tote(bx, by, config.wall_height, config.wall_thickness));
    let tote = Tote::new("tote", tote_mesh, RigidTransform::identity());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed: Vec<Instance> = Vec::with_capacity(count);
    for index in 0..count {
        let obj = &objects[rng.random_range(0..objects.len())];
        let mut done = None;
        for _ in 0..config.max_attempts {
            let yaw = rng.random_range(0.0..std::f64::consts::TAU);
            let spun = obj.mesh.transformed(&RigidTransform::from_yaw(yaw, Vec3::zeros()));
            let b = spun.bounds();
            let (x0, x1) = (-0.5 * bx - b.min.x, 0.5 * bx - b.max.x);
            let (y0, y1) = (-0.5 * by - b.min.y, 0.5 * by - b.max.y);
            if x0 > x1 || y0 > y1 {
                continue;
            }
            let x = if x0 < x1 { rng.random_range(x0..x1) } else { x0 };
            let y = if y0 < y1 { rng.random_range(y0..y1) } else { y0 };
            let ceiling = placed
                .iter()
                .map(|i| i.world.bounds().max.z)
                .fold(config.wall_height, f64::max);
            let start = ceiling + 0.1 - b.min.z;
            let high = spun.transformed(&RigidTransform::from_translation(Vec3::new(x, y, start)));
            let drop = drop_distance(&high, &tote.world, &placed);
            let z = start - drop;
            let pose = RigidTransform::from_yaw(yaw, Vec3::new(x, y, z));
            let inst = Instance::new(index as u32 + 1, obj.class_id, obj.mesh_ref.clone(), obj.mesh.clone(), pose);
            let clear = !interpenetrates(&inst.world, &tote.world)
                && placed.iter().all(|p| !interpenetrates(&inst.world, &p.world));
            if clear {
                done = Some(inst);
                break;
            }
        }
        match done {
            Some(inst) => placed.push(inst),
            None => {
                return Err(SceneError::PlacementFailed {
                    index,
                    attempts: config.max_attempts,
                })
            }
        }
    }
    Scene::new(placed, Some(tote), Vec3::new(0.0, 0.0, -crate::wrench::STANDARD_GRAVITY))
}

/// How far `moving` can be lowered before a vertex meets a face, with the
/// plane z = 0 as a fallback floor.
fn drop_distance(moving: &TriMesh, tote: &TriMesh, placed: &[Instance]) -> f64 {
    let footprint = moving.bounds();
    let mut best = footprint.min.z;
    let down = Vec3::new(0.0, 0.0, -1.0);
    let below = std::iter::once(tote).chain(placed.iter().map(|p| &p.world));
    for still in below {
        let sb = still.bounds();
        if !xy_overlap(&footprint, &sb) {
            continue;
        }
        for v in moving.vertices() {
            if let Some(h) = still.raycast_within(&Ray::new(*v, down), best) {
                best = best.min(h.distance);
            }
        }
        for v in still.vertices() {
            if v.x < footprint.min.x || v.x > footprint.max.x || v.y < footprint.min.y || v.y > footprint.max.y {
                continue;
            }
            if let Some(h) = moving.raycast_within(&Ray::new(*v, -down), best) {
                best = best.min(h.distance);
            }
        }
    }
    best
}

fn xy_overlap(a: &Aabb, b: &Aabb) -> bool {
    a.min.x <= b.max.x && b.min.x <= a.max.x && a.min.y <= b.max.y && b.min.y <= a.max.y
}

pub(crate) fn interpenetrates(a: &TriMesh, b: &TriMesh) -> bool {
    if !a.bounds().overlaps(&b.bounds()) {
        return false;
    }
    (0..a.triangle_count()).any(|i| {
        let ta = a.triangle(i);
        let region = Aabb::from_points(ta.iter());
        b.triangles_overlapping(&region)
            .into_iter()
            .any(|j| triangles_interpenetrate(&ta, &b.triangle(j)))
    })
}
