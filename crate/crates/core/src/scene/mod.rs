//! Scene-level labels.
//!
//! A [`Scene`] is a set of posed object instances, optionally inside a tote,
//! seen by a pinhole [`Camera`]. From one viewpoint the module renders
//! instance-ID, depth and amodal masks by ray casting, derives occlusion
//! scores, the pairwise occlusion relation matrix, the manipulation layer
//! graph and the scene difficulty, projects keypoints and centre-of-mass
//! heatmaps, and filters object-level grasps by visibility and approach
//! collisions.

mod camera;
mod filter;
pub mod image;
mod keypoints;
mod labels;
mod placement;
mod relations;
mod render;

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{RigidTransform, Vec3};
use crate::mesh::{load_mesh, mass_properties, MeshError, MeshFormat, Ray, RayHit, TriMesh};

pub use camera::Camera;
pub use filter::{
    filter_grasps_in_scene, FilterCause, FilterConfig, FilteredGrasp, GraspKind, ObjectGrasps, Obstacle,
};
pub use labels::{difficulty_features, label_view, InstanceLayer, ViewLabels};
pub use keypoints::{com_heatmap, com_heatmap_at, project_keypoints, Heatmap, Keypoint, KEYPOINT_TOLERANCE};
pub use placement::{sample_test_scene, PlacementConfig, PlacementObject};
pub use relations::{
    completeness, difficulty, layer_graph, relation_matrix, ConnectedComponents, DifficultyFeatures,
    DifficultyLevel, Layer, LayerGraph, RelationMatrix, MIN_COMPONENT_PIXELS,
};
pub use render::{render_maps, render_maps_with, InstanceMaps, Mask, OcclusionStats};

/// Density used when an instance carries no explicit mass, kg/m³.
pub const DEFAULT_DENSITY: f64 = 1000.0;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("duplicate instance id {0}")]
    DuplicateInstance(u32),
    #[error("instance id {0} is outside 1..=65535")]
    InstanceIdRange(u32),
    #[error("instance {instance}: {source}")]
    Mesh {
        instance: String,
        #[source]
        source: MeshError,
    },
    #[error("{what}: {reason}")]
    Invalid { what: String, reason: String },
    #[error("could not place object {index} after {attempts} attempts")]
    PlacementFailed { index: usize, attempts: usize },
}

/// A keypoint annotation in the mesh's own frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeypointDef {
    pub id_sem: u32,
    pub position: [f64; 3],
}

/// One object entry of a scene file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectEntry {
    pub instance_id: u32,
    pub class_id: u32,
    /// Mesh path, relative to the scene file.
    pub mesh: String,
    pub pose: RigidTransform,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keypoints: Vec<KeypointDef>,
    /// Object mass in kg; derived from the mesh volume when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToteEntry {
    pub mesh: String,
    pub pose: RigidTransform,
}

/// The on-disk scene description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub objects: Vec<ObjectEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tote: Option<ToteEntry>,
    #[serde(default = "default_gravity")]
    pub gravity: [f64; 3],
}

fn default_gravity() -> [f64; 3] {
    [0.0, 0.0, -crate::wrench::STANDARD_GRAVITY]
}

/// A posed object with its mesh in both local and world coordinates.
#[derive(Debug, Clone)]
pub struct Instance {
    pub instance_id: u32,
    pub class_id: u32,
    pub mesh_ref: String,
    pub mesh: Arc<TriMesh>,
    pub pose: RigidTransform,
    pub world: TriMesh,
    pub keypoints: Vec<KeypointDef>,
    pub mass: Option<f64>,
}

impl Instance {
    pub fn new(instance_id: u32, class_id: u32, mesh_ref: impl Into<String>, mesh: Arc<TriMesh>, pose: RigidTransform) -> Self {
        let world = mesh.transformed(&pose);
        Self {
            instance_id,
            class_id,
            mesh_ref: mesh_ref.into(),
            mesh,
            pose,
            world,
            keypoints: Vec::new(),
            mass: None,
        }
    }

    pub fn with_keypoints(mut self, keypoints: Vec<KeypointDef>) -> Self {
        self.keypoints = keypoints;
        self
    }

    /// World-frame centre of mass and mass.
    pub fn mass_and_com(&self) -> Result<(f64, Vec3), MeshError> {
        let props = mass_properties(&self.mesh, DEFAULT_DENSITY)?;
        let mass = self.mass.unwrap_or(props.mass);
        Ok((mass, self.pose.apply_point(&props.center_of_mass)))
    }
}

#[derive(Debug, Clone)]
pub struct Tote {
    pub mesh_ref: String,
    pub mesh: Arc<TriMesh>,
    pub pose: RigidTransform,
    pub world: TriMesh,
}

impl Tote {
    pub fn new(mesh_ref: impl Into<String>, mesh: Arc<TriMesh>, pose: RigidTransform) -> Self {
        let world = mesh.transformed(&pose);
        Self {
            mesh_ref: mesh_ref.into(),
            mesh,
            pose,
            world,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub instances: Vec<Instance>,
    pub tote: Option<Tote>,
    pub gravity: Vec3,
}

impl Scene {
    pub fn new(instances: Vec<Instance>, tote: Option<Tote>, gravity: Vec3) -> Result<Self, SceneError> {
        let mut seen = HashSet::new();
        for inst in &instances {
            if inst.instance_id == 0 || inst.instance_id > u16::MAX as u32 {
                return Err(SceneError::InstanceIdRange(inst.instance_id));
            }
            if !seen.insert(inst.instance_id) {
                return Err(SceneError::DuplicateInstance(inst.instance_id));
            }
        }
        if !gravity.iter().all(|g| g.is_finite()) {
            return Err(SceneError::Invalid {
                what: "gravity".into(),
                reason: "must be finite".into(),
            });
        }
        Ok(Self {
            instances,
            tote,
            gravity,
        })
    }

    /// Resolves mesh paths against `base` and loads each distinct mesh once.
    pub fn from_file(file: &SceneFile, base: &Path) -> Result<Self, SceneError> {
        let mut cache: Vec<(String, Arc<TriMesh>)> = Vec::new();
        let mut load = |name: &str, what: String| -> Result<Arc<TriMesh>, SceneError> {
            if let Some((_, m)) = cache.iter().find(|(n, _)| n == name) {
                return Ok(m.clone());
            }
            let path = resolve(base, name);
            let mesh = MeshFormat::from_path(&path)
                .and_then(|f| load_mesh(&path, f))
                .map_err(|source| SceneError::Mesh { instance: what, source })?;
            let mesh = Arc::new(mesh);
            cache.push((name.to_string(), mesh.clone()));
            Ok(mesh)
        };
        let mut instances = Vec::with_capacity(file.objects.len());
        for obj in &file.objects {
            let mesh = load(&obj.mesh, format!("object {}", obj.instance_id))?;
            if let Some(m) = obj.mass {
                if !(m > 0.0 && m.is_finite()) {
                    return Err(SceneError::Invalid {
                        what: format!("object {} mass", obj.instance_id),
                        reason: "must be positive".into(),
                    });
                }
            }
            let mut inst = Instance::new(obj.instance_id, obj.class_id, obj.mesh.clone(), mesh, obj.pose)
                .with_keypoints(obj.keypoints.clone());
            inst.mass = obj.mass;
            instances.push(inst);
        }
        let tote = match &file.tote {
            Some(t) => Some(Tote::new(t.mesh.clone(), load(&t.mesh, "tote".into())?, t.pose)),
            None => None,
        };
        Scene::new(instances, tote, Vec3::from(file.gravity))
    }

    pub fn to_file(&self) -> SceneFile {
        SceneFile {
            objects: self
                .instances
                .iter()
                .map(|i| ObjectEntry {
                    instance_id: i.instance_id,
                    class_id: i.class_id,
                    mesh: i.mesh_ref.clone(),
                    pose: i.pose,
                    keypoints: i.keypoints.clone(),
                    mass: i.mass,
                })
                .collect(),
            tote: self.tote.as_ref().map(|t| ToteEntry {
                mesh: t.mesh_ref.clone(),
                pose: t.pose,
            }),
            gravity: self.gravity.into(),
        }
    }

    pub fn instance(&self, id: u32) -> Option<&Instance> {
        self.instances.iter().find(|i| i.instance_id == id)
    }

    /// Nearest hit over all instances and the tote; `None` in the obstacle
    /// slot means the tote. Exact ties go to the earlier instance.
    pub fn raycast_within(&self, ray: &Ray, t_max: f64) -> Option<(Option<usize>, RayHit)> {
        let mut best: Option<(Option<usize>, RayHit)> = None;
        let candidates = self
            .instances
            .iter()
            .enumerate()
            .map(|(k, i)| (Some(k), &i.world))
            .chain(self.tote.iter().map(|t| (None, &t.world)));
        for (slot, mesh) in candidates {
            let limit = best.as_ref().map_or(t_max, |(_, b)| b.distance);
            if let Some(h) = mesh.raycast_within(ray, limit) {
                if best.as_ref().is_none_or(|(_, b)| h.distance < b.distance) {
                    best = Some((slot, h));
                }
            }
        }
        best
    }
}

fn resolve(base: &Path, name: &str) -> PathBuf {
    let p = Path::new(name);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
