//! Ambidextrous grasp label synthesis for bin picking.
//!
//! The crate turns triangle meshes into vacuum and parallel-jaw grasp labels
//! and annotates bin scenes with amodal masks, occlusion relations, layer
//! graphs, difficulty levels, keypoints and centre-of-mass heatmaps.
//!
//! - [`mesh`]: mesh I/O, BVH ray casting, surface sampling, mass properties
//! - [`suction`]: projected spring-mass suction cup seal model
//! - [`pj`]: robust antipodal parallel-jaw sampling and collision filtering
//! - [`wrench`]: gravity wrench scores for both gripper types
//! - [`scene`]: ray-cast scene labels and scene-context grasp filtering
//! - [`calibrate`]: Bayesian calibration of the seal model

pub mod calibrate;
pub mod geometry;
pub mod mesh;
pub mod par;
pub mod pj;
pub mod scene;
pub mod suction;
pub mod wrench;

pub use geometry::{RigidTransform, Vec3};
pub use mesh::{Ray, RayHit, TriMesh};
pub use par::Parallelism;
