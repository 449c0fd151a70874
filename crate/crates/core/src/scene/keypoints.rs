use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::mesh::{MeshError, Ray};

use super::{Camera, Scene};

/// Surfaces closer than this to a keypoint do not hide it, m.
pub const KEYPOINT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub id_sem: u32,
    pub x: f64,
    pub y: f64,
    pub id_class: u32,
    pub id_instance: u32,
    pub visible: bool,
}

/// Projects every annotated keypoint of the scene. Keypoints behind the
/// camera are left out; the rest are visible when they fall inside the image
/// and nothing lies more than [`KEYPOINT_TOLERANCE`] in front of them.
pub fn project_keypoints(scene: &Scene, camera: &Camera) -> Vec<Keypoint> {
    let mut out = Vec::new();
    for inst in &scene.instances {
        for kp in &inst.keypoints {
            let world = inst.pose.apply_point(&Vec3::from(kp.position));
            let Some((x, y, _)) = camera.project(&world) else {
                continue;
            };
            let visible = camera.in_image(x, y) && unobstructed(scene, &camera.center(), &world);
            out.push(Keypoint {
                id_sem: kp.id_sem,
                x,
                y,
                id_class: inst.class_id,
                id_instance: inst.instance_id,
                visible,
            });
        }
    }
    out
}

pub(crate) fn unobstructed(scene: &Scene, eye: &Vec3, target: &Vec3) -> bool {
    let dist = (target - eye).norm();
    let ray = Ray::new(*eye, target - eye);
    scene.raycast_within(&ray, dist - KEYPOINT_TOLERANCE).is_none()
}

/// Single-channel float image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f32>,
    /// Projected image point of the centre of mass.
    pub center: (f64, f64),
}

impl Heatmap {
    pub fn get(&self, u: u32, v: u32) -> f32 {
        self.data[v as usize * self.width as usize + u as usize]
    }

    pub fn argmax(&self) -> (u32, u32) {
        let mut best = 0;
        for (i, &x) in self.data.iter().enumerate() {
            if x > self.data[best] {
                best = i;
            }
        }
        ((best % self.width as usize) as u32, (best / self.width as usize) as u32)
    }
}

/// Gaussian heatmap around the projected centre of mass of instance `k`,
/// evaluated at pixel centres with peak value 1. A CoM behind the camera
/// yields an all-zero map.
pub fn com_heatmap(scene: &Scene, camera: &Camera, k: usize, sigma: f64) -> Result<Heatmap, MeshError> {
    let (_, com) = scene.instances[k].mass_and_com()?;
    Ok(com_heatmap_at(camera, &com, sigma))
}

pub fn com_heatmap_at(camera: &Camera, com: &Vec3, sigma: f64) -> Heatmap {
    let (w, h) = (camera.width, camera.height);
    let mut data = vec![0f32; camera.pixel_count()];
    let center = match camera.project(com) {
        Some((x, y, _)) => {
            let inv = 1.0 / (2.0 * sigma * sigma);
            for v in 0..h {
                for u in 0..w {
                    let dx = u as f64 + 0.5 - x;
                    let dy = v as f64 + 0.5 - y;
                    data[v as usize * w as usize + u as usize] = (-(dx * dx + dy * dy) * inv).exp() as f32;
                }
            }
            (x, y)
        }
        None => (f64::NAN, f64::NAN),
    };
    Heatmap {
        width: w,
        height: h,
        data,
        center,
    }
}
