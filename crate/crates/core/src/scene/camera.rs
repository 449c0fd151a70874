use serde::{Deserialize, Serialize};

use crate::geometry::{RigidTransform, Vec3};
use crate::mesh::Ray;

use super::SceneError;

/// Pinhole camera looking down its +z axis, x right, y down.
///
/// Pixel `(u, v)` covers `[u, u+1) × [v, v+1)` in image coordinates, so its
/// primary ray passes through `(u + 0.5, v + 0.5)`. `pose` maps camera
/// coordinates to world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Camera {
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub pose: RigidTransform,
    #[serde(default = "default_near")]
    pub near: f64,
    #[serde(default = "default_far")]
    pub far: f64,
}

fn default_near() -> f64 {
    0.01
}

fn default_far() -> f64 {
    100.0
}

impl Camera {
    pub fn new(width: u32, height: u32, fx: f64, fy: f64, cx: f64, cy: f64, pose: RigidTransform) -> Self {
        Self {
            width,
            height,
            fx,
            fy,
            cx,
            cy,
            pose,
            near: default_near(),
            far: default_far(),
        }
    }

    /// Camera at `eye` looking at `target`, image y pointing along world
    /// `-up` as far as possible.
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3, width: u32, height: u32, fov_x: f64) -> Self {
        let z = (target - eye).normalize();
        let mut x = z.cross(&up);
        if x.norm() < 1e-9 {
            x = z.cross(&Vec3::x());
        }
        let x = x.normalize();
        let y = z.cross(&x);
        let rotation = nalgebra::Matrix3::from_columns(&[x, y, z]);
        let pose = RigidTransform::new(rotation, eye).expect("orthonormal by construction");
        let f = 0.5 * width as f64 / (0.5 * fov_x).tan();
        Self::new(width, height, f, f, 0.5 * width as f64, 0.5 * height as f64, pose)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |reason: &str| {
            Err(SceneError::Invalid {
                what: "camera".into(),
                reason: reason.into(),
            })
        };
        if self.width == 0 || self.height == 0 {
            return bad("width and height must be positive");
        }
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return bad("fx and fy must be positive");
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return bad("cx and cy must be finite");
        }
        if !(self.near > 0.0 && self.near < self.far) {
            return bad("clip planes need 0 < near < far");
        }
        Ok(())
    }

    /// The same view at another resolution; intrinsics scale with it.
    pub fn with_resolution(&self, width: u32, height: u32) -> Self {
        let sx = width as f64 / self.width as f64;
        let sy = height as f64 / self.height as f64;
        Self {
            width,
            height,
            fx: self.fx * sx,
            fy: self.fy * sy,
            cx: self.cx * sx,
            cy: self.cy * sy,
            ..*self
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn center(&self) -> Vec3 {
        self.pose.translation
    }

    /// Camera-frame direction through image point `(x, y)`, with unit z.
    pub fn direction_camera(&self, x: f64, y: f64) -> Vec3 {
        Vec3::new((x - self.cx) / self.fx, (y - self.cy) / self.fy, 1.0)
    }

    /// Primary ray of pixel `(u, v)` and the factor converting ray distance
    /// to optical-axis depth.
    pub fn pixel_ray(&self, u: u32, v: u32) -> (Ray, f64) {
        let d = self.direction_camera(u as f64 + 0.5, v as f64 + 0.5);
        let z_per_t = 1.0 / d.norm();
        (Ray::new(self.center(), self.pose.apply_vector(&d)), z_per_t)
    }

    /// World point to `(x, y, depth)`; `None` behind or on the camera plane.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64, f64)> {
        let c = self.pose.inverse().apply_point(p);
        if c.z <= 0.0 {
            return None;
        }
        Some((self.fx * c.x / c.z + self.cx, self.fy * c.y / c.z + self.cy, c.z))
    }

    pub fn in_image(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && y >= 0.0 && x < self.width as f64 && y < self.height as f64
    }
}
