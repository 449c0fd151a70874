use serde::Serialize;

use crate::mesh::{Ray, TriMesh};
use crate::par::Parallelism;

use super::{Camera, Scene};

/// Binary image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
}

impl Mask {
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn get(&self, u: u32, v: u32) -> bool {
        self.bits[v as usize * self.width as usize + u as usize]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    fn zip(&self, other: &Mask, f: impl Fn(bool, bool) -> bool) -> Mask {
        Mask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn union(&self, other: &Mask) -> Mask {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Mask) -> Mask {
        self.zip(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Mask) -> Mask {
        self.zip(other, |a, b| a && !b)
    }
}

/// Pixel counts behind one instance's occlusion score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OcclusionStats {
    pub instance_id: u32,
    pub total: usize,
    pub visible: usize,
    pub occluded: usize,
    pub s_occl: f64,
    /// No visible pixel although the amodal mask is non-empty; `s_occl` is
    /// then reported as `1 − 1/total`.
    pub fully_hidden: bool,
}

/// Per-pixel renders of one viewpoint.
///
/// `ids` holds the visible instance id (0 for background and tote), `depth`
/// the optical-axis depth of the nearest surface including the tote (0 for
/// no hit), and `amodal[k]` the silhouette of the k-th scene instance with
/// every other object ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceMaps {
    pub width: u32,
    pub height: u32,
    pub instance_ids: Vec<u32>,
    pub ids: Vec<u16>,
    pub depth: Vec<f32>,
    pub amodal: Vec<Mask>,
}

impl InstanceMaps {
    pub fn index_of(&self, instance_id: u32) -> Option<usize> {
        self.instance_ids.iter().position(|&i| i == instance_id)
    }

    pub fn id_at(&self, u: u32, v: u32) -> u16 {
        self.ids[v as usize * self.width as usize + u as usize]
    }

    pub fn visible_mask(&self, k: usize) -> Mask {
        let id = self.instance_ids[k] as u16;
        Mask {
            width: self.width,
            height: self.height,
            bits: self.ids.iter().map(|&p| p == id).collect(),
        }
    }

    pub fn occluded_mask(&self, k: usize) -> Mask {
        self.amodal[k].difference(&self.visible_mask(k))
    }

    pub fn occlusion(&self, k: usize) -> OcclusionStats {
        let total = self.amodal[k].count();
        let visible = self.visible_mask(k).count();
        let occluded = self.occluded_mask(k).count();
        let fully_hidden = total > 0 && visible == 0;
        let s_occl = if total == 0 {
            0.0
        } else if fully_hidden {
            1.0 - 1.0 / total as f64
        } else {
            occluded as f64 / total as f64
        };
        OcclusionStats {
            instance_id: self.instance_ids[k],
            total,
            visible,
            occluded,
            s_occl,
            fully_hidden,
        }
    }

    /// Instances with a non-empty amodal mask, in scene order.
    pub fn rendered(&self) -> Vec<usize> {
        (0..self.amodal.len()).filter(|&k| !self.amodal[k].is_empty()).collect()
    }
}

fn clipped_hit(mesh: &TriMesh, ray: &Ray, t_near: f64, t_far: f64) -> Option<f64> {
    let shifted = Ray {
        origin: ray.at(t_near),
        direction: ray.direction,
    };
    mesh.raycast_within(&shifted, t_far - t_near).map(|h| h.distance + t_near)
}

pub fn render_maps(scene: &Scene, camera: &Camera) -> InstanceMaps {
    render_maps_with(scene, camera, Parallelism::default())
}

/// Ray-casts one primary ray per pixel; rows are rendered independently so
/// the output does not depend on `exec`.
pub fn render_maps_with(scene: &Scene, camera: &Camera, exec: Parallelism) -> InstanceMaps {
    let (w, h) = (camera.width as usize, camera.height as usize);
    let n = scene.instances.len();
    let rows = exec.map_range(h, |v| {
        let mut ids = vec![0u16; w];
        let mut depth = vec![0f32; w];
        let mut amodal = vec![false; n * w];
        for u in 0..w {
            let (ray, z_per_t) = camera.pixel_ray(u as u32, v as u32);
            let (t_near, t_far) = (camera.near / z_per_t, camera.far / z_per_t);
            let mut best: Option<(f64, u16)> = None;
            for (k, inst) in scene.instances.iter().enumerate() {
                if let Some(t) = clipped_hit(&inst.world, &ray, t_near, t_far) {
                    amodal[k * w + u] = true;
                    if best.is_none_or(|(b, _)| t < b) {
                        best = Some((t, inst.instance_id as u16));
                    }
                }
            }
            if let Some(tote) = &scene.tote {
                if let Some(t) = clipped_hit(&tote.world, &ray, t_near, t_far) {
                    if best.is_none_or(|(b, _)| t < b) {
                        best = Some((t, 0));
                    }
                }
            }
            if let Some((t, id)) = best {
                ids[u] = id;
                depth[u] = (t * z_per_t) as f32;
            }
        }
        (ids, depth, amodal)
    });
    let mut maps = InstanceMaps {
        width: camera.width,
        height: camera.height,
        instance_ids: scene.instances.iter().map(|i| i.instance_id).collect(),
        ids: Vec::with_capacity(w * h),
        depth: Vec::with_capacity(w * h),
        amodal: vec![Mask::empty(camera.width, camera.height); n],
    };
    for (v, (ids, depth, amodal)) in rows.into_iter().enumerate() {
        maps.ids.extend(ids);
        maps.depth.extend(depth);
        for k in 0..n {
            maps.amodal[k].bits[v * w..(v + 1) * w].copy_from_slice(&amodal[k * w..(k + 1) * w]);
        }
    }
    maps
}
