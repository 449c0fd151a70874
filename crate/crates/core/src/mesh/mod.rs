//! Indexed triangle meshes with derived normals, a BVH for ray queries,
//! area-uniform surface sampling and polyhedral mass properties.

mod bvh;
mod io;
mod mass;
pub mod primitives;
mod sample;

use std::collections::HashMap;
use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::{Aabb, RigidTransform, Vec3};

pub use bvh::Bvh;
pub use io::{load_mesh, parse_obj, parse_ply, MeshFormat};
pub use mass::{mass_properties, MassProperties};
pub use sample::{sample_surface, SurfaceSample};

/// Determinant threshold of the ray/triangle test.
pub const RAY_DET_EPSILON: f64 = 1e-9;
/// Hits closer than this are ignored (self-intersection guard).
pub const RAY_MIN_DISTANCE: f64 = 1e-7;
/// Barycentric slack so rays through shared edges never fall between
/// neighbouring triangles.
const BARY_SLACK: f64 = 1e-12;
/// Faces whose normals differ by less than this share a smoothed normal.
const CREASE_ANGLE_DEG: f64 = 30.0;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("vertex {index} has a non-finite coordinate")]
    NonFiniteVertex { index: usize },
    #[error("triangle {triangle} references vertex {index} but mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("mesh is not watertight")]
    NotWatertight,
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit length.
    pub direction: Vec3,
}

impl Ray {
    /// Normalizes `direction`.
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Self {
            origin,
            direction: direction.normalize(),
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub triangle: usize,
    pub distance: f64,
    pub point: Vec3,
    /// Crease-aware interpolated unit normal.
    pub normal: Vec3,
    pub face_normal: Vec3,
    pub barycentric: [f64; 3],
}

/// Immutable triangle mesh in meters.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    face_normals: Vec<Vec3>,
    corner_normals: Vec<[Vec3; 3]>,
    areas: Vec<f64>,
    total_area: f64,
    watertight: bool,
    bounds: Aabb,
    bvh: Bvh,
}

impl TriMesh {
    /// Builds a mesh and its derived data. Zero-area triangles are dropped.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if let Some(index) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(MeshError::NonFiniteVertex { index });
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i >= vertices.len()) {
                return Err(MeshError::IndexOutOfRange {
                    triangle: t,
                    index,
                    vertex_count: vertices.len(),
                });
            }
        }
        let mut kept = Vec::with_capacity(triangles.len());
        let mut face_normals = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        for tri in triangles {
            let [a, b, c] = tri.map(|i| vertices[i]);
            let cross = (b - a).cross(&(c - a));
            let norm = cross.norm();
            if norm > 0.0 && norm.is_finite() {
                kept.push(tri);
                face_normals.push(cross / norm);
                areas.push(0.5 * norm);
            }
        }
        if kept.is_empty() {
            return Err(MeshError::EmptyMesh);
        }
        let total_area = areas.iter().sum();
        let watertight = is_closed_manifold(&kept);
        let corner_normals = smoothed_corner_normals(&vertices, &kept, &face_normals);
        let bvh = Bvh::build(&vertices, &kept);
        let bounds = Aabb::from_points(kept.iter().flatten().map(|&i| &vertices[i]));
        Ok(Self {
            vertices,
            triangles: kept,
            face_normals,
            corner_normals,
            areas,
            total_area,
            watertight,
            bounds,
            bvh,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        self.triangles[i].map(|v| self.vertices[v])
    }

    pub fn face_normal(&self, i: usize) -> Vec3 {
        self.face_normals[i]
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        self.areas[i]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    pub fn is_watertight(&self) -> bool {
        self.watertight
    }

    /// Tight bounds of the vertices used by triangles.
    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    /// Interpolated normal at barycentric coordinates `w` of triangle `i`.
    pub fn interpolated_normal(&self, i: usize, w: [f64; 3]) -> Vec3 {
        let c = &self.corner_normals[i];
        let n = c[0] * w[0] + c[1] * w[1] + c[2] * w[2];
        let len = n.norm();
        if len > 1e-12 {
            n / len
        } else {
            self.face_normals[i]
        }
    }

    /// Nearest hit along the ray, BVH accelerated.
    pub fn raycast(&self, ray: &Ray) -> Option<RayHit> {
        self.raycast_within(ray, f64::INFINITY)
    }

    /// Nearest hit with distance ≤ `t_max`.
    pub fn raycast_within(&self, ray: &Ray, t_max: f64) -> Option<RayHit> {
        self.bvh
            .nearest(self, ray, t_max)
            .map(|(tri, t, u, v)| self.make_hit(ray, tri, t, u, v))
    }

    /// Nearest hit by testing every triangle. Reference for [`raycast`](Self::raycast).
    pub fn raycast_brute_force(&self, ray: &Ray) -> Option<RayHit> {
        let mut best: Option<(usize, f64, f64, f64)> = None;
        for i in 0..self.triangles.len() {
            if let Some((t, u, v)) = self.intersect(i, ray) {
                if best.is_none_or(|(bi, bt, _, _)| t < bt || (t == bt && i < bi)) {
                    best = Some((i, t, u, v));
                }
            }
        }
        best.map(|(tri, t, u, v)| self.make_hit(ray, tri, t, u, v))
    }

    /// Every surface crossing along the ray with distance ≤ `t_max`, sorted
    /// by distance.
    pub fn raycast_all(&self, ray: &Ray, t_max: f64) -> Vec<RayHit> {
        let mut hits: Vec<(usize, f64, f64, f64)> = Vec::new();
        self.bvh.all(self, ray, t_max, &mut hits);
        hits.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        // A ray through a shared edge reports both triangles; keep one.
        hits.dedup_by(|next, kept| (next.1 - kept.1).abs() <= 1e-9 * kept.1.max(1.0));
        hits.into_iter()
            .map(|(tri, t, u, v)| self.make_hit(ray, tri, t, u, v))
            .collect()
    }

    /// Indices of triangles whose bounding boxes overlap `region`.
    pub fn triangles_overlapping(&self, region: &Aabb) -> Vec<usize> {
        let mut out = Vec::new();
        self.bvh.overlapping(region, &mut out);
        out
    }

    /// Closest surface point to `p`: `(point, triangle, distance)`.
    pub fn closest_point(&self, p: &Vec3) -> (Vec3, usize, f64) {
        self.bvh.closest_point(self, p)
    }

    /// Copy of the mesh with every vertex moved by `tf`.
    pub fn transformed(&self, tf: &RigidTransform) -> TriMesh {
        let vertices = self.vertices.iter().map(|v| tf.apply_point(v)).collect();
        TriMesh::new(vertices, self.triangles.clone()).expect("rigid motion preserves validity")
    }

    /// Disjoint union of several meshes.
    pub fn merge(parts: &[TriMesh]) -> Result<TriMesh, MeshError> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for m in parts {
            let base = vertices.len();
            vertices.extend_from_slice(&m.vertices);
            triangles.extend(m.triangles.iter().map(|t| t.map(|i| i + base)));
        }
        TriMesh::new(vertices, triangles)
    }

    pub(crate) fn intersect(&self, i: usize, ray: &Ray) -> Option<(f64, f64, f64)> {
        let [a, b, c] = self.triangle(i);
        intersect_triangle(&ray.origin, &ray.direction, &a, &b, &c)
    }

    fn make_hit(&self, ray: &Ray, tri: usize, t: f64, u: f64, v: f64) -> RayHit {
        let w = [1.0 - u - v, u, v];
        RayHit {
            triangle: tri,
            distance: t,
            point: ray.at(t),
            normal: self.interpolated_normal(tri, w),
            face_normal: self.face_normals[tri],
            barycentric: w,
        }
    }
}

/// Two-sided Möller–Trumbore test returning `(t, u, v)`.
pub(crate) fn intersect_triangle(o: &Vec3, d: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Option<(f64, f64, f64)> {
    let e1 = b - a;
    let e2 = c - a;
    let p = d.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < RAY_DET_EPSILON {
        return None;
    }
    let inv = 1.0 / det;
    let s = o - a;
    let u = s.dot(&p) * inv;
    if !(-BARY_SLACK..=1.0 + BARY_SLACK).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = d.dot(&q) * inv;
    if v < -BARY_SLACK || u + v > 1.0 + BARY_SLACK {
        return None;
    }
    let t = e2.dot(&q) * inv;
    if t < RAY_MIN_DISTANCE {
        return None;
    }
    Some((t, u, v))
}

fn is_closed_manifold(triangles: &[[usize; 3]]) -> bool {
    // Closed and consistently oriented: every undirected edge is used once
    // in each direction.
    let mut edges: HashMap<(usize, usize), (u32, u32)> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let e = edges.entry((a.min(b), a.max(b))).or_insert((0, 0));
            if a < b {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    edges.values().all(|&c| c == (1, 1))
}

fn smoothed_corner_normals(vertices: &[Vec3], triangles: &[[usize; 3]], normals: &[Vec3]) -> Vec<[Vec3; 3]> {
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); vertices.len()];
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let p = vertices[tri[k]];
            let e1 = vertices[tri[(k + 1) % 3]] - p;
            let e2 = vertices[tri[(k + 2) % 3]] - p;
            let angle = e1.angle(&e2);
            incident[tri[k]].push((t, angle));
        }
    }
    let cos_crease = CREASE_ANGLE_DEG.to_radians().cos();
    triangles
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            tri.map(|v| {
                let nt = normals[t];
                let sum: Vec3 = incident[v]
                    .iter()
                    .filter(|(o, _)| normals[*o].dot(&nt) >= cos_crease)
                    .map(|(o, angle)| normals[*o] * *angle)
                    .sum();
                let len = sum.norm();
                if len > 1e-12 {
                    sum / len
                } else {
                    nt
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::primitives::*;
    use super::*;

    #[test]
    fn derived_invariants() {
        let m = icosphere(1.0, 2);
        for i in 0..m.triangle_count() {
            assert!((m.face_normal(i).norm() - 1.0).abs() < 1e-9);
        }
        let sum: f64 = (0..m.triangle_count()).map(|i| m.triangle_area(i)).sum();
        assert!((sum - m.total_area()).abs() <= 1e-9 * sum);
        assert!(m.is_watertight());
    }

    #[test]
    fn rejects_bad_input() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y()];
        assert!(matches!(TriMesh::new(v.clone(), vec![[0, 1, 3]]), Err(MeshError::IndexOutOfRange { index: 3, .. })));
        assert!(matches!(TriMesh::new(v.clone(), vec![]), Err(MeshError::EmptyMesh)));
        assert!(matches!(TriMesh::new(v.clone(), vec![[0, 0, 1]]), Err(MeshError::EmptyMesh)));
        let mut bad = v;
        bad[1].x = f64::NAN;
        assert!(matches!(TriMesh::new(bad, vec![[0, 1, 2]]), Err(MeshError::NonFiniteVertex { index: 1 })));
    }

    #[test]
    fn watertight_detection() {
        assert!(box_mesh(Vec3::new(1.0, 1.0, 1.0)).is_watertight());
        assert!(!plane_patch(1.0, 1).is_watertight());
    }

    #[test]
    fn cube_raycasts() {
        let cube = box_mesh(Vec3::new(1.0, 1.0, 1.0));
        let hit = cube.raycast(&Ray::new(Vec3::new(0.0, 0.0, 2.0), -Vec3::z())).unwrap();
        assert!((hit.point.z - 0.5).abs() < 1e-12);
        assert!((hit.distance - 1.5).abs() < 1e-12);
        assert!((hit.normal - Vec3::z()).norm() < 1e-12);
        assert!((hit.point - (Vec3::new(0.0, 0.0, 2.0) - Vec3::z() * hit.distance)).norm() < 1e-9);
        assert!(cube.raycast(&Ray::new(Vec3::new(0.0, 2.0, 0.0), Vec3::x())).is_none());
        let all = cube.raycast_all(&Ray::new(Vec3::new(0.0, 0.0, 2.0), -Vec3::z()), 10.0);
        assert_eq!(all.len(), 2);
        assert!((all[1].point.z + 0.5).abs() < 1e-12);
    }

    #[test]
    fn face_diagonal_is_hit() {
        let cube = box_mesh(Vec3::new(1.0, 1.0, 1.0));
        for k in 0..50 {
            let s = -0.5 + k as f64 / 49.0;
            let hit = cube.raycast(&Ray::new(Vec3::new(s, s, 3.0), -Vec3::z()));
            assert!(hit.is_some(), "diagonal ray at {s} slipped through");
        }
    }

    #[test]
    fn sphere_normals_are_smooth() {
        let s = icosphere(1.0, 3);
        let hit = s.raycast(&Ray::new(Vec3::new(0.3, 0.2, 5.0), -Vec3::z())).unwrap();
        let radial = hit.point.normalize();
        assert!(hit.normal.dot(&radial) > hit.face_normal.dot(&radial) - 1e-12);
        assert!(hit.normal.dot(&radial) > 0.9995);
    }

    #[test]
    fn closest_point_matches_brute_force() {
        let s = icosphere(0.5, 2);
        for p in [Vec3::new(1.0, 0.2, -0.3), Vec3::new(0.0, 0.0, 0.1), Vec3::new(-0.2, 0.7, 0.7)] {
            let (q, _, d) = s.closest_point(&p);
            let brute = (0..s.triangle_count())
                .map(|i| {
                    let [a, b, c] = s.triangle(i);
                    (crate::geometry::closest_point_on_triangle(&p, &a, &b, &c) - p).norm()
                })
                .fold(f64::INFINITY, f64::min);
            assert!((d - brute).abs() < 1e-12);
            assert!(((q - p).norm() - d).abs() < 1e-12);
        }
    }
}
