//! Small linear-algebra vocabulary shared by every module: rigid transforms,
//! bounding boxes and the exact primitive tests built on them.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("rotation is not orthonormal (max |RᵀR - I| = {0:e})")]
    NotOrthonormal(f64),
    #[error("rotation has determinant {0}, expected +1")]
    Improper(f64),
    #[error("bottom row of homogeneous matrix must be [0, 0, 0, 1]")]
    NotRigid,
    #[error("non-finite entry in transform")]
    NonFinite,
}

/// Orthonormality tolerance accepted when reading transforms from files.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-6;

/// A proper rigid motion `x ↦ R·x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    /// Builds a transform after checking that `rotation` is a proper rotation.
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self, TransformError> {
        if rotation.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(TransformError::NonFinite);
        }
        let err = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if err > ORTHONORMAL_TOLERANCE {
            return Err(TransformError::NotOrthonormal(err));
        }
        let det = rotation.determinant();
        if det < 0.0 {
            return Err(TransformError::Improper(det));
        }
        Ok(Self { rotation, translation })
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    pub fn from_axis_angle(axis: &Vec3, angle: f64, translation: Vec3) -> Self {
        let rotation = Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle).into_inner();
        Self { rotation, translation }
    }

    /// Rotation about the world z axis followed by a translation.
    pub fn from_yaw(yaw: f64, translation: Vec3) -> Self {
        Self::from_axis_angle(&Vec3::z(), yaw, translation)
    }

    /// Parses a row-major homogeneous 4×4 matrix.
    pub fn from_row_major(m: &[f64; 16]) -> Result<Self, TransformError> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(TransformError::NonFinite);
        }
        let bottom = [m[12], m[13], m[14], m[15]];
        if bottom
            .iter()
            .zip([0.0, 0.0, 0.0, 1.0])
            .any(|(a, b)| (a - b).abs() > ORTHONORMAL_TOLERANCE)
        {
            return Err(TransformError::NotRigid);
        }
        let rotation = Matrix3::new(m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]);
        Self::new(rotation, Vec3::new(m[3], m[7], m[11]))
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)], r[(0, 1)], r[(0, 2)], t.x,
            r[(1, 0)], r[(1, 1)], r[(1, 2)], t.y,
            r[(2, 0)], r[(2, 1)], r[(2, 2)], t.z,
            0.0, 0.0, 0.0, 1.0,
        ]
    }

    pub fn apply_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }
}

impl Serialize for RigidTransform {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_row_major().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RigidTransform {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = <[f64; 16]>::deserialize(d)?;
        RigidTransform::from_row_major(&m).map_err(serde::de::Error::custom)
    }
}

/// Two unit vectors completing `n` to a right-handed orthonormal frame
/// `(t1, t2, n)`. Deterministic in `n`.
pub fn tangent_basis(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let t1 = (helper - n * n.dot(&helper)).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&o.min),
            max: self.max.sup(&o.max),
        }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn padded(&self, pad: f64) -> Aabb {
        Aabb {
            min: self.min.add_scalar(-pad),
            max: self.max.add_scalar(pad),
        }
    }

    pub fn overlaps(&self, o: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= o.max[k] && o.min[k] <= self.max[k])
    }

    pub fn transformed(&self, tf: &RigidTransform) -> Aabb {
        let mut out = Aabb::empty();
        for i in 0..8 {
            let c = Vec3::new(
                if i & 1 == 0 { self.min.x } else { self.max.x },
                if i & 2 == 0 { self.min.y } else { self.max.y },
                if i & 4 == 0 { self.min.z } else { self.max.z },
            );
            out.grow(&tf.apply_point(&c));
        }
        out
    }

    /// Slab test. Returns the parametric interval `[t0, t1]` clipped to
    /// `[0, t_max]` if the ray hits the box.
    pub fn ray_interval(&self, origin: &Vec3, dir: &Vec3, t_max: f64) -> Option<(f64, f64)> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for k in 0..3 {
            if dir[k] == 0.0 {
                if origin[k] < self.min[k] || origin[k] > self.max[k] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[k];
            let mut a = (self.min[k] - origin[k]) * inv;
            let mut b = (self.max[k] - origin[k]) * inv;
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

/// Oriented box: `center + axes · (±half_extents)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    pub center: Vec3,
    /// Columns are the box axes (orthonormal).
    pub axes: Matrix3<f64>,
    pub half_extents: Vec3,
}

impl Obb {
    /// Box given in a local frame by its min/max corners, placed by `frame`.
    pub fn from_local_bounds(frame: &RigidTransform, min: Vec3, max: Vec3) -> Self {
        Obb {
            center: frame.apply_point(&((min + max) * 0.5)),
            axes: frame.rotation,
            half_extents: (max - min) * 0.5,
        }
    }

    pub fn transformed(&self, tf: &RigidTransform) -> Obb {
        Obb {
            center: tf.apply_point(&self.center),
            axes: tf.rotation * self.axes,
            half_extents: self.half_extents,
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        let d = self.axes.transpose() * (p - self.center);
        (0..3).all(|k| d[k].abs() <= self.half_extents[k])
    }

    pub fn aabb(&self) -> Aabb {
        let mut r = Vec3::zeros();
        for k in 0..3 {
            r[k] = (0..3)
                .map(|j| self.axes[(k, j)].abs() * self.half_extents[j])
                .sum();
        }
        Aabb {
            min: self.center - r,
            max: self.center + r,
        }
    }

    /// Exact separating-axis test against a triangle (13 candidate axes).
    /// Touching counts as intersecting.
    pub fn intersects_triangle(&self, tri: &[Vec3; 3]) -> bool {
        let rt = self.axes.transpose();
        let v = [
            rt * (tri[0] - self.center),
            rt * (tri[1] - self.center),
            rt * (tri[2] - self.center),
        ];
        let h = self.half_extents;
        let edges = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];
        let separated = |axis: &Vec3| -> bool {
            let p = [axis.dot(&v[0]), axis.dot(&v[1]), axis.dot(&v[2])];
            let r = h.x * axis.x.abs() + h.y * axis.y.abs() + h.z * axis.z.abs();
            let lo = p[0].min(p[1]).min(p[2]);
            let hi = p[0].max(p[1]).max(p[2]);
            lo > r || hi < -r
        };
        for k in 0..3 {
            let mut axis = Vec3::zeros();
            axis[k] = 1.0;
            if separated(&axis) {
                return false;
            }
        }
        let normal = edges[0].cross(&edges[1]);
        if normal.norm_squared() > 0.0 && separated(&normal) {
            return false;
        }
        for e in &edges {
            for k in 0..3 {
                let mut basis = Vec3::zeros();
                basis[k] = 1.0;
                let axis = basis.cross(e);
                if axis.norm_squared() > 1e-30 && separated(&axis) {
                    return false;
                }
            }
        }
        true
    }
}

/// Closest point to `p` on triangle `(a, b, c)` (Ericson's region test).
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// True if two triangles properly interpenetrate. Contact without
/// penetration (shared vertex, touching faces, coplanar overlap) is not
/// reported.
pub fn triangles_interpenetrate(t1: &[Vec3; 3], t2: &[Vec3; 3]) -> bool {
    const EPS: f64 = 1e-12;
    let n2 = (t2[1] - t2[0]).cross(&(t2[2] - t2[0]));
    let d1: Vec<f64> = t1.iter().map(|p| n2.dot(&(p - t2[0]))).collect();
    if !straddles(&d1, EPS * n2.norm()) {
        return false;
    }
    let n1 = (t1[1] - t1[0]).cross(&(t1[2] - t1[0]));
    let d2: Vec<f64> = t2.iter().map(|p| n1.dot(&(p - t1[0]))).collect();
    if !straddles(&d2, EPS * n1.norm()) {
        return false;
    }
    let dir = n1.cross(&n2);
    if dir.norm_squared() < 1e-30 {
        return false;
    }
    let (a0, a1) = plane_crossing_interval(t1, &d1, &dir);
    let (b0, b1) = plane_crossing_interval(t2, &d2, &dir);
    let scale = dir.norm() * 1e-12;
    a0 < b1 - scale && b0 < a1 - scale
}

fn straddles(d: &[f64], eps: f64) -> bool {
    d.iter().any(|&x| x > eps) && d.iter().any(|&x| x < -eps)
}

fn plane_crossing_interval(tri: &[Vec3; 3], d: &[f64], dir: &Vec3) -> (f64, f64) {
    let mut ts = Vec::with_capacity(2);
    for i in 0..3 {
        let j = (i + 1) % 3;
        let (di, dj) = (d[i], d[j]);
        if (di > 0.0 && dj < 0.0) || (di < 0.0 && dj > 0.0) {
            let s = di / (di - dj);
            let p = tri[i] + (tri[j] - tri[i]) * s;
            ts.push(dir.dot(&p));
        } else if di == 0.0 {
            ts.push(dir.dot(&tri[i]));
        }
    }
    let lo = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}
