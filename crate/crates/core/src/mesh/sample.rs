use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Vec3;

use super::TriMesh;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub point: Vec3,
    /// Interpolated outward unit normal.
    pub normal: Vec3,
    pub triangle: usize,
}

/// Area-uniform surface samples: triangle chosen proportional to area, then
/// a uniform point inside it. Deterministic in `seed`.
pub fn sample_surface(mesh: &TriMesh, count: usize, seed: u64) -> Vec<SurfaceSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = WeightedIndex::new(mesh.areas()).expect("mesh has positive area");
    (0..count)
        .map(|_| {
            let tri = pick.sample(&mut rng);
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let s = r1.sqrt();
            let w = [1.0 - s, s * (1.0 - r2), s * r2];
            let [a, b, c] = mesh.triangle(tri);
            SurfaceSample {
                point: a * w[0] + b * w[1] + c * w[2],
                normal: mesh.interpolated_normal(tri, w),
                triangle: tri,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::primitives::box_mesh;
    use super::*;

    #[test]
    fn single_sample_lies_on_its_triangle() {
        let m = box_mesh(Vec3::new(1.0, 2.0, 3.0));
        let s = sample_surface(&m, 1, 3);
        assert_eq!(s.len(), 1);
        let [a, b, c] = m.triangle(s[0].triangle);
        let q = crate::geometry::closest_point_on_triangle(&s[0].point, &a, &b, &c);
        assert!((q - s[0].point).norm() < 1e-12);
    }

    #[test]
    fn deterministic() {
        let m = box_mesh(Vec3::new(1.0, 1.0, 1.0));
        assert_eq!(sample_surface(&m, 100, 9), sample_surface(&m, 100, 9));
        assert_ne!(sample_surface(&m, 100, 9), sample_surface(&m, 100, 10));
    }
}
