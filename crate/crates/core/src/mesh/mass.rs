use serde::Serialize;

use crate::geometry::Vec3;

use super::{MeshError, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassProperties {
    /// m³
    pub volume: f64,
    pub center_of_mass: Vec3,
    /// kg
    pub mass: f64,
}

/// Uniform-density mass properties from the signed tetrahedron decomposition
/// about the origin. Exact for closed polyhedra.
pub fn mass_properties(mesh: &TriMesh, density: f64) -> Result<MassProperties, MeshError> {
    if !mesh.is_watertight() {
        return Err(MeshError::NotWatertight);
    }
    // Centre the decomposition on a vertex to limit cancellation.
    let anchor = mesh.vertices()[0];
    let mut volume = 0.0;
    let mut moment = Vec3::zeros();
    for i in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle(i).map(|p| p - anchor);
        let v = a.dot(&b.cross(&c)) / 6.0;
        volume += v;
        moment += (a + b + c) * (v / 4.0);
    }
    if volume.abs() <= f64::EPSILON * mesh.bounds().extent().norm().powi(3) {
        return Err(MeshError::NotWatertight);
    }
    let center_of_mass = moment / volume + anchor;
    let volume = volume.abs();
    Ok(MassProperties {
        volume,
        center_of_mass,
        mass: volume * density,
    })
}
