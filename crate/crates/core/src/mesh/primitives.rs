//! Procedural meshes used by tests, fixtures and the test-scene sampler.
//! All closed shapes are outward-oriented.

use std::collections::HashMap;

use crate::geometry::{RigidTransform, Vec3};

use super::TriMesh;

/// Axis-aligned box with the given edge lengths, centred at the origin.
pub fn box_mesh(extents: Vec3) -> TriMesh {
    let h = extents * 0.5;
    let v: Vec<Vec3> = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { -h.x } else { h.x },
                if i & 2 == 0 { -h.y } else { h.y },
                if i & 4 == 0 { -h.z } else { h.z },
            )
        })
        .collect();
    let quads = [
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
    ];
    let mut t = Vec::new();
    for q in quads {
        t.push([q[0], q[1], q[2]]);
        t.push([q[0], q[2], q[3]]);
    }
    TriMesh::new(v, t).expect("box is valid")
}

/// Box whose centre is at `center`.
pub fn box_at(extents: Vec3, center: Vec3) -> TriMesh {
    box_mesh(extents).transformed(&RigidTransform::from_translation(center))
}

/// Subdivided icosahedron projected onto a sphere.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v: Vec<Vec3> = [
        (-1.0, phi, 0.0), (1.0, phi, 0.0), (-1.0, -phi, 0.0), (1.0, -phi, 0.0),
        (0.0, -1.0, phi), (0.0, 1.0, phi), (0.0, -1.0, -phi), (0.0, 1.0, -phi),
        (phi, 0.0, -1.0), (phi, 0.0, 1.0), (-phi, 0.0, -1.0), (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut t: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, v: &mut Vec<Vec3>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                v.push(((v[a] + v[b]) * 0.5).normalize());
                v.len() - 1
            })
        };
        let mut next = Vec::with_capacity(t.len() * 4);
        for [a, b, c] in t {
            let ab = midpoint(a, b, &mut v);
            let bc = midpoint(b, c, &mut v);
            let ca = midpoint(c, a, &mut v);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        t = next;
    }
    let v = v.into_iter().map(|p| p * radius).collect();
    TriMesh::new(v, t).expect("icosphere is valid")
}

/// Capped cylinder along z, centred at the origin.
pub fn cylinder(radius: f64, height: f64, segments: usize) -> TriMesh {
    let n = segments.max(3);
    let h = height * 0.5;
    let mut v = Vec::with_capacity(2 * n + 2);
    for i in 0..n {
        let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        v.push(Vec3::new(radius * a.cos(), radius * a.sin(), -h));
        v.push(Vec3::new(radius * a.cos(), radius * a.sin(), h));
    }
    let bottom = v.len();
    v.push(Vec3::new(0.0, 0.0, -h));
    let top = v.len();
    v.push(Vec3::new(0.0, 0.0, h));
    let mut t = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        let (b0, t0, b1, t1) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
        t.push([b0, b1, t1]);
        t.push([b0, t1, t0]);
        t.push([bottom, b1, b0]);
        t.push([top, t0, t1]);
    }
    TriMesh::new(v, t).expect("cylinder is valid")
}

/// Open square patch of side `size` in the z = 0 plane, normal +z.
pub fn plane_patch(size: f64, divisions: usize) -> TriMesh {
    let d = divisions.max(1);
    let mut v = Vec::new();
    for j in 0..=d {
        for i in 0..=d {
            v.push(Vec3::new(
                size * (i as f64 / d as f64 - 0.5),
                size * (j as f64 / d as f64 - 0.5),
                0.0,
            ));
        }
    }
    let idx = |i: usize, j: usize| j * (d + 1) + i;
    let mut t = Vec::new();
    for j in 0..d {
        for i in 0..d {
            t.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            t.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriMesh::new(v, t).expect("patch is valid")
}

/// Closed prism: a counter-clockwise polygon in the xy plane, star-shaped
/// about its first vertex (caps are fanned from it),
/// extruded over z ∈ [-length/2, length/2].
pub fn prism(section: &[(f64, f64)], length: f64) -> TriMesh {
    let n = section.len();
    let h = length * 0.5;
    let mut v = Vec::new();
    for &(x, y) in section {
        v.push(Vec3::new(x, y, -h));
        v.push(Vec3::new(x, y, h));
    }
    let mut t = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        t.push([2 * i, 2 * j, 2 * j + 1]);
        t.push([2 * i, 2 * j + 1, 2 * i + 1]);
    }
    for k in 1..n - 1 {
        t.push([0, 2 * (k + 1), 2 * k]);
        t.push([1, 2 * k + 1, 2 * (k + 1) + 1]);
    }
    TriMesh::new(v, t).expect("prism is valid")
}

/// Isosceles triangular prism whose two slanted faces meet at `apex_angle`
/// (radians) along an edge parallel to z. The apex points along +y.
pub fn wedge(apex_angle: f64, height: f64, length: f64) -> TriMesh {
    let half_base = height * (apex_angle * 0.5).tan();
    prism(&[(-half_base, 0.0), (half_base, 0.0), (0.0, height)], length)
}

/// Open-top tote: floor top at z = 0, inner footprint `inner_x × inner_y`
/// centred at the origin, walls of `wall_height` and thickness `wall`.
pub fn tote(inner_x: f64, inner_y: f64, wall_height: f64, wall: f64) -> TriMesh {
    let ox = inner_x + 2.0 * wall;
    let oy = inner_y + 2.0 * wall;
    let parts = [
        box_at(Vec3::new(ox, oy, wall), Vec3::new(0.0, 0.0, -wall * 0.5)),
        box_at(Vec3::new(wall, oy, wall_height), Vec3::new((inner_x + wall) * 0.5, 0.0, wall_height * 0.5)),
        box_at(Vec3::new(wall, oy, wall_height), Vec3::new(-(inner_x + wall) * 0.5, 0.0, wall_height * 0.5)),
        box_at(Vec3::new(inner_x, wall, wall_height), Vec3::new(0.0, (inner_y + wall) * 0.5, wall_height * 0.5)),
        box_at(Vec3::new(inner_x, wall, wall_height), Vec3::new(0.0, -(inner_y + wall) * 0.5, wall_height * 0.5)),
    ];
    TriMesh::merge(&parts).expect("tote is valid")
}

/// Serializes a mesh as ASCII OBJ text.
pub fn to_obj_string(mesh: &TriMesh) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    for v in mesh.vertices() {
        writeln!(s, "v {} {} {}", v.x, v.y, v.z).unwrap();
    }
    for t in mesh.triangles() {
        writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    s
}
