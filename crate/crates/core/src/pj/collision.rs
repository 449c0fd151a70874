use crate::geometry::{Obb, RigidTransform, Vec3};
use crate::mesh::TriMesh;

use super::GripperGeometry;

/// Finger and palm boxes of an opened gripper, in the frame of `pose`'s parent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperBoxes {
    pub fingers: [Obb; 2],
    pub palm: Obb,
}

impl GripperBoxes {
    pub fn all(&self) -> [Obb; 3] {
        [self.fingers[0], self.fingers[1], self.palm]
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        self.all().iter().any(|b| b.contains(p))
    }

    pub fn intersects_mesh(&self, mesh: &TriMesh) -> bool {
        self.all().iter().any(|b| obb_hits_mesh(b, mesh))
    }
}

/// Places the collision boxes for a grasp opened to `width`.
pub fn gripper_boxes(pose: &RigidTransform, width: f64, g: &GripperGeometry) -> GripperBoxes {
    let inner = 0.5 * width + g.finger_clearance;
    let top = g.tip_overhang;
    let base = top - g.finger_height;
    let half_y = 0.5 * g.finger_width;
    let finger = |side: f64| {
        let (x0, x1) = if side > 0.0 {
            (inner, inner + g.finger_depth)
        } else {
            (-inner - g.finger_depth, -inner)
        };
        Obb::from_local_bounds(pose, Vec3::new(x0, -half_y, base), Vec3::new(x1, half_y, top))
    };
    let palm = Obb::from_local_bounds(
        pose,
        Vec3::new(-0.5 * g.palm[0], -0.5 * g.palm[1], base - g.palm[2]),
        Vec3::new(0.5 * g.palm[0], 0.5 * g.palm[1], base),
    );
    GripperBoxes {
        fingers: [finger(-1.0), finger(1.0)],
        palm,
    }
}

pub(crate) fn obb_hits_mesh(obb: &Obb, mesh: &TriMesh) -> bool {
    mesh.triangles_overlapping(&obb.aabb())
        .into_iter()
        .any(|t| obb.intersects_triangle(&mesh.triangle(t)))
}

/// True when neither finger nor the palm touches the mesh.
pub fn gripper_collision_check(mesh: &TriMesh, pose: &RigidTransform, width: f64, gripper: &GripperGeometry) -> bool {
    !gripper_boxes(pose, width, gripper).intersects_mesh(mesh)
}
