//! Regenerates the bundled scene fixtures under `tests/fixtures`.
//!
//! Every scene is seen by the same top-down camera. The five `level*`
//! scenes are built so that each lands on one row of the difficulty table;
//! `two_box_stack` is level 2 as well but keeps the top box first so its
//! relation matrix reads `[[0, 1], [-1, 0]]`.
//!
//! Run with `cargo run -p ambigrasp-cli --example make_fixtures`.

use std::fs;
use std::path::Path;

use ambigrasp::geometry::{RigidTransform, Vec3};
use ambigrasp::mesh::primitives::{box_mesh, plane_patch, to_obj_string, tote};
use ambigrasp::scene::{Camera, KeypointDef, ObjectEntry, SceneFile, ToteEntry};

fn object(id: u32, class: u32, mesh: &str, at: [f64; 3]) -> ObjectEntry {
    ObjectEntry {
        instance_id: id,
        class_id: class,
        mesh: mesh.into(),
        pose: RigidTransform::from_translation(Vec3::from(at)),
        keypoints: Vec::new(),
        mass: None,
    }
}

fn save(dir: &Path, name: &str, scene: &SceneFile) {
    let mut text = serde_json::to_string_pretty(scene).unwrap();
    text.push('\n');
    fs::write(dir.join(format!("{name}.json")), text).unwrap();
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    fs::create_dir_all(&dir).unwrap();
    let meshes = [
        ("box.obj", box_mesh(Vec3::new(0.1, 0.1, 0.05))),
        ("slab.obj", box_mesh(Vec3::new(0.06, 0.06, 0.02))),
        ("plank.obj", box_mesh(Vec3::new(0.3, 0.04, 0.02))),
        ("bar.obj", box_mesh(Vec3::new(0.04, 0.3, 0.02))),
        ("cube.obj", box_mesh(Vec3::new(0.05, 0.05, 0.05))),
        ("big_slab.obj", box_mesh(Vec3::new(1.0, 1.0, 0.01))),
        ("patch.obj", plane_patch(0.1, 2)),
        ("tote.obj", tote(0.5, 0.4, 0.1, 0.01)),
    ];
    for (name, mesh) in &meshes {
        fs::write(dir.join(name), to_obj_string(mesh)).unwrap();
    }

    // Looking straight down from 1 m; image x = world x, image y = world -y.
    let pose = RigidTransform::from_row_major(&[
        1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0, //
        0.0, 0.0, -1.0, 1.0, //
        0.0, 0.0, 0.0, 1.0,
    ])
    .unwrap();
    let camera = Camera::new(128, 128, 200.0, 200.0, 64.0, 64.0, pose);
    let mut text = serde_json::to_string_pretty(&camera).unwrap();
    text.push('\n');
    fs::write(dir.join("camera.json"), text).unwrap();

    let tote_entry = Some(ToteEntry {
        mesh: "tote.obj".into(),
        pose: RigidTransform::identity(),
    });
    let scene = |objects, tote| SceneFile {
        objects,
        tote,
        gravity: [0.0, 0.0, -9.81],
    };

    // Level 1: two separate objects of different classes, in a tote.
    let mut a = object(1, 1, "box.obj", [-0.12, 0.0, 0.025]);
    a.keypoints = vec![
        KeypointDef {
            id_sem: 0,
            position: [0.05, 0.05, 0.025],
        },
        KeypointDef {
            id_sem: 1,
            position: [-0.05, -0.05, -0.025],
        },
    ];
    save(&dir, "level1", &scene(vec![a, object(2, 2, "cube.obj", [0.12, 0.0, 0.025])], tote_entry));
    // Level 2: a slab resting on a box corner, 16 % of the box hidden.
    let stack = vec![object(1, 2, "slab.obj", [0.04, 0.04, 0.06]), object(2, 1, "box.obj", [0.0, 0.0, 0.025])];
    save(&dir, "level2", &scene(stack.clone(), None));
    save(&dir, "two_box_stack", &scene(stack, None));
    // Level 3: a bar across a plank splits the plank's visible mask.
    let cross = |class_bar| vec![object(1, 1, "plank.obj", [0.0, 0.0, 0.01]), object(2, class_bar, "bar.obj", [0.0, 0.0, 0.03])];
    save(&dir, "level3", &scene(cross(2), None));
    // Level 4: level 1 with a repeated class.
    save(
        &dir,
        "level4",
        &scene(vec![object(1, 1, "box.obj", [-0.12, 0.0, 0.025]), object(2, 1, "box.obj", [0.12, 0.0, 0.025])], None),
    );
    // Level 5: the crossing with a repeated class.
    save(&dir, "level5", &scene(cross(1), None));
    println!("fixtures written to {}", dir.display());
}
