use std::sync::Arc;

use ambigrasp::mesh::primitives::{box_at, box_mesh, cylinder};
use ambigrasp::scene::{
    label_view, layer_graph, relation_matrix, render_maps_with, sample_test_scene, Camera, Instance, Layer,
    PlacementConfig, PlacementObject, Scene,
};
use ambigrasp::{Parallelism, RigidTransform, Vec3};
use proptest::prelude::*;

fn slab(id: u32, min: Vec3, size: Vec3) -> Instance {
    let mesh = Arc::new(box_at(size, min + size * 0.5));
    Instance::new(id, id, format!("slab{id}"), mesh, RigidTransform::identity())
}

fn any_scene() -> impl Strategy<Value = Scene> {
    prop::collection::vec(
        (prop::array::uniform2(-0.15..0.1f64), 0.0..0.1f64, prop::array::uniform3(0.02..0.12f64)),
        1..5,
    )
    .prop_map(|boxes| {
        let instances = boxes
            .into_iter()
            .enumerate()
            .map(|(i, ([x, y], z, s))| slab(i as u32 + 1, Vec3::new(x, y, z), Vec3::from(s)))
            .collect();
        Scene::new(instances, None, Vec3::new(0.0, 0.0, -9.81)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn masks_relations_and_layers_are_consistent(
        scene in any_scene(),
        eye in prop::array::uniform2(-0.2..0.2f64),
        height in 0.6..1.2f64,
    ) {
        let cam = Camera::look_at(Vec3::new(eye[0], eye[1], height), Vec3::zeros(), Vec3::y(), 40, 32, 0.8);
        let maps = render_maps_with(&scene, &cam, Parallelism::Parallel);
        prop_assert_eq!(&maps, &render_maps_with(&scene, &cam, Parallelism::Sequential));
        let mut seen = 0;
        for k in 0..scene.instances.len() {
            let (vis, occl) = (maps.visible_mask(k), maps.occluded_mask(k));
            prop_assert_eq!(&vis.union(&occl), &maps.amodal[k]);
            prop_assert!(vis.intersection(&occl).is_empty());
            let s = maps.occlusion(k);
            prop_assert!((0.0..1.0).contains(&s.s_occl) || s.total == 0);
            seen += vis.count();
            // Visible masks of different instances never overlap.
            for j in 0..k {
                prop_assert!(maps.visible_mask(j).intersection(&vis).is_empty());
            }
        }
        prop_assert_eq!(seen, maps.ids.iter().filter(|&&i| i != 0).count());
        let m = relation_matrix(&maps);
        prop_assert!(m.is_antisymmetric());
        let g = layer_graph(&m);
        for k in 0..scene.instances.len() {
            prop_assert_eq!(g.layers[k] == Layer::Top, g.occluder_count(k) == 0);
        }
        for &(a, b) in &g.edges {
            prop_assert_eq!(m.get(a, b), 1);
        }
    }
}

#[test]
fn placed_objects_rest_without_floating() {
    let objects = [
        PlacementObject {
            class_id: 1,
            mesh_ref: "box".into(),
            mesh: Arc::new(box_mesh(Vec3::new(0.1, 0.07, 0.04))),
        },
        PlacementObject {
            class_id: 2,
            mesh_ref: "cyl".into(),
            mesh: Arc::new(cylinder(0.025, 0.08, 24)),
        },
    ];
    let config = PlacementConfig::default();
    for seed in 0..5 {
        let s = sample_test_scene(&objects, 10, seed, &config).unwrap();
        assert_eq!(s.instances.len(), 10);
        for (i, inst) in s.instances.iter().enumerate() {
            let b = inst.world.bounds();
            assert!(b.min.z > -1e-9, "seed {seed}: object {i} below the floor");
            assert!(b.min.x >= -0.2 - 1e-9 && b.max.x <= 0.2 + 1e-9);
            // Resting on the floor or on something placed earlier.
            let on_floor = b.min.z.abs() < 1e-9;
            let supported = s.instances[..i].iter().any(|o| o.world.bounds().max.z >= b.min.z - 1e-9);
            assert!(on_floor || supported, "seed {seed}: object {i} floats at {}", b.min.z);
        }
        let again = sample_test_scene(&objects, 10, seed, &config).unwrap();
        assert_eq!(s.to_file(), again.to_file());
    }
}

#[test]
fn labels_cover_every_rendered_instance() {
    let objects = [PlacementObject {
        class_id: 1,
        mesh_ref: "box".into(),
        mesh: Arc::new(box_mesh(Vec3::new(0.1, 0.07, 0.04))),
    }];
    let s = sample_test_scene(&objects, 6, 2, &PlacementConfig::default()).unwrap();
    let cam = Camera::look_at(Vec3::new(0.0, 0.0, 1.0), Vec3::zeros(), Vec3::y(), 64, 48, 0.6);
    let (maps, labels) = label_view(&s, &cam, Parallelism::default());
    assert_eq!(labels.instance_ids, maps.instance_ids);
    assert_eq!(labels.relation.len(), s.instances.len());
    assert_eq!(labels.occlusion.len(), s.instances.len());
    // One class repeated six times is never level 1, 2 or 3.
    assert!(labels.difficulty.level >= 4);
}
