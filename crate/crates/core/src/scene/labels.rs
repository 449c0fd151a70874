use std::collections::HashSet;

use serde::Serialize;

use crate::par::Parallelism;

use super::{
    completeness, difficulty, layer_graph, project_keypoints, relation_matrix, render_maps_with, Camera,
    DifficultyFeatures, DifficultyLevel, InstanceMaps, Keypoint, Layer, OcclusionStats, Scene,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InstanceLayer {
    pub instance_id: u32,
    pub layer: Layer,
    pub complete: bool,
}

/// Everything derived from one viewpoint except the images themselves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViewLabels {
    /// Scene instance ids; rows and columns of `relation` follow this order.
    pub instance_ids: Vec<u32>,
    pub occlusion: Vec<OcclusionStats>,
    pub relation: Vec<Vec<i8>>,
    pub layers: Vec<InstanceLayer>,
    /// `(occluder, occluded)` instance-id pairs.
    pub layer_edges: Vec<(u32, u32)>,
    pub difficulty: DifficultyLevel,
    pub keypoints: Vec<Keypoint>,
}

/// Difficulty inputs over the instances that appear in the view (non-empty
/// amodal mask). An empty view counts as the easiest case.
pub fn difficulty_features(scene: &Scene, maps: &InstanceMaps, layers: &[Layer]) -> DifficultyFeatures {
    let shown = maps.rendered();
    let mut distinct: Vec<Layer> = shown.iter().map(|&k| layers[k]).collect();
    distinct.sort();
    distinct.dedup();
    let mut classes = HashSet::new();
    DifficultyFeatures {
        layer_count: distinct.len(),
        max_occlusion: shown.iter().map(|&k| maps.occlusion(k).s_occl).fold(0.0, f64::max),
        all_complete: shown.iter().all(|&k| completeness(&maps.visible_mask(k))),
        classes_unique: shown.iter().all(|&k| classes.insert(scene.instances[k].class_id)),
    }
}

pub fn label_view(scene: &Scene, camera: &Camera, exec: Parallelism) -> (InstanceMaps, ViewLabels) {
    let maps = render_maps_with(scene, camera, exec);
    let rel = relation_matrix(&maps);
    let graph = layer_graph(&rel);
    let ids = &maps.instance_ids;
    let features = difficulty_features(scene, &maps, &graph.layers);
    let labels = ViewLabels {
        instance_ids: ids.clone(),
        occlusion: (0..ids.len()).map(|k| maps.occlusion(k)).collect(),
        relation: rel.rows(),
        layers: (0..ids.len())
            .map(|k| InstanceLayer {
                instance_id: ids[k],
                layer: graph.layers[k],
                complete: completeness(&maps.visible_mask(k)),
            })
            .collect(),
        layer_edges: graph.edges.iter().map(|&(a, b)| (ids[a], ids[b])).collect(),
        difficulty: difficulty(&features),
        keypoints: project_keypoints(scene, camera),
    };
    (maps, labels)
}
