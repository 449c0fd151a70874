use serde::{Deserialize, Serialize};

use super::render::{InstanceMaps, Mask};

/// Visible components smaller than this are treated as rasterisation noise.
pub const MIN_COMPONENT_PIXELS: usize = 4;

/// Pairwise occlusion relations in scene instance order: `+1` when the row
/// instance occludes the column instance, `-1` for the reverse, `0` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationMatrix {
    pub n: usize,
    /// Row-major `n × n` entries.
    pub entries: Vec<i8>,
}

impl RelationMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0; n * n],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.n + j]
    }

    /// Sets `m[i][j] = value` and `m[j][i] = -value`.
    pub fn set(&mut self, i: usize, j: usize, value: i8) {
        self.entries[i * self.n + j] = value;
        self.entries[j * self.n + i] = -value;
    }

    pub fn rows(&self) -> Vec<Vec<i8>> {
        self.entries.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == -self.get(j, i)))
    }
}

/// `m[i][j] = 1` when instance i is the visible surface on occluded pixels
/// of instance j.
///
/// If two instances each cover part of the other, the direction with more
/// covering pixels wins and an exact tie yields no relation, which keeps the
/// matrix antisymmetric.
pub fn relation_matrix(maps: &InstanceMaps) -> RelationMatrix {
    let n = maps.instance_ids.len();
    let mut cover = vec![0usize; n * n];
    let slot_of = |id: u16| maps.instance_ids.iter().position(|&x| x == id as u32);
    for (p, &id) in maps.ids.iter().enumerate() {
        if id == 0 {
            continue;
        }
        let Some(i) = slot_of(id) else { continue };
        for j in 0..n {
            if j != i && maps.amodal[j].bits[p] {
                cover[i * n + j] += 1;
            }
        }
    }
    let mut m = RelationMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (cover[i * n + j], cover[j * n + i]);
            if a > b {
                m.set(i, j, 1);
            } else if b > a {
                m.set(i, j, -1);
            }
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Top,
    Secondary,
    Others,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerGraph {
    pub layers: Vec<Layer>,
    /// `(occluder, occluded)` index pairs.
    pub edges: Vec<(usize, usize)>,
}

impl LayerGraph {
    pub fn occluder_count(&self, k: usize) -> usize {
        self.edges.iter().filter(|&&(_, b)| b == k).count()
    }

    /// Number of distinct layers that hold at least one instance.
    pub fn layer_count(&self) -> usize {
        let mut seen: Vec<Layer> = self.layers.clone();
        seen.sort();
        seen.dedup();
        seen.len()
    }
}

pub fn layer_graph(m: &RelationMatrix) -> LayerGraph {
    let mut edges = Vec::new();
    for i in 0..m.n {
        for k in 0..m.n {
            if m.get(i, k) == 1 {
                edges.push((i, k));
            }
        }
    }
    let layers = (0..m.n)
        .map(|k| match (0..m.n).filter(|&i| m.get(i, k) == 1).count() {
            0 => Layer::Top,
            1 => Layer::Secondary,
            _ => Layer::Others,
        })
        .collect();
    LayerGraph { layers, edges }
}

/// 4-connected components of a mask, largest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectedComponents {
    pub sizes: Vec<usize>,
}

impl ConnectedComponents {
    pub fn of(mask: &Mask) -> Self {
        let (w, h) = (mask.width as usize, mask.height as usize);
        let mut seen = vec![false; w * h];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for start in 0..w * h {
            if !mask.bits[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            let mut size = 0;
            while let Some(p) = stack.pop() {
                size += 1;
                let (x, y) = (p % w, p / w);
                let mut visit = |q: usize| {
                    if mask.bits[q] && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                };
                if x > 0 {
                    visit(p - 1);
                }
                if x + 1 < w {
                    visit(p + 1);
                }
                if y > 0 {
                    visit(p - w);
                }
                if y + 1 < h {
                    visit(p + w);
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Self { sizes }
    }

    pub fn significant(&self) -> usize {
        self.sizes.iter().filter(|&&s| s >= MIN_COMPONENT_PIXELS).count()
    }
}

/// An instance is complete when its visible mask forms exactly one
/// significant 4-connected component.
pub fn completeness(visible: &Mask) -> bool {
    ConnectedComponents::of(visible).significant() == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyFeatures {
    pub layer_count: usize,
    /// Largest occlusion score over the instances in view, in [0, 1].
    pub max_occlusion: f64,
    pub all_complete: bool,
    pub classes_unique: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyLevel {
    pub level: u8,
    pub features: DifficultyFeatures,
}

/// Five-level difficulty: level 1 additionally needs at most two layers and
/// at most 5 % occlusion on top of completeness and class uniqueness.
pub fn difficulty(f: &DifficultyFeatures) -> DifficultyLevel {
    let level = match (f.all_complete, f.classes_unique) {
        (true, true) if f.layer_count <= 2 && f.max_occlusion <= 0.05 => 1,
        (true, true) => 2,
        (false, true) => 3,
        (true, false) => 4,
        (false, false) => 5,
    };
    DifficultyLevel { level, features: *f }
}
