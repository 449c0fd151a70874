use crate::geometry::{closest_point_on_triangle, Aabb, Vec3};

use super::{Ray, TriMesh};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf { start: usize, count: usize },
    Inner { left: usize, right: usize },
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    kind: NodeKind,
}

/// Median-split bounding volume hierarchy over triangle indices.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl Bvh {
    pub(crate) fn build(vertices: &[Vec3], triangles: &[[usize; 3]]) -> Bvh {
        let boxes: Vec<Aabb> = triangles
            .iter()
            .map(|t| {
                let b = Aabb::from_points(t.iter().map(|&i| &vertices[i]));
                let pad = 1e-9 * b.extent().max().max(1.0);
                b.padded(pad)
            })
            .collect();
        let centroids: Vec<Vec3> = boxes.iter().map(|b| b.center()).collect();
        let mut order: Vec<usize> = (0..triangles.len()).collect();
        let mut nodes = Vec::with_capacity(2 * triangles.len() / LEAF_SIZE + 1);
        build_node(&mut nodes, &mut order, 0, triangles.len(), &boxes, &centroids);
        Bvh { nodes, order }
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn nearest(&self, mesh: &TriMesh, ray: &Ray, t_max: f64) -> Option<(usize, f64, f64, f64)> {
        let mut best: Option<(usize, f64, f64, f64)> = None;
        let mut limit = t_max;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            match node.bounds.ray_interval(&ray.origin, &ray.direction, limit) {
                None => continue,
                Some((t0, _)) if t0 > limit => continue,
                _ => {}
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &tri in &self.order[start..start + count] {
                        if let Some((t, u, v)) = mesh.intersect(tri, ray) {
                            if t > t_max {
                                continue;
                            }
                            let better = match best {
                                None => true,
                                Some((bi, bt, _, _)) => t < bt || (t == bt && tri < bi),
                            };
                            if better {
                                best = Some((tri, t, u, v));
                                limit = t;
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        best
    }

    pub(crate) fn all(&self, mesh: &TriMesh, ray: &Ray, t_max: f64, out: &mut Vec<(usize, f64, f64, f64)>) {
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.bounds.ray_interval(&ray.origin, &ray.direction, t_max).is_none() {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &tri in &self.order[start..start + count] {
                        if let Some((t, u, v)) = mesh.intersect(tri, ray) {
                            if t <= t_max {
                                out.push((tri, t, u, v));
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
    }

    pub(crate) fn overlapping(&self, region: &Aabb, out: &mut Vec<usize>) {
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if !node.bounds.overlaps(region) {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => out.extend_from_slice(&self.order[start..start + count]),
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out.sort_unstable();
    }

    pub(crate) fn closest_point(&self, mesh: &TriMesh, p: &Vec3) -> (Vec3, usize, f64) {
        let mut best = (Vec3::zeros(), usize::MAX, f64::INFINITY);
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if box_distance(&node.bounds, p) > best.2 {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &tri in &self.order[start..start + count] {
                        let [a, b, c] = mesh.triangle(tri);
                        let q = closest_point_on_triangle(p, &a, &b, &c);
                        let d = (q - p).norm();
                        if d < best.2 || (d == best.2 && tri < best.1) {
                            best = (q, tri, d);
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        best
    }
}

fn box_distance(b: &Aabb, p: &Vec3) -> f64 {
    let d = (b.min - p).sup(&(p - b.max)).sup(&Vec3::zeros());
    d.norm()
}

fn build_node(
    nodes: &mut Vec<Node>,
    order: &mut [usize],
    start: usize,
    end: usize,
    boxes: &[Aabb],
    centroids: &[Vec3],
) -> usize {
    let slice = &mut order[start..end];
    let bounds = slice.iter().fold(Aabb::empty(), |acc, &i| acc.union(&boxes[i]));
    let id = nodes.len();
    nodes.push(Node {
        bounds,
        kind: NodeKind::Leaf {
            start,
            count: end - start,
        },
    });
    if end - start <= LEAF_SIZE {
        return id;
    }
    let cbounds = Aabb::from_points(slice.iter().map(|&i| &centroids[i]));
    let ext = cbounds.extent();
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    if ext[axis] <= 0.0 {
        return id;
    }
    let mid = (end - start) / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b))
    });
    let left = build_node(nodes, order, start, start + mid, boxes, centroids);
    let right = build_node(nodes, order, start + mid, end, boxes, centroids);
    nodes[id].kind = NodeKind::Inner { left, right };
    id
}
