use super::shape::{Aabb, ShapeHit};
use super::Primitive;
use crate::math::{Point3, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Leaf { bounds: Aabb, start: u32, count: u32 },
    Inner { bounds: Aabb, left: u32, right: u32, axis: u8 },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Median-split bounding volume hierarchy over primitive shapes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(prims: &[Primitive]) -> Self {
        if prims.is_empty() {
            return Bvh::default();
        }
        let boxes: Vec<Aabb> = prims.iter().map(|p| p.shape.aabb()).collect();
        let mut order: Vec<u32> = (0..prims.len() as u32).collect();
        let mut nodes = Vec::new();
        build_node(&boxes, &mut order, 0, prims.len(), &mut nodes);
        Bvh { nodes, order }
    }

    /// Closest hit as `(primitive index, hit)`.
    pub fn intersect(
        &self,
        prims: &[Primitive],
        o: Point3,
        d: Vec3,
        t_min: f64,
        mut t_max: f64,
    ) -> Option<(usize, ShapeHit)> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vec3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
        let mut best = None;
        let mut stack = [0u32; 64];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if !node.bounds().hit(o, inv, t_min, t_max) {
                continue;
            }
            match *node {
                Node::Leaf { start, count, .. } => {
                    for &pi in &self.order[start as usize..(start + count) as usize] {
                        if let Some(h) = prims[pi as usize].shape.intersect(o, d, t_min, t_max) {
                            t_max = h.t;
                            best = Some((pi as usize, h));
                        }
                    }
                }
                Node::Inner { left, right, axis, .. } => {
                    let (first, second) = if d[axis as usize] < 0.0 { (right, left) } else { (left, right) };
                    stack[sp] = second;
                    stack[sp + 1] = first;
                    sp += 2;
                }
            }
        }
        best
    }

    /// Whether anything blocks the open segment `(t_min, t_max)`.
    pub fn occluded(&self, prims: &[Primitive], o: Point3, d: Vec3, t_min: f64, t_max: f64) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let inv = Vec3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
        let mut stack = [0u32; 64];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if !node.bounds().hit(o, inv, t_min, t_max) {
                continue;
            }
            match *node {
                Node::Leaf { start, count, .. } => {
                    for &pi in &self.order[start as usize..(start + count) as usize] {
                        if prims[pi as usize].shape.intersect(o, d, t_min, t_max).is_some() {
                            return true;
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack[sp] = left;
                    stack[sp + 1] = right;
                    sp += 2;
                }
            }
        }
        false
    }
}

fn build_node(boxes: &[Aabb], order: &mut [u32], start: usize, end: usize, nodes: &mut Vec<Node>) -> u32 {
    let bounds = order[start..end].iter().fold(Aabb::EMPTY, |b, &i| b.union(boxes[i as usize]));
    let idx = nodes.len() as u32;
    let count = end - start;
    if count <= LEAF_SIZE {
        nodes.push(Node::Leaf { bounds, start: start as u32, count: count as u32 });
        return idx;
    }
    let cbox = order[start..end].iter().fold(Aabb::EMPTY, |b, &i| b.grow(boxes[i as usize].centroid()));
    let ext = cbox.diagonal();
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    if ext[axis] <= 0.0 {
        nodes.push(Node::Leaf { bounds, start: start as u32, count: count as u32 });
        return idx;
    }
    order[start..end].sort_by(|&a, &b| {
        let ca = boxes[a as usize].centroid()[axis];
        let cb = boxes[b as usize].centroid()[axis];
        ca.total_cmp(&cb).then(a.cmp(&b))
    });
    let mid = start + count / 2;
    nodes.push(Node::Leaf { bounds, start: 0, count: 0 });
    let left = build_node(boxes, order, start, mid, nodes);
    let right = build_node(boxes, order, mid, end, nodes);
    nodes[idx as usize] = Node::Inner { bounds, left, right, axis: axis as u8 };
    idx
}
