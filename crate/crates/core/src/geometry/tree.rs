//! Bounding-volume hierarchy over triangles with watertight ray queries.

use alloc::vec::Vec;

use super::Triangle;
use crate::math::{Aabb, Vec3};

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

/// Axis-aligned BVH. Leaves reference a permutation of the input faces; every
/// face appears in exactly one leaf.
#[derive(Debug, Clone)]
pub struct FaceTree {
    faces: Vec<Triangle>,
    /// `order[i]` is the input index of the i-th face in leaf order.
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl FaceTree {
    pub fn new(faces: &[Triangle]) -> Self {
        let mut order: Vec<usize> = (0..faces.len()).collect();
        let centroids: Vec<Vec3> = faces.iter().map(Triangle::centroid).collect();
        let mut nodes = Vec::new();
        if !faces.is_empty() {
            build(faces, &centroids, &mut order, 0, faces.len(), &mut nodes);
        }
        let permuted = order.iter().map(|&i| faces[i]).collect();
        FaceTree {
            faces: permuted,
            order,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Walks the tree invoking `visit(input_index, triangle)` for faces whose
    /// leaf box the ray `origin + t·dir, t ∈ [t_min, t_max]` touches. Return
    /// `false` from `visit` to stop early.
    fn walk(
        &self,
        origin: Vec3,
        dir: Vec3,
        t_min: f64,
        t_max: f64,
        mut visit: impl FnMut(usize, &Triangle) -> bool,
    ) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack: Vec<usize> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if !slab_hit(&node.bounds, origin, dir, t_min, t_max) {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for k in start..start + count {
                        if !visit(self.order[k], &self.faces[k]) {
                            return;
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

    /// Input indices of faces crossing the open segment `(origin, target)`,
    /// sorted ascending.
    pub fn segment_hits(&self, origin: Vec3, target: Vec3) -> Vec<usize> {
        let ray = Ray::new(origin, target - origin);
        let mut hits = Vec::new();
        self.walk(origin, ray.dir, 0.0, 1.0, |i, tri| {
            if let Some(t) = ray.intersect(tri) {
                if t > 0.0 && t < 1.0 {
                    hits.push(i);
                }
            }
            true
        });
        hits.sort_unstable();
        hits
    }

    /// True when any face crosses the open segment `(origin, target)`.
    pub fn segment_blocked(&self, origin: Vec3, target: Vec3) -> bool {
        let ray = Ray::new(origin, target - origin);
        let mut blocked = false;
        self.walk(origin, ray.dir, 0.0, 1.0, |_, tri| {
            if let Some(t) = ray.intersect(tri) {
                if t > 0.0 && t < 1.0 {
                    blocked = true;
                    return false;
                }
            }
            true
        });
        blocked
    }

    /// Smallest ray parameter `t ≥ t_min` at which `origin + t·dir` hits a face.
    pub fn first_hit(&self, origin: Vec3, dir: Vec3, t_min: f64) -> Option<f64> {
        let ray = Ray::new(origin, dir);
        let mut best = f64::INFINITY;
        // walk prunes with the fixed upper bound; the closest hit is kept here
        self.walk(origin, dir, t_min, f64::INFINITY, |_, tri| {
            if let Some(t) = ray.intersect(tri) {
                if t >= t_min && t < best {
                    best = t;
                }
            }
            true
        });
        best.is_finite().then_some(best)
    }

    /// Number of faces crossed by the half-line `origin + t·dir, t > 0`.
    pub fn crossings(&self, origin: Vec3, dir: Vec3) -> usize {
        let ray = Ray::new(origin, dir);
        let mut n = 0;
        self.walk(origin, dir, 0.0, f64::INFINITY, |_, tri| {
            if let Some(t) = ray.intersect(tri) {
                if t > 0.0 {
                    n += 1;
                }
            }
            true
        });
        n
    }

    /// Checks structural invariants: every face in exactly one leaf, parent
    /// boxes contain child boxes, leaf boxes contain their faces.
    pub fn validate(&self) -> bool {
        if self.nodes.is_empty() {
            return self.faces.is_empty();
        }
        let mut seen = alloc::vec![0u32; self.faces.len()];
        for node in &self.nodes {
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for k in start..start + count {
                        seen[k] += 1;
                        if !node.bounds.contains_box(&self.faces[k].bounds()) {
                            return false;
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    if !node.bounds.contains_box(&self.nodes[left].bounds)
                        || !node.bounds.contains_box(&self.nodes[right].bounds)
                    {
                        return false;
                    }
                }
            }
        }
        let mut sorted = self.order.clone();
        sorted.sort_unstable();
        seen.iter().all(|&c| c == 1) && sorted.iter().enumerate().all(|(i, &o)| i == o)
    }
}

fn build(
    faces: &[Triangle],
    centroids: &[Vec3],
    order: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let mut bounds = Aabb::EMPTY;
    let mut cbounds = Aabb::EMPTY;
    for &i in &order[start..end] {
        bounds = bounds.union(&faces[i].bounds());
        cbounds.grow(centroids[i]);
    }
    let index = nodes.len();
    nodes.push(Node {
        bounds,
        kind: NodeKind::Leaf {
            start,
            count: end - start,
        },
    });
    if end - start <= LEAF_SIZE {
        return index;
    }
    let axis = cbounds.longest_axis();
    let mid = start + (end - start) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        centroids[a]
            .get(axis)
            .total_cmp(&centroids[b].get(axis))
            .then(a.cmp(&b))
    });
    let left = build(faces, centroids, order, start, mid, nodes);
    let right = build(faces, centroids, order, mid, end, nodes);
    nodes[index].kind = NodeKind::Inner { left, right };
    index
}

fn slab_hit(b: &Aabb, o: Vec3, d: Vec3, t_min: f64, t_max: f64) -> bool {
    // pad boxes slightly so grazing hits on box faces are never culled
    let pad = 1e-9 * (1.0 + b.extent().max_element());
    let (mut lo, mut hi) = (t_min, t_max);
    for axis in 0..3 {
        let (bmin, bmax) = (b.min.get(axis) - pad, b.max.get(axis) + pad);
        let (oa, da) = (o.get(axis), d.get(axis));
        if da == 0.0 {
            if oa < bmin || oa > bmax {
                return false;
            }
            continue;
        }
        let inv = 1.0 / da;
        let (mut t0, mut t1) = ((bmin - oa) * inv, (bmax - oa) * inv);
        if t0 > t1 {
            core::mem::swap(&mut t0, &mut t1);
        }
        lo = lo.max(t0);
        hi = hi.min(t1);
        if lo > hi {
            return false;
        }
    }
    true
}

/// Ray prepared for the watertight triangle test of Woop, Benthin and Wald.
/// Shared edges produce bit-identical (negated) edge functions in adjacent
/// triangles, so rays through an edge can never leak between them.
#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Vec3,
    pub dir: Vec3,
    kx: usize,
    ky: usize,
    kz: usize,
    sx: f64,
    sy: f64,
    sz: f64,
}

impl Ray {
    pub fn new(origin: Vec3, dir: Vec3) -> Self {
        let a = [dir.x.abs(), dir.y.abs(), dir.z.abs()];
        let kz = if a[0] >= a[1] && a[0] >= a[2] {
            0
        } else if a[1] >= a[2] {
            1
        } else {
            2
        };
        let mut kx = (kz + 1) % 3;
        let mut ky = (kx + 1) % 3;
        if dir.get(kz) < 0.0 {
            core::mem::swap(&mut kx, &mut ky);
        }
        let dz = dir.get(kz);
        Ray {
            origin,
            dir,
            kx,
            ky,
            kz,
            sx: dir.get(kx) / dz,
            sy: dir.get(ky) / dz,
            sz: 1.0 / dz,
        }
    }

    /// Ray parameter of the intersection with `tri`, if any. Rays lying in the
    /// triangle's plane never intersect.
    pub fn intersect(&self, tri: &Triangle) -> Option<f64> {
        if !self.sz.is_finite() {
            return None;
        }
        let a = tri.v[0] - self.origin;
        let b = tri.v[1] - self.origin;
        let c = tri.v[2] - self.origin;
        let (az, bz, cz) = (a.get(self.kz), b.get(self.kz), c.get(self.kz));
        let ax = a.get(self.kx) - self.sx * az;
        let ay = a.get(self.ky) - self.sy * az;
        let bx = b.get(self.kx) - self.sx * bz;
        let by = b.get(self.ky) - self.sy * bz;
        let cx = c.get(self.kx) - self.sx * cz;
        let cy = c.get(self.ky) - self.sy * cz;
        let u = cx * by - cy * bx;
        let v = ax * cy - ay * cx;
        let w = bx * ay - by * ax;
        if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
            return None;
        }
        let det = u + v + w;
        if det == 0.0 {
            return None;
        }
        let t_scaled = u * (self.sz * az) + v * (self.sz * bz) + w * (self.sz * cz);
        Some(t_scaled / det)
    }
}

/// Reference implementation over a plain face list, used to cross-check the
/// tree traversal.
pub fn brute_force_segment_hits(faces: &[Triangle], origin: Vec3, target: Vec3) -> Vec<usize> {
    let ray = Ray::new(origin, target - origin);
    faces
        .iter()
        .enumerate()
        .filter_map(|(i, tri)| match ray.intersect(tri) {
            Some(t) if t > 0.0 && t < 1.0 => Some(i),
            _ => None,
        })
        .collect()
}
