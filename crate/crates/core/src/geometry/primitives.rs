//! Procedural stand-in meshes for scenes and tests.

use alloc::string::String;
use alloc::vec::Vec;

use super::TriangleMesh;
use crate::math::{cos, sin, Vec3};

const BOX_FACES: [[u32; 3]; 12] = [
    [0, 4, 6],
    [0, 6, 2],
    [1, 3, 7],
    [1, 7, 5],
    [0, 1, 5],
    [0, 5, 4],
    [2, 6, 7],
    [2, 7, 3],
    [0, 2, 3],
    [0, 3, 1],
    [4, 5, 7],
    [4, 7, 6],
];

/// Closed axis-aligned box with outward-facing triangles (8 vertices, 12 faces).
pub fn box_mesh(name: impl Into<String>, min: Vec3, max: Vec3) -> TriangleMesh {
    let (vertices, faces) = box_parts(min, max, 0);
    TriangleMesh::new(name, vertices, faces).expect("box corners are finite")
}

fn box_parts(min: Vec3, max: Vec3, base: u32) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let vertices = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { min.x } else { max.x },
                if i & 2 == 0 { min.y } else { max.y },
                if i & 4 == 0 { min.z } else { max.z },
            )
        })
        .collect();
    let faces = BOX_FACES
        .iter()
        .map(|f| [f[0] + base, f[1] + base, f[2] + base])
        .collect();
    (vertices, faces)
}

/// Several disjoint boxes in a single mesh.
pub fn boxes_mesh(name: impl Into<String>, boxes: &[(Vec3, Vec3)]) -> TriangleMesh {
    let mut vertices = Vec::with_capacity(boxes.len() * 8);
    let mut faces = Vec::with_capacity(boxes.len() * 12);
    for &(min, max) in boxes {
        let (v, f) = box_parts(min, max, vertices.len() as u32);
        vertices.extend(v);
        faces.extend(f);
    }
    TriangleMesh::new(name, vertices, faces).expect("box corners are finite")
}

/// Planar quad `a, b, c, d` (in order) split into two triangles.
pub fn quad_mesh(name: impl Into<String>, a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> TriangleMesh {
    TriangleMesh::new(name, alloc::vec![a, b, c, d], alloc::vec![[0, 1, 2], [0, 2, 3]])
        .expect("finite quad")
}

/// Closed vertical cylinder standing on `base`.
pub fn cylinder_mesh(
    name: impl Into<String>,
    base: Vec3,
    radius: f64,
    height: f64,
    segments: usize,
) -> TriangleMesh {
    let n = segments.max(3);
    let mut vertices = Vec::with_capacity(2 * n + 2);
    for level in [0.0, height] {
        for i in 0..n {
            let a = core::f64::consts::TAU * i as f64 / n as f64;
            vertices.push(base + Vec3::new(radius * cos(a), radius * sin(a), level));
        }
    }
    let bottom = vertices.len() as u32;
    vertices.push(base);
    let top = bottom + 1;
    vertices.push(base + Vec3::new(0.0, 0.0, height));
    let n32 = n as u32;
    let mut faces = Vec::with_capacity(4 * n);
    for i in 0..n32 {
        let j = (i + 1) % n32;
        faces.push([i, j, n32 + j]);
        faces.push([i, n32 + j, n32 + i]);
        faces.push([bottom, j, i]);
        faces.push([top, n32 + i, n32 + j]);
    }
    TriangleMesh::new(name, vertices, faces).expect("finite cylinder")
}

/// Low-poly standing human built from six disjoint boxes (legs, torso, arms,
/// head). `feet` is the point between the feet, `height` the total height.
/// Parts are separated by small gaps so the mesh stays a union of closed,
/// non-overlapping shells.
pub fn humanoid_mesh(name: impl Into<String>, feet: Vec3, height: f64) -> TriangleMesh {
    let s = height / 1.8;
    let gap = 0.02 * s;
    let p = |x: f64, y: f64, z: f64| feet + Vec3::new(x * s, y * s, z * s);
    let leg_top = 0.85;
    let torso_top = 1.5;
    let boxes = [
        // legs
        (p(-0.17, -0.1, 0.0), p(-0.02, 0.1, leg_top)),
        (p(0.02, -0.1, 0.0), p(0.17, 0.1, leg_top)),
        // torso
        (
            p(-0.2, -0.12, leg_top) + Vec3::new(0.0, 0.0, gap),
            p(0.2, 0.12, torso_top),
        ),
        // arms
        (
            p(-0.32, -0.07, 0.75),
            p(-0.2, 0.07, torso_top) - Vec3::new(gap, 0.0, 0.0),
        ),
        (
            p(0.2, -0.07, 0.75) + Vec3::new(gap, 0.0, 0.0),
            p(0.32, 0.07, torso_top),
        ),
        // head
        (
            p(-0.1, -0.11, torso_top) + Vec3::new(0.0, 0.0, gap),
            p(0.1, 0.11, 1.8),
        ),
    ];
    boxes_mesh(name, &boxes)
}

/// Wall of thickness `thickness` in the plane `y = y0 .. y0 + thickness`,
/// spanning `x0..x1` and `0..height`, with a door opening `door_x0..door_x1`
/// up to `door_height`.
#[allow(clippy::too_many_arguments)]
pub fn wall_with_door_mesh(
    name: impl Into<String>,
    x0: f64,
    x1: f64,
    y0: f64,
    thickness: f64,
    height: f64,
    door_x0: f64,
    door_x1: f64,
    door_height: f64,
) -> TriangleMesh {
    let y1 = y0 + thickness;
    boxes_mesh(
        name,
        &[
            (Vec3::new(x0, y0, 0.0), Vec3::new(door_x0, y1, height)),
            (Vec3::new(door_x1, y0, 0.0), Vec3::new(x1, y1, height)),
            (
                Vec3::new(door_x0, y0, door_height),
                Vec3::new(door_x1, y1, height),
            ),
        ],
    )
}
