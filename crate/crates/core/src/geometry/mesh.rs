use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::GeometryError;
use crate::math::{Aabb, RigidTransform, Vec3};

/// Faces with area below this are dropped at construction (m²).
pub const DEGENERATE_AREA: f64 = 1e-12;

/// A triangle in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub v: [Vec3; 3],
}

impl Triangle {
    pub const fn new(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Triangle { v: [a, b, c] }
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.v[1] - self.v[0]).cross(self.v[2] - self.v[0]).norm()
    }

    pub fn centroid(&self) -> Vec3 {
        (self.v[0] + self.v[1] + self.v[2]) / 3.0
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::new(
            self.v[0].min(self.v[1]).min(self.v[2]),
            self.v[0].max(self.v[1]).max(self.v[2]),
        )
    }

    pub fn transformed(&self, xf: &RigidTransform) -> Triangle {
        Triangle::new(xf.apply(self.v[0]), xf.apply(self.v[1]), xf.apply(self.v[2]))
    }
}

/// Indexed triangle mesh. Coordinates are finite, indices are in range and
/// no retained face is degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    name: String,
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    dropped_degenerate: usize,
}

impl TriangleMesh {
    pub fn new(
        name: impl Into<String>,
        vertices: Vec<Vec3>,
        faces: Vec<[u32; 3]>,
    ) -> Result<Self, GeometryError> {
        let name = name.into();
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFiniteVertex { mesh: name, index: i });
        }
        let n = vertices.len();
        let mut kept = Vec::with_capacity(faces.len());
        let mut dropped = 0;
        for (fi, f) in faces.into_iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&i| i as usize >= n) {
                return Err(GeometryError::FaceIndexOutOfRange {
                    mesh: name,
                    face: fi,
                    index: bad as usize,
                    vertex_count: n,
                });
            }
            let tri = Triangle::new(
                vertices[f[0] as usize],
                vertices[f[1] as usize],
                vertices[f[2] as usize],
            );
            if tri.area() < DEGENERATE_AREA {
                dropped += 1;
            } else {
                kept.push(f);
            }
        }
        Ok(TriangleMesh {
            name,
            vertices,
            faces: kept,
            dropped_degenerate: dropped,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    /// Number of zero-area faces removed at construction.
    pub fn dropped_degenerate(&self) -> usize {
        self.dropped_degenerate
    }

    pub fn triangle(&self, face: usize) -> Triangle {
        let f = self.faces[face];
        Triangle::new(
            self.vertices[f[0] as usize],
            self.vertices[f[1] as usize],
            self.vertices[f[2] as usize],
        )
    }

    pub fn triangles(&self) -> impl Iterator<Item = Triangle> + '_ {
        (0..self.faces.len()).map(move |i| self.triangle(i))
    }

    pub fn transformed_triangles<'a>(
        &'a self,
        xf: &'a RigidTransform,
    ) -> impl Iterator<Item = Triangle> + 'a {
        self.triangles().map(move |t| t.transformed(xf))
    }

    pub fn bounds(&self) -> Aabb {
        let mut b = Aabb::EMPTY;
        for &v in &self.vertices {
            b.grow(v);
        }
        b
    }

    /// Checks that the surface is closed: every undirected edge is shared by
    /// exactly two faces and the Euler characteristic is even.
    pub fn check_watertight(&self) -> Result<(), GeometryError> {
        let mut edges: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut used = alloc::vec![false; self.vertices.len()];
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                used[a as usize] = true;
            }
        }
        if let Some((&(a, b), &count)) = edges.iter().find(|(_, &c)| c != 2) {
            return Err(GeometryError::NotWatertight {
                mesh: self.name.clone(),
                reason: alloc::format!("edge ({a}, {b}) is shared by {count} faces"),
            });
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        let chi = v - edges.len() as i64 + self.faces.len() as i64;
        if chi % 2 != 0 {
            return Err(GeometryError::NotWatertight {
                mesh: self.name.clone(),
                reason: alloc::format!("odd Euler characteristic {chi}"),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::box_mesh;

    #[test]
    fn degenerate_faces_are_dropped_and_counted() {
        let v = alloc::vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        let m = TriangleMesh::new("t", v, alloc::vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        assert_eq!(m.faces().len(), 1);
        assert_eq!(m.dropped_degenerate(), 1);
    }

    #[test]
    fn out_of_range_index_names_the_face() {
        let v = alloc::vec![Vec3::ZERO; 8];
        let err = TriangleMesh::new("cube", v, alloc::vec![[0, 1, 2], [0, 1, 98]]).unwrap_err();
        match err {
            GeometryError::FaceIndexOutOfRange {
                face,
                index,
                vertex_count,
                ..
            } => {
                assert_eq!((face, index, vertex_count), (1, 98, 8));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn box_is_watertight_and_open_box_is_not() {
        let b = box_mesh("b", Vec3::ZERO, Vec3::splat(1.0));
        b.check_watertight().unwrap();
        let mut faces = b.faces().to_vec();
        faces.pop();
        let open = TriangleMesh::new("open", b.vertices().to_vec(), faces).unwrap();
        assert!(matches!(
            open.check_watertight(),
            Err(GeometryError::NotWatertight { .. })
        ));
    }
}
