//! Wavefront OBJ subset: `v` and `f` records, comments, and ignored
//! attribute records. Polygons are fan-triangulated.

use std::fmt::Write as _;
use std::path::Path;

use camhull_core::geometry::{GeometryError, TriangleMesh};
use camhull_core::math::Vec3;

#[derive(Debug, thiserror::Error)]
pub enum ObjError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Structure(#[from] GeometryError),
}

/// Records that carry no geometry for a depth-only pipeline.
const IGNORED: &[&str] = &["vn", "vt", "vp", "o", "g", "s", "mtllib", "usemtl", "l", "p"];

fn parse_index(token: &str, vertex_count: usize, line: usize) -> Result<u32, ObjError> {
    let head = token.split('/').next().unwrap_or("");
    let raw: i64 = head.parse().map_err(|_| ObjError::Parse {
        line,
        message: format!("bad vertex reference `{token}`"),
    })?;
    // negative indices count back from the latest vertex
    let idx = match raw {
        0 => {
            return Err(ObjError::Parse {
                line,
                message: "vertex index 0 is not valid in OBJ".into(),
            })
        }
        r if r > 0 => r - 1,
        r => vertex_count as i64 + r,
    };
    if idx < 0 || idx > u32::MAX as i64 {
        return Err(ObjError::Parse {
            line,
            message: format!("vertex reference `{token}` out of range"),
        });
    }
    Ok(idx as u32)
}

/// Parses OBJ text. Index range errors are reported by the mesh constructor
/// and name the offending face.
pub fn parse_obj(name: &str, text: &str) -> Result<TriangleMesh, ObjError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = content.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        match tag {
            "v" => {
                let coords: Vec<f64> = tokens
                    .by_ref()
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| ObjError::Parse {
                        line,
                        message: format!("bad vertex coordinate: {e}"),
                    })?;
                if coords.len() != 3 {
                    return Err(ObjError::Parse {
                        line,
                        message: "vertex needs three coordinates".into(),
                    });
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            "f" => {
                let idx: Vec<u32> = tokens
                    .map(|t| parse_index(t, vertices.len(), line))
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(ObjError::Parse {
                        line,
                        message: "face needs at least three vertices".into(),
                    });
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            t if IGNORED.contains(&t) => {}
            other => {
                return Err(ObjError::Parse {
                    line,
                    message: format!("unknown record `{other}`"),
                })
            }
        }
    }
    Ok(TriangleMesh::new(name, vertices, faces)?)
}

/// Loads a mesh; its name is the file stem.
pub fn load_obj(path: &Path) -> Result<TriangleMesh, ObjError> {
    let text = std::fs::read_to_string(path).map_err(|source| ObjError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_obj(&name, &text)
}

/// OBJ text with shortest round-trip float formatting.
pub fn obj_string(mesh: &TriangleMesh) -> String {
    let mut out = format!("# {}\n", mesh.name());
    for v in mesh.vertices() {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z).unwrap();
    }
    for f in mesh.faces() {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
    }
    out
}

pub fn write_obj(mesh: &TriangleMesh, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, obj_string(mesh))
}
