//! File writers: depth and segmentation PGMs, voxel dumps, CSV tables and
//! the best-pose file.

use std::fmt::Write as _;

use serde::Serialize;

use camhull_core::camera::CameraPose;
use camhull_core::objective::ScanTable;
use camhull_core::render::{DepthImage, SegmentedImage};
use camhull_core::solvers::SolverTrace;
use camhull_core::voxel::{AttributeField, MultiView, VoxelGrid};

/// Largest depth code; `65535` marks pixels without a hit.
pub const DEPTH_MAX_CODE: u16 = 65534;
pub const DEPTH_NO_HIT: u16 = 65535;

/// 16-bit binary PGM: `round(clamp(d / scale, 0, 65534))`, big-endian,
/// with the scale in a header comment.
pub fn depth_pgm(img: &DepthImage, depth_scale: f64) -> Vec<u8> {
    let mut out = format!(
        "P5\n# depth_scale {depth_scale}\n{} {}\n65535\n",
        img.width(),
        img.height()
    )
    .into_bytes();
    out.reserve(img.data().len() * 2);
    for &d in img.data() {
        let code = if d.is_finite() {
            (d / depth_scale).clamp(0.0, DEPTH_MAX_CODE as f64).round() as u16
        } else {
            DEPTH_NO_HIT
        };
        out.extend_from_slice(&code.to_be_bytes());
    }
    out
}

/// 8-bit binary PGM: 255 foreground, 0 background.
pub fn segmentation_pgm(seg: &SegmentedImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", seg.width(), seg.height()).into_bytes();
    out.extend(seg.foreground_mask().iter().map(|&f| if f { 255u8 } else { 0 }));
    out
}

fn voxa_header(grid: &VoxelGrid) -> String {
    let [vx, vy, vz] = grid.resolution();
    let o = grid.origin();
    let c = grid.cell();
    format!("VOXA v1 {vx} {vy} {vz} {} {} {} {} {} {}\n", o.x, o.y, o.z, c.x, c.y, c.z)
}

/// Label codes of one attribute field, x-fastest.
pub fn voxa_field(grid: &VoxelGrid, field: &AttributeField) -> Vec<u8> {
    let mut out = voxa_header(grid).into_bytes();
    out.extend_from_slice(field.codes());
    out
}

/// Membership (0/1) of a combined view at threshold `k`.
pub fn voxa_membership(grid: &VoxelGrid, view: &MultiView, k: usize) -> Vec<u8> {
    let mut out = voxa_header(grid).into_bytes();
    out.extend(view.counts().iter().map(|&c| u8::from(c as usize >= k)));
    out
}

fn header_x(n: usize) -> String {
    (1..=n).map(|i| format!("x_{i}")).collect::<Vec<_>>().join(",")
}

fn join(x: &[f64]) -> String {
    x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn millis(m: f64, timing: bool) -> String {
    if timing {
        format!("{m:.3}")
    } else {
        "0".into()
    }
}

/// Scan CSV followed by a `#` summary line naming the best row.
pub fn scan_csv(table: &ScanTable, n: usize, timing: bool) -> String {
    let mut out = String::new();
    if n > 0 {
        writeln!(out, "{},value,millis", header_x(n)).unwrap();
    } else {
        writeln!(out, "value,millis").unwrap();
    }
    for r in &table.rows {
        let mut cells = r.x.iter().map(|v| v.to_string()).collect::<Vec<_>>();
        cells.push(r.value.to_string());
        cells.push(millis(r.millis, timing));
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    if let Some(b) = table.best() {
        let r = &table.rows[b];
        let kind = if table.maximize { "max" } else { "min" };
        writeln!(out, "# best row {} ({kind}): value {} at x = ({})", b + 1, r.value, join(&r.x)).unwrap();
    }
    out
}

/// Trace CSV with objective values in their natural sign (`sense` = −1
/// for minimized objectives whose solver values are negated).
pub fn trace_csv(trace: &SolverTrace, sense: f64, timing: bool) -> String {
    let n = trace.records.first().map_or(0, |r| r.x.len());
    let mut out = format!("iter,evals,value,best_value,millis,{}\n", header_x(n));
    let best = trace.best_values();
    for (r, b) in trace.records.iter().zip(best) {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iter,
            r.evals,
            sense * r.value,
            sense * b,
            millis(r.millis, timing),
            join(&r.x)
        )
        .unwrap();
    }
    out
}

#[derive(Serialize)]
struct BestFile<'a> {
    solver: &'a str,
    value: f64,
    evals: usize,
    x: &'a [f64],
    camera: Vec<PoseEntry>,
}

#[derive(Serialize)]
struct PoseEntry {
    position: [f64; 3],
    pan: f64,
    tilt: f64,
    /// `w, x, y, z`; rotates camera-frame vectors into the world.
    quaternion: [f64; 4],
}

/// Best constellation as TOML.
pub fn best_toml(solver: &str, value: f64, evals: usize, x: &[f64], poses: &[CameraPose]) -> String {
    let camera = poses
        .iter()
        .map(|p| {
            let (pan, tilt) = p.pan_tilt();
            let q = p.orientation();
            PoseEntry {
                position: p.position().to_array(),
                pan,
                tilt,
                quaternion: [q.w, q.x, q.y, q.z],
            }
        })
        .collect();
    toml::to_string(&BestFile {
        solver,
        value,
        evals,
        x,
        camera,
    })
    .expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use camhull_core::render::segment;

    #[test]
    fn empty_depth_image_is_all_no_hit() {
        let img = DepthImage::empty(3, 2);
        let bytes = depth_pgm(&img, 0.001);
        let header = b"P5\n# depth_scale 0.001\n3 2\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        assert!(bytes[header.len()..].iter().all(|&b| b == 0xff));
        assert_eq!(bytes.len(), header.len() + 12);
    }

    #[test]
    fn depth_codes_round_and_clamp() {
        let img = DepthImage::from_raw(3, 1, vec![0.0015, 1e9, 0.0004]);
        let bytes = depth_pgm(&img, 0.001);
        let px = &bytes[bytes.len() - 6..];
        assert_eq!(u16::from_be_bytes([px[0], px[1]]), 2);
        assert_eq!(u16::from_be_bytes([px[2], px[3]]), 65534);
        assert_eq!(u16::from_be_bytes([px[4], px[5]]), 0);
    }

    #[test]
    fn segmentation_is_binary() {
        let stat = DepthImage::from_raw(2, 1, vec![5.0, 5.0]);
        let dynamic = DepthImage::from_raw(2, 1, vec![2.0, 5.0]);
        let seg = segment(&stat, &dynamic).unwrap();
        let bytes = segmentation_pgm(&seg);
        assert_eq!(&bytes[bytes.len() - 2..], &[255, 0]);
    }
}
