//! Software z-buffer depth rendering and background-subtraction segmentation.
//!
//! Each pixel stores the Euclidean distance from the camera centre to the
//! closest surface point seen through the pixel centre. Triangles are clipped
//! against the near plane and a guard band around the image, snapped to a
//! fixed-point grid of 1/256 pixel, and filled with the top-left rule, so
//! adjacent triangles neither overlap nor leave gaps. Depth comes from the
//! face's supporting plane, where `1/z` is affine in pixel coordinates, and is
//! converted to Euclidean distance per pixel.

use alloc::vec::Vec;

use crate::camera::{CameraIntrinsics, CameraPose, View};
use crate::geometry::Triangle;
use crate::math::{round, Vec3};

/// Pixel value for rays that hit nothing.
pub const NO_HIT: f64 = f64::INFINITY;

/// Segmentation value for pixels that show a dynamic surface where the static
/// scene shows nothing.
pub const FOREGROUND_SENTINEL: f64 = -1e30;

const SUBPIXEL_BITS: u32 = 8;
const SUBPIXEL: f64 = (1u32 << SUBPIXEL_BITS) as f64;
/// Extra pixels around the image kept by the side-plane clipping.
const GUARD_BAND: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("image dimensions differ: {a:?} vs {b:?}")]
    DimensionMismatch { a: (usize, usize), b: (usize, usize) },
}

/// Per-pixel camera-to-surface distances, row-major with 1-based pixel
/// coordinates at the API.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DepthImage {
    pub fn empty(width: usize, height: usize) -> Self {
        DepthImage {
            width,
            height,
            data: alloc::vec![NO_HIT; width * height],
        }
    }

    /// Wraps raw row-major values. Panics if the length does not match.
    pub fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "depth buffer size");
        DepthImage {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Distance at 1-based pixel `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(j - 1) * self.width + (i - 1)]
    }

    pub fn finite_count(&self) -> usize {
        self.data.iter().filter(|d| d.is_finite()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelLabel {
    Background,
    Foreground,
}

/// Difference image `dynamic − static` with its foreground mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
    foreground: Vec<bool>,
}

impl SegmentedImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[(j - 1) * self.width + (i - 1)]
    }

    #[inline]
    pub fn is_foreground(&self, i: usize, j: usize) -> bool {
        self.foreground[(j - 1) * self.width + (i - 1)]
    }

    pub fn label(&self, i: usize, j: usize) -> PixelLabel {
        if self.is_foreground(i, j) {
            PixelLabel::Foreground
        } else {
            PixelLabel::Background
        }
    }

    pub fn foreground_mask(&self) -> &[bool] {
        &self.foreground
    }

    pub fn foreground_count(&self) -> usize {
        self.foreground.iter().filter(|&&f| f).count()
    }
}

/// Background subtraction `s = dynamic − static`; negative values are
/// foreground.
pub fn segment(
    static_img: &DepthImage,
    dynamic_img: &DepthImage,
) -> Result<SegmentedImage, RenderError> {
    let (a, b) = (
        (static_img.width, static_img.height),
        (dynamic_img.width, dynamic_img.height),
    );
    if a != b {
        return Err(RenderError::DimensionMismatch { a, b });
    }
    let values: Vec<f64> = static_img
        .data
        .iter()
        .zip(&dynamic_img.data)
        .map(|(&s, &d)| match (d.is_finite(), s.is_finite()) {
            (false, false) => 0.0,
            (true, false) => FOREGROUND_SENTINEL,
            (false, true) => f64::INFINITY,
            (true, true) => d - s,
        })
        .collect();
    let foreground = values.iter().map(|&s| s < 0.0).collect();
    Ok(SegmentedImage {
        width: a.0,
        height: a.1,
        values,
        foreground,
    })
}

/// Renders the depth image of `faces` seen from `pose`. With the `parallel`
/// feature, rows are split into bands rendered on the rayon pool; the output
/// does not depend on the band layout.
pub fn render_depth(
    pose: &CameraPose,
    intrinsics: &CameraIntrinsics,
    faces: &[Triangle],
) -> DepthImage {
    let view = pose.view(intrinsics);
    let tris = setup_triangles(&view, faces);
    let (nx, ny) = (intrinsics.width(), intrinsics.height());
    let mut data = alloc::vec![NO_HIT; nx * ny];
    let norms = ray_norms(&view);
    fill(&tris, &norms, nx, &mut data);
    DepthImage {
        width: nx,
        height: ny,
        data,
    }
}

#[cfg(feature = "parallel")]
fn fill(tris: &[ScreenTri], norms: &[f64], nx: usize, data: &mut [f64]) {
    use rayon::prelude::*;
    const BAND_ROWS: usize = 16;
    data.par_chunks_mut(nx * BAND_ROWS)
        .enumerate()
        .for_each(|(band, rows)| rasterize_rows(tris, norms, nx, rows, 1 + band * BAND_ROWS));
}

#[cfg(not(feature = "parallel"))]
fn fill(tris: &[ScreenTri], norms: &[f64], nx: usize, data: &mut [f64]) {
    rasterize_rows(tris, norms, nx, data, 1);
}

/// `|d|` of the camera-frame ray with unit depth through each pixel centre.
fn ray_norms(view: &View) -> Vec<f64> {
    let (nx, ny) = (view.intrinsics.width(), view.intrinsics.height());
    let mut out = Vec::with_capacity(nx * ny);
    for j in 1..=ny {
        for i in 1..=nx {
            out.push(view.ray_camera(i as f64, j as f64).norm());
        }
    }
    out
}

/// A clipped, snapped, positively oriented screen-space triangle.
#[derive(Debug, Clone, Copy)]
struct ScreenTri {
    x: [i64; 3],
    y: [i64; 3],
    /// `1/z = a·u + b·v + c` over the face's supporting plane.
    depth_plane: [f64; 3],
    /// Inclusive pixel range covered by the bounding box.
    i0: usize,
    i1: usize,
    j0: usize,
    j1: usize,
    top_left: [bool; 3],
}

#[derive(Clone, Copy)]
struct Poly {
    pts: [Vec3; 12],
    n: usize,
}

impl Poly {
    fn push(&mut self, p: Vec3) {
        self.pts[self.n] = p;
        self.n += 1;
    }
}

/// Clip-plane in camera space: points with `dist(p) >= 0` are kept.
#[derive(Clone, Copy)]
enum Plane {
    Near(f64),
    /// `sign * (x − slope·z) >= 0` style side planes.
    X { slope: f64, keep_greater: bool },
    Y { slope: f64, keep_greater: bool },
}

impl Plane {
    #[inline]
    fn dist(&self, p: Vec3) -> f64 {
        match *self {
            Plane::Near(n) => p.z - n,
            Plane::X {
                slope,
                keep_greater,
            } => {
                let d = p.x - slope * p.z;
                if keep_greater {
                    d
                } else {
                    -d
                }
            }
            Plane::Y {
                slope,
                keep_greater,
            } => {
                let d = p.y - slope * p.z;
                if keep_greater {
                    d
                } else {
                    -d
                }
            }
        }
    }
}

fn lex_less(a: Vec3, b: Vec3) -> bool {
    (a.z, a.x, a.y) < (b.z, b.x, b.y)
}

/// Intersection of segment `a–b` with the plane, computed from a canonical
/// endpoint order so shared edges of neighbouring triangles clip to the same
/// point.
fn clip_point(plane: &Plane, a: Vec3, b: Vec3) -> Vec3 {
    let (a, b) = if lex_less(b, a) { (b, a) } else { (a, b) };
    let (da, db) = (plane.dist(a), plane.dist(b));
    let t = da / (da - db);
    let mut p = a.lerp(b, t);
    if let Plane::Near(n) = *plane {
        p.z = n;
    }
    p
}

fn clip(poly: &Poly, plane: &Plane) -> Poly {
    let mut out = Poly {
        pts: [Vec3::ZERO; 12],
        n: 0,
    };
    for k in 0..poly.n {
        let cur = poly.pts[k];
        let prev = poly.pts[(k + poly.n - 1) % poly.n];
        let (dc, dp) = (plane.dist(cur), plane.dist(prev));
        if dc >= 0.0 {
            if dp < 0.0 {
                out.push(clip_point(plane, prev, cur));
            }
            out.push(cur);
        } else if dp >= 0.0 {
            out.push(clip_point(plane, prev, cur));
        }
    }
    out
}

fn setup_triangles(view: &View, faces: &[Triangle]) -> Vec<ScreenTri> {
    let k = &view.intrinsics;
    let (nx, ny) = (k.width() as f64, k.height() as f64);
    let f = view.focal;
    // guard band limits in normalized image coordinates x/z, y/z
    let x_lo = (0.5 - GUARD_BAND - view.cx) / f;
    let x_hi = (nx + 0.5 + GUARD_BAND - view.cx) / f;
    let y_lo = (0.5 - GUARD_BAND - view.cy) / f;
    let y_hi = (ny + 0.5 + GUARD_BAND - view.cy) / f;
    let planes = [
        Plane::Near(view.near),
        Plane::X {
            slope: x_lo,
            keep_greater: true,
        },
        Plane::X {
            slope: x_hi,
            keep_greater: false,
        },
        Plane::Y {
            slope: y_lo,
            keep_greater: true,
        },
        Plane::Y {
            slope: y_hi,
            keep_greater: false,
        },
    ];
    let mut out = Vec::new();
    for tri in faces {
        let c = [
            view.to_camera(tri.v[0]),
            view.to_camera(tri.v[1]),
            view.to_camera(tri.v[2]),
        ];
        let n = (c[1] - c[0]).cross(c[2] - c[0]);
        let d = n.dot(c[0]);
        if d == 0.0 {
            // plane through the eye: seen edge-on
            continue;
        }
        let depth_plane = [
            n.x / (f * d),
            n.y / (f * d),
            (n.z - n.x * view.cx / f - n.y * view.cy / f) / d,
        ];
        let mut poly = Poly {
            pts: [Vec3::ZERO; 12],
            n: 0,
        };
        for p in c {
            poly.push(p);
        }
        let mut rejected = false;
        for plane in &planes {
            let inside = (0..poly.n).filter(|&i| plane.dist(poly.pts[i]) >= 0.0).count();
            if inside == 0 {
                rejected = true;
                break;
            }
            if inside < poly.n {
                poly = clip(&poly, plane);
            }
        }
        if rejected || poly.n < 3 {
            continue;
        }
        let mut sx = [0i64; 12];
        let mut sy = [0i64; 12];
        for i in 0..poly.n {
            let p = poly.pts[i];
            let u = view.cx + f * p.x / p.z;
            let v = view.cy + f * p.y / p.z;
            sx[i] = round(u * SUBPIXEL) as i64;
            sy[i] = round(v * SUBPIXEL) as i64;
        }
        for i in 1..poly.n - 1 {
            if let Some(t) = make_tri(
                [sx[0], sx[i], sx[i + 1]],
                [sy[0], sy[i], sy[i + 1]],
                depth_plane,
                k.width(),
                k.height(),
            ) {
                out.push(t);
            }
        }
    }
    out
}

#[inline]
fn edge(ax: i64, ay: i64, bx: i64, by: i64, px: i64, py: i64) -> i64 {
    (bx - ax) * (py - ay) - (by - ay) * (px - ax)
}

fn make_tri(
    mut x: [i64; 3],
    mut y: [i64; 3],
    depth_plane: [f64; 3],
    nx: usize,
    ny: usize,
) -> Option<ScreenTri> {
    let area2 = edge(x[0], y[0], x[1], y[1], x[2], y[2]);
    if area2 == 0 {
        return None;
    }
    if area2 < 0 {
        x.swap(1, 2);
        y.swap(1, 2);
    }
    let s = SUBPIXEL as i64;
    let (xmin, xmax) = (x[0].min(x[1]).min(x[2]), x[0].max(x[1]).max(x[2]));
    let (ymin, ymax) = (y[0].min(y[1]).min(y[2]), y[0].max(y[1]).max(y[2]));
    // pixel centres sit at integer continuous coordinates
    let i0 = xmin.div_euclid(s) + i64::from(xmin.rem_euclid(s) != 0);
    let i1 = xmax.div_euclid(s);
    let j0 = ymin.div_euclid(s) + i64::from(ymin.rem_euclid(s) != 0);
    let j1 = ymax.div_euclid(s);
    let (i0, i1) = (i0.max(1), i1.min(nx as i64));
    let (j0, j1) = (j0.max(1), j1.min(ny as i64));
    if i0 > i1 || j0 > j1 {
        return None;
    }
    // edge k runs from vertex k+1 to vertex k+2 (opposite vertex k)
    let mut top_left = [false; 3];
    for (k, tl) in top_left.iter_mut().enumerate() {
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        let (dx, dy) = (x[b] - x[a], y[b] - y[a]);
        *tl = dy < 0 || (dy == 0 && dx > 0);
    }
    Some(ScreenTri {
        x,
        y,
        depth_plane,
        i0: i0 as usize,
        i1: i1 as usize,
        j0: j0 as usize,
        j1: j1 as usize,
        top_left,
    })
}

/// Rasterizes into `rows`, a row-major slice whose first row is image row
/// `first_row` (1-based).
fn rasterize_rows(tris: &[ScreenTri], norms: &[f64], nx: usize, rows: &mut [f64], first_row: usize) {
    let band_rows = rows.len() / nx;
    let last_row = first_row + band_rows - 1;
    let s = SUBPIXEL as i64;
    for t in tris {
        let j0 = t.j0.max(first_row);
        let j1 = t.j1.min(last_row);
        if j0 > j1 {
            continue;
        }
        let [a, b, c] = t.depth_plane;
        for j in j0..=j1 {
            let py = j as i64 * s;
            let row = (j - first_row) * nx;
            let norm_row = (j - 1) * nx;
            for i in t.i0..=t.i1 {
                let px = i as i64 * s;
                let w0 = edge(t.x[1], t.y[1], t.x[2], t.y[2], px, py);
                let w1 = edge(t.x[2], t.y[2], t.x[0], t.y[0], px, py);
                let w2 = edge(t.x[0], t.y[0], t.x[1], t.y[1], px, py);
                let inside = |w: i64, tl: bool| w > 0 || (w == 0 && tl);
                if !(inside(w0, t.top_left[0]) && inside(w1, t.top_left[1]) && inside(w2, t.top_left[2]))
                {
                    continue;
                }
                let inv_z = a * i as f64 + b * j as f64 + c;
                if inv_z <= 0.0 {
                    continue;
                }
                let dist = norms[norm_row + i - 1] / inv_z;
                let slot = &mut rows[row + i - 1];
                if dist < *slot {
                    *slot = dist;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::{box_mesh, quad_mesh};
    use crate::math::{cos, Vec3};

    fn intr() -> CameraIntrinsics {
        CameraIntrinsics::with_defaults(64, 48).unwrap()
    }

    fn wall(x: f64, half: f64) -> Vec<Triangle> {
        // plane x = const facing a camera on the x axis looking along +x
        quad_mesh(
            "wall",
            Vec3::new(x, -half, -half),
            Vec3::new(x, half, -half),
            Vec3::new(x, half, half),
            Vec3::new(x, -half, half),
        )
        .triangles()
        .collect()
    }

    fn pose() -> CameraPose {
        CameraPose::from_pan_tilt(Vec3::ZERO, 0.0, 0.0).unwrap()
    }

    #[test]
    fn empty_scene_is_all_no_hit() {
        let img = render_depth(&pose(), &intr(), &[]);
        assert_eq!(img.finite_count(), 0);
        assert!(img.data().iter().all(|&d| d == NO_HIT));
    }

    #[test]
    fn perpendicular_wall_matches_closed_form_at_corners() {
        let k = intr();
        let d = 3.0;
        let img = render_depth(&pose(), &k, &wall(d, 100.0));
        let view = pose().view(&k);
        for &(i, j) in &[(1, 1), (64, 1), (1, 48), (64, 48), (32, 24)] {
            let r = view.ray_camera(i as f64, j as f64);
            let theta = crate::math::atan(crate::math::sqrt(r.x * r.x + r.y * r.y));
            let expect = d / cos(theta);
            assert!((img.get(i, j) - expect).abs() < 1e-9, "pixel {i},{j}");
        }
    }

    #[test]
    fn nearer_wall_wins_in_any_order() {
        let mut faces = wall(5.0, 100.0);
        faces.extend(wall(3.0, 100.0));
        let a = render_depth(&pose(), &intr(), &faces);
        faces.reverse();
        let b = render_depth(&pose(), &intr(), &faces);
        assert_eq!(a, b);
        let view = pose().view(&intr());
        for j in 1..=48 {
            for i in 1..=64 {
                let expect = 3.0 * view.ray_camera(i as f64, j as f64).norm();
                assert!((a.get(i, j) - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn face_crossing_the_camera_plane_is_clipped() {
        // a floor passing under and behind the camera
        let floor: Vec<Triangle> = quad_mesh(
            "floor",
            Vec3::new(-10.0, -10.0, -1.0),
            Vec3::new(10.0, -10.0, -1.0),
            Vec3::new(10.0, 10.0, -1.0),
            Vec3::new(-10.0, 10.0, -1.0),
        )
        .triangles()
        .collect();
        let k = intr();
        let img = render_depth(&pose(), &k, &floor);
        let view = pose().view(&k);
        let tree = crate::geometry::FaceTree::new(&floor);
        for j in 1..=48 {
            for i in 1..=64 {
                let r = view.ray_world(i as f64, j as f64);
                let oracle = tree
                    .first_hit(Vec3::ZERO, r, k.near())
                    .map_or(NO_HIT, |t| t * r.norm());
                let got = img.get(i, j);
                if oracle.is_finite() && got.is_finite() {
                    assert!((oracle - got).abs() < 1e-6 * oracle, "{i},{j} {oracle} {got}");
                }
            }
        }
        // lower half of the image sees the floor
        assert!(img.get(32, 48).is_finite());
        assert!(!img.get(32, 1).is_finite());
    }

    #[test]
    fn closed_box_has_no_cracks() {
        // camera inside a box: every pixel must hit a wall
        let room: Vec<Triangle> = box_mesh("room", Vec3::splat(-2.0), Vec3::splat(3.0))
            .triangles()
            .collect();
        for &(pan, tilt) in &[(0.3, 0.2), (2.0, -0.7), (4.0, 1.3)] {
            let p = CameraPose::from_pan_tilt(Vec3::new(0.1, 0.2, 0.3), pan, tilt).unwrap();
            let img = render_depth(&p, &intr(), &room);
            assert_eq!(img.finite_count(), 64 * 48);
        }
    }

    #[test]
    fn segmentation_sign_rules() {
        let k = intr();
        let stat = render_depth(&pose(), &k, &wall(5.0, 100.0));
        assert_eq!(segment(&stat, &stat).unwrap().foreground_count(), 0);
        let mut dynamic = wall(5.0, 100.0);
        dynamic.extend(wall(2.0, 0.5));
        let dyn_img = render_depth(&pose(), &k, &dynamic);
        let seg = segment(&stat, &dyn_img).unwrap();
        assert!(seg.is_foreground(32, 24));
        assert!((seg.value(32, 24) + 3.0 * pose().view(&k).ray_camera(32.0, 24.0).norm()).abs() < 1e-9);
        assert_eq!(seg.label(1, 1), PixelLabel::Background);
        assert_eq!(seg.value(1, 1), 0.0);
        for (v, f) in seg.values().iter().zip(seg.foreground_mask()) {
            assert_eq!(*f, *v < 0.0);
        }
    }

    #[test]
    fn segmentation_no_static_behind_dynamic_is_sentinel() {
        let k = intr();
        let stat = DepthImage::empty(64, 48);
        let dyn_img = render_depth(&pose(), &k, &wall(2.0, 0.5));
        let seg = segment(&stat, &dyn_img).unwrap();
        assert_eq!(seg.value(32, 24), FOREGROUND_SENTINEL);
        assert!(seg.is_foreground(32, 24));
        let inverse = segment(&dyn_img, &stat).unwrap();
        assert!(!inverse.is_foreground(32, 24));
    }

    #[test]
    fn segmentation_dimension_mismatch() {
        assert!(matches!(
            segment(&DepthImage::empty(8, 8), &DepthImage::empty(9, 8)),
            Err(RenderError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn band_layout_does_not_change_output() {
        let room: Vec<Triangle> = box_mesh("room", Vec3::splat(-2.0), Vec3::splat(3.0))
            .triangles()
            .chain(wall(1.0, 0.4))
            .collect();
        let p = CameraPose::from_pan_tilt(Vec3::new(0.1, 0.2, 0.3), 0.1, 0.05).unwrap();
        let k = CameraIntrinsics::with_defaults(70, 53).unwrap();
        let view = p.view(&k);
        let tris = setup_triangles(&view, &room);
        let norms = ray_norms(&view);
        let mut whole = alloc::vec![NO_HIT; 70 * 53];
        rasterize_rows(&tris, &norms, 70, &mut whole, 1);
        for band in [1usize, 5, 16, 53] {
            let mut banded = alloc::vec![NO_HIT; 70 * 53];
            for (b, rows) in banded.chunks_mut(70 * band).enumerate() {
                rasterize_rows(&tris, &norms, 70, rows, 1 + b * band);
            }
            assert_eq!(whole, banded);
        }
        assert_eq!(render_depth(&p, &k, &room).data(), &whole[..]);
    }
}
