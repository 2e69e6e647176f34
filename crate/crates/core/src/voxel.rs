//! Voxel space: per-camera attribute coloring, k-overlap combination and the
//! voxel-count metric.
//!
//! Attribute fields store one byte per voxel in x-fastest order. Coverage
//! fields use codes `0 = undetectable, 1 = detectable`; hull fields use
//! `0 = outside, 1 = occluded, 2 = changed, 3 = identical`.

use alloc::vec::Vec;

use crate::camera::{CameraIntrinsics, CameraPose, View};
use crate::math::{floor, Aabb, Vec3};
use crate::render::{DepthImage, SegmentedImage};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VoxelError {
    #[error("voxel grid needs positive finite cell sizes and non-zero resolution")]
    InvalidGrid,
    #[error("weight field has {got} entries, grid has {expected} voxels")]
    WeightShape { got: usize, expected: usize },
    #[error("voxel weights must be finite and non-negative (voxel {0})")]
    InvalidWeight(usize),
    #[error("attribute fields belong to different grids or modes")]
    MismatchedFields,
    #[error("overlap threshold {k} outside 1..={m}")]
    Threshold { k: usize, m: usize },
    #[error("no attribute fields to combine")]
    NoFields,
    #[error("more than 255 fields cannot be combined")]
    TooManyFields,
}

/// Regular axis-aligned voxel grid with optional per-voxel weights.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    origin: Vec3,
    cell: Vec3,
    resolution: [usize; 3],
    weights: Option<Vec<f64>>,
}

impl VoxelGrid {
    pub fn new(origin: Vec3, cell: Vec3, resolution: [usize; 3]) -> Result<Self, VoxelError> {
        let ok_cell = [cell.x, cell.y, cell.z]
            .iter()
            .all(|&c| c > 0.0 && c.is_finite());
        if !ok_cell || !origin.is_finite() || resolution.contains(&0) {
            return Err(VoxelError::InvalidGrid);
        }
        Ok(VoxelGrid {
            origin,
            cell,
            resolution,
            weights: None,
        })
    }

    /// Grid exactly covering `bounds` with the given resolution.
    pub fn covering(bounds: Aabb, resolution: [usize; 3]) -> Result<Self, VoxelError> {
        let e = bounds.extent();
        let cell = Vec3::new(
            e.x / resolution[0].max(1) as f64,
            e.y / resolution[1].max(1) as f64,
            e.z / resolution[2].max(1) as f64,
        );
        Self::new(bounds.min, cell, resolution)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self, VoxelError> {
        if weights.len() != self.len() {
            return Err(VoxelError::WeightShape {
                got: weights.len(),
                expected: self.len(),
            });
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(VoxelError::InvalidWeight(i));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn cell(&self) -> Vec3 {
        self.cell
    }

    pub fn resolution(&self) -> [usize; 3] {
        self.resolution
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn len(&self) -> usize {
        self.resolution[0] * self.resolution[1] * self.resolution[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell.x * self.cell.y * self.cell.z
    }

    pub fn bounds(&self) -> Aabb {
        let r = self.resolution;
        Aabb::new(
            self.origin,
            self.origin
                + Vec3::new(
                    self.cell.x * r[0] as f64,
                    self.cell.y * r[1] as f64,
                    self.cell.z * r[2] as f64,
                ),
        )
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.resolution[0] * (j + self.resolution[1] * k)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let [nx, ny, _] = self.resolution;
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    #[inline]
    pub fn center(&self, index: usize) -> Vec3 {
        let [i, j, k] = self.coords(index);
        self.origin
            + Vec3::new(
                (i as f64 + 0.5) * self.cell.x,
                (j as f64 + 0.5) * self.cell.y,
                (k as f64 + 0.5) * self.cell.z,
            )
    }

    pub fn voxel_box(&self, index: usize) -> Aabb {
        let [i, j, k] = self.coords(index);
        let min = self.origin
            + Vec3::new(
                i as f64 * self.cell.x,
                j as f64 * self.cell.y,
                k as f64 * self.cell.z,
            );
        Aabb::new(min, min + self.cell)
    }

    pub fn corners(&self, index: usize) -> [Vec3; 8] {
        let b = self.voxel_box(index);
        let mut out = [Vec3::ZERO; 8];
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = Vec3::new(
                if c & 1 == 0 { b.min.x } else { b.max.x },
                if c & 2 == 0 { b.min.y } else { b.max.y },
                if c & 4 == 0 { b.min.z } else { b.max.z },
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum CoverageLabel {
    Undetectable = 0,
    Detectable = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum HullLabel {
    Outside = 0,
    Occluded = 1,
    Changed = 2,
    Identical = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMode {
    Coverage,
    Hull,
}

impl FieldMode {
    pub fn label_count(self) -> u8 {
        match self {
            FieldMode::Coverage => 2,
            FieldMode::Hull => 4,
        }
    }
}

/// Set of label codes, as a bitmask over codes `0..8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelSet(u8);

impl LabelSet {
    pub const DETECTABLE: LabelSet = LabelSet(1 << CoverageLabel::Detectable as u8);
    pub const UNDETECTABLE: LabelSet = LabelSet(1 << CoverageLabel::Undetectable as u8);
    /// Changed or undetectable (outside / occluded): the conservative hull.
    pub const HULL: LabelSet = LabelSet(
        (1 << HullLabel::Outside as u8) | (1 << HullLabel::Occluded as u8) | (1 << HullLabel::Changed as u8),
    );
    pub const IDENTICAL: LabelSet = LabelSet(1 << HullLabel::Identical as u8);

    pub fn from_codes(codes: &[u8]) -> Self {
        LabelSet(codes.iter().fold(0, |m, &c| m | (1 << c)))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn contains(self, code: u8) -> bool {
        self.0 & (1 << code) != 0
    }

    /// Complement within the label universe of `mode`.
    pub fn complement(self, mode: FieldMode) -> LabelSet {
        let all = (1u8 << mode.label_count()) - 1;
        LabelSet(!self.0 & all)
    }
}

/// One label per voxel for a single camera.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeField {
    mode: FieldMode,
    resolution: [usize; 3],
    codes: Vec<u8>,
}

impl AttributeField {
    /// Wraps raw codes; panics when a code is outside the mode's label set.
    pub fn from_codes(mode: FieldMode, resolution: [usize; 3], codes: Vec<u8>) -> Self {
        assert_eq!(codes.len(), resolution.iter().product::<usize>());
        assert!(codes.iter().all(|&c| c < mode.label_count()));
        AttributeField {
            mode,
            resolution,
            codes,
        }
    }

    pub fn mode(&self) -> FieldMode {
        self.mode
    }

    pub fn resolution(&self) -> [usize; 3] {
        self.resolution
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    pub fn count(&self, set: LabelSet) -> usize {
        self.codes.iter().filter(|&&c| set.contains(c)).count()
    }
}

/// Where a voxel is sampled for coloring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleMode {
    /// Project the voxel centre (one pixel lookup per voxel).
    #[default]
    Center,
    /// Project all eight corners; a voxel is undetectable if any corner is,
    /// and changed if any pixel of its (1-pixel dilated) footprint is
    /// foreground. Never underestimates the hull.
    Corners,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColoringOptions {
    pub sample: SampleMode,
    /// Occlusion slack: a voxel is occluded when its distance exceeds the
    /// static depth by more than this.
    pub depth_slack: f64,
}

impl Default for ColoringOptions {
    fn default() -> Self {
        ColoringOptions {
            sample: SampleMode::Center,
            depth_slack: 0.0,
        }
    }
}

impl ColoringOptions {
    /// Depth slack of half the voxel diagonal.
    pub fn half_diagonal_slack(grid: &VoxelGrid) -> f64 {
        0.5 * grid.cell().norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Visibility {
    Outside,
    Occluded,
    Visible,
}

#[inline]
fn point_visibility(view: &View, depth: &DepthImage, y: Vec3, slack: f64) -> (Visibility, (usize, usize)) {
    match view.pixel(y) {
        None => (Visibility::Outside, (0, 0)),
        Some(((i, j), d)) => {
            if d > depth.get(i, j) + slack {
                (Visibility::Occluded, (i, j))
            } else {
                (Visibility::Visible, (i, j))
            }
        }
    }
}

fn voxel_visibility(
    view: &View,
    grid: &VoxelGrid,
    depth: &DepthImage,
    index: usize,
    opts: &ColoringOptions,
) -> (Visibility, (usize, usize)) {
    match opts.sample {
        SampleMode::Center => point_visibility(view, depth, grid.center(index), opts.depth_slack),
        SampleMode::Corners => {
            let mut occluded = false;
            for c in grid.corners(index) {
                match point_visibility(view, depth, c, opts.depth_slack).0 {
                    Visibility::Outside => return (Visibility::Outside, (0, 0)),
                    Visibility::Occluded => occluded = true,
                    Visibility::Visible => {}
                }
            }
            if occluded {
                (Visibility::Occluded, (0, 0))
            } else {
                (Visibility::Visible, (0, 0))
            }
        }
    }
}

/// True when any pixel in the 1-pixel dilated bounding rectangle of the
/// voxel's projected corners is foreground. All corners must be in front.
fn footprint_has_foreground(view: &View, grid: &VoxelGrid, seg: &SegmentedImage, index: usize) -> bool {
    let (mut umin, mut umax, mut vmin, mut vmax) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for c in grid.corners(index) {
        let p = view.project(c);
        umin = umin.min(p.u);
        umax = umax.max(p.u);
        vmin = vmin.min(p.v);
        vmax = vmax.max(p.v);
    }
    let (nx, ny) = (seg.width() as f64, seg.height() as f64);
    let i0 = floor(umin + 0.5 - 1.0).max(1.0) as usize;
    let i1 = floor(umax + 0.5 + 1.0).min(nx) as usize;
    let j0 = floor(vmin + 0.5 - 1.0).max(1.0) as usize;
    let j1 = floor(vmax + 0.5 + 1.0).min(ny) as usize;
    (j0..=j1).any(|j| (i0..=i1).any(|i| seg.is_foreground(i, j)))
}

#[cfg(feature = "parallel")]
fn fill_codes(len: usize, f: impl Fn(usize) -> u8 + Sync + Send) -> Vec<u8> {
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn fill_codes(len: usize, f: impl Fn(usize) -> u8) -> Vec<u8> {
    (0..len).map(f).collect()
}

/// Coverage coloring: detectable iff inside the frustum and not behind the
/// static surface seen in `static_depth`.
pub fn color_coverage(
    grid: &VoxelGrid,
    pose: &CameraPose,
    intrinsics: &CameraIntrinsics,
    static_depth: &DepthImage,
    opts: &ColoringOptions,
) -> AttributeField {
    let view = pose.view(intrinsics);
    let codes = fill_codes(grid.len(), |index| {
        match voxel_visibility(&view, grid, static_depth, index, opts).0 {
            Visibility::Visible => CoverageLabel::Detectable as u8,
            _ => CoverageLabel::Undetectable as u8,
        }
    });
    AttributeField {
        mode: FieldMode::Coverage,
        resolution: grid.resolution(),
        codes,
    }
}

/// Hull coloring: outside / occluded as for coverage, otherwise changed when
/// the voxel projects onto foreground in `seg` and identical when it projects
/// onto background.
pub fn color_hull(
    grid: &VoxelGrid,
    pose: &CameraPose,
    intrinsics: &CameraIntrinsics,
    static_depth: &DepthImage,
    seg: &SegmentedImage,
    opts: &ColoringOptions,
) -> AttributeField {
    let view = pose.view(intrinsics);
    let codes = fill_codes(grid.len(), |index| {
        let (vis, (i, j)) = voxel_visibility(&view, grid, static_depth, index, opts);
        let label = match vis {
            Visibility::Outside => HullLabel::Outside,
            Visibility::Occluded => HullLabel::Occluded,
            Visibility::Visible => {
                let changed = match opts.sample {
                    SampleMode::Center => seg.is_foreground(i, j),
                    SampleMode::Corners => footprint_has_foreground(&view, grid, seg, index),
                };
                if changed {
                    HullLabel::Changed
                } else {
                    HullLabel::Identical
                }
            }
        };
        label as u8
    });
    AttributeField {
        mode: FieldMode::Hull,
        resolution: grid.resolution(),
        codes,
    }
}

/// Per-voxel count of fields whose label lies in the selected set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiView {
    m: usize,
    counts: Vec<u8>,
}

impl MultiView {
    pub fn cameras(&self) -> usize {
        self.m
    }

    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    #[inline]
    pub fn is_member(&self, index: usize, k: usize) -> bool {
        self.counts[index] as usize >= k
    }

    /// Membership mask at overlap threshold `k`.
    pub fn members(&self, k: usize) -> Vec<bool> {
        self.counts.iter().map(|&c| c as usize >= k).collect()
    }

    pub fn member_count(&self, k: usize) -> usize {
        self.counts.iter().filter(|&&c| c as usize >= k).count()
    }
}

fn check_fields<F: AsRef<AttributeField>>(fields: &[F], k: usize) -> Result<(), VoxelError> {
    let first = fields.first().ok_or(VoxelError::NoFields)?.as_ref();
    if fields.len() > 255 {
        return Err(VoxelError::TooManyFields);
    }
    if fields.iter().any(|f| {
        let f = f.as_ref();
        f.mode != first.mode || f.resolution != first.resolution
    }) {
        return Err(VoxelError::MismatchedFields);
    }
    if k == 0 || k > fields.len() {
        return Err(VoxelError::Threshold { k, m: fields.len() });
    }
    Ok(())
}

impl AsRef<AttributeField> for AttributeField {
    fn as_ref(&self) -> &AttributeField {
        self
    }
}

/// Counts, per voxel, the fields whose label is in `selector`. Membership at
/// threshold `k` (count ≥ k) equals the union over all k-subsets of cameras
/// of the intersection of their selected sets.
pub fn combine<F: AsRef<AttributeField>>(
    fields: &[F],
    selector: LabelSet,
    k: usize,
) -> Result<MultiView, VoxelError> {
    check_fields(fields, k)?;
    let mut counts = alloc::vec![0u8; fields[0].as_ref().codes.len()];
    for f in fields {
        for (c, &code) in counts.iter_mut().zip(&f.as_ref().codes) {
            *c += u8::from(selector.contains(code));
        }
    }
    Ok(MultiView {
        m: fields.len(),
        counts,
    })
}

/// Verifies `C_k(labels) = A \ C_{M−k+1}(not labels)` on the given fields.
pub fn complement_identity_check<F: AsRef<AttributeField>>(
    fields: &[F],
    labels: LabelSet,
    k: usize,
) -> Result<bool, VoxelError> {
    check_fields(fields, k)?;
    let m = fields.len();
    let mode = fields[0].as_ref().mode;
    let with = combine(fields, labels, k)?;
    let without = combine(fields, labels.complement(mode), m - (k - 1))?;
    Ok((0..with.len()).all(|i| with.is_member(i, k) != without.is_member(i, m - (k - 1))))
}

/// Number of member voxels at threshold `k`, or the sum of their weights.
pub fn measure(view: &MultiView, k: usize, weights: Option<&[f64]>) -> Result<f64, VoxelError> {
    match weights {
        None => Ok(view.member_count(k) as f64),
        Some(w) => {
            if w.len() != view.len() {
                return Err(VoxelError::WeightShape {
                    got: w.len(),
                    expected: view.len(),
                });
            }
            Ok(view
                .counts
                .iter()
                .zip(w)
                .filter(|(&c, _)| c as usize >= k)
                .map(|(_, &w)| w)
                .sum())
        }
    }
}

/// Member volume: count × cell volume.
pub fn measure_volume(view: &MultiView, k: usize, grid: &VoxelGrid) -> f64 {
    view.member_count(k) as f64 * grid.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::{box_mesh, quad_mesh};
    use crate::geometry::Triangle;
    use crate::render::{render_depth, segment};

    fn field(mode: FieldMode, codes: &[u8]) -> AttributeField {
        AttributeField::from_codes(mode, [codes.len(), 1, 1], codes.to_vec())
    }

    #[test]
    fn grid_indexing_is_x_fastest() {
        let g = VoxelGrid::new(Vec3::ZERO, Vec3::splat(0.5), [4, 3, 2]).unwrap();
        assert_eq!(g.index(1, 0, 0), 1);
        assert_eq!(g.index(0, 1, 0), 4);
        assert_eq!(g.index(0, 0, 1), 12);
        assert_eq!(g.coords(g.index(3, 2, 1)), [3, 2, 1]);
        assert_eq!(g.center(0), Vec3::splat(0.25));
        assert!(VoxelGrid::new(Vec3::ZERO, Vec3::new(0.0, 1.0, 1.0), [1, 1, 1]).is_err());
        assert!(g.clone().with_weights(alloc::vec![1.0; 3]).is_err());
        assert!(g.clone().with_weights(alloc::vec![-1.0; 24]).is_err());
    }

    #[test]
    fn combine_union_and_intersection() {
        let a = field(FieldMode::Coverage, &[1, 0, 0, 1]);
        let b = field(FieldMode::Coverage, &[1, 1, 0, 0]);
        let fields = [a, b];
        let v = combine(&fields, LabelSet::DETECTABLE, 1).unwrap();
        assert_eq!(v.members(1), [true, true, false, true]);
        assert_eq!(v.members(2), [true, false, false, false]);
    }

    #[test]
    fn combine_rejects_bad_inputs() {
        let a = field(FieldMode::Coverage, &[1, 0]);
        let b = field(FieldMode::Coverage, &[1, 0, 1]);
        let h = field(FieldMode::Hull, &[3, 2]);
        assert_eq!(
            combine(&[a.clone(), b], LabelSet::DETECTABLE, 1),
            Err(VoxelError::MismatchedFields)
        );
        assert_eq!(
            combine(&[a.clone(), h], LabelSet::DETECTABLE, 1),
            Err(VoxelError::MismatchedFields)
        );
        assert_eq!(
            combine(&[a.clone()], LabelSet::DETECTABLE, 2),
            Err(VoxelError::Threshold { k: 2, m: 1 })
        );
        assert_eq!(
            combine(&[a], LabelSet::DETECTABLE, 0),
            Err(VoxelError::Threshold { k: 0, m: 1 })
        );
        assert_eq!(
            combine::<AttributeField>(&[], LabelSet::DETECTABLE, 1),
            Err(VoxelError::NoFields)
        );
    }

    #[test]
    fn complement_identity_single_field() {
        let f = field(FieldMode::Hull, &[0, 1, 2, 3, 3, 2]);
        assert!(complement_identity_check(&[f], LabelSet::IDENTICAL, 1).unwrap());
    }

    #[test]
    fn measure_counts_and_weights() {
        let f = field(FieldMode::Coverage, &[0, 0, 0]);
        let v = combine(&[f], LabelSet::DETECTABLE, 1).unwrap();
        assert_eq!(measure(&v, 1, None).unwrap(), 0.0);
        let f = field(FieldMode::Coverage, &[1, 1, 1]);
        let v = combine(&[f], LabelSet::DETECTABLE, 1).unwrap();
        assert_eq!(measure(&v, 1, Some(&[1.0, 1.0, 1.0])).unwrap(), 3.0);
        assert_eq!(measure(&v, 1, Some(&[0.5, 2.0, 0.0])).unwrap(), 2.5);
        assert!(matches!(
            measure(&v, 1, Some(&[1.0])),
            Err(VoxelError::WeightShape { .. })
        ));
    }

    fn small_grid() -> VoxelGrid {
        VoxelGrid::covering(
            Aabb::new(Vec3::new(0.0, -2.0, -2.0), Vec3::new(8.0, 2.0, 2.0)),
            [16, 8, 8],
        )
        .unwrap()
    }

    #[test]
    fn empty_scene_axis_voxel_detectable_and_behind_undetectable() {
        let grid = small_grid();
        let k = CameraIntrinsics::with_defaults(64, 48).unwrap();
        let pose = CameraPose::from_pan_tilt(Vec3::new(2.0, 0.01, 0.01), 0.0, 0.0).unwrap();
        let depth = DepthImage::empty(64, 48);
        let f = color_coverage(&grid, &pose, &k, &depth, &ColoringOptions::default());
        let ahead = grid.index(10, 4, 4);
        let behind = grid.index(1, 4, 4);
        assert_eq!(f.codes()[ahead], CoverageLabel::Detectable as u8);
        assert_eq!(f.codes()[behind], CoverageLabel::Undetectable as u8);
    }

    fn wall_scene() -> (Vec<Triangle>, Vec<Triangle>) {
        // static wall at x = 6, dynamic box hovering at x ∈ [3, 4]
        let wall: Vec<Triangle> = quad_mesh(
            "wall",
            Vec3::new(6.0, -10.0, -10.0),
            Vec3::new(6.0, 10.0, -10.0),
            Vec3::new(6.0, 10.0, 10.0),
            Vec3::new(6.0, -10.0, 10.0),
        )
        .triangles()
        .collect();
        let cube: Vec<Triangle> =
            box_mesh("cube", Vec3::new(3.0, -0.5, -0.5), Vec3::new(4.0, 0.5, 0.5))
                .triangles()
                .collect();
        (wall, cube)
    }

    #[test]
    fn hull_labels_around_a_hovering_box() {
        let grid = small_grid();
        let k = CameraIntrinsics::with_defaults(128, 96).unwrap();
        let pose = CameraPose::from_pan_tilt(Vec3::new(0.0, 0.01, 0.01), 0.0, 0.0).unwrap();
        let (wall, cube) = wall_scene();
        let stat = render_depth(&pose, &k, &wall);
        let mut all = wall.clone();
        all.extend(cube);
        let seg = segment(&stat, &render_depth(&pose, &k, &all)).unwrap();
        let f = color_hull(&grid, &pose, &k, &stat, &seg, &ColoringOptions::default());
        let at = |x: f64| grid.index((x / 0.5) as usize, 4, 4);
        // in front of the box, inside the silhouette cone
        assert_eq!(f.codes()[at(1.75)], HullLabel::Changed as u8);
        // inside the box
        assert_eq!(f.codes()[at(3.25)], HullLabel::Changed as u8);
        // behind the box but in front of the wall: still changed, not occluded
        assert_eq!(f.codes()[at(5.25)], HullLabel::Changed as u8);
        // behind the wall
        assert_eq!(f.codes()[at(7.25)], HullLabel::Occluded as u8);
        // off to the side of the cone
        assert_eq!(f.codes()[grid.index(6, 0, 4)], HullLabel::Identical as u8);
    }

    #[test]
    fn hull_without_dynamic_objects_reduces_to_coverage() {
        let grid = small_grid();
        let k = CameraIntrinsics::with_defaults(64, 48).unwrap();
        let pose = CameraPose::from_pan_tilt(Vec3::new(0.5, 0.3, 0.2), 0.1, 0.05).unwrap();
        let (wall, _) = wall_scene();
        let stat = render_depth(&pose, &k, &wall);
        let seg = segment(&stat, &stat).unwrap();
        let opts = ColoringOptions::default();
        let hull = color_hull(&grid, &pose, &k, &stat, &seg, &opts);
        let cov = color_coverage(&grid, &pose, &k, &stat, &opts);
        assert_eq!(hull.count(LabelSet::from_codes(&[HullLabel::Changed as u8])), 0);
        for (h, c) in hull.codes().iter().zip(cov.codes()) {
            assert_eq!(*h == HullLabel::Identical as u8, *c == CoverageLabel::Detectable as u8);
        }
    }

    #[test]
    fn corner_mode_is_never_less_conservative() {
        let grid = small_grid();
        let k = CameraIntrinsics::with_defaults(64, 48).unwrap();
        let pose = CameraPose::from_pan_tilt(Vec3::new(0.0, 0.3, 0.2), 0.05, 0.02).unwrap();
        let (wall, cube) = wall_scene();
        let stat = render_depth(&pose, &k, &wall);
        let mut all = wall.clone();
        all.extend(cube);
        let seg = segment(&stat, &render_depth(&pose, &k, &all)).unwrap();
        let center = color_hull(&grid, &pose, &k, &stat, &seg, &ColoringOptions::default());
        let corners = color_hull(
            &grid,
            &pose,
            &k,
            &stat,
            &seg,
            &ColoringOptions {
                sample: SampleMode::Corners,
                depth_slack: 0.0,
            },
        );
        for (a, b) in center.codes().iter().zip(corners.codes()) {
            if LabelSet::HULL.contains(*a) {
                assert!(LabelSet::HULL.contains(*b));
            }
        }
    }
}
