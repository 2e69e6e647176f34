//! Objective functions over camera constellations.
//!
//! A [`Domain`] maps a flat variable vector to one pose per camera. A
//! [`Problem`] bundles the scene, the voxel grid, the camera intrinsics, the
//! domain and an [`ObjectiveSpec`], and evaluates either the k-overlap
//! coverage (to maximize) or the conservative hull error (to minimize).

mod domain;
mod scan;

pub use domain::{Aim, Block, Domain, Placement, Slot};
pub use scan::{grid_scan, lattice_points, lattice_size, ScanRow, ScanTable};

use alloc::string::String;
use alloc::vec::Vec;

use crate::camera::{CameraError, CameraIntrinsics, CameraPose};
use crate::geometry::{Environment, GeometryError, Triangle};
use crate::render::{render_depth, segment, DepthImage, SegmentedImage};
use crate::voxel::{
    color_coverage, color_hull, combine, measure, AttributeField, ColoringOptions, LabelSet,
    MultiView, SampleMode, VoxelError, VoxelGrid,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ObjectiveError {
    #[error("variable vector has {got} entries, domain has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("{name} = {value} outside [{lo}, {hi}]")]
    OutOfBounds {
        name: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid bounds for {name}: [{lo}, {hi}]")]
    InvalidBounds { name: String, lo: f64, hi: f64 },
    #[error("degenerate line for camera {camera}: start and end coincide")]
    DegenerateLine { camera: usize },
    #[error("overlap threshold {k} outside 1..={m}")]
    Threshold { k: usize, m: usize },
    #[error("voxel grid extends outside the environment bounds")]
    GridOutsideEnvironment,
    #[error("scan needs {required} evaluations, budget is {budget}")]
    ScanBudget { required: usize, budget: usize },
    #[error("scan needs at least one step per scalar")]
    ScanSteps,
    #[error("camera {camera}: {source}")]
    Camera { camera: usize, source: CameraError },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Voxel(#[from] VoxelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Measure of voxels detectable by at least `k` cameras.
    MaxCoverage,
    /// Measure of voxels changed-or-undetectable in at least `k` cameras.
    MinHullError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    Sum,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSpec {
    pub mode: Mode,
    /// Overlap threshold k (coverage) or safety threshold κ (hull).
    pub k: usize,
    pub aggregation: Aggregation,
    pub coloring: ColoringOptions,
}

impl ObjectiveSpec {
    pub fn coverage(k: usize) -> Self {
        ObjectiveSpec {
            mode: Mode::MaxCoverage,
            k,
            aggregation: Aggregation::Sum,
            coloring: ColoringOptions::default(),
        }
    }

    pub fn hull(kappa: usize) -> Self {
        ObjectiveSpec {
            mode: Mode::MinHullError,
            ..Self::coverage(kappa)
        }
    }

    pub fn with_sample(mut self, sample: SampleMode) -> Self {
        self.coloring.sample = sample;
        self
    }

    pub fn with_aggregation(mut self, aggregation: Aggregation) -> Self {
        self.aggregation = aggregation;
        self
    }

    /// Voxel labels counted towards the threshold.
    pub fn selector(&self) -> LabelSet {
        match self.mode {
            Mode::MaxCoverage => LabelSet::DETECTABLE,
            Mode::MinHullError => LabelSet::HULL,
        }
    }

    /// Sign turning the objective into a maximization.
    pub fn sense(&self) -> f64 {
        match self.mode {
            Mode::MaxCoverage => 1.0,
            Mode::MinHullError => -1.0,
        }
    }

    /// True when `a` is a better objective value than `b`.
    pub fn better(&self, a: f64, b: f64) -> bool {
        self.sense() * a > self.sense() * b
    }
}

/// Depth and segmentation images of one camera at one time step.
#[derive(Debug, Clone)]
pub struct CameraImages {
    pub static_depth: DepthImage,
    pub dynamic_depth: DepthImage,
    pub segmented: SegmentedImage,
}

/// Scene, grid, cameras and objective of one experiment.
#[derive(Debug, Clone)]
pub struct Problem {
    env: Environment,
    grid: VoxelGrid,
    intrinsics: CameraIntrinsics,
    domain: Domain,
    spec: ObjectiveSpec,
    static_faces: Vec<Triangle>,
    /// Static plus dynamic faces per time step.
    scene_faces: Vec<Vec<Triangle>>,
}

impl Problem {
    pub fn new(
        env: Environment,
        grid: VoxelGrid,
        intrinsics: CameraIntrinsics,
        domain: Domain,
        spec: ObjectiveSpec,
    ) -> Result<Self, ObjectiveError> {
        let m = domain.cameras();
        if spec.k == 0 || spec.k > m {
            return Err(ObjectiveError::Threshold { k: spec.k, m });
        }
        let eb = env.bounds();
        let gb = grid.bounds();
        let tol = 1e-9 * (eb.extent().norm() + 1.0);
        let inside = (0..3).all(|a| gb.min.get(a) >= eb.min.get(a) - tol && gb.max.get(a) <= eb.max.get(a) + tol);
        if !inside {
            return Err(ObjectiveError::GridOutsideEnvironment);
        }
        let static_faces = env.static_faces();
        let scene_faces = match spec.mode {
            Mode::MaxCoverage => Vec::new(),
            Mode::MinHullError => (1..=env.time_steps())
                .map(|t| env.assemble_scene(t, true))
                .collect::<Result<_, _>>()?,
        };
        Ok(Problem {
            env,
            grid,
            intrinsics,
            domain,
            spec,
            static_faces,
            scene_faces,
        })
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }

    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn intrinsics(&self) -> &CameraIntrinsics {
        &self.intrinsics
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn cameras(&self) -> usize {
        self.domain.cameras()
    }

    pub fn poses(&self, x: &[f64]) -> Result<Vec<CameraPose>, ObjectiveError> {
        self.domain.poses_from_vector(x)
    }

    /// Objective value at `x`: coverage measure, or hull-error measure.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, ObjectiveError> {
        let poses = self.poses(x)?;
        self.evaluate_poses(&poses)
    }

    /// Value in maximization convention: the hull error is negated.
    pub fn solver_value(&self, x: &[f64]) -> Result<f64, ObjectiveError> {
        Ok(self.spec.sense() * self.evaluate(x)?)
    }

    pub fn evaluate_poses(&self, poses: &[CameraPose]) -> Result<f64, ObjectiveError> {
        let statics = self.static_images(poses);
        let per_t: Vec<f64> = match self.spec.mode {
            Mode::MaxCoverage => {
                let fields = self.coverage_fields(poses, &statics);
                let v = self.measure_fields(&fields)?;
                alloc::vec![v; self.env.time_steps()]
            }
            Mode::MinHullError => (1..=self.env.time_steps())
                .map(|t| {
                    let fields = self.hull_fields(poses, &statics, t);
                    self.measure_fields(&fields)
                })
                .collect::<Result<_, _>>()?,
        };
        Ok(match self.spec.aggregation {
            Aggregation::Sum => per_t.iter().sum(),
            Aggregation::Max => per_t.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)),
        })
    }

    /// Per-camera attribute fields at time step `t` (1-based; ignored in
    /// coverage mode).
    pub fn fields(&self, x: &[f64], t: usize) -> Result<Vec<AttributeField>, ObjectiveError> {
        let poses = self.poses(x)?;
        self.check_t(t)?;
        let statics = self.static_images(&poses);
        Ok(match self.spec.mode {
            Mode::MaxCoverage => self.coverage_fields(&poses, &statics),
            Mode::MinHullError => self.hull_fields(&poses, &statics, t),
        })
    }

    /// Combined view of `fields` under the configured selector and threshold.
    pub fn multiview(&self, fields: &[AttributeField]) -> Result<MultiView, ObjectiveError> {
        Ok(combine(fields, self.spec.selector(), self.spec.k)?)
    }

    /// Static depth, dynamic depth and segmentation for one camera.
    pub fn camera_images(&self, pose: &CameraPose, t: usize) -> Result<CameraImages, ObjectiveError> {
        self.check_t(t)?;
        let static_depth = render_depth(pose, &self.intrinsics, &self.static_faces);
        let dynamic_depth = match self.scene_faces.get(t - 1) {
            Some(faces) => render_depth(pose, &self.intrinsics, faces),
            None => render_depth(pose, &self.intrinsics, &self.env.assemble_scene(t, true)?),
        };
        let segmented = segment(&static_depth, &dynamic_depth).expect("same intrinsics");
        Ok(CameraImages {
            static_depth,
            dynamic_depth,
            segmented,
        })
    }

    fn check_t(&self, t: usize) -> Result<(), ObjectiveError> {
        if t == 0 || t > self.env.time_steps() {
            return Err(GeometryError::TimeStep {
                t,
                time_steps: self.env.time_steps(),
            }
            .into());
        }
        Ok(())
    }

    fn measure_fields(&self, fields: &[AttributeField]) -> Result<f64, ObjectiveError> {
        let view = self.multiview(fields)?;
        Ok(measure(&view, self.spec.k, self.grid.weights())?)
    }

    fn static_images(&self, poses: &[CameraPose]) -> Vec<DepthImage> {
        map_cameras(poses.len(), |c| {
            render_depth(&poses[c], &self.intrinsics, &self.static_faces)
        })
    }

    fn coverage_fields(&self, poses: &[CameraPose], statics: &[DepthImage]) -> Vec<AttributeField> {
        map_cameras(poses.len(), |c| {
            color_coverage(
                &self.grid,
                &poses[c],
                &self.intrinsics,
                &statics[c],
                &self.spec.coloring,
            )
        })
    }

    fn hull_fields(&self, poses: &[CameraPose], statics: &[DepthImage], t: usize) -> Vec<AttributeField> {
        let faces = &self.scene_faces[t - 1];
        map_cameras(poses.len(), |c| {
            let dynamic = render_depth(&poses[c], &self.intrinsics, faces);
            let seg = segment(&statics[c], &dynamic).expect("same intrinsics");
            color_hull(
                &self.grid,
                &poses[c],
                &self.intrinsics,
                &statics[c],
                &seg,
                &self.spec.coloring,
            )
        })
    }
}

#[cfg(feature = "parallel")]
fn map_cameras<T: Send>(m: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..m).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_cameras<T>(m: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..m).map(f).collect()
}
