//! Experiment configuration: one TOML file per run.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use camhull_core::camera::CameraIntrinsics;
use camhull_core::geometry::{DynamicObject, Environment, TriangleMesh};
use camhull_core::math::{Aabb, RigidTransform, Vec3};
use camhull_core::objective::{Aggregation, Block, Domain, Mode, ObjectiveSpec, Placement, Problem, Slot};
use camhull_core::voxel::{ColoringOptions, SampleMode, VoxelGrid};

use crate::obj::load_obj;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    /// Camera vector used by `evaluate` and `render` when none is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    pub scene: SceneConfig,
    pub grid: GridConfig,
    pub cameras: CamerasConfig,
    pub objective: ObjectiveConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub bounds_min: [f64; 3],
    pub bounds_max: [f64; 3],
    #[serde(default = "one")]
    pub time_steps: usize,
    #[serde(default, rename = "static", skip_serializing_if = "Vec::is_empty")]
    pub static_meshes: Vec<MeshRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dynamic: Vec<DynamicRef>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshRef {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicRef {
    pub path: PathBuf,
    /// One 3×4 row-major rigid transform per time step.
    pub transforms: Vec<[f64; 12]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub origin: [f64; 3],
    pub cell: [f64; 3],
    pub resolution: [usize; 3],
    /// Whitespace-separated per-voxel weights, x-fastest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CamerasConfig {
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_hfov")]
    pub hfov_deg: f64,
    #[serde(default = "default_near")]
    pub near: f64,
    #[serde(rename = "block")]
    pub blocks: Vec<BlockConfig>,
}

fn default_hfov() -> f64 {
    90.0
}

fn default_near() -> f64 {
    CameraIntrinsics::DEFAULT_NEAR
}

/// A scalar that is either fixed (`1.5`) or free within bounds (`[0, 3]`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SlotConfig {
    Fixed(f64),
    Free([f64; 2]),
}

impl From<SlotConfig> for Slot {
    fn from(s: SlotConfig) -> Slot {
        match s {
            SlotConfig::Fixed(v) => Slot::Fixed(v),
            SlotConfig::Free([lo, hi]) => Slot::Free { lo, hi },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineConfig {
    pub start: [f64; 3],
    pub end: [f64; 3],
    pub t: SlotConfig,
}

/// One camera. Exactly one of `position` / `line`, and either `pan` and
/// `tilt` (radians) or `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BlockConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[SlotConfig; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<LineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pan: Option<SlotConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilt: Option<SlotConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    MaxCoverage,
    MinHullError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AggregationConfig {
    #[default]
    Sum,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SampleConfig {
    #[default]
    Center,
    Corners,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub mode: ModeConfig,
    /// Overlap threshold k, or safety threshold κ in hull mode.
    pub k: usize,
    #[serde(default)]
    pub aggregation: AggregationConfig,
    #[serde(default)]
    pub sample: SampleConfig,
    #[serde(default)]
    pub depth_slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverName {
    #[default]
    CorsRbf,
    NelderMead,
    PatternSearch,
}

impl SolverName {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverName::CorsRbf => "cors_rbf",
            SolverName::NelderMead => "nelder_mead",
            SolverName::PatternSearch => "pattern_search",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub name: SolverName,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
    /// Start points. Nelder–Mead and pattern search use the first;
    /// CORS-RBF uses all of them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial: Vec<Vec<f64>>,
    /// Lattice steps per scalar for `scan` (one entry applies to all).
    #[serde(default = "default_scan_steps")]
    pub scan_steps: Vec<usize>,
    #[serde(default = "default_scan_budget")]
    pub scan_budget: usize,
}

fn default_budget() -> usize {
    200
}

fn default_scan_steps() -> Vec<usize> {
    vec![6]
}

fn default_scan_budget() -> usize {
    10_000
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            name: SolverName::default(),
            budget: default_budget(),
            seed: 0,
            initial: Vec::new(),
            scan_steps: default_scan_steps(),
            scan_budget: default_scan_budget(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    /// Output directory, relative to the config file.
    #[serde(default = "default_out")]
    pub directory: PathBuf,
    #[serde(default = "yes")]
    pub voxel_dumps: bool,
    #[serde(default = "yes")]
    pub images: bool,
    /// Distance per 16-bit depth unit; derived from the scene when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_scale: Option<f64>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

impl Default for OutputsConfig {
    fn default() -> Self {
        OutputsConfig {
            directory: default_out(),
            voxel_dumps: true,
            images: true,
            depth_scale: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("parsing configuration")?;
        ensure!(
            cfg.version == CONFIG_VERSION,
            "unsupported config version {} (expected {CONFIG_VERSION})",
            cfg.version
        );
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg = Self::from_toml(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn intrinsics(&self) -> Result<CameraIntrinsics> {
        let c = &self.cameras;
        Ok(CameraIntrinsics::new(c.width, c.height, c.hfov_deg.to_radians(), c.near)?)
    }

    pub fn domain(&self) -> Result<Domain> {
        let blocks = self
            .cameras
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| b.to_block().with_context(|| format!("camera block {}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        ensure!(!blocks.is_empty(), "at least one camera block is required");
        Ok(Domain::new(blocks)?)
    }

    pub fn spec(&self) -> ObjectiveSpec {
        let o = &self.objective;
        ObjectiveSpec {
            mode: match o.mode {
                ModeConfig::MaxCoverage => Mode::MaxCoverage,
                ModeConfig::MinHullError => Mode::MinHullError,
            },
            k: o.k,
            aggregation: match o.aggregation {
                AggregationConfig::Sum => Aggregation::Sum,
                AggregationConfig::Max => Aggregation::Max,
            },
            coloring: ColoringOptions {
                sample: match o.sample {
                    SampleConfig::Center => SampleMode::Center,
                    SampleConfig::Corners => SampleMode::Corners,
                },
                depth_slack: o.depth_slack,
            },
        }
    }

    /// Loads meshes (paths relative to `base`) and builds the environment.
    pub fn environment(&self, base: &Path) -> Result<Environment> {
        let s = &self.scene;
        let load = |p: &Path| -> Result<TriangleMesh> {
            let full = base.join(p);
            load_obj(&full).with_context(|| format!("loading {}", full.display()))
        };
        let statics = s.static_meshes.iter().map(|m| load(&m.path)).collect::<Result<Vec<_>>>()?;
        let mut dynamics = Vec::new();
        for d in &s.dynamic {
            let mesh = load(&d.path)?;
            mesh.check_watertight()?;
            let poses = d
                .transforms
                .iter()
                .enumerate()
                .map(|(t, m)| {
                    RigidTransform::from_row_major(m)
                        .with_context(|| format!("{}: transform {} is not rigid", d.path.display(), t + 1))
                })
                .collect::<Result<Vec<_>>>()?;
            dynamics.push(DynamicObject { mesh, poses });
        }
        let bounds = Aabb::new(Vec3::from_array(s.bounds_min), Vec3::from_array(s.bounds_max));
        Ok(Environment::new(statics, dynamics, bounds, s.time_steps)?)
    }

    pub fn grid(&self, base: &Path) -> Result<VoxelGrid> {
        let g = &self.grid;
        let grid = VoxelGrid::new(Vec3::from_array(g.origin), Vec3::from_array(g.cell), g.resolution)?;
        match &g.weights {
            None => Ok(grid),
            Some(p) => {
                let full = base.join(p);
                let text = std::fs::read_to_string(&full).with_context(|| format!("reading {}", full.display()))?;
                let w = text
                    .split_whitespace()
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .with_context(|| format!("parsing weights in {}", full.display()))?;
                Ok(grid.with_weights(w)?)
            }
        }
    }

    /// Validates everything and assembles the problem.
    pub fn problem(&self, base: &Path) -> Result<Problem> {
        let domain = self.domain()?;
        let m = domain.cameras();
        if self.objective.k == 0 || self.objective.k > m {
            bail!("objective.k = {} must lie in 1..={m} (number of camera blocks)", self.objective.k);
        }
        Ok(Problem::new(
            self.environment(base)?,
            self.grid(base)?,
            self.intrinsics()?,
            domain,
            self.spec(),
        )?)
    }

    /// Scan steps expanded to one entry per scalar.
    pub fn scan_steps(&self, dim: usize) -> Result<Vec<usize>> {
        let s = &self.solver.scan_steps;
        match s.len() {
            1 => Ok(vec![s[0]; dim]),
            n if n == dim => Ok(s.clone()),
            n => bail!("solver.scan_steps has {n} entries, the domain has {dim} scalars"),
        }
    }
}

impl BlockConfig {
    pub fn to_block(&self) -> Result<Block> {
        let placement = match (&self.position, &self.line) {
            (Some(p), None) => Placement::Point(p.map(Slot::from)),
            (None, Some(l)) => Placement::Line {
                start: Vec3::from_array(l.start),
                end: Vec3::from_array(l.end),
                t: l.t.into(),
            },
            _ => bail!("give exactly one of `position` and `line`"),
        };
        let aim = match (self.pan, self.tilt, self.target) {
            (Some(p), Some(t), None) => camhull_core::objective::Aim::PanTilt([p.into(), t.into()]),
            (None, None, Some(t)) => camhull_core::objective::Aim::Target(Vec3::from_array(t)),
            _ => bail!("give either `pan` and `tilt` or `target`"),
        };
        Ok(Block { placement, aim })
    }
}
