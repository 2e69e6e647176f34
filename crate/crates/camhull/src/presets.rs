//! Built-in experiment presets, written out as a config file plus meshes.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use camhull_core::geometry::primitives::{box_mesh, boxes_mesh, cylinder_mesh, humanoid_mesh, quad_mesh, wall_with_door_mesh};
use camhull_core::geometry::TriangleMesh;
use camhull_core::math::Vec3;

use crate::config::{
    AggregationConfig, BlockConfig, CamerasConfig, DynamicRef, GridConfig, LineConfig, MeshRef, ModeConfig,
    ObjectiveConfig, OutputsConfig, RunConfig, SampleConfig, SceneConfig, SlotConfig, SolverConfig, SolverName,
    CONFIG_VERSION,
};
use crate::obj::write_obj;

pub const PRESETS: [&str; 3] = ["wall-door-scan", "line-3cam", "ceiling-5cam"];

pub struct Preset {
    pub name: &'static str,
    pub config: RunConfig,
    /// Meshes with paths relative to the config file.
    pub meshes: Vec<(PathBuf, TriangleMesh)>,
}

impl Preset {
    /// Writes `config.toml` and the meshes into `dir`; returns the config path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (rel, mesh) in &self.meshes {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            write_obj(mesh, &path).with_context(|| format!("writing {}", path.display()))?;
        }
        let path = dir.join("config.toml");
        let text = format!(
            "# camhull preset `{}`; regenerate with `camhull preset {} --out <dir>`\n{}",
            self.name,
            self.name,
            self.config.to_toml()?
        );
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

pub fn preset(name: &str) -> Result<Preset> {
    match name {
        "wall-door-scan" => Ok(wall_door_scan()),
        "line-3cam" => Ok(line_3cam()),
        "ceiling-5cam" => Ok(ceiling_5cam()),
        other => bail!("unknown preset `{other}` (available: {})", PRESETS.join(", ")),
    }
}

fn translation(t: Vec3) -> [f64; 12] {
    [1.0, 0.0, 0.0, t.x, 0.0, 1.0, 0.0, t.y, 0.0, 0.0, 1.0, t.z]
}

fn mesh_path(name: &str) -> PathBuf {
    PathBuf::from("meshes").join(format!("{name}.obj"))
}

fn statics(meshes: &[(PathBuf, TriangleMesh)]) -> Vec<MeshRef> {
    meshes.iter().map(|(p, _)| MeshRef { path: p.clone() }).collect()
}

fn floor(x0: f64, y0: f64, x1: f64, y1: f64) -> TriangleMesh {
    quad_mesh(
        "floor",
        Vec3::new(x0, y0, 0.0),
        Vec3::new(x1, y0, 0.0),
        Vec3::new(x1, y1, 0.0),
        Vec3::new(x0, y1, 0.0),
    )
}

/// One camera sliding along a wall with a doorway; scanned in one scalar.
fn wall_door_scan() -> Preset {
    let meshes = vec![
        (mesh_path("floor"), floor(0.0, 0.0, 10.0, 8.0)),
        (
            mesh_path("wall"),
            wall_with_door_mesh("wall", 0.0, 10.0, 4.0, 0.2, 3.0, 4.0, 5.0, 2.2),
        ),
    ];
    let config = RunConfig {
        version: CONFIG_VERSION,
        x: Some(vec![0.5]),
        scene: SceneConfig {
            bounds_min: [0.0, 0.0, 0.0],
            bounds_max: [10.0, 8.0, 3.0],
            time_steps: 1,
            static_meshes: statics(&meshes),
            dynamic: vec![],
        },
        grid: GridConfig {
            origin: [0.0, 0.0, 0.0],
            cell: [0.25, 0.25, 0.25],
            resolution: [40, 32, 12],
            weights: None,
        },
        cameras: CamerasConfig {
            width: 160,
            height: 120,
            hfov_deg: 90.0,
            near: 0.05,
            blocks: vec![BlockConfig {
                line: Some(LineConfig {
                    start: [1.0, 1.0, 1.5],
                    end: [9.0, 1.0, 1.5],
                    t: SlotConfig::Free([0.0, 1.0]),
                }),
                pan: Some(SlotConfig::Fixed(FRAC_PI_2)),
                tilt: Some(SlotConfig::Fixed(0.0)),
                ..Default::default()
            }],
        },
        objective: ObjectiveConfig {
            mode: ModeConfig::MaxCoverage,
            k: 1,
            aggregation: AggregationConfig::Sum,
            sample: SampleConfig::Center,
            depth_slack: 0.0,
        },
        solver: SolverConfig {
            name: SolverName::PatternSearch,
            budget: 60,
            seed: 0,
            initial: vec![vec![0.5]],
            scan_steps: vec![41],
            scan_budget: 1000,
        },
        outputs: OutputsConfig::default(),
    };
    Preset {
        name: "wall-door-scan",
        config,
        meshes,
    }
}

/// Three cameras on one line facing a wall behind a row of pillars; each
/// camera's position along the line is a variable in [−45, 45].
fn line_3cam() -> Preset {
    let pillars: Vec<(Vec3, Vec3)> = [-38.0, -18.0, 6.0, 30.0]
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let w = [5.0, 3.0, 7.0, 4.0][i];
            let y = [14.0, 22.0, 16.0, 26.0][i];
            (Vec3::new(x - 0.5 * w, y, 0.0), Vec3::new(x + 0.5 * w, y + 4.0, 28.0))
        })
        .collect();
    let meshes = vec![
        (mesh_path("floor"), floor(-60.0, -10.0, 60.0, 60.0)),
        (
            mesh_path("wall"),
            box_mesh("wall", Vec3::new(-60.0, 50.0, 0.0), Vec3::new(60.0, 52.0, 30.0)),
        ),
        (mesh_path("pillars"), boxes_mesh("pillars", &pillars)),
    ];
    let block = BlockConfig {
        line: Some(LineConfig {
            start: [0.0, -5.0, 15.0],
            end: [1.0, -5.0, 15.0],
            t: SlotConfig::Free([-45.0, 45.0]),
        }),
        pan: Some(SlotConfig::Fixed(FRAC_PI_2)),
        tilt: Some(SlotConfig::Fixed(0.0)),
        ..Default::default()
    };
    let config = RunConfig {
        version: CONFIG_VERSION,
        x: Some(vec![-30.0, 0.0, 30.0]),
        scene: SceneConfig {
            bounds_min: [-60.0, -10.0, 0.0],
            bounds_max: [60.0, 60.0, 30.0],
            time_steps: 1,
            static_meshes: statics(&meshes),
            dynamic: vec![],
        },
        grid: GridConfig {
            origin: [-60.0, 0.0, 0.0],
            cell: [2.5, 2.5, 2.5],
            resolution: [48, 20, 12],
            weights: None,
        },
        cameras: CamerasConfig {
            width: 160,
            height: 120,
            hfov_deg: 60.0,
            near: 0.05,
            blocks: vec![block.clone(), block.clone(), block],
        },
        objective: ObjectiveConfig {
            mode: ModeConfig::MaxCoverage,
            k: 1,
            aggregation: AggregationConfig::Sum,
            sample: SampleConfig::Center,
            depth_slack: 0.0,
        },
        solver: SolverConfig {
            name: SolverName::CorsRbf,
            budget: 120,
            seed: 0,
            // vertices of the ordered simplex −45 ≤ a1 ≤ a2 ≤ a3 ≤ 45
            initial: vec![
                vec![-45.0, -45.0, -45.0],
                vec![-45.0, -45.0, 45.0],
                vec![-45.0, 45.0, 45.0],
                vec![45.0, 45.0, 45.0],
            ],
            scan_steps: vec![6],
            scan_budget: 216,
        },
        outputs: OutputsConfig::default(),
    };
    Preset {
        name: "line-3cam",
        config,
        meshes,
    }
}

/// Manual placement: four ceiling corners and one camera above the middle of
/// the person's path.
pub const CEILING_MANUAL: [f64; 10] = [-35.0, -40.0, 35.0, -40.0, -35.0, 40.0, 35.0, 40.0, 3.5, -1.0];

/// Five ceiling cameras aimed at a person in a robot cell; minimizes the
/// conservative hull at κ = M = 5.
fn ceiling_5cam() -> Preset {
    let racks = boxes_mesh(
        "racks",
        &[
            (Vec3::new(-30.0, 26.0, 0.0), Vec3::new(-12.0, 32.0, 24.0)),
            (Vec3::new(18.0, -33.0, 0.0), Vec3::new(30.0, -27.0, 24.0)),
            (Vec3::new(24.0, 4.0, 0.0), Vec3::new(30.0, 22.0, 16.0)),
        ],
    );
    let mut table_boxes = Vec::new();
    for (x0, y0, x1, y1) in [(-26.0, -24.0, -10.0, -14.0), (6.0, 12.0, 20.0, 22.0)] {
        table_boxes.push((Vec3::new(x0, y0, 7.0), Vec3::new(x1, y1, 8.0)));
        for (lx, ly) in [(x0, y0), (x1 - 1.0, y0), (x0, y1 - 1.0), (x1 - 1.0, y1 - 1.0)] {
            table_boxes.push((Vec3::new(lx, ly, 0.0), Vec3::new(lx + 1.0, ly + 1.0, 7.0)));
        }
    }
    let tables = boxes_mesh("tables", &table_boxes);
    let robot = {
        let base = cylinder_mesh("robot", Vec3::new(-8.0, 6.0, 0.0), 3.0, 9.0, 16);
        let arm = box_mesh("arm", Vec3::new(-9.0, 5.0, 9.0), Vec3::new(-1.0, 7.0, 11.0));
        let mut v = base.vertices().to_vec();
        let off = v.len() as u32;
        v.extend_from_slice(arm.vertices());
        let mut f = base.faces().to_vec();
        f.extend(arm.faces().iter().map(|t| t.map(|i| i + off)));
        TriangleMesh::new("robot", v, f).expect("valid primitives")
    };
    let meshes = vec![
        (mesh_path("floor"), floor(-40.0, -45.0, 40.0, 45.0)),
        (mesh_path("racks"), racks),
        (mesh_path("tables"), tables),
        (mesh_path("robot"), robot),
    ];
    let person = humanoid_mesh("person", Vec3::ZERO, 18.0);
    let person_path = mesh_path("person");
    let block = |_: usize| BlockConfig {
        position: Some([
            SlotConfig::Free([-35.0, 35.0]),
            SlotConfig::Free([-40.0, 40.0]),
            SlotConfig::Fixed(26.5),
        ]),
        target: Some([0.0, 0.0, 10.0]),
        ..Default::default()
    };
    let x0 = [-5.0, -5.0, 5.0, -5.0, -5.0, 5.0, 5.0, 5.0, 0.0, 0.0];
    let mut initial = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let mut x = x0.to_vec();
        // step outward from the centre; the fifth camera steps in +x / +y
        x[i] += if x0[i] < 0.0 { -10.0 } else { 10.0 };
        initial.push(x);
    }
    let config = RunConfig {
        version: CONFIG_VERSION,
        x: Some(CEILING_MANUAL.to_vec()),
        scene: SceneConfig {
            bounds_min: [-40.0, -45.0, 0.0],
            bounds_max: [40.0, 45.0, 27.0],
            time_steps: 2,
            static_meshes: statics(&meshes),
            dynamic: vec![DynamicRef {
                path: person_path.clone(),
                transforms: vec![
                    translation(Vec3::new(2.0, -3.0, 0.0)),
                    translation(Vec3::new(5.0, 1.0, 0.0)),
                ],
            }],
        },
        grid: GridConfig {
            origin: [-30.0, -34.0, 0.0],
            cell: [1.0, 1.0, 1.0],
            resolution: [60, 68, 20],
            weights: None,
        },
        cameras: CamerasConfig {
            width: 160,
            height: 120,
            hfov_deg: 90.0,
            near: 0.05,
            blocks: (0..5).map(block).collect(),
        },
        objective: ObjectiveConfig {
            mode: ModeConfig::MinHullError,
            k: 5,
            aggregation: AggregationConfig::Sum,
            sample: SampleConfig::Center,
            depth_slack: 0.0,
        },
        solver: SolverConfig {
            name: SolverName::CorsRbf,
            budget: 100,
            seed: 0,
            initial,
            scan_steps: vec![3],
            scan_budget: 100_000,
        },
        outputs: OutputsConfig::default(),
    };
    let mut meshes = meshes;
    meshes.push((person_path, person));
    Preset {
        name: "ceiling-5cam",
        config,
        meshes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_toml() {
        for name in PRESETS {
            let p = preset(name).unwrap();
            let text = p.config.to_toml().unwrap();
            assert_eq!(RunConfig::from_toml(&text).unwrap(), p.config, "{name}");
        }
        assert!(preset("nope").is_err());
    }
}
