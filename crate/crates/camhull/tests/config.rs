use camhull::config::RunConfig;
use camhull::presets::{preset, PRESETS};

#[test]
fn every_preset_loads_into_a_problem() {
    let dir = tempfile::tempdir().unwrap();
    for name in PRESETS {
        let path = preset(name).unwrap().write(&dir.path().join(name)).unwrap();
        let (cfg, base) = RunConfig::load(&path).unwrap();
        let problem = cfg.problem(&base).unwrap();
        assert_eq!(problem.cameras(), cfg.cameras.blocks.len(), "{name}");
        problem.domain().check(cfg.x.as_ref().unwrap()).unwrap();
    }
}

#[test]
fn parse_serialize_parse_is_identity() {
    let text = r#"
version = 1
x = [0.5]

[scene]
bounds_min = [0, 0, 0]
bounds_max = [4, 4, 3]

[[scene.static]]
path = "floor.obj"

[[scene.dynamic]]
path = "box.obj"
transforms = [[1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 1, 0]]

[grid]
origin = [0, 0, 0]
cell = [0.5, 0.5, 0.5]
resolution = [8, 8, 6]

[cameras]
width = 64
height = 48

[[cameras.block]]
line = { start = [0, 0, 1], end = [4, 0, 1], t = [0, 1] }
pan = 1.5707963267948966
tilt = [-0.3, 0.3]

[objective]
mode = "min_hull_error"
k = 1

[solver]
name = "nelder_mead"
budget = 10
"#;
    let a = RunConfig::from_toml(text).unwrap();
    let b = RunConfig::from_toml(&a.to_toml().unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.cameras.hfov_deg, 90.0);
    assert_eq!(a.domain().unwrap().dim(), 2);
}

#[test]
fn unknown_keys_and_versions_are_rejected() {
    let mut cfg = preset("wall-door-scan").unwrap().config;
    let text = cfg.to_toml().unwrap();
    assert!(RunConfig::from_toml(&text.replace("[grid]", "[grid]\nbogus = 1")).is_err());
    cfg.version = 2;
    assert!(RunConfig::from_toml(&cfg.to_toml().unwrap()).is_err());
}

#[test]
fn threshold_above_camera_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = preset("line-3cam").unwrap();
    let path = p.write(dir.path()).unwrap();
    let (mut cfg, base) = RunConfig::load(&path).unwrap();
    cfg.objective.k = 4;
    let err = cfg.problem(&base).unwrap_err();
    assert!(err.to_string().contains("objective.k"), "{err}");
}

#[test]
fn block_needs_exactly_one_placement() {
    let mut cfg = preset("line-3cam").unwrap().config;
    cfg.cameras.blocks[0].position = Some([camhull::config::SlotConfig::Fixed(0.0); 3]);
    assert!(cfg.domain().is_err());
}

#[test]
fn missing_mesh_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = preset("line-3cam").unwrap().write(dir.path()).unwrap();
    std::fs::remove_file(dir.path().join("meshes/pillars.obj")).unwrap();
    let (cfg, base) = RunConfig::load(&path).unwrap();
    let err = format!("{:#}", cfg.problem(&base).unwrap_err());
    assert!(err.contains("pillars.obj"), "{err}");
}
