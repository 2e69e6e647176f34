use std::path::{Path, PathBuf};

use camhull::commands::{self, Context};
use camhull::config::{RunConfig, SolverName};
use camhull::presets::preset;

fn context(name: &str, dir: &Path) -> Context {
    let path = preset(name).unwrap().write(&dir.join(name)).unwrap();
    let mut ctx = Context::load(&path, Some(dir.join("out")), None).unwrap();
    ctx.timing = false;
    ctx.progress = false;
    ctx
}

fn read(path: PathBuf) -> Vec<u8> {
    std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn wall_door_scan_is_a_staircase() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = context("wall-door-scan", dir.path());
    ctx.config.solver.scan_steps = vec![161];
    let table = commands::scan(&ctx).unwrap();
    let values: Vec<f64> = table.rows.iter().map(|r| r.value).collect();
    assert_eq!(values.len(), 161);
    // plateaus: runs of equal neighbouring values
    let mut plateau_values: Vec<f64> = values.windows(2).filter(|w| w[0] == w[1]).map(|w| w[0]).collect();
    plateau_values.dedup();
    assert!(plateau_values.len() >= 2, "{values:?}");
    // non-convex in the maximization sense: more than one strict local max
    let peaks = (1..values.len() - 1)
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .count();
    assert!(peaks >= 2, "{values:?}");
    let csv = String::from_utf8(read(dir.path().join("out/scan.csv"))).unwrap();
    assert!(csv.starts_with("x_1,value,millis\n"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 162);
    assert!(csv.lines().last().unwrap().starts_with("# best row"));
}

#[test]
fn line_preset_scans_216_points() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = context("line-3cam", dir.path());
    assert_eq!(commands::scan(&ctx).unwrap().rows.len(), 216);
}

#[test]
fn scan_over_budget_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = context("line-3cam", dir.path());
    ctx.config.solver.scan_budget = 100;
    let err = commands::scan(&ctx).unwrap_err();
    assert!(err.to_string().contains("216"), "{err}");
}

#[test]
fn zero_budget_cors_evaluates_only_the_initial_sites() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = context("line-3cam", dir.path());
    ctx.config.solver.budget = 0;
    let trace = commands::optimize(&ctx).unwrap();
    assert_eq!(trace.evals(), ctx.config.solver.initial.len());
    assert!(trace.records.iter().all(|r| r.iter == 0));
    let csv = String::from_utf8(read(dir.path().join("out/trace.csv"))).unwrap();
    assert_eq!(csv.lines().count(), 1 + ctx.config.solver.initial.len());
    assert!(csv.starts_with("iter,evals,value,best_value,millis,x_1,x_2,x_3\n"));
    let best = String::from_utf8(read(dir.path().join("out/best.toml"))).unwrap();
    let parsed: toml::Value = toml::from_str(&best).unwrap();
    assert_eq!(parsed["camera"].as_array().unwrap().len(), 3);
}

#[test]
fn optimize_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = context("line-3cam", dir.path());
    ctx.config.solver.name = SolverName::NelderMead;
    ctx.config.solver.budget = 30;
    commands::optimize(&ctx).unwrap();
    let first = read(dir.path().join("out/trace.csv"));
    commands::optimize(&ctx).unwrap();
    assert_eq!(first, read(dir.path().join("out/trace.csv")));
    assert_eq!(first.split(|&b| b == b'\n').filter(|l| !l.is_empty()).count(), 31);
}

#[test]
fn zero_weights_give_zero_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = context("wall-door-scan", dir.path());
    let n: usize = ctx.config.grid.resolution.iter().product();
    std::fs::write(ctx.base.join("weights.txt"), "0\n".repeat(n)).unwrap();
    ctx.config.grid.weights = Some("weights.txt".into());
    assert_eq!(commands::evaluate(&ctx, None).unwrap().value, 0.0);
}

#[test]
fn empty_scene_renders_no_hit_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = context("wall-door-scan", dir.path());
    ctx.config.scene.static_meshes.clear();
    let files = commands::render(&ctx, None, None, None).unwrap();
    assert_eq!(files.len(), 3);
    let pgm = read(dir.path().join("out/cam1_t1_static.pgm"));
    let header_end = pgm.len() - 160 * 120 * 2;
    assert!(pgm[..header_end].starts_with(b"P5\n# depth_scale "));
    assert!(pgm[header_end..].iter().all(|&b| b == 0xff));
    let seg = read(dir.path().join("out/cam1_t1_segmented.pgm"));
    assert!(seg[seg.len() - 160 * 120..].iter().all(|&b| b == 0));
}

#[test]
fn render_checks_indices() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = context("ceiling-5cam", dir.path());
    assert!(commands::render(&ctx, None, Some(6), None).is_err());
    assert!(commands::render(&ctx, None, Some(1), Some(3)).is_err());
    let files = commands::render(&ctx, None, Some(2), Some(2)).unwrap();
    assert!(files[0].ends_with("cam2_t2_static.pgm"));
}

#[test]
fn evaluate_reports_both_threshold_readings_and_dumps_voxels() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = context("ceiling-5cam", dir.path());
    let e = commands::evaluate(&ctx, None).unwrap();
    assert!(e.value.is_finite() && e.value > 0.0);
    assert!(e.report.contains("at least 5 of 5"), "{}", e.report);
    assert!(e.report.contains("not identical in at least 1 of 5"), "{}", e.report);
    for t in 1..=2 {
        let header: &[u8] = b"VOXA v1 60 68 20 -30 -34 0 1 1 1\n";
        let m = read(dir.path().join(format!("out/membership_t{t}.voxa")));
        assert!(m.starts_with(header));
        assert_eq!(m.len(), header.len() + 60 * 68 * 20);
        for c in 1..=5 {
            let f = read(dir.path().join(format!("out/cam{c}_t{t}.voxa")));
            assert!(f[header.len()..].iter().all(|&b| b <= 3));
        }
    }
}

#[test]
fn evaluate_rejects_points_outside_the_domain() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = context("line-3cam", dir.path());
    assert!(commands::evaluate(&ctx, Some(vec![0.0, 0.0, 99.0])).is_err());
    assert!(commands::evaluate(&ctx, Some(vec![0.0, 0.0])).is_err());
}

#[test]
fn seed_override_and_vector_parsing() {
    let dir = tempfile::tempdir().unwrap();
    let path = preset("line-3cam").unwrap().write(dir.path()).unwrap();
    let ctx = Context::load(&path, None, Some(42)).unwrap();
    assert_eq!(ctx.config.solver.seed, 42);
    assert_eq!(ctx.out, dir.path().join("out"));
    assert_eq!(commands::parse_vector("1, -2.5\n3").unwrap(), vec![1.0, -2.5, 3.0]);
    assert!(commands::parse_vector("1,x").is_err());
    let _: RunConfig = ctx.config;
}

#[test]
fn formats_reference_covers_every_file() {
    let text = commands::formats();
    for needle in ["depth_scale", "VOXA v1", "scan.csv", "trace.csv", "best.toml", "65535"] {
        assert!(text.contains(needle), "{needle}");
    }
}
