//! Subcommands. Each one loads a config, runs part of the pipeline and
//! writes its files under the output directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context as _, Result};

use camhull_core::clock::{Clock, NullClock, WallClock};
use camhull_core::objective::{grid_scan, Mode, ObjectiveError, Problem, ScanTable};
use camhull_core::solvers::{
    cors_rbf, nelder_mead, pattern_search, CorsOptions, NelderMeadOptions, PatternOptions, SolverTrace,
};
use camhull_core::voxel::FieldMode;

use crate::config::{RunConfig, SolverName};
use crate::output;

/// Everything a subcommand needs besides its own arguments.
pub struct Context {
    pub config: RunConfig,
    /// Directory that relative paths in the config resolve against.
    pub base: PathBuf,
    pub out: PathBuf,
    /// Record wall time in CSV files; off gives byte-stable output.
    pub timing: bool,
    /// Print one progress line per evaluation to stderr.
    pub progress: bool,
}

impl Context {
    /// Loads `path`; `out` overrides the configured output directory and
    /// `seed` the configured solver seed.
    pub fn load(path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<Self> {
        let (mut config, base) = RunConfig::load(path)?;
        if let Some(s) = seed {
            config.solver.seed = s;
        }
        let out = out.unwrap_or_else(|| base.join(&config.outputs.directory));
        Ok(Context {
            config,
            base,
            out,
            timing: true,
            progress: true,
        })
    }

    pub fn problem(&self) -> Result<Problem> {
        self.config.problem(&self.base)
    }

    fn clock(&self) -> Box<dyn Clock> {
        if self.timing {
            Box::new(WallClock::new())
        } else {
            Box::new(NullClock)
        }
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let path = self.out.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// `x` given on the command line, else the one in the config.
    fn point(&self, problem: &Problem, x: Option<Vec<f64>>) -> Result<Vec<f64>> {
        let x = match x.or_else(|| self.config.x.clone()) {
            Some(x) => x,
            None => bail!("no parameter vector: pass --x / --x-file or set `x` in the config"),
        };
        problem.domain().check(&x)?;
        Ok(x)
    }

    fn depth_scale(&self, problem: &Problem) -> f64 {
        self.config.outputs.depth_scale.unwrap_or_else(|| {
            let b = problem.environment().bounds();
            (b.max - b.min).norm() / output::DEPTH_MAX_CODE as f64
        })
    }
}

/// Reads a parameter vector from whitespace- or comma-separated text.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad number `{t}`")))
        .collect()
}

/// Writes depth and segmentation images for the selected cameras (1-based)
/// and time steps, all of them when `None`.
pub fn render(ctx: &Context, x: Option<Vec<f64>>, camera: Option<usize>, t: Option<usize>) -> Result<Vec<PathBuf>> {
    let problem = ctx.problem()?;
    let x = ctx.point(&problem, x)?;
    let poses = problem.poses(&x)?;
    let m = poses.len();
    let steps = problem.environment().time_steps();
    let cams: Vec<usize> = match camera {
        Some(c) if (1..=m).contains(&c) => vec![c],
        Some(c) => bail!("camera index {c} out of range 1..={m}"),
        None => (1..=m).collect(),
    };
    let times: Vec<usize> = match t {
        Some(t) if (1..=steps).contains(&t) => vec![t],
        Some(t) => bail!("time step {t} out of range 1..={steps}"),
        None => (1..=steps).collect(),
    };
    let scale = ctx.depth_scale(&problem);
    let mut written = Vec::new();
    for &c in &cams {
        for &t in &times {
            let img = problem.camera_images(&poses[c - 1], t)?;
            let stem = format!("cam{c}_t{t}");
            written.push(ctx.write(&format!("{stem}_static.pgm"), &output::depth_pgm(&img.static_depth, scale))?);
            written.push(ctx.write(&format!("{stem}_dynamic.pgm"), &output::depth_pgm(&img.dynamic_depth, scale))?);
            written.push(ctx.write(&format!("{stem}_segmented.pgm"), &output::segmentation_pgm(&img.segmented))?);
        }
    }
    Ok(written)
}

/// Value at `x` and the files describing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    /// Human-readable summary, also printed to stdout.
    pub report: String,
}

/// The configured threshold read on the selected labels and, equivalently,
/// as the complement of a threshold on the remaining labels.
pub fn threshold_readings(mode: Mode, k: usize, m: usize) -> String {
    let dual = m + 1 - k;
    match mode {
        Mode::MaxCoverage => format!(
            "threshold: voxel detectable by at least {k} of {m} cameras \
             (= not undetectable by at least {dual} of {m})"
        ),
        Mode::MinHullError => format!(
            "threshold: voxel changed-or-undetectable in at least {k} of {m} cameras \
             (= not identical in at least {dual} of {m})"
        ),
    }
}

fn write_dumps(ctx: &Context, problem: &Problem, x: &[f64], prefix: &str) -> Result<Vec<PathBuf>> {
    let steps = match problem.spec().mode {
        Mode::MaxCoverage => 1,
        Mode::MinHullError => problem.environment().time_steps(),
    };
    let mut written = Vec::new();
    for t in 1..=steps {
        let fields = problem.fields(x, t)?;
        for (c, f) in fields.iter().enumerate() {
            let name = format!("{prefix}cam{}_t{t}.voxa", c + 1);
            written.push(ctx.write(&name, &output::voxa_field(problem.grid(), f))?);
        }
        let view = problem.multiview(&fields)?;
        let name = format!("{prefix}membership_t{t}.voxa");
        written.push(ctx.write(&name, &output::voxa_membership(problem.grid(), &view, problem.spec().k))?);
    }
    Ok(written)
}

pub fn evaluate(ctx: &Context, x: Option<Vec<f64>>) -> Result<Evaluation> {
    let problem = ctx.problem()?;
    let x = ctx.point(&problem, x)?;
    let value = problem.evaluate(&x)?;
    if ctx.config.outputs.voxel_dumps {
        write_dumps(ctx, &problem, &x, "")?;
    }
    let spec = problem.spec();
    let what = match spec.mode {
        Mode::MaxCoverage => "coverage",
        Mode::MinHullError => "hull error",
    };
    let report = format!(
        "{what}: {value}\n{}\n",
        threshold_readings(spec.mode, spec.k, problem.cameras())
    );
    Ok(Evaluation { value, report })
}

/// Exhaustive lattice scan; writes `scan.csv`.
pub fn scan(ctx: &Context) -> Result<ScanTable> {
    let problem = ctx.problem()?;
    let steps = ctx.config.scan_steps(problem.domain().dim())?;
    let clock = ctx.clock();
    let table = grid_scan(&problem, &steps, ctx.config.solver.scan_budget, clock.as_ref())?;
    ctx.write("scan.csv", output::scan_csv(&table, problem.domain().dim(), ctx.timing).as_bytes())?;
    Ok(table)
}

/// Runs the configured solver on `problem` without writing anything.
pub fn run_solver(ctx: &Context, problem: &Problem) -> Result<SolverTrace> {
    let cfg = &ctx.config.solver;
    let bounds = problem.domain().bounds();
    let sense = problem.spec().sense();
    let clock = ctx.clock();
    let mut evals = 0usize;
    let mut best = f64::NEG_INFINITY;
    let progress = ctx.progress;
    let f = |x: &[f64]| -> Result<f64, ObjectiveError> {
        let v = problem.solver_value(x)?;
        evals += 1;
        best = best.max(v);
        if progress {
            eprintln!("eval {evals}: value {} best {}", sense * v, sense * best);
        }
        Ok(v)
    };
    let start = |i: usize| -> Result<Vec<f64>> {
        let x = match cfg.initial.get(i).cloned().or_else(|| ctx.config.x.clone()) {
            Some(x) => x,
            None => bail!("solver needs a start point: set solver.initial or x"),
        };
        problem.domain().check(&x)?;
        Ok(x)
    };
    let trace = match cfg.name {
        SolverName::CorsRbf => {
            ensure!(!cfg.initial.is_empty(), "cors_rbf needs solver.initial sites");
            for x in &cfg.initial {
                problem.domain().check(x)?;
            }
            let opts = CorsOptions {
                budget: cfg.budget,
                seed: cfg.seed,
            };
            cors_rbf(f, &cfg.initial, &bounds, &opts, clock.as_ref())?
        }
        SolverName::NelderMead => {
            let opts = NelderMeadOptions {
                budget: cfg.budget,
                seed: Some(cfg.seed),
            };
            nelder_mead(f, &start(0)?, &bounds, &opts, clock.as_ref())?
        }
        SolverName::PatternSearch => {
            let opts = PatternOptions { budget: cfg.budget };
            pattern_search(f, &start(0)?, &bounds, &opts, clock.as_ref())?
        }
    };
    Ok(trace)
}

/// Runs the solver; writes `trace.csv`, `best.toml` and, when enabled,
/// voxel dumps and images at the best point.
pub fn optimize(ctx: &Context) -> Result<SolverTrace> {
    let problem = ctx.problem()?;
    let trace = run_solver(ctx, &problem)?;
    let sense = problem.spec().sense();
    ctx.write("trace.csv", output::trace_csv(&trace, sense, ctx.timing).as_bytes())?;
    let best = trace.best_record().context("solver made no evaluations")?;
    let poses = problem.poses(&best.x)?;
    let text = output::best_toml(ctx.config.solver.name.as_str(), sense * best.value, trace.evals(), &best.x, &poses);
    ctx.write("best.toml", text.as_bytes())?;
    if ctx.config.outputs.voxel_dumps {
        write_dumps(ctx, &problem, &best.x, "best_")?;
    }
    if ctx.config.outputs.images {
        let scale = ctx.depth_scale(&problem);
        for (c, pose) in poses.iter().enumerate() {
            for t in 1..=problem.environment().time_steps() {
                let img = problem.camera_images(pose, t)?;
                let stem = format!("best_cam{}_t{t}", c + 1);
                ctx.write(&format!("{stem}_dynamic.pgm"), &output::depth_pgm(&img.dynamic_depth, scale))?;
                ctx.write(&format!("{stem}_segmented.pgm"), &output::segmentation_pgm(&img.segmented))?;
            }
        }
    }
    Ok(trace)
}

/// Label codes used in voxel dumps, for the format reference.
fn label_table() -> String {
    let mut s = String::new();
    for (mode, name) in [(FieldMode::Coverage, "coverage"), (FieldMode::Hull, "hull")] {
        let labels: Vec<String> = (0..mode.label_count() as u8)
            .map(|c| {
                let tag = match (mode, c) {
                    (FieldMode::Coverage, 0) => "undetectable",
                    (FieldMode::Coverage, _) => "detectable",
                    (FieldMode::Hull, 0) => "outside view",
                    (FieldMode::Hull, 1) => "occluded",
                    (FieldMode::Hull, 2) => "changed",
                    (FieldMode::Hull, _) => "identical",
                };
                format!("{c} = {tag}")
            })
            .collect();
        s.push_str(&format!("  {name} fields: {}\n", labels.join(", ")));
    }
    s
}

pub fn formats() -> String {
    format!(
        "\
Files written by camhull

Depth images (*_static.pgm, *_dynamic.pgm)
  Binary PGM (P5), maxval 65535, 16-bit big-endian samples, row-major from the
  top-left pixel. The header carries `# depth_scale S`; a sample c < 65535
  means a Euclidean distance of c * S from the camera centre, 65535 means no
  surface was hit. Distances are clamped to 65534 * S.

Segmentation images (*_segmented.pgm)
  Binary PGM (P5), maxval 255: 255 foreground (the dynamic object is in front
  of the static background), 0 background.

Voxel dumps (*.voxa)
  One ASCII header line
    VOXA v1 vx vy vz ox oy oz cx cy cz
  with the grid resolution, origin and cell size, then vx*vy*vz bytes with x
  varying fastest, then y, then z. Per-camera dumps hold label codes:
{labels}  Membership dumps hold 1 for voxels in the combined view at the
  configured threshold and 0 elsewhere.

scan.csv
  Header x_1..x_n,value,millis, one row per lattice point in row-major order
  (last coordinate fastest), then a `# best row ...` comment naming the best
  row (max for coverage, min for hull error).

trace.csv
  Header iter,evals,value,best_value,millis,x_1..x_n, one row per true
  objective evaluation. iter is 0 for start-up evaluations. Values are in the
  objective's own sense (hull error is reported positive).

best.toml
  solver, value, evals, x, and one [[camera]] table per camera with position,
  pan, tilt (radians) and the orientation quaternion [w, x, y, z] mapping
  camera-frame vectors (x right, y down, z forward) to the world.

With --no-timing every millis column is 0, which makes reruns byte-identical.
",
        labels = label_table()
    )
}
