use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand};

use camhull::commands::{self, Context};
use camhull::presets;

#[derive(Parser)]
#[command(name = "camhull", version, about = "Simulate and optimize multi-camera placements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; defaults to `outputs.directory` next to the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `solver.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 = one per core. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Write 0 in every timing column.
    #[arg(long)]
    no_timing: bool,
    /// Suppress per-evaluation progress lines.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct Point {
    /// Parameter vector, comma separated; defaults to `x` in the config.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "x_file")]
    x: Option<String>,
    /// File holding the parameter vector.
    #[arg(long)]
    x_file: Option<PathBuf>,
}

impl Point {
    fn vector(&self) -> Result<Option<Vec<f64>>> {
        if let Some(s) = &self.x {
            return commands::parse_vector(s).map(Some);
        }
        if let Some(p) = &self.x_file {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            return commands::parse_vector(&text).map(Some);
        }
        Ok(None)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write static depth, dynamic depth and segmentation images.
    Render {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: Point,
        /// Camera index (1-based); all cameras when omitted.
        #[arg(long)]
        camera: Option<usize>,
        /// Time step (1-based); all steps when omitted.
        #[arg(long)]
        t: Option<usize>,
    },
    /// Evaluate the objective at one point and dump voxel labels.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: Point,
    },
    /// Evaluate the objective on a regular lattice of the domain.
    Scan {
        #[command(flatten)]
        common: Common,
    },
    /// Run the configured solver.
    Optimize {
        #[command(flatten)]
        common: Common,
    },
    /// Print the reference for every file format.
    Formats,
    /// Write a built-in preset (config and meshes) to a directory.
    Preset {
        /// One of wall-door-scan, line-3cam, ceiling-5cam.
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn context(c: &Common) -> Result<Context> {
    if c.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(c.threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let mut ctx = Context::load(&c.config, c.out.clone(), c.seed)?;
    ctx.timing = !c.no_timing;
    ctx.progress = !c.quiet;
    Ok(ctx)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Render { common, point, camera, t } => {
            let ctx = context(&common)?;
            let files = commands::render(&ctx, point.vector()?, camera, t)?;
            println!("wrote {} images to {}", files.len(), ctx.out.display());
        }
        Command::Evaluate { common, point } => {
            let ctx = context(&common)?;
            let e = commands::evaluate(&ctx, point.vector()?)?;
            print!("{}", e.report);
        }
        Command::Scan { common } => {
            let ctx = context(&common)?;
            let table = commands::scan(&ctx)?;
            if let Some(b) = table.best() {
                let r = &table.rows[b];
                println!("{} points; best value {} at {:?}", table.rows.len(), r.value, r.x);
            }
        }
        Command::Optimize { common } => {
            let ctx = context(&common)?;
            let trace = commands::optimize(&ctx)?;
            let sense = ctx.problem()?.spec().sense();
            if let Some(b) = trace.best_record() {
                println!("{} evaluations; best value {} at {:?}", trace.evals(), sense * b.value, b.x);
            }
        }
        Command::Formats => print!("{}", commands::formats()),
        Command::Preset { name, out } => {
            let path = presets::preset(&name)?.write(&out)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
