use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::bail;
use clap::{Args, Parser, Subcommand};
use log::info;
use regrasp_core::cloud::{load_ply, write_ply, PointCloud};
use regrasp_core::pipeline::{compute_regions, export_group_clouds, run_pipeline, PipelineParams, RegionsReport};
use regrasp_core::plan::PlanSpec;
use regrasp_core::regrasp::{compute_score, greedy_partition};
use regrasp_core::synth::{density_for_count, generate_synthetic, Shape};
use regrasp_core::verify::{run_verify, VerifyOptions};
use regrasp_core::Error;

/// Plans where a two-finger grasp must change along a manipulation plan.
#[derive(Parser, Debug)]
#[command(name = "regrasp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full run: regions, grasp groups and contacts, written as a JSON report.
    Plan(PlanArgs),
    /// Grasping regions per segment only.
    Regions(RegionArgs),
    /// Scores and partitions regions saved by `regions`.
    Score(ScoreArgs),
    /// Writes a synthetic object cloud as PLY.
    Synth(SynthArgs),
    /// Runs the seeded property checks.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct ObjectArgs {
    /// PLY cloud of the object in its initial pose.
    #[arg(long, conflicts_with_all = ["box_extents", "cylinder"])]
    cloud: Option<PathBuf>,
    /// Synthetic box extents x,y,z in meters.
    #[arg(long = "box", value_name = "X,Y,Z", value_delimiter = ',')]
    box_extents: Option<Vec<f64>>,
    /// Synthetic cylinder radius,height in meters.
    #[arg(long, value_name = "R,H", value_delimiter = ',', conflicts_with = "box_extents")]
    cylinder: Option<Vec<f64>>,
    /// Approximate point count for synthetic objects.
    #[arg(long, default_value_t = 10_000)]
    points: usize,
}

#[derive(Args, Debug)]
struct ParamArgs {
    #[arg(long, default_value_t = 0.25)]
    gamma_th: f64,
    #[arg(long, default_value_t = 0.75)]
    eta_th: f64,
    #[arg(long, default_value_t = 0.8)]
    mu_robot: f64,
    #[arg(long, default_value_t = 0.3)]
    mu_env: f64,
    /// Object mass in kg.
    #[arg(long, default_value_t = 0.5)]
    mass: f64,
    /// Total normal force the two fingers may apply, in N.
    #[arg(long, default_value_t = 20.0)]
    force_cap: f64,
    #[arg(long, default_value_t = 16)]
    cone_facets: usize,
    /// Maximum jaw opening in m.
    #[arg(long, default_value_t = 0.08)]
    gripper_width: f64,
    /// Seed for synthetic objects.
    #[arg(long)]
    seed: Option<u64>,
}

impl ParamArgs {
    fn params(&self) -> PipelineParams {
        PipelineParams {
            gamma_th: self.gamma_th,
            eta_th: self.eta_th,
            mu_robot: self.mu_robot,
            mu_env: self.mu_env,
            mass: self.mass,
            force_cap: self.force_cap,
            cone_facets: self.cone_facets,
            gripper_width: self.gripper_width,
            ..PipelineParams::default()
        }
    }
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Plan JSON: explicit poses or a skeleton of primitives.
    #[arg(long)]
    plan: PathBuf,
    #[command(flatten)]
    object: ObjectArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for one colored PLY per grasp group.
    #[arg(long)]
    export_ply: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RegionArgs {
    #[arg(long)]
    plan: PathBuf,
    #[command(flatten)]
    object: ObjectArgs,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    /// Regions JSON written by `regions`.
    #[arg(long)]
    regions: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    gamma_th: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    object: ObjectArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    instances: usize,
}

fn shape(object: &ObjectArgs) -> anyhow::Result<Option<Shape>> {
    match (&object.box_extents, &object.cylinder) {
        (Some(e), _) if e.len() == 3 => Ok(Some(Shape::Box { extents: [e[0], e[1], e[2]] })),
        (Some(_), _) => bail!(Error::InvalidPlan("--box takes three comma-separated extents".into())),
        (None, Some(c)) if c.len() == 2 => Ok(Some(Shape::Cylinder { radius: c[0], height: c[1] })),
        (None, Some(_)) => bail!(Error::InvalidPlan("--cylinder takes radius,height".into())),
        (None, None) => Ok(None),
    }
}

fn load_object(object: &ObjectArgs, seed: u64) -> anyhow::Result<PointCloud<f64>> {
    if let Some(path) = &object.cloud {
        info!("loading {}", path.display());
        return Ok(load_ply(path)?);
    }
    let Some(shape) = shape(object)? else {
        bail!(Error::InvalidPlan("give --cloud, --box or --cylinder".into()));
    };
    info!("generating {shape:?} with about {} points", object.points);
    Ok(generate_synthetic(&shape, density_for_count(&shape, object.points), seed)?)
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => Ok(fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Exit status 4 marks a plan that was computed but cannot be executed.
const UNEXECUTABLE: u8 = 4;

fn cmd_plan(args: &PlanArgs) -> anyhow::Result<u8> {
    let params = args.params.params();
    let cloud = load_object(&args.object, args.params.seed.unwrap_or(0))?;
    let spec = PlanSpec::load(&args.plan)?;
    let output = run_pipeline(&cloud, &spec, &params, args.params.seed)?;
    info!("alpha {} over {} segments", output.report.alpha, output.report.segments.len());
    emit(&output.report.to_json()?, args.out.as_deref())?;
    if let Some(dir) = &args.export_ply {
        for path in export_group_clouds(&output, dir)? {
            info!("wrote {}", path.display());
        }
    }
    for w in &output.report.warnings {
        log::warn!("{w}");
    }
    Ok(if output.report.executable { 0 } else { UNEXECUTABLE })
}

fn cmd_regions(args: &RegionArgs) -> anyhow::Result<u8> {
    let params = args.params.params();
    let cloud = load_object(&args.object, args.params.seed.unwrap_or(0))?;
    let spec = PlanSpec::load(&args.plan)?;
    let stage = compute_regions(&cloud, &spec, &params)?;
    let report = RegionsReport::new(&stage, cloud.len(), &params, args.params.seed);
    emit(&report.to_json()?, args.out.as_deref())?;
    let empty = report.segments.iter().any(|s| s.member_indices.is_empty());
    Ok(if empty { UNEXECUTABLE } else { 0 })
}

fn cmd_score(args: &ScoreArgs) -> anyhow::Result<u8> {
    if !(args.gamma_th > 0.0 && args.gamma_th <= 1.0) {
        bail!(Error::InvalidContext("--gamma-th must lie in (0, 1]".into()));
    }
    let path = &args.regions;
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let regions = RegionsReport::from_json(&text)?;
    let sets = regions.member_sets();
    let whole = compute_score(&sets)?;
    let partition = greedy_partition(&sets, args.gamma_th);
    let groups: Vec<_> = partition
        .groups
        .iter()
        .map(|g| {
            serde_json::json!({
                "segments": [g.first + 1, g.last + 1],
                "gamma": g.score.gamma,
                "gamma_list": g.score.gamma_list,
                "intersection_size": g.score.intersection.len(),
                "empty_region": g.empty_region,
            })
        })
        .collect();
    let report = serde_json::json!({
        "schema_version": regrasp_core::pipeline::SCHEMA_VERSION,
        "gamma_th": args.gamma_th,
        "all_segments": {
            "gamma": whole.gamma,
            "gamma_list": whole.gamma_list,
            "intersection_size": whole.intersection.len(),
        },
        "alpha": partition.alpha(),
        "groups": groups,
    });
    emit(&(serde_json::to_string_pretty(&report)? + "\n"), args.out.as_deref())?;
    Ok(0)
}

fn cmd_synth(args: &SynthArgs) -> anyhow::Result<u8> {
    if args.object.cloud.is_some() {
        bail!(Error::InvalidPlan("synth takes --box or --cylinder".into()));
    }
    let cloud = load_object(&args.object, args.seed)?;
    write_ply(&args.out, &cloud, None)?;
    info!("wrote {} points to {}", cloud.len(), args.out.display());
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> u8 {
    let summary = run_verify(&VerifyOptions { seed: args.seed, instances: args.instances, ..Default::default() });
    match &summary.failure {
        None => {
            println!("ok: {} instances, {} checks", summary.instances, summary.checks);
            0
        }
        Some(c) => {
            println!("counterexample: {c}");
            1
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<Error>())
        .map_or(5, |e| e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Regions(a) => cmd_regions(a),
        Command::Score(a) => cmd_score(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Verify(a) => Ok(cmd_verify(a)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
