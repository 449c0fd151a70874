use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "ambigrasp", version, about = "Grasp label synthesis and bin-scene annotation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample parallel-jaw grasps on a mesh; writes pj_grasps.json.
    SamplePj(SamplePjArgs),
    /// Sample and evaluate vacuum grasps on a mesh; writes vacuum_grasps.json.
    SampleVacuum(SampleVacuumArgs),
    /// Render and label one scene viewpoint; writes labels.json and images.
    LabelScene(LabelSceneArgs),
    /// Fit the seal model to recorded attempts; writes calibration.json.
    Calibrate(CalibrateArgs),
    /// Render ID, depth and amodal images of a scene viewpoint.
    Render(RenderArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Output directory, created if absent.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for all randomness.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SamplePjArgs {
    /// Mesh file (.obj or ASCII .ply), metres.
    pub mesh: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Gripper geometry JSON; built-in defaults otherwise.
    #[arg(long)]
    pub gripper: Option<PathBuf>,
    /// Upper bound on the number of grasps written.
    #[arg(long, default_value_t = 5000)]
    pub max_grasps: usize,
    /// Surface contacts sampled before pose expansion.
    #[arg(long, default_value_t = 1000)]
    pub contacts: usize,
    /// Poses per contact pair around the closing axis.
    #[arg(long, default_value_t = 12)]
    pub rotations: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleVacuumArgs {
    /// Mesh file (.obj or ASCII .ply), metres.
    pub mesh: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Suction cup parameter JSON; built-in defaults otherwise.
    #[arg(long)]
    pub cup: Option<PathBuf>,
    /// Number of candidates sampled.
    #[arg(long, default_value_t = 500)]
    pub count: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ViewArgs {
    /// Scene JSON; mesh paths are relative to it.
    pub scene: PathBuf,
    /// Camera JSON.
    pub camera: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Override the camera resolution as WIDTHxHEIGHT; intrinsics scale.
    #[arg(long, value_parser = parse_resolution)]
    pub resolution: Option<(u32, u32)>,
}

#[derive(Debug, Args, Serialize)]
pub struct LabelSceneArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub view: ViewArgs,
    /// Object-level grasp file for a scene mesh, as MESH=FILE where MESH is
    /// the mesh string used in the scene file. Repeatable; accepts both
    /// pj_grasps.json and vacuum_grasps.json.
    #[arg(long, value_parser = parse_grasp_source)]
    pub grasps: Vec<(String, PathBuf)>,
    /// Also write one centre-of-mass heatmap per instance.
    #[arg(long)]
    pub heatmaps: bool,
    /// Heatmap Gaussian standard deviation, pixels.
    #[arg(long, default_value_t = 5.0)]
    pub sigma: f64,
    /// Suction cup parameter JSON used by the grasp filter.
    #[arg(long)]
    pub cup: Option<PathBuf>,
    /// Gripper geometry JSON used by the grasp filter.
    #[arg(long)]
    pub gripper: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    /// Measurement CSV; mesh references are relative to it.
    pub records: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Objective evaluations, at least 10.
    #[arg(long, default_value_t = 60)]
    pub budget: usize,
    /// Suction cup parameter JSON; only its geometry is used.
    #[arg(long)]
    pub cup: Option<PathBuf>,
    /// Search box JSON; defaults to ring ratio [0.01, 100] (log) and break
    /// ratio [0, 0.5].
    #[arg(long)]
    pub search_box: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RenderArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub view: ViewArgs,
}

fn parse_resolution(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<u32>().ok().filter(|&v| v > 0);
    match (parse(w), parse(h)) {
        (Some(w), Some(h)) => Ok((w, h)),
        _ => Err(format!("expected two positive integers, got {s:?}")),
    }
}

fn parse_grasp_source(s: &str) -> Result<(String, PathBuf), String> {
    let (mesh, file) = s.split_once('=').ok_or_else(|| format!("expected MESH=FILE, got {s:?}"))?;
    if mesh.is_empty() || file.is_empty() {
        return Err(format!("expected MESH=FILE, got {s:?}"));
    }
    Ok((mesh.to_string(), PathBuf::from(file)))
}
