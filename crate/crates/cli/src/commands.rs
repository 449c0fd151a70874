use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ambigrasp::calibrate::{
    bayes_optimize, read_records_csv, CalibrationError, CalibrationResult, OptimizerConfig, RecordSet, SearchBox,
};
use ambigrasp::mesh::{load_mesh, mass_properties, MassProperties, MeshFormat, TriMesh};
use ambigrasp::pj::{sample_pj_grasps_with, GripperGeometry, PjConfig};
use ambigrasp::scene::image::{write_mask_pgm, write_pfm, write_pgm16};
use ambigrasp::scene::{
    com_heatmap, filter_grasps_in_scene, label_view, render_maps_with, Camera, FilterConfig, FilteredGrasp,
    GraspKind, InstanceMaps, ObjectGrasps, Scene, SceneError, SceneFile, ViewLabels, DEFAULT_DENSITY,
};
use ambigrasp::suction::{sample_vacuum_candidates_with, CupGeometry, FailureReason, SuctionCupParams};
use ambigrasp::wrench::{soft_finger_score, vacuum_candidate_score, WrenchConfig};
use ambigrasp::Parallelism;
use anyhow::{anyhow, Context};
use serde::Serialize;

use crate::args::{CalibrateArgs, LabelSceneArgs, RenderArgs, SamplePjArgs, SampleVacuumArgs, ViewArgs};
use crate::output::Staging;
use crate::schema::{
    load_json, parse_json, GraspFile, PjGraspLabel, VacuumGraspFile, VacuumGraspLabel, VacuumSummary,
};
use crate::{CmdResult, Failure};

/// Echo of the invocation plus every resolved default.
#[derive(Serialize)]
struct RunConfig<'a, A: Serialize, R: Serialize> {
    command: &'static str,
    version: &'static str,
    args: &'a A,
    resolved: R,
}

fn run_config<'a, A: Serialize, R: Serialize>(command: &'static str, args: &'a A, resolved: R) -> RunConfig<'a, A, R> {
    RunConfig {
        command,
        version: env!("CARGO_PKG_VERSION"),
        args,
        resolved,
    }
}

fn exec() -> Parallelism {
    Parallelism::default()
}

fn load_mesh_file(path: &Path) -> CmdResult<TriMesh> {
    let format = MeshFormat::from_path(path).map_err(Failure::usage)?;
    load_mesh(path, format)
        .with_context(|| format!("loading mesh {}", path.display()))
        .map_err(Failure::Runtime)
}

fn load_gripper(path: Option<&PathBuf>) -> CmdResult<GripperGeometry> {
    let g = match path {
        Some(p) => load_json::<GripperGeometry>(p)?,
        None => GripperGeometry::default(),
    };
    g.validate().map_err(|e| Failure::usage(format!("invalid gripper: {e}")))?;
    Ok(g)
}

fn load_cup(path: Option<&PathBuf>) -> CmdResult<SuctionCupParams> {
    let c = match path {
        Some(p) => load_json::<SuctionCupParams>(p)?,
        None => SuctionCupParams::default(),
    };
    c.validate().map_err(Failure::usage)?;
    Ok(c)
}

/// Mass properties at the default density, when the mesh is closed.
fn object_mass(mesh: &TriMesh) -> Option<MassProperties> {
    mass_properties(mesh, DEFAULT_DENSITY).ok().filter(|m| m.mass > 0.0)
}

pub fn sample_pj(a: &SamplePjArgs) -> CmdResult {
    let gripper = load_gripper(a.gripper.as_ref())?;
    if a.contacts == 0 || a.rotations == 0 {
        return Err(Failure::usage("--contacts and --rotations must be at least 1"));
    }
    let config = PjConfig {
        max_grasps: a.max_grasps,
        contacts: a.contacts,
        rotations: a.rotations,
        ..PjConfig::default()
    };
    let wrench = WrenchConfig::default();
    let resolved = serde_json::json!({ "gripper": gripper, "pj": config, "wrench": wrench, "density": DEFAULT_DENSITY });
    let mut stage = Staging::begin(&a.common.out, &run_config("sample-pj", a, resolved))?;
    let mesh = load_mesh_file(&a.mesh)?;
    let mass = object_mass(&mesh);
    let labels: Vec<PjGraspLabel> = sample_pj_grasps_with(&mesh, &gripper, &config, a.common.seed, exec())
        .into_iter()
        .map(|mut g| {
            g.s_pj_soft = mass
                .as_ref()
                .and_then(|m| soft_finger_score(&g, &m.center_of_mass, m.mass, &wrench).ok())
                .map(|s| s.s);
            PjGraspLabel::from_candidate(&g)
        })
        .collect();
    stage.write_json("pj_grasps.json", &labels)?;
    stage.commit()?;
    println!("{} parallel-jaw grasps", labels.len());
    Ok(())
}

pub fn sample_vacuum(a: &SampleVacuumArgs) -> CmdResult {
    let cup = load_cup(a.cup.as_ref())?;
    if a.count == 0 {
        return Err(Failure::usage("--count must be at least 1"));
    }
    let wrench = WrenchConfig::default();
    let resolved = serde_json::json!({ "cup": cup, "wrench": wrench, "density": DEFAULT_DENSITY });
    let mut stage = Staging::begin(&a.common.out, &run_config("sample-vacuum", a, resolved))?;
    let mesh = load_mesh_file(&a.mesh)?;
    let mass = object_mass(&mesh);
    let results = sample_vacuum_candidates_with(&mesh, &cup, a.count, a.common.seed, exec())
        .map_err(|e| Failure::Runtime(e.into()))?;
    let grasps: Vec<VacuumGraspLabel> = results
        .iter()
        .map(|(c, e)| {
            let sc_sim = mass
                .as_ref()
                .and_then(|m| vacuum_candidate_score(c, &m.center_of_mass, m.mass, &cup, &wrench).ok())
                .map(|s| s.s);
            VacuumGraspLabel::new(c, e, sc_sim)
        })
        .collect();
    let count_of = |r: FailureReason| grasps.iter().filter(|g| g.seal.failure_reason == r).count();
    let successes = grasps.iter().filter(|g| g.seal.success).count();
    let summary = VacuumSummary {
        count: grasps.len(),
        successes,
        success_fraction: successes as f64 / grasps.len() as f64,
        ray_miss: count_of(FailureReason::RayMiss),
        depth_exceeded: count_of(FailureReason::DepthExceeded),
        force_liftoff: count_of(FailureReason::ForceLiftoff),
    };
    let line = format!(
        "{}/{} vacuum candidates sealed, success fraction {:.4} (ray_miss {}, depth_exceeded {}, force_liftoff {})",
        summary.successes,
        summary.count,
        summary.success_fraction,
        summary.ray_miss,
        summary.depth_exceeded,
        summary.force_liftoff
    );
    stage.write_json("vacuum_grasps.json", &VacuumGraspFile { summary, grasps })?;
    stage.commit()?;
    println!("{line}");
    Ok(())
}

fn scene_failure(e: SceneError) -> Failure {
    match e {
        SceneError::Mesh { .. } => Failure::Runtime(e.into()),
        other => Failure::usage(other),
    }
}

fn load_view(v: &ViewArgs) -> CmdResult<(Scene, Camera)> {
    let file: SceneFile = load_json(&v.scene)?;
    let mut camera: Camera = load_json(&v.camera)?;
    if let Some((w, h)) = v.resolution {
        camera = camera.with_resolution(w, h);
    }
    camera
        .validate()
        .map_err(|e| Failure::usage(format!("{}: {e}", v.camera.display())))?;
    let base = v.scene.parent().unwrap_or(Path::new("."));
    let scene = Scene::from_file(&file, base).map_err(scene_failure)?;
    Ok((scene, camera))
}

fn write_maps(stage: &mut Staging, maps: &InstanceMaps) -> CmdResult {
    let (w, h) = (maps.width, maps.height);
    let mut buf = Vec::new();
    write_pgm16(&mut buf, w, h, &maps.ids)?;
    stage.write("id.pgm", &buf)?;
    buf.clear();
    write_pfm(&mut buf, w, h, &maps.depth)?;
    stage.write("depth.pfm", &buf)?;
    for (k, id) in maps.instance_ids.iter().enumerate() {
        buf.clear();
        write_mask_pgm(&mut buf, w, h, &maps.amodal[k].bits)?;
        stage.write(&format!("amodal_{id}.pgm"), &buf)?;
    }
    Ok(())
}

/// Object grasps handed to the scene filter, with the position of each one
/// in its source file.
#[derive(Default)]
struct GraspInputs {
    by_mesh: BTreeMap<String, ObjectGrasps>,
    vacuum_index: HashMap<String, Vec<usize>>,
    pj_index: HashMap<String, Vec<usize>>,
}

fn load_grasps(scene: &Scene, sources: &[(String, PathBuf)]) -> CmdResult<GraspInputs> {
    let mut inputs = GraspInputs::default();
    for (mesh, path) in sources {
        if !scene.instances.iter().any(|i| &i.mesh_ref == mesh) {
            return Err(Failure::usage(format!("--grasps {mesh}=…: no scene object uses mesh {mesh:?}")));
        }
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: GraspFile = parse_json(&text, &path.display().to_string()).map_err(Failure::usage)?;
        let slot = inputs.by_mesh.entry(mesh.clone()).or_default();
        let bad = |i: usize, e: String| Failure::usage(format!("{}: grasp {i}: {e}", path.display()));
        match file {
            GraspFile::ParallelJaw(list) => {
                let idx = inputs.pj_index.entry(mesh.clone()).or_default();
                for (i, g) in list.iter().enumerate() {
                    slot.pj.push(g.to_candidate(i).map_err(|e| bad(i, e))?);
                    idx.push(i);
                }
            }
            GraspFile::Vacuum(f) => {
                let idx = inputs.vacuum_index.entry(mesh.clone()).or_default();
                for (i, g) in f.grasps.iter().enumerate() {
                    // Only sealing grasps are worth checking in context.
                    if g.seal.success {
                        slot.vacuum.push(g.to_candidate().map_err(|e| bad(i, e))?);
                        idx.push(i);
                    }
                }
            }
        }
    }
    Ok(inputs)
}

#[derive(Serialize)]
struct HeatmapReport {
    sigma_px: f64,
    written: Vec<u32>,
    /// Instances without a closed mesh, for which no centre of mass exists.
    skipped: Vec<u32>,
}

#[derive(Serialize)]
struct LabelsFile<'a> {
    camera: &'a Camera,
    #[serde(flatten)]
    view: &'a ViewLabels,
    #[serde(skip_serializing_if = "Option::is_none")]
    com_heatmaps: Option<HeatmapReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grasps: Option<Vec<FilteredGrasp>>,
}

pub fn label_scene(a: &LabelSceneArgs) -> CmdResult {
    let (scene, camera) = load_view(&a.view)?;
    let filter = FilterConfig {
        cup: load_cup(a.cup.as_ref())?,
        gripper: load_gripper(a.gripper.as_ref())?,
        ..FilterConfig::default()
    };
    filter.validate().map_err(Failure::usage)?;
    if !(a.sigma > 0.0 && a.sigma.is_finite()) {
        return Err(Failure::usage("--sigma must be positive"));
    }
    let inputs = load_grasps(&scene, &a.grasps)?;
    let resolved = serde_json::json!({ "camera": camera, "filter": filter });
    let mut stage = Staging::begin(&a.view.common.out, &run_config("label-scene", a, resolved))?;

    let (maps, view) = label_view(&scene, &camera, exec());
    write_maps(&mut stage, &maps)?;

    let com_heatmaps = if a.heatmaps {
        let mut report = HeatmapReport {
            sigma_px: a.sigma,
            written: Vec::new(),
            skipped: Vec::new(),
        };
        for (k, inst) in scene.instances.iter().enumerate() {
            match com_heatmap(&scene, &camera, k, a.sigma) {
                Ok(h) => {
                    let mut buf = Vec::new();
                    write_pfm(&mut buf, h.width, h.height, &h.data)?;
                    stage.write(&format!("com_{}.pfm", inst.instance_id), &buf)?;
                    report.written.push(inst.instance_id);
                }
                Err(_) => report.skipped.push(inst.instance_id),
            }
        }
        Some(report)
    } else {
        None
    };

    let grasps = (!a.grasps.is_empty()).then(|| {
        let mut out = filter_grasps_in_scene(&scene, &camera, &inputs.by_mesh, &filter);
        for g in &mut out {
            let mesh = &scene.instance(g.instance_id).expect("filtered instance exists").mesh_ref;
            let table = match g.kind {
                GraspKind::Vacuum => &inputs.vacuum_index,
                GraspKind::ParallelJaw => &inputs.pj_index,
            };
            g.index = table[mesh][g.index];
        }
        out
    });
    let passed = grasps.as_ref().map(|g| (g.iter().filter(|x| x.passed).count(), g.len()));

    stage.write_json(
        "labels.json",
        &LabelsFile {
            camera: &camera,
            view: &view,
            com_heatmaps,
            grasps,
        },
    )?;
    stage.commit()?;
    print!("difficulty level {}, {} instances", view.difficulty.level, view.instance_ids.len());
    if let Some((p, n)) = passed {
        print!(", {p}/{n} grasps pass");
    }
    println!();
    Ok(())
}

pub fn render(a: &RenderArgs) -> CmdResult {
    let (scene, camera) = load_view(&a.view)?;
    let resolved = serde_json::json!({ "camera": camera });
    let mut stage = Staging::begin(&a.view.common.out, &run_config("render", a, resolved))?;
    let maps = render_maps_with(&scene, &camera, exec());
    write_maps(&mut stage, &maps)?;
    stage.commit()?;
    println!("{}x{} rendered, {} instances", camera.width, camera.height, maps.instance_ids.len());
    Ok(())
}

#[derive(Serialize)]
struct CalibrationFile<'a> {
    #[serde(flatten)]
    result: &'a CalibrationResult,
    geometry: CupGeometry,
    record_count: usize,
    /// Input rows (0-based, header excluded) dropped because their contact
    /// lay too far from the mesh.
    rejected: &'a [usize],
}

pub fn calibrate(a: &CalibrateArgs) -> CmdResult {
    let geometry = load_cup(a.cup.as_ref())?.geometry();
    let search_box = match &a.search_box {
        Some(p) => load_json::<SearchBox>(p)?,
        None => SearchBox::default(),
    };
    search_box.validate().map_err(Failure::usage)?;
    if a.budget < ambigrasp::calibrate::MIN_BUDGET {
        return Err(Failure::usage(format!(
            "--budget must be at least {}",
            ambigrasp::calibrate::MIN_BUDGET
        )));
    }
    let file = std::fs::File::open(&a.records).with_context(|| format!("reading {}", a.records.display()))?;
    let records = match read_records_csv(std::io::BufReader::new(file)) {
        Ok(r) if r.is_empty() => return Err(Failure::usage(format!("{}: no records", a.records.display()))),
        Ok(r) => r,
        Err(e @ (CalibrationError::EmptyRecordSet | CalibrationError::Header { .. })) => {
            return Err(Failure::usage(format!("{}: {e}", a.records.display())))
        }
        Err(e) => return Err(Failure::Runtime(anyhow!("{}: {e}", a.records.display()))),
    };
    let config = OptimizerConfig::default();
    let resolved = serde_json::json!({ "geometry": geometry, "search_box": search_box, "optimizer": config });
    let mut stage = Staging::begin(&a.common.out, &run_config("calibrate", a, resolved))?;

    let base = a.records.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut cache: HashMap<String, Arc<TriMesh>> = HashMap::new();
    let resolve = |name: &str| -> Result<Arc<TriMesh>, String> {
        if let Some(m) = cache.get(name) {
            return Ok(m.clone());
        }
        let path = base.join(name);
        let mesh = MeshFormat::from_path(&path)
            .and_then(|f| load_mesh(&path, f))
            .map_err(|e| e.to_string())?;
        let mesh = Arc::new(mesh);
        cache.insert(name.to_string(), mesh.clone());
        Ok(mesh)
    };
    let set = RecordSet::prepare(&records, geometry, resolve, exec()).map_err(|e| Failure::Runtime(e.into()))?;
    let result = bayes_optimize(&set, &search_box, a.budget, a.common.seed, &config, exec())
        .map_err(|e| Failure::Runtime(e.into()))?;
    stage.write_json(
        "calibration.json",
        &CalibrationFile {
            result: &result,
            geometry,
            record_count: set.len(),
            rejected: &set.rejected,
        },
    )?;
    stage.commit()?;
    println!(
        "best accuracy {:.4} at ring_ratio {:.6} break_ratio {:.6} ({} records, {} rejected)",
        result.best_objective,
        result.best.ring_ratio,
        result.best.break_ratio,
        set.len(),
        set.rejected.len()
    );
    Ok(())
}
