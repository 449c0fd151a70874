//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Run with `cargo test -p ambigrasp-cli --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use ambigrasp::calibrate::synthetic::{asset_index, synthetic_assets, synthetic_records, REFERENCE_TRUTH};
use ambigrasp::calibrate::{bayes_optimize, objective, write_records_csv, OptimizerConfig, RecordSet, SearchBox};
use ambigrasp::geometry::{tangent_basis, RigidTransform, Vec3};
use ambigrasp::mesh::primitives::{box_at, box_mesh, cylinder, icosphere, plane_patch, to_obj_string, tote, wedge};
use ambigrasp::mesh::{sample_surface, Ray, SurfaceSample, TriMesh};
use ambigrasp::pj::{antipodal_check, robust_antipodal_score, sample_pj_grasps_with, GripperGeometry, PjConfig, RobustParams};
use ambigrasp::scene::{
    difficulty, label_view, layer_graph, relation_matrix, render_maps, sample_test_scene, Camera, DifficultyFeatures,
    Instance, InstanceMaps, Layer, PlacementConfig, PlacementObject, Scene, SceneFile,
};
use ambigrasp::suction::{
    evaluate_seal, CupGeometry, FailureReason, SealEvaluation, SealModel, SuctionCupParams, VacuumGraspCandidate,
};
use ambigrasp::Parallelism;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cup(n: usize, model: &SealModel) -> SuctionCupParams {
    SuctionCupParams::from_model(
        &CupGeometry {
            mass_point_count: n,
            ..CupGeometry::default()
        },
        model,
    )
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// `dir` turned by a uniform angle in `[0, max]` about a random perpendicular.
fn tilted(dir: &Vec3, max: f64, rng: &mut ChaCha8Rng) -> Vec3 {
    let (t1, t2) = tangent_basis(dir);
    let psi = rng.random_range(0.0..2.0 * PI);
    let axis = t1 * psi.cos() + t2 * psi.sin();
    RigidTransform::from_axis_angle(&axis, rng.random_range(0.0..=max), Vec3::zeros()).apply_vector(dir)
}

fn primitive_assets() -> Vec<(String, TriMesh)> {
    let mut out = vec![
        ("icosphere".to_string(), icosphere(0.03, 3)),
        ("cylinder".to_string(), cylinder(0.03, 0.12, 48)),
        ("box".to_string(), box_mesh(Vec3::new(0.08, 0.08, 0.08))),
        ("wedge".to_string(), wedge(PI / 2.0, 0.05, 0.1)),
        ("plane".to_string(), plane_patch(0.2, 4)),
    ];
    for a in synthetic_assets(CupGeometry::default().radius) {
        out.push((a.name.clone(), (*a.mesh).clone()));
    }
    out
}

// ----------------------------------------------------------------- suction

struct Evaluation {
    params: SuctionCupParams,
    approach: Vec3,
    eval: SealEvaluation,
}

/// Random cups, seal models and approach directions on the primitive assets.
fn random_evaluations(count: usize, seed: u64) -> Vec<Evaluation> {
    let assets = primitive_assets();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::with_capacity(count);
    for i in 0..count {
        let mesh = &assets[i % assets.len()].1;
        let sample = sample_surface(mesh, 1, rng.random())[0];
        let model = SealModel {
            ring_ratio: 10f64.powf(rng.random_range(-2.0..2.0)),
            break_ratio: rng.random_range(0.0..0.5),
        };
        let geometry = CupGeometry {
            radius: rng.random_range(0.005..0.02),
            mass_point_count: [8, 16, 32, 64][rng.random_range(0..4)],
            pressure_difference: rng.random_range(20_000.0..90_000.0),
            max_projection_depth: 0.015,
        };
        let params = SuctionCupParams::from_model(&geometry, &model);
        let approach = tilted(&-sample.normal, 30f64.to_radians(), &mut rng);
        jobs.push((i % assets.len(), params, VacuumGraspCandidate::new(sample.point, approach)));
    }
    Parallelism::default().map_slice(&jobs, |(a, params, cand)| Evaluation {
        params: *params,
        approach: cand.approach,
        eval: evaluate_seal(&assets[*a].1, params, cand).expect("valid parameters"),
    })
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let evals = random_evaluations(2000, 1);
    let elapsed = start.elapsed().as_secs_f64();
    let solved: Vec<&Evaluation> = evals.iter().filter(|e| !e.eval.points.is_empty()).collect();
    let worst = solved
        .iter()
        .map(|e| e.eval.equilibrium_residual() / e.params.vacuum_force())
        .fold(0.0, f64::max);
    ensure(solved.len() >= 1000, || format!("only {} non-miss evaluations", solved.len()))?;
    ensure(worst <= 1e-6, || format!("residual {worst:.3e}·F_p"))?;
    ensure(elapsed < 10.0, || format!("took {elapsed:.2} s"))?;
    Ok(format!(
        "{} evaluations ({} solved), worst residual {worst:.2e}·F_p, {elapsed:.2} s",
        evals.len(),
        solved.len()
    ))
}

fn criterion_2() -> Outcome {
    let evals = random_evaluations(2000, 2);
    let mut worst = 0.0f64;
    for e in &evals {
        let f_p = e.params.pressure_difference * PI * e.params.radius * e.params.radius;
        worst = worst.max((e.eval.vacuum_force - f_p).abs() / f_p);
        if !e.eval.points.is_empty() {
            let axial: f64 = e.eval.points.iter().map(|p| p.elastic_force.dot(&e.approach)).sum();
            worst = worst.max((axial - f_p).abs() / f_p);
        }
    }
    ensure(worst <= 1e-9, || format!("relative deviation {worst:.3e}"))?;
    Ok(format!("{} evaluations, worst relative deviation {worst:.2e}", evals.len()))
}

fn criterion_3() -> Outcome {
    let plane = plane_patch(0.2, 3);
    let mut worst = 0.0f64;
    for n in [8, 16, 32, 64] {
        for model in [SealModel::default(), REFERENCE_TRUTH] {
            let p = cup(n, &model);
            let c = VacuumGraspCandidate::new(Vec3::new(0.01, -0.02, 0.0), -Vec3::z());
            let e = evaluate_seal(&plane, &p, &c).unwrap();
            ensure(e.success, || format!("n={n}: seal failed ({:?})", e.failure_reason))?;
            let f_p = p.vacuum_force();
            let expected = f_p / n as f64;
            for a in &e.points {
                worst = worst.max((a.contact_force.norm() - expected).abs() / f_p);
                for b in &e.points {
                    worst = worst.max((a.contact_force - b.contact_force).norm() / f_p);
                }
            }
        }
    }
    ensure(worst <= 1e-9, || format!("pairwise deviation {worst:.3e}·F_p"))?;
    Ok(format!("n ∈ {{8,16,32,64}} sealed, max deviation {worst:.2e}·F_p"))
}

fn criterion_4() -> Outcome {
    let mut cases = 0;
    for side in [0.05, 0.1, 0.2] {
        let b = box_mesh(Vec3::new(side, side, side));
        let h = side / 2.0;
        for n in [16, 32, 64] {
            for model in [SealModel::default(), REFERENCE_TRUTH] {
                let p = cup(n, &model);
                // Centred on the bisector of the +x/+z and +y/+z edges.
                let edges = [
                    VacuumGraspCandidate::new(Vec3::new(h, 0.0, h), Vec3::new(-1.0, 0.0, -1.0)),
                    VacuumGraspCandidate::new(Vec3::new(0.0, h, h), Vec3::new(0.0, -1.0, -1.0)),
                ];
                for c in &edges {
                    let e = evaluate_seal(&b, &p, c).unwrap();
                    ensure(
                        matches!(e.failure_reason, FailureReason::ForceLiftoff | FailureReason::RayMiss) && !e.success,
                        || format!("edge of {side} m box, n={n}: {:?}", e.failure_reason),
                    )?;
                    cases += 1;
                }
                // Half the rim hangs past the top face.
                let over = VacuumGraspCandidate::new(Vec3::new(h, 0.0, h), -Vec3::z());
                let e = evaluate_seal(&b, &p, &over).unwrap();
                ensure(e.failure_reason == FailureReason::RayMiss, || {
                    format!("overhang of {side} m box, n={n}: {:?}", e.failure_reason)
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} edge and overhang grasps rejected as expected"))
}

/// Plane tilt sweep, sphere radii and a cylinder sweep, each a list of
/// (mesh, candidate).
fn convergence_suite(r: f64) -> Vec<(Arc<TriMesh>, VacuumGraspCandidate)> {
    let mut out = Vec::new();
    let plane = plane_patch(30.0 * r, 4);
    for deg in 0..=40 {
        for azimuth in [0.0f64, 20.0, 45.0] {
            let axis = Vec3::new(azimuth.to_radians().cos(), azimuth.to_radians().sin(), 0.0);
            let tf = RigidTransform::from_axis_angle(&axis, (deg as f64).to_radians(), Vec3::zeros());
            out.push((Arc::new(plane.transformed(&tf)), VacuumGraspCandidate::new(Vec3::zeros(), -Vec3::z())));
        }
    }
    for k in [2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0] {
        let s = Arc::new(icosphere(k * r, 4));
        for deg in [0.0f64, 10.0, 20.0, 30.0] {
            let d = Vec3::new(deg.to_radians().sin(), 0.0, -deg.to_radians().cos());
            let hit = s.raycast(&Ray::new(-d * (k * r + 0.1), d)).unwrap();
            out.push((s.clone(), VacuumGraspCandidate::new(hit.point, -Vec3::z())));
            out.push((s.clone(), VacuumGraspCandidate::new(hit.point, d)));
        }
    }
    for k in [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 10.0] {
        // Axis along x, top line at z = k·r.
        let rot = RigidTransform::from_axis_angle(&Vec3::y(), PI / 2.0, Vec3::zeros());
        let c = Arc::new(cylinder(k * r, 20.0 * r, 96).transformed(&rot));
        for deg in [0.0f64, 10.0, 20.0, 30.0] {
            // Tilted along the axis and across it.
            for ax in [Vec3::x(), Vec3::y()] {
                let tf = RigidTransform::from_axis_angle(&ax, deg.to_radians(), Vec3::zeros());
                let d = tf.apply_vector(&-Vec3::z());
                if let Some(hit) = c.raycast(&Ray::new(-d * (k * r + 0.1), d)) {
                    out.push((c.clone(), VacuumGraspCandidate::new(hit.point, d)));
                }
            }
        }
    }
    out
}

fn criterion_5() -> Outcome {
    let r = CupGeometry::default().radius;
    let suite = convergence_suite(r);
    let models = [
        SealModel::default(),
        REFERENCE_TRUTH,
        SealModel {
            ring_ratio: 0.1,
            break_ratio: 0.05,
        },
        SealModel {
            ring_ratio: 10.0,
            break_ratio: 0.3,
        },
    ];
    let mut jobs = Vec::new();
    for m in &models {
        for (mesh, c) in &suite {
            jobs.push((mesh.clone(), *c, *m));
        }
    }
    let verdicts = Parallelism::default().map_slice(&jobs, |(mesh, c, m)| {
        let a = evaluate_seal(mesh, &cup(16, m), c).unwrap().success;
        let b = evaluate_seal(mesh, &cup(64, m), c).unwrap().success;
        (a, b)
    });
    let agree = verdicts.iter().filter(|(a, b)| a == b).count();
    let sealed = verdicts.iter().filter(|(_, b)| *b).count();
    let frac = agree as f64 / verdicts.len() as f64;
    let detail = format!("{agree}/{} verdicts agree ({frac:.3}); {sealed} sealed at n=64", verdicts.len());
    ensure(frac >= 0.95, || detail.clone())?;
    Ok(detail)
}

// -------------------------------------------------------------- antipodal

fn criterion_6() -> Outcome {
    let cube = box_mesh(Vec3::new(0.05, 0.05, 0.05));
    let exact = RobustParams {
        attempts: 5,
        sigma_angle: 0.0,
        sigma_translation: 0.0,
    };
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut normal = Vec3::zeros();
            normal[axis] = sign;
            let sample = SurfaceSample {
                point: normal * 0.025,
                normal,
                triangle: 0,
            };
            for seed in 0..5 {
                let s = robust_antipodal_score(&cube, &sample, &exact, 0.4, 0.08, seed);
                ensure(s.score == 1.0 && s.successes == 5, || {
                    format!("face {normal:?}: s_antip = {}", s.score)
                })?;
            }
        }
    }

    let gripper = GripperGeometry {
        friction: 0.2,
        ..GripperGeometry::default()
    };
    let w = wedge(PI / 4.0, 0.04, 0.3);
    let config = PjConfig {
        contacts: 2000,
        ..PjConfig::default()
    };
    let grasps = sample_pj_grasps_with(&w, &gripper, &config, 7, Parallelism::default());
    ensure(grasps.is_empty(), || format!("45° wedge gave {} grasps", grasps.len()))?;
    let pairs = sample_surface(&w, 2000, 9)
        .iter()
        .filter(|s| antipodal_check(&w, &s.point, &s.normal, 0.2, 0.08).is_some())
        .count();
    ensure(pairs == 0, || format!("45° wedge gave {pairs} antipodal pairs"))?;

    let radius = 0.03;
    let sphere = icosphere(radius, 3);
    let samples = sample_surface(&sphere, 500, 11);
    for s in &samples {
        let pair = antipodal_check(&sphere, &s.point, &s.normal, 0.05, 0.08)
            .ok_or_else(|| format!("sphere contact {:?} failed", s.point))?;
        ensure(pair.width() > 2.0 * radius * 0.98, || format!("width {}", pair.width()))?;
        let score = robust_antipodal_score(&sphere, s, &exact, 0.05, 0.08, 0).score;
        ensure(score == 1.0, || format!("sphere robust score {score}"))?;
    }
    Ok(format!(
        "cube faces s_antip = 1.0 (N = 5), wedge 0 grasps, {} sphere diametric pairs pass",
        samples.len()
    ))
}

// ---------------------------------------------------------------- raycast

fn criterion_7() -> Outcome {
    let mut assets = primitive_assets();
    assets.push(("tote".into(), tote(0.4, 0.3, 0.1, 0.01)));
    assets.push((
        "stack".into(),
        TriMesh::merge(&[
            box_at(Vec3::new(0.1, 0.1, 0.05), Vec3::zeros()),
            box_at(Vec3::new(0.05, 0.05, 0.05), Vec3::new(0.02, 0.01, 0.05)),
        ])
        .unwrap(),
    ));
    let mut total = 0;
    let mut hits = 0;
    for (k, (name, mesh)) in assets.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        let b = mesh.bounds();
        let center = (b.min + b.max) * 0.5;
        let extent = (b.max - b.min).norm().max(1e-3);
        let targets = sample_surface(mesh, 5000, rng.random());
        let rays: Vec<Ray> = (0..10_000)
            .map(|i| {
                let origin = center + unit_vector(&mut rng) * extent * rng.random_range(0.0..1.5);
                let dir = if i % 2 == 0 {
                    // Aimed at the surface, so about half the rays hit.
                    let t = targets[i / 2].point - origin;
                    if t.norm() > 1e-9 {
                        t.normalize()
                    } else {
                        unit_vector(&mut rng)
                    }
                } else {
                    unit_vector(&mut rng)
                };
                Ray::new(origin, dir)
            })
            .collect();
        let mismatches: Vec<usize> = Parallelism::default()
            .map_slice(&rays, |ray| {
                let a = mesh.raycast(ray);
                let b = mesh.raycast_brute_force(ray);
                let same = match (&a, &b) {
                    (None, None) => true,
                    (Some(a), Some(b)) => a.triangle == b.triangle && a.distance == b.distance,
                    _ => false,
                };
                (same, a.is_some())
            })
            .into_iter()
            .enumerate()
            .filter_map(|(i, (same, hit))| {
                hits += hit as usize;
                (!same).then_some(i)
            })
            .collect();
        ensure(mismatches.is_empty(), || format!("{name}: {} mismatches", mismatches.len()))?;
        total += rays.len();
    }
    Ok(format!("{total} rays over {} assets ({hits} hits), zero mismatches", assets.len()))
}

// ------------------------------------------------------------------ scene

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn fixture_camera() -> Camera {
    serde_json::from_str(&fs::read_to_string(fixtures().join("camera.json")).unwrap()).unwrap()
}

fn fixture_scene(name: &str) -> Scene {
    let text = fs::read_to_string(fixtures().join(format!("{name}.json"))).unwrap();
    let file: SceneFile = serde_json::from_str(&text).unwrap();
    Scene::from_file(&file, &fixtures()).unwrap()
}

fn overhead(px: u32) -> Camera {
    Camera::look_at(Vec3::new(0.0, 0.0, 1.0), Vec3::zeros(), Vec3::y(), px, px, 2.0 * 0.25f64.atan())
}

fn slab(id: u32, class: u32, min: Vec3, max: Vec3) -> Instance {
    let mesh = Arc::new(box_at(max - min, (min + max) * 0.5));
    Instance::new(id, class, format!("slab{id}"), mesh, RigidTransform::identity())
}

fn scene_of(instances: Vec<Instance>) -> Scene {
    Scene::new(instances, None, Vec3::new(0.0, 0.0, -9.81)).unwrap()
}

/// The bundled fixtures, a few constructed stacks and random bin scenes.
fn rendered_fixtures() -> Vec<(String, Scene, Camera)> {
    let mut out = Vec::new();
    for name in ["level1", "level2", "level3", "level4", "level5", "two_box_stack"] {
        out.push((name.to_string(), fixture_scene(name), fixture_camera()));
    }
    let (half, _) = half_cover();
    out.push(("half_cover".into(), half, overhead(64)));
    out.push(("chain".into(), chain(), overhead(96)));
    let objects = [
        PlacementObject {
            class_id: 1,
            mesh_ref: "box".into(),
            mesh: Arc::new(box_mesh(Vec3::new(0.12, 0.08, 0.05))),
        },
        PlacementObject {
            class_id: 2,
            mesh_ref: "cylinder".into(),
            mesh: Arc::new(cylinder(0.03, 0.1, 32)),
        },
        PlacementObject {
            class_id: 3,
            mesh_ref: "sphere".into(),
            mesh: Arc::new(icosphere(0.035, 2)),
        },
    ];
    let cam = Camera::look_at(Vec3::new(0.05, -0.1, 0.9), Vec3::zeros(), Vec3::y(), 96, 80, 0.7);
    for seed in 0..4 {
        let s = sample_test_scene(&objects, 8, seed, &PlacementConfig::default()).unwrap();
        out.push((format!("bin_{seed}"), s, cam));
    }
    out
}

/// A slab whose left edge lies on the optical axis over a lower square, so
/// the square's image is split in half.
fn half_cover() -> (Scene, usize) {
    let b = slab(2, 2, Vec3::new(-0.1, -0.1, 0.0), Vec3::new(0.1, 0.1, 0.02));
    let a = slab(1, 1, Vec3::new(0.0, -0.15, 0.03), Vec3::new(0.2, 0.15, 0.04));
    (scene_of(vec![a, b]), 1)
}

fn chain() -> Scene {
    let c = slab(3, 3, Vec3::new(-0.22, -0.05, 0.0), Vec3::new(-0.02, 0.05, 0.02));
    let b = slab(2, 2, Vec3::new(-0.1, -0.05, 0.03), Vec3::new(0.1, 0.05, 0.05));
    let a = slab(1, 1, Vec3::new(0.05, -0.05, 0.06), Vec3::new(0.22, 0.05, 0.08));
    scene_of(vec![a, b, c])
}

/// Per-pixel brute-force recount of the id map and amodal masks.
fn recount(scene: &Scene, cam: &Camera) -> (Vec<u16>, Vec<Vec<bool>>) {
    let mut ids = Vec::new();
    let mut amodal = vec![Vec::new(); scene.instances.len()];
    for v in 0..cam.height {
        for u in 0..cam.width {
            let (ray, _) = cam.pixel_ray(u, v);
            let mut best = (f64::INFINITY, 0u16);
            for (k, inst) in scene.instances.iter().enumerate() {
                let hit = inst.world.raycast_brute_force(&ray);
                amodal[k].push(hit.is_some());
                if let Some(h) = hit {
                    if h.distance < best.0 {
                        best = (h.distance, inst.instance_id as u16);
                    }
                }
            }
            if let Some(t) = &scene.tote {
                if let Some(h) = t.world.raycast_brute_force(&ray) {
                    if h.distance < best.0 {
                        best = (h.distance, 0);
                    }
                }
            }
            ids.push(best.1);
        }
    }
    (ids, amodal)
}

fn check_masks(name: &str, scene: &Scene, cam: &Camera) -> Result<InstanceMaps, String> {
    let maps = render_maps(scene, cam);
    let (ids, amodal) = recount(scene, cam);
    ensure(maps.ids == ids, || format!("{name}: id map differs from recount"))?;
    for (k, inst) in scene.instances.iter().enumerate() {
        let total = &maps.amodal[k];
        ensure(total.bits == amodal[k], || format!("{name}: amodal mask {k} differs"))?;
        let (vis, occl) = (maps.visible_mask(k), maps.occluded_mask(k));
        ensure(&vis.union(&occl) == total, || format!("{name}: union ≠ total for {k}"))?;
        ensure(vis.intersection(&occl).is_empty(), || format!("{name}: masks overlap for {k}"))?;
        let id = inst.instance_id as u16;
        let occluded = (0..ids.len()).filter(|&p| amodal[k][p] && ids[p] != id).count();
        let all = amodal[k].iter().filter(|&&b| b).count();
        let stats = maps.occlusion(k);
        ensure(stats.occluded == occluded && stats.total == all, || {
            format!("{name}: counts for {k} are {}/{} vs recount {occluded}/{all}", stats.occluded, stats.total)
        })?;
        if all > 0 {
            let expected = if occluded == all {
                1.0 - 1.0 / all as f64
            } else {
                occluded as f64 / all as f64
            };
            ensure(stats.s_occl == expected, || format!("{name}: s_occl {} vs {expected}", stats.s_occl))?;
        }
    }
    Ok(maps)
}

fn criterion_8() -> Outcome {
    let fixtures = rendered_fixtures();
    for (name, scene, cam) in &fixtures {
        check_masks(name, scene, cam)?;
    }
    let (s, k) = half_cover();
    let maps = render_maps(&s, &overhead(64));
    let rows = (0..64).filter(|&v| (0..64).any(|u| maps.amodal[k].get(u, v))).count();
    let s_occl = maps.occlusion(k).s_occl;
    ensure((s_occl - 0.5).abs() <= 1.0 / rows as f64, || format!("half-cover s_occl {s_occl}"))?;
    Ok(format!("{} fixtures recounted exactly; half-cover s_occl = {s_occl:.4}", fixtures.len()))
}

fn criterion_9() -> Outcome {
    let fixtures = rendered_fixtures();
    for (name, scene, cam) in &fixtures {
        let m = relation_matrix(&render_maps(scene, cam)).rows();
        for i in 0..m.len() {
            ensure(m[i][i] == 0, || format!("{name}: non-zero diagonal"))?;
            for j in 0..m.len() {
                ensure(m[i][j] == -m[j][i], || format!("{name}: m[{i}][{j}] not antisymmetric"))?;
            }
        }
    }
    let maps = render_maps(&fixture_scene("two_box_stack"), &fixture_camera());
    let m = relation_matrix(&maps);
    ensure(m.rows() == vec![vec![0, 1], vec![-1, 0]], || format!("stack matrix {:?}", m.rows()))?;
    let g = layer_graph(&m);
    ensure(g.layers == vec![Layer::Top, Layer::Secondary], || format!("stack layers {:?}", g.layers))?;
    let m = relation_matrix(&render_maps(&chain(), &overhead(96)));
    ensure(m.get(0, 1) == 1 && m.get(1, 2) == 1, || format!("chain links {:?}", m.rows()))?;
    ensure(m.get(0, 2) == 0, || format!("chain m[A][C] = {}", m.get(0, 2)))?;
    Ok(format!("{} fixtures antisymmetric; stack [[0,1],[-1,0]] top/secondary; chain m[A][C] = 0", fixtures.len()))
}

fn criterion_10() -> Outcome {
    let f = |layer_count, max_occlusion, all_complete, classes_unique| DifficultyFeatures {
        layer_count,
        max_occlusion,
        all_complete,
        classes_unique,
    };
    let rows = [
        (f(1, 0.0, true, true), 1),
        (f(2, 0.05, true, true), 1),
        (f(2, 0.0501, true, true), 2),
        (f(3, 0.0, true, true), 2),
        (f(4, 0.4, true, true), 2),
        (f(1, 0.0, false, true), 3),
        (f(3, 0.5, false, true), 3),
        (f(1, 0.0, true, false), 4),
        (f(3, 0.5, true, false), 4),
        (f(1, 0.0, false, false), 5),
        (f(3, 0.5, false, false), 5),
    ];
    for (features, level) in &rows {
        let got = difficulty(features).level;
        ensure(got == *level, || format!("{features:?} gave level {got}, expected {level}"))?;
    }
    for level in 1..=5u8 {
        let (_, labels) = label_view(&fixture_scene(&format!("level{level}")), &fixture_camera(), Parallelism::default());
        ensure(labels.difficulty.level == level, || {
            format!("fixture level{level} classified as {}", labels.difficulty.level)
        })?;
    }
    Ok(format!("{} feature rows and 5 rendered fixtures classified correctly", rows.len()))
}

// ------------------------------------------------------------ calibration

fn criterion_11() -> Outcome {
    let geometry = CupGeometry::default();
    let assets = synthetic_assets(geometry.radius);
    let index = asset_index(&assets);
    let exec = Parallelism::default();
    let prepare = |seed| {
        let records = synthetic_records(&assets, &geometry, &REFERENCE_TRUTH, 300, seed, exec);
        RecordSet::prepare(&records, geometry, |m| index.get(m).cloned().ok_or_else(|| m.to_string()), exec).unwrap()
    };
    let mut lines = Vec::new();
    let mut failed = false;
    for seed in 0..5u64 {
        let start = Instant::now();
        let train = prepare(2 * seed);
        let held = prepare(2 * seed + 1);
        let result =
            bayes_optimize(&train, &SearchBox::default(), 60, seed, &OptimizerConfig::default(), exec).unwrap();
        let acc = objective(&held, &result.best, exec).unwrap();
        let secs = start.elapsed().as_secs_f64();
        failed |= acc < 0.95 || secs >= 60.0 || result.trace.len() != 60;
        lines.push(format!("seed {seed}: {acc:.3} in {secs:.1} s"));
    }
    let detail = format!("held-out accuracy {}", lines.join(", "));
    if failed {
        Err(detail)
    } else {
        Ok(detail)
    }
}

// -------------------------------------------------------------------- cli

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn run_twice(args: &[String], out: &Path) -> Result<usize, String> {
    let mut full = args.to_vec();
    full.extend(["--out".to_string(), out.display().to_string()]);
    let mut snaps = Vec::new();
    for _ in 0..2 {
        if out.exists() {
            fs::remove_dir_all(out).unwrap();
        }
        let r = Command::new(env!("CARGO_BIN_EXE_ambigrasp")).args(&full).output().unwrap();
        ensure(r.status.success(), || {
            format!("{} failed: {}", args[0], String::from_utf8_lossy(&r.stderr).trim())
        })?;
        snaps.push(snapshot(out));
    }
    ensure(snaps[0] == snaps[1], || {
        let differing: Vec<&String> = snaps[0].keys().filter(|k| snaps[1].get(*k) != Some(&snaps[0][*k])).collect();
        format!("{}: artifacts differ: {differing:?}", args[0])
    })?;
    Ok(snaps[0].len())
}

fn criterion_12() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let fx = |name: &str| fixtures().join(name).display().to_string();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<String>>();

    let geometry = CupGeometry::default();
    let assets = synthetic_assets(geometry.radius);
    for a in &assets {
        fs::write(t.join(format!("{}.obj", a.name)), to_obj_string(&a.mesh)).unwrap();
    }
    let mut records = synthetic_records(&assets, &geometry, &REFERENCE_TRUTH, 80, 5, Parallelism::default());
    for r in &mut records {
        r.mesh = format!("{}.obj", r.mesh);
    }
    let csv = t.join("records.csv");
    write_records_csv(fs::File::create(&csv).unwrap(), &records).unwrap();

    let pj = t.join("pj");
    let vac = t.join("vac");
    let commands = vec![
        (s(&["sample-pj", &fx("box.obj"), "--contacts", "300", "--seed", "3"]), pj.clone()),
        (s(&["sample-vacuum", &fx("box.obj"), "--count", "200", "--seed", "3"]), vac.clone()),
        (
            s(&[
                "label-scene",
                &fx("two_box_stack.json"),
                &fx("camera.json"),
                "--heatmaps",
                "--grasps",
                &format!("box.obj={}", pj.join("pj_grasps.json").display()),
                "--grasps",
                &format!("box.obj={}", vac.join("vacuum_grasps.json").display()),
            ]),
            t.join("labels"),
        ),
        (s(&["calibrate", &csv.display().to_string(), "--budget", "20", "--seed", "3"]), t.join("calib")),
        (s(&["render", &fx("level3.json"), &fx("camera.json")]), t.join("render")),
    ];
    let mut files = 0;
    for (args, out) in &commands {
        files += run_twice(args, out)?;
    }
    Ok(format!("{} commands, {files} artifacts byte-identical across runs", commands.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("equilibrium residual", criterion_1),
        ("vacuum force identity", criterion_2),
        ("flat-plane oracle", criterion_3),
        ("edge/overhang oracles", criterion_4),
        ("verdict convergence", criterion_5),
        ("antipodal correctness", criterion_6),
        ("ray-cast equivalence", criterion_7),
        ("mask algebra", criterion_8),
        ("relation matrix and layers", criterion_9),
        ("difficulty rules", criterion_10),
        ("calibration recovery", criterion_11),
        ("CLI determinism", criterion_12),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {:>2} {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {:>2} {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
