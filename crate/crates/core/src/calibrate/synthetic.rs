//! Synthetic seal-attempt records labelled by the model itself at known
//! parameters, for exercising the calibration loop without a robot.
//!
//! The assets mix shapes on which the two parameters matter differently:
//! flat patches and large spheres seal almost regardless, small spheres,
//! thin cylinders, box edges and shallow V-grooves sit near the decision
//! boundary. Approaches are tilted off the nominal direction so that ring
//! stretching enters the verdict.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{tangent_basis, Vec3};
use crate::mesh::{primitives, Ray, TriMesh};
use crate::par::Parallelism;
use crate::suction::{evaluate_seal, project_cup, CupGeometry, SealModel, SuctionCupParams, VacuumGraspCandidate};

use super::SealAttemptRecord;

/// Largest tilt of a sampled approach away from the nominal one.
pub const MAX_TILT: f64 = 25.0 * PI / 180.0;

/// How a contact is aimed at a given asset.
#[derive(Debug, Clone, Copy)]
enum Aim {
    /// Straight down onto the square `[-a, a]²` at height `top`.
    Down { a: f64, top: f64 },
    /// Toward the centre from a random direction.
    Center { radius: f64 },
    /// Horizontally toward the axis of a z-aligned cylinder.
    Axis { radius: f64, half_height: f64 },
    /// Down onto the top face of a cube of side `s`, between 0 and `reach`
    /// from its +x edge.
    Edge { s: f64, reach: f64 },
    /// Along -y into a groove, across `[-a, a]` in x.
    Groove { a: f64 },
}

#[derive(Debug, Clone)]
pub struct SyntheticAsset {
    pub name: String,
    pub mesh: Arc<TriMesh>,
    aim: Aim,
}

/// The benchmark assets for a cup of radius `r`.
pub fn synthetic_assets(r: f64) -> Vec<SyntheticAsset> {
    let mut out = Vec::new();
    let mut push = |name: String, mesh: TriMesh, aim: Aim| {
        out.push(SyntheticAsset {
            name,
            mesh: Arc::new(mesh),
            aim,
        })
    };
    push("plane".into(), primitives::plane_patch(12.0 * r, 4), Aim::Down { a: 2.0 * r, top: 0.0 });
    for k in [2.0, 3.0, 5.0, 10.0, 20.0] {
        let radius = k * r;
        push(format!("sphere_{k}r"), primitives::icosphere(radius, 4), Aim::Center { radius });
    }
    for k in [1.5, 3.0, 6.0] {
        let radius = k * r;
        push(
            format!("cylinder_{k}r"),
            primitives::cylinder(radius, 8.0 * r, 96),
            Aim::Axis {
                radius,
                half_height: 2.0 * r,
            },
        );
    }
    let s = 8.0 * r;
    push("box".into(), primitives::box_mesh(Vec3::new(s, s, s)), Aim::Edge { s, reach: 2.0 * r });
    for deg in [5.0, 10.0, 15.0, 20.0] {
        let t = (deg * PI / 180.0_f64).tan();
        let w = 3.0 * r;
        let h = 2.0 * w * t + 2.0 * r;
        let section = [(-w, -h), (w, -h), (w, 0.0), (0.0, -w * t), (-w, 0.0)];
        push(format!("groove_{deg}deg"), primitives::prism(&section, 6.0 * r), Aim::Groove { a: r });
    }
    out
}

fn aim_ray(aim: Aim, rng: &mut ChaCha8Rng) -> Ray {
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    match aim {
        Aim::Down { a, top } => Ray::new(Vec3::new(u(-a, a), u(-a, a), top + 1.0), -Vec3::z()),
        Aim::Center { radius } => {
            let z = u(-1.0, 1.0);
            let phi = u(0.0, 2.0 * PI);
            let s = (1.0 - z * z).sqrt();
            let d = Vec3::new(s * phi.cos(), s * phi.sin(), z);
            Ray::new(d * (radius + 1.0), -d)
        }
        Aim::Axis { radius, half_height } => {
            let phi = u(0.0, 2.0 * PI);
            let d = Vec3::new(phi.cos(), phi.sin(), 0.0);
            let z = u(-half_height, half_height);
            Ray::new(d * (radius + 1.0) + Vec3::new(0.0, 0.0, z), -d)
        }
        Aim::Edge { s, reach } => {
            let x = 0.5 * s - u(0.0, reach);
            Ray::new(Vec3::new(x, u(-0.25 * s, 0.25 * s), s + 1.0), -Vec3::z())
        }
        Aim::Groove { a } => Ray::new(Vec3::new(u(-a, a), 1.0, u(-a, a)), -Vec3::y()),
    }
}

fn tilt(v: Vec3, rng: &mut ChaCha8Rng) -> Vec3 {
    let (t1, t2) = tangent_basis(&v);
    let phi = rng.random_range(0.0..2.0 * PI);
    let theta = rng.random_range(0.0..MAX_TILT);
    (v * theta.cos() + (t1 * phi.cos() + t2 * phi.sin()) * theta.sin()).normalize()
}

/// `count` records spread round-robin over `assets`, labelled by the seal
/// model at `truth`.
///
/// Attempts whose rim cannot be projected are redrawn: their verdict does
/// not depend on the parameters, so they carry no calibration signal.
pub fn synthetic_records(
    assets: &[SyntheticAsset],
    geometry: &CupGeometry,
    truth: &SealModel,
    count: usize,
    seed: u64,
    exec: Parallelism,
) -> Vec<SealAttemptRecord> {
    let params = SuctionCupParams::from_model(geometry, truth);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = Vec::with_capacity(count);
    let mut i = 0usize;
    while attempts.len() < count {
        let asset = &assets[i % assets.len()];
        i += 1;
        let ray = aim_ray(asset.aim, &mut rng);
        let approach = tilt(ray.direction, &mut rng);
        let Some(hit) = asset.mesh.raycast(&ray) else { continue };
        let cand = VacuumGraspCandidate::new(hit.point, approach);
        if project_cup(&asset.mesh, &params, &cand).is_err() {
            continue;
        }
        attempts.push((asset, cand));
    }
    exec.map_slice(&attempts, |(asset, cand)| {
        let eval = evaluate_seal(&asset.mesh, &params, cand).expect("valid stiffness");
        SealAttemptRecord {
            mesh: asset.name.clone(),
            contact: cand.contact,
            approach: cand.approach,
            sealed: eval.success,
            tearoff_n: None,
        }
    })
}

/// Name → mesh lookup for [`RecordSet::prepare`](super::RecordSet::prepare).
pub fn asset_index(assets: &[SyntheticAsset]) -> BTreeMap<String, Arc<TriMesh>> {
    assets.iter().map(|a| (a.name.clone(), a.mesh.clone())).collect()
}

/// Parameters used as the hidden ground truth in tests and benchmarks.
pub const REFERENCE_TRUTH: SealModel = SealModel {
    ring_ratio: 2.0,
    break_ratio: 0.15,
};
