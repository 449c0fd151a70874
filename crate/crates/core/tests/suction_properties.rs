use std::f64::consts::PI;

use ambigrasp::mesh::primitives::{box_mesh, icosphere, plane_patch};
use ambigrasp::suction::{
    evaluate_batch, evaluate_seal, sample_vacuum_candidates_with, CupGeometry, FailureReason, SealModel,
    SuctionCupParams, VacuumGraspCandidate,
};
use ambigrasp::{Parallelism, RigidTransform, Vec3};
use proptest::prelude::*;

fn params(n: usize, radius: f64, ring_ratio: f64, break_ratio: f64) -> SuctionCupParams {
    SuctionCupParams::from_model(
        &CupGeometry {
            radius,
            mass_point_count: n,
            ..CupGeometry::default()
        },
        &SealModel { ring_ratio, break_ratio },
    )
}

#[test]
fn model_round_trips_through_spring_constants() {
    let p = params(24, 0.015, 3.5, 0.2);
    let m = p.model();
    assert!((m.ring_ratio - 3.5).abs() < 1e-12);
    assert!((m.break_ratio - 0.2).abs() < 1e-12);
    assert!((p.vacuum_force() - 70_000.0 * PI * 0.015 * 0.015).abs() < 1e-12);
}

#[test]
fn tilt_sweep_fails_beyond_some_angle() {
    // Tilting the cup against a flat plane: small tilts seal, and past one
    // angle the seal fails and stays failed.
    let p = params(32, 0.01, 1.0, 0.1);
    let plane = plane_patch(0.3, 2);
    let verdicts: Vec<bool> = (0..=60)
        .map(|deg| {
            let c = VacuumGraspCandidate::new(Vec3::zeros(), -Vec3::z());
            let tf = RigidTransform::from_axis_angle(&Vec3::y(), (deg as f64).to_radians(), Vec3::zeros());
            evaluate_seal(&plane, &p, &c.transformed(&tf)).unwrap().success
        })
        .collect();
    let first_fail = verdicts.iter().position(|&v| !v).expect("some tilt breaks the seal");
    assert!(first_fail > 0);
    assert!(verdicts[first_fail..].iter().all(|&v| !v));
}

#[test]
fn small_spheres_fail_large_spheres_seal() {
    let p = params(32, 0.01, 1.0, 0.05);
    let top = |r: f64| {
        let s = icosphere(r, 4);
        evaluate_seal(&s, &p, &VacuumGraspCandidate::new(Vec3::new(0.0, 0.0, r), -Vec3::z())).unwrap()
    };
    assert!(top(0.5).success);
    let tiny = top(0.008);
    assert!(!tiny.success);
    assert_ne!(tiny.failure_reason, FailureReason::None);
}

#[test]
fn batch_schedules_agree() {
    let b = box_mesh(Vec3::new(0.1, 0.06, 0.04));
    let p = params(16, 0.01, 2.0, 0.15);
    let seq = sample_vacuum_candidates_with(&b, &p, 200, 4, Parallelism::Sequential).unwrap();
    let par = sample_vacuum_candidates_with(&b, &p, 200, 4, Parallelism::Parallel).unwrap();
    // Debug text, since failed evaluations carry NaN compressions.
    assert_eq!(format!("{seq:?}"), format!("{par:?}"));
    let cands: Vec<_> = seq.iter().map(|(c, _)| *c).collect();
    let again = evaluate_batch(&b, &p, &cands, Parallelism::Parallel).unwrap();
    let evals: Vec<_> = seq.into_iter().map(|(_, e)| e).collect();
    assert_eq!(format!("{again:?}"), format!("{evals:?}"));
}

#[test]
fn invalid_parameters_are_rejected() {
    let mut p = params(16, 0.01, 1.0, 0.0);
    p.elastic_stiffness = 0.0;
    let c = VacuumGraspCandidate::new(Vec3::zeros(), -Vec3::z());
    assert!(evaluate_seal(&plane_patch(0.1, 1), &p, &c).is_err());
    let mut p = params(16, 0.01, 1.0, 0.0);
    p.mass_point_count = 2;
    assert!(p.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn equilibrium_and_vacuum_identity_on_tilted_planes(
        n in prop::sample::select(vec![8usize, 12, 16, 32, 64]),
        radius in 0.004..0.03f64,
        ring_ratio in 0.01..100.0f64,
        break_ratio in 0.0..0.5f64,
        tilt in 0.0..0.7f64,
        azimuth in 0.0..(2.0 * PI),
        ripple in 0..4usize,
    ) {
        let p = params(n, radius, ring_ratio, break_ratio);
        let axis = Vec3::new(azimuth.cos(), azimuth.sin(), 0.0);
        // A coarse or finely triangulated plane, tilted, hit from straight above.
        let mesh = plane_patch(0.4, 1 + ripple * 3)
            .transformed(&RigidTransform::from_axis_angle(&axis, tilt, Vec3::zeros()));
        let c = VacuumGraspCandidate::new(Vec3::zeros(), -Vec3::z());
        let e = evaluate_seal(&mesh, &p, &c).unwrap();
        let f_p = p.vacuum_force();
        if e.points.is_empty() {
            // Only a rim spread deeper than the projection limit can fail to
            // project: rays run too long, or start behind the raised side.
            prop_assert!(matches!(e.failure_reason, FailureReason::DepthExceeded | FailureReason::RayMiss));
            prop_assert!(2.0 * radius * tilt.tan() > p.max_projection_depth - 1e-9);
            return Ok(());
        }
        prop_assert!(e.equilibrium_residual() <= 1e-6 * f_p);
        let axial: f64 = e.points.iter().map(|q| q.elastic_force.dot(&c.approach)).sum();
        prop_assert!((axial - f_p).abs() <= 1e-9 * f_p);
        prop_assert_eq!(e.success, e.offending.is_empty());
        prop_assert_eq!(e.success, e.failure_reason == FailureReason::None);
    }

    #[test]
    fn verdict_is_invariant_under_rigid_motion(
        ax in prop::array::uniform3(-1.0..1.0f64),
        angle in 0.0..PI,
        t in prop::array::uniform3(-0.2..0.2f64),
        px in -0.03..0.03f64,
        py in -0.03..0.03f64,
        tilt in 0.0..0.5f64,
    ) {
        prop_assume!(Vec3::from(ax).norm() > 1e-2);
        let tf = RigidTransform::from_axis_angle(&Vec3::from(ax), angle, Vec3::from(t));
        let body = icosphere(0.04, 3);
        let p = params(16, 0.01, 2.0, 0.15);
        let approach = Vec3::new(tilt.sin(), 0.0, -tilt.cos());
        let c = VacuumGraspCandidate::new(Vec3::new(px, py, 0.04), approach);
        let a = evaluate_seal(&body, &p, &c).unwrap();
        let b = evaluate_seal(&body.transformed(&tf), &p, &c.transformed(&tf)).unwrap();
        prop_assert_eq!(a.failure_reason, b.failure_reason);
        if !a.points.is_empty() {
            prop_assert!((a.max_liftoff() - b.max_liftoff()).abs() < 1e-6 * p.vacuum_force());
        }
    }

    #[test]
    fn flat_plane_always_seals(n in (4usize..40).prop_map(|k| 2 * k), radius in 0.003..0.05f64, ring_ratio in 0.01..100.0f64) {
        let p = params(n, radius, ring_ratio, 0.0);
        let e = evaluate_seal(&plane_patch(0.5, 3), &p, &VacuumGraspCandidate::new(Vec3::zeros(), -Vec3::z())).unwrap();
        prop_assert!(e.success);
        for q in &e.points {
            prop_assert!((q.contact_force - Vec3::z() * (p.vacuum_force() / n as f64)).norm() <= 1e-9 * p.vacuum_force());
        }
    }
}
