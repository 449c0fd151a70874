//! Gravity wrench scores.
//!
//! Both scores compare the static torque that gravity exerts about the grasp
//! against what the contact can resist: a vacuum cup resists bending with its
//! pressure force acting over its radius and torsion through rim friction; a
//! parallel-jaw grasp resists rotation about its closing axis through two
//! soft-finger contacts.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Vec3, ORTHONORMAL_TOLERANCE};
use crate::pj::PjGraspCandidate;
use crate::suction::{SuctionCupParams, VacuumGraspCandidate};

pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WrenchError {
    #[error("object mass must be positive, got {0}")]
    NonPositiveMass(f64),
    #[error("contact frame is not orthonormal")]
    NotOrthonormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WrenchConfig {
    /// Gravitational acceleration vector, m/s².
    pub gravity: [f64; 3],
    /// Rim friction coefficient used for the cup's torsion limit.
    pub cup_friction: f64,
    /// Squeeze force of each jaw, N.
    pub squeeze_force: f64,
    /// Soft-finger torsional coefficient, m.
    pub torsional_coefficient: f64,
}

impl Default for WrenchConfig {
    fn default() -> Self {
        Self {
            gravity: [0.0, 0.0, -STANDARD_GRAVITY],
            cup_friction: 0.5,
            squeeze_force: 40.0,
            torsional_coefficient: 0.005,
        }
    }
}

impl WrenchConfig {
    pub fn gravity(&self) -> Vec3 {
        Vec3::from(self.gravity)
    }

    pub fn with_gravity(self, gravity: Vec3) -> Self {
        Self {
            gravity: gravity.into(),
            ..self
        }
    }
}

/// Torques are magnitudes per axis of the contact frame, in N·m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WrenchScore {
    pub s: f64,
    pub torque: [f64; 3],
    pub limits: [f64; 3],
}

impl WrenchScore {
    fn from_axes(torque: [f64; 3], limits: [f64; 3]) -> Self {
        let s = torque
            .iter()
            .zip(&limits)
            .map(|(t, l)| axis_score(*t, *l))
            .fold(1.0, f64::min);
        Self { s, torque, limits }
    }
}

fn axis_score(torque: f64, limit: f64) -> f64 {
    if torque == 0.0 {
        return 1.0;
    }
    if limit <= 0.0 {
        return 0.0;
    }
    (1.0 - torque / limit).clamp(0.0, 1.0)
}

/// Columns `(t1, t2, v)`: the rim tangents and the approach direction.
pub fn contact_frame(candidate: &VacuumGraspCandidate) -> Matrix3<f64> {
    let (t1, t2) = candidate.rim_basis();
    Matrix3::from_columns(&[t1, t2, candidate.approach])
}

fn check_mass(mass: f64) -> Result<(), WrenchError> {
    if mass > 0.0 && mass.is_finite() {
        Ok(())
    } else {
        Err(WrenchError::NonPositiveMass(mass))
    }
}

/// Gravity torque about the contact against the cup's bending and torsion
/// limits, `F_p·r` and `μ·F_p·r`.
pub fn vacuum_wrench_score(
    contact: &Vec3,
    frame: &Matrix3<f64>,
    com: &Vec3,
    mass: f64,
    cup: &SuctionCupParams,
    config: &WrenchConfig,
) -> Result<WrenchScore, WrenchError> {
    check_mass(mass)?;
    let err = (frame.transpose() * frame - Matrix3::identity()).abs().max();
    if !(err <= ORTHONORMAL_TOLERANCE) {
        return Err(WrenchError::NotOrthonormal);
    }
    let tau = (com - contact).cross(&(config.gravity() * mass));
    let local = frame.transpose() * tau;
    let bending = cup.vacuum_force() * cup.radius;
    Ok(WrenchScore::from_axes(
        [local.x.abs(), local.y.abs(), local.z.abs()],
        [bending, bending, config.cup_friction * bending],
    ))
}

/// Convenience wrapper taking the frame from the candidate itself.
pub fn vacuum_candidate_score(
    candidate: &VacuumGraspCandidate,
    com: &Vec3,
    mass: f64,
    cup: &SuctionCupParams,
    config: &WrenchConfig,
) -> Result<WrenchScore, WrenchError> {
    vacuum_wrench_score(&candidate.contact, &contact_frame(candidate), com, mass, cup, config)
}

/// Gravity torque about the closing axis through the jaw midpoint against
/// the torsional friction of two soft fingers, `2·γ·f_n`.
///
/// Only the closing-axis component is scored; the other two torque axes are
/// carried by the jaws' normal forces.
pub fn soft_finger_score(
    grasp: &PjGraspCandidate,
    com: &Vec3,
    mass: f64,
    config: &WrenchConfig,
) -> Result<WrenchScore, WrenchError> {
    check_mass(mass)?;
    let tau = (com - grasp.midpoint()).cross(&(config.gravity() * mass));
    let x = grasp.closing.normalize();
    let about = tau.dot(&x).abs();
    let limit = 2.0 * config.torsional_coefficient * config.squeeze_force;
    Ok(WrenchScore::from_axes([about, 0.0, 0.0], [limit, limit, limit]))
}
