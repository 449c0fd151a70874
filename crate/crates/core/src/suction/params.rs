use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SuctionError;

/// Flat-surface compression Δl_max as a fraction of the cup radius used when
/// deriving spring constants from the dimensionless model. Keeping it fixed
/// makes Δl_max independent of the mass-point count.
pub const NOMINAL_COMPRESSION_RATIO: f64 = 0.25;

/// Physical parameters of the spring-mass suction cup, SI units.
///
/// `elastic_stiffness` and `ring_stiffness` are per spring; `break_threshold`
/// is the per-mass-point liftoff force the seal tolerates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuctionCupParams {
    /// m
    pub radius: f64,
    pub mass_point_count: usize,
    /// Pa
    pub pressure_difference: f64,
    /// N/m
    pub elastic_stiffness: f64,
    /// N/m
    pub ring_stiffness: f64,
    /// N
    pub break_threshold: f64,
    /// m
    pub max_projection_depth: f64,
    /// Use face normals instead of interpolated normals for the liftoff test.
    #[serde(default)]
    pub flat_normals: bool,
}

/// The geometric and pneumatic part of a cup, which is never calibrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CupGeometry {
    pub radius: f64,
    pub mass_point_count: usize,
    pub pressure_difference: f64,
    pub max_projection_depth: f64,
}

impl Default for CupGeometry {
    fn default() -> Self {
        Self {
            radius: 0.01,
            mass_point_count: 32,
            pressure_difference: 70_000.0,
            max_projection_depth: 0.015,
        }
    }
}

/// The two calibratable, dimensionless seal-model parameters.
///
/// * `ring_ratio`: hoop stiffness of the whole ring over the axial stiffness
///   of the whole cup, `(k_r / n) / (n · k_e)`.
/// * `break_ratio`: tolerated liftoff force per mass point over the nominal
///   per-point vacuum force, `ε_break · n / F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SealModel {
    pub ring_ratio: f64,
    pub break_ratio: f64,
}

impl Default for SealModel {
    fn default() -> Self {
        Self {
            ring_ratio: 1.0,
            break_ratio: 0.0,
        }
    }
}

impl Default for SuctionCupParams {
    fn default() -> Self {
        Self::from_model(&CupGeometry::default(), &SealModel::default())
    }
}

impl SuctionCupParams {
    /// Derives per-spring constants so that force ratios do not depend on
    /// the number of mass points.
    pub fn from_model(geometry: &CupGeometry, model: &SealModel) -> Self {
        let n = geometry.mass_point_count as f64;
        let f_p = geometry.pressure_difference * PI * geometry.radius * geometry.radius;
        let k_e = f_p / (n * NOMINAL_COMPRESSION_RATIO * geometry.radius);
        let k_r = model.ring_ratio * k_e * n * n;
        Self {
            radius: geometry.radius,
            mass_point_count: geometry.mass_point_count,
            pressure_difference: geometry.pressure_difference,
            elastic_stiffness: k_e,
            ring_stiffness: k_r,
            break_threshold: model.break_ratio * f_p / n,
            max_projection_depth: geometry.max_projection_depth,
            flat_normals: false,
        }
    }

    pub fn geometry(&self) -> CupGeometry {
        CupGeometry {
            radius: self.radius,
            mass_point_count: self.mass_point_count,
            pressure_difference: self.pressure_difference,
            max_projection_depth: self.max_projection_depth,
        }
    }

    /// Inverse of [`from_model`](Self::from_model) for the two free ratios.
    pub fn model(&self) -> SealModel {
        let n = self.mass_point_count as f64;
        SealModel {
            ring_ratio: self.ring_stiffness / (self.elastic_stiffness * n * n),
            break_ratio: self.break_threshold * n / self.vacuum_force(),
        }
    }

    /// `F_p = Δp·π·r²`.
    pub fn vacuum_force(&self) -> f64 {
        self.pressure_difference * PI * self.radius * self.radius
    }

    /// Rest length of one ring spring, the chord `2r·sin(π/n)`.
    pub fn ring_rest_length(&self) -> f64 {
        2.0 * self.radius * (PI / self.mass_point_count as f64).sin()
    }

    pub fn validate(&self) -> Result<(), SuctionError> {
        let bad = |field: &'static str, reason: &'static str| Err(SuctionError::InvalidParams { field, reason });
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad("radius", "must be positive");
        }
        if self.mass_point_count < 8 || !self.mass_point_count.is_multiple_of(2) {
            return bad("mass_point_count", "must be even and at least 8");
        }
        if !(self.pressure_difference > 0.0 && self.pressure_difference.is_finite()) {
            return bad("pressure_difference", "must be positive");
        }
        if !(self.elastic_stiffness > 0.0 && self.elastic_stiffness.is_finite()) {
            return bad("elastic_stiffness", "must be positive");
        }
        if !(self.ring_stiffness > 0.0 && self.ring_stiffness.is_finite()) {
            return bad("ring_stiffness", "must be positive");
        }
        if self.break_threshold.is_nan() || self.break_threshold < 0.0 {
            return bad("break_threshold", "must be non-negative");
        }
        if !(self.max_projection_depth > 0.0 && self.max_projection_depth.is_finite()) {
            return bad("max_projection_depth", "must be positive");
        }
        Ok(())
    }

    /// Parses and validates a cup parameter file.
    pub fn from_json(text: &str) -> Result<Self, SuctionError> {
        let p: SuctionCupParams = serde_json::from_str(text).map_err(|e| SuctionError::Json(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }
}
