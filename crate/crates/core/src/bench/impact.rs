use serde::Serialize;

use crate::error::{Error, Result};

/// Annual transportation fuel baseline in EJ. Chosen so that an 8.2 %
/// improvement saves 2.62 EJ (2.62 / 0.082 ≈ 31.95).
pub const DEFAULT_BASELINE_EJ: f64 = 31.95;
pub const DEFAULT_IMPROVEMENT: f64 = 0.082;
/// EPA emission factor for motor fuel, grams of CO₂ per MJ.
pub const DEFAULT_EMISSION_FACTOR_G_PER_MJ: f64 = 74.14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ImpactProjection {
    pub fuel_saved_ej: f64,
    pub co2_avoided_t: f64,
}

/// Fuel saved is `baseline · improvement`; CO₂ avoided converts EJ to MJ
/// (×10¹²) and grams to tonnes (÷10⁶).
pub fn impact_projection(
    baseline_ej: f64,
    improvement: f64,
    emission_factor_g_per_mj: f64,
) -> Result<ImpactProjection> {
    for (name, v) in [
        ("baseline", baseline_ej),
        ("improvement", improvement),
        ("emission factor", emission_factor_g_per_mj),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    if improvement >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "improvement is a fraction below 1, got {improvement}"
        )));
    }
    let fuel_saved_ej = baseline_ej * improvement;
    let co2_avoided_t = fuel_saved_ej * 1e12 * emission_factor_g_per_mj / 1e6;
    Ok(ImpactProjection {
        fuel_saved_ej,
        co2_avoided_t,
    })
}
