//! Decode-phase carbon accounting and the environmental efficiency score.
//!
//! `X = 1000 · CE / N_T` is the emission per thousand generated tokens and
//! `EES = 1 / (1 + X / X_ref)` maps it into `(0, 1]`.

use serde::{Deserialize, Serialize};

/// kgCO2e per 1000 generated tokens used as the EES reference point.
pub const DEFAULT_X_REF: f64 = 0.001719;

/// kgCO2e per kWh assumed when no grid intensity is configured.
pub const DEFAULT_GRID_INTENSITY: f64 = 0.475;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EmissionMode {
    /// Use recorded `ce_kg`, or recorded energy times grid intensity.
    #[default]
    Measured,
    /// Emissions proportional to generated tokens.
    TokenFactor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmissionConfig {
    pub mode: EmissionMode,
    /// kgCO2e per 1000 generated tokens.
    pub token_factor: f64,
    /// kgCO2e per kWh.
    pub grid_intensity: f64,
    /// kgCO2e per 1000 generated tokens.
    pub x_ref: f64,
}

impl Default for EmissionConfig {
    fn default() -> Self {
        Self {
            mode: EmissionMode::Measured,
            token_factor: DEFAULT_X_REF,
            grid_intensity: DEFAULT_GRID_INTENSITY,
            x_ref: DEFAULT_X_REF,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SustainabilityError {
    #[error("{field} must be a positive finite number, got {value}")]
    InvalidConfig { field: &'static str, value: f64 },
    #[error("measured mode needs ce_kg or energy_kwh")]
    MissingMeasurement,
    #[error("carbon intensity is undefined for zero generated tokens")]
    ZeroTokens,
}

impl EmissionConfig {
    pub fn token_factor(factor: f64) -> Self {
        Self {
            mode: EmissionMode::TokenFactor,
            token_factor: factor,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SustainabilityError> {
        for (field, value) in [
            ("token_factor", self.token_factor),
            ("grid_intensity", self.grid_intensity),
            ("x_ref", self.x_ref),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(SustainabilityError::InvalidConfig { field, value });
            }
        }
        Ok(())
    }
}

/// Measurements taken over the decode phase of one generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct DecodeMeasurement {
    pub n_tokens: u64,
    /// Wall-clock seconds; reported but never scored.
    pub duration_s: f64,
    pub energy_kwh: Option<f64>,
    pub ce_kg: Option<f64>,
}

/// Emissions in kgCO2e for one generation.
pub fn estimate_ce(m: &DecodeMeasurement, cfg: &EmissionConfig) -> Result<f64, SustainabilityError> {
    match cfg.mode {
        EmissionMode::Measured => match (m.ce_kg, m.energy_kwh) {
            (Some(ce), _) => Ok(ce),
            (None, Some(kwh)) => Ok(kwh * cfg.grid_intensity),
            (None, None) => Err(SustainabilityError::MissingMeasurement),
        },
        EmissionMode::TokenFactor => Ok(m.n_tokens as f64 / 1000.0 * cfg.token_factor),
    }
}

/// kgCO2e per 1000 tokens. `n_tokens` is real-valued so aggregate means can
/// be fed through as well as per-record counts.
pub fn carbon_intensity(ce_kg: f64, n_tokens: f64) -> Result<f64, SustainabilityError> {
    if n_tokens <= 0.0 {
        return Err(SustainabilityError::ZeroTokens);
    }
    Ok(1000.0 * ce_kg / n_tokens)
}

pub fn ees(x: f64, x_ref: f64) -> f64 {
    1.0 / (1.0 + x / x_ref)
}
