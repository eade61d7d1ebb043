//! Pump operating-point data: surge-distance physics, a synthetic
//! design-of-experiments generator, CSV I/O, and z-score scaling.
//!
//! Unit system (abstract but self-consistent): temperature in K, pressures in
//! bar, speed in rpm, power in kW, inlet flow in the units implied by the
//! calibration constant [`FLOW_COEFF_CONST`], surge distance in percent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod csv;
mod generator;
mod scaler;

pub use csv::{load_csv, save_csv, CSV_COLUMNS, CSV_HEADER};
pub use generator::{generate_synthetic, GeneratorConfig};
pub use scaler::Scaler;

/// Flow-coefficient calibration constant: φ = qin / (2.93e-3 · n_speed).
pub const FLOW_COEFF_CONST: f64 = 2.93e-3;

/// Flow coefficient at the surge line; SD measures relative distance from it.
pub const PHI_SURGE: f64 = 0.076;

/// Number of model input features (tin, pin, n_speed, delta_p, power).
pub const N_FEATURES: usize = 5;

/// One operating point of the first pump stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSample {
    /// Inlet temperature (K).
    pub tin: f64,
    /// Inlet pressure (bar).
    pub pin: f64,
    /// Rotational speed (rpm).
    pub n_speed: f64,
    /// Differential pressure Pin − Pout (bar).
    pub delta_p: f64,
    /// Consumed power (kW).
    pub power: f64,
    /// Inlet flow (latent in the physical plant; always recorded here).
    pub qin: f64,
    /// Surge distance (%), the regression target.
    pub sd: f64,
}

impl PumpSample {
    /// The five model inputs in canonical column order.
    pub fn features(&self) -> [f64; N_FEATURES] {
        [self.tin, self.pin, self.n_speed, self.delta_p, self.power]
    }
}

/// Flow coefficient φ = qin / (2.93e-3 · n_speed).
pub fn flow_coefficient(qin: f64, n_speed: f64) -> Result<f64> {
    if n_speed.is_nan() || n_speed <= 0.0 {
        return Err(Error::Domain(format!(
            "flow coefficient requires n_speed > 0, got {n_speed}"
        )));
    }
    Ok(qin / (FLOW_COEFF_CONST * n_speed))
}

/// Surge distance in percent: SD = 100 · (φ − 0.076) / 0.076.
///
/// Zero exactly on the surge line, −100 at zero flow, positive in normal
/// operation; strictly increasing in `qin` at fixed speed.
pub fn surge_distance(qin: f64, n_speed: f64) -> Result<f64> {
    let phi = flow_coefficient(qin, n_speed)?;
    Ok(100.0 * (phi - PHI_SURGE) / PHI_SURGE)
}
