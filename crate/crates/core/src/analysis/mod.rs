//! Forward detector modelling, scalar extraction and the two inverse
//! problems (strength from width, `mu` from strength versus atom count).

mod coincidence;
mod fit;
mod jitter;
mod strength;
mod sweep;
mod width;

pub use coincidence::{
    car, car_estimate, car_from_counts, expected_counts, pair_rate, predicted_car, CarEstimate, CoincidenceWindows,
    PairRate,
};
pub use fit::{fit_mu, FitResult, StrengthPoint};
pub use jitter::{convolve_jitter, gaussian_kernel};
pub use strength::{extract_strength, ForwardModel, DEFAULT_MAX_STRENGTH};
pub use sweep::{temperature_sweep, ExperimentConfig, SweepFailure, SweepRow, SweepTable};
pub use width::fwhm;

use crate::error::{Error, Result};

/// Detector and binning model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionModel {
    /// Combined Gaussian timing jitter of the start-stop delay, FWHM in s.
    pub jitter_fwhm: f64,
    /// s
    pub bin_width: f64,
    pub efficiency_signal: f64,
    pub efficiency_idler: f64,
    pub windows: CoincidenceWindows,
}

impl Default for DetectionModel {
    fn default() -> Self {
        Self {
            jitter_fwhm: 100e-12,
            bin_width: 5e-12,
            efficiency_signal: 0.50,
            efficiency_idler: 0.70,
            windows: CoincidenceWindows::default(),
        }
    }
}

impl DetectionModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.jitter_fwhm >= 0.0 && self.jitter_fwhm.is_finite()) {
            return Err(Error::Config(format!(
                "detection.jitter_fwhm must be nonnegative, got {}",
                self.jitter_fwhm
            )));
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(Error::Config(format!(
                "detection.bin_width must be positive, got {}",
                self.bin_width
            )));
        }
        for (name, e) in [
            ("detection.efficiency_signal", self.efficiency_signal),
            ("detection.efficiency_idler", self.efficiency_idler),
        ] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {e}")));
            }
        }
        self.windows.validate()
    }

    pub fn pair_efficiency(&self) -> f64 {
        self.efficiency_signal * self.efficiency_idler
    }
}
