use crate::atomvapor::SpeciesConstants;
use crate::error::{ensure_positive, Error, Result};
use crate::kernel::{DopplerKernel, DriveParams};
use crate::quadrature::QuadratureSpec;
use crate::waveform::{TauGrid, Waveform};

use super::{convolve_jitter, fwhm, DetectionModel};

/// Upper end of the strength bracket searched by [`extract_strength`].
pub const DEFAULT_MAX_STRENGTH: f64 = 1e4;

/// Width of the jitter-convolved `P1` as a function of superradiance
/// strength `Γ_SR / Γ_I`, for fixed drive and thermal speed.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    kernel: DopplerKernel,
    gamma_idler: f64,
    jitter_fwhm: f64,
    max_strength: f64,
}

impl ForwardModel {
    pub fn new(
        grid: TauGrid,
        drive: &DriveParams,
        species: &SpeciesConstants,
        u: f64,
        detection: &DetectionModel,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        let kernel = DopplerKernel::compute(grid, drive, species.gamma_idler, species.gamma_signal, u, quad)?;
        Ok(Self::from_kernel(kernel, species.gamma_idler, detection.jitter_fwhm))
    }

    pub fn from_kernel(kernel: DopplerKernel, gamma_idler: f64, jitter_fwhm: f64) -> Self {
        Self {
            kernel,
            gamma_idler,
            jitter_fwhm,
            max_strength: DEFAULT_MAX_STRENGTH,
        }
    }

    pub fn with_max_strength(mut self, max_strength: f64) -> Self {
        self.max_strength = max_strength;
        self
    }

    pub fn kernel(&self) -> &DopplerKernel {
        &self.kernel
    }

    pub fn gamma_idler(&self) -> f64 {
        self.gamma_idler
    }

    pub fn jitter_fwhm(&self) -> f64 {
        self.jitter_fwhm
    }

    pub fn p1(&self, strength: f64) -> Result<Waveform> {
        ensure_positive("strength", strength)?;
        self.kernel.p1(strength * self.gamma_idler)
    }

    pub fn convolved_p1(&self, strength: f64) -> Result<Waveform> {
        convolve_jitter(&self.p1(strength)?, self.jitter_fwhm)
    }

    /// FWHM before the detector.
    pub fn intrinsic_width(&self, strength: f64) -> Result<f64> {
        fwhm(&self.p1(strength)?)
    }

    /// FWHM as measured, after jitter convolution.
    pub fn width(&self, strength: f64) -> Result<f64> {
        fwhm(&self.convolved_p1(strength)?)
    }

    /// The strength `s` with `width(s) = measured`, by bisection in `ln s` on
    /// `[1, max_strength]`.
    pub fn invert(&self, measured: f64) -> Result<f64> {
        ensure_positive("measured width", measured)?;
        let w_lo = self.width(1.0)?;
        let w_hi = self.width(self.max_strength)?;
        let floor = w_hi.max(self.jitter_fwhm);
        if measured > w_lo || measured < floor {
            return Err(Error::WidthOutOfRange {
                width: measured,
                min: floor,
                max: w_lo,
            });
        }
        if measured == w_lo {
            return Ok(1.0);
        }
        let (mut lo, mut hi) = (0.0f64, self.max_strength.ln());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.width(mid.exp())? > measured {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 {
                break;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }
}

/// Superradiance strength reproducing a measured (jitter-included) width.
pub fn extract_strength(
    measured_fwhm: f64,
    grid: TauGrid,
    drive: &DriveParams,
    species: &SpeciesConstants,
    u: f64,
    detection: &DetectionModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    ForwardModel::new(grid, drive, species, u, detection, quad)?.invert(measured_fwhm)
}
