//! Biphoton amplitude and Doppler-integrated cross-correlation.
//!
//! For atoms of velocity `v` the two-photon amplitude is
//!
//! ```text
//! A(v) = C / ({2Γ_I + 4i(δ_p - k_p v)} {Γ_S + i(k_c - k_p) v} + Ω_C²)
//! ```
//!
//! and the heralded idler decays at the collective rate `Γ_SR`. The
//! cross-correlation is the squared modulus of the Maxwell-Boltzmann average
//! of `A(v) exp(i k_1 v τ)`, times `exp(-Γ_SR τ)` and the causal step.
//!
//! The velocity integral does not depend on `Γ_SR`, so [`DopplerKernel`]
//! evaluates it once per (drive, speed, grid) and every decay rate after that
//! is a pointwise multiply.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::atomvapor::{density_from_distance, SpeciesConstants, ThermalState};
use crate::error::{ensure_nonnegative, ensure_positive, Error, Result};
use crate::par;
use crate::quadrature::QuadratureSpec;
use crate::units;
use crate::waveform::{trapezoid, TauGrid, Waveform, WaveformKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    /// Pump detuning, rad/s.
    pub delta_p: f64,
    /// Coupling detuning, rad/s.
    pub delta_c: f64,
    /// Coupling Rabi frequency, rad/s.
    pub omega_c: f64,
    /// Pump wavenumber, rad/m.
    pub k_p: f64,
    /// Coupling wavenumber, rad/m.
    pub k_c: f64,
    /// Idler wavenumber in the dephasing phase, rad/m. Defaults to `k_p`.
    pub k_1: f64,
    /// Amplitude prefactor `C`; in [`brightness`] it plays the role of
    /// `c0` in `C = c0 * N`.
    pub amplitude_scale: f64,
}

impl DriveParams {
    /// δ_p = +2π·1.31 GHz, δ_c = -2π·1.35 GHz, Ω_C = 2π·100 MHz.
    ///
    /// Ω_C is a free parameter: nothing in the measured widths pins it down.
    pub fn cesium_default(species: &SpeciesConstants) -> Self {
        let k_p = units::wavenumber(species.lambda_idler);
        Self {
            delta_p: units::ghz_to_rad_per_s(1.31),
            delta_c: units::ghz_to_rad_per_s(-1.35),
            omega_c: units::mhz_to_rad_per_s(100.0),
            k_p,
            k_c: units::wavenumber(species.lambda_signal),
            k_1: k_p,
            amplitude_scale: 1.0,
        }
    }

    pub fn delta_two(&self) -> f64 {
        self.delta_p + self.delta_c
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("drive.k_p", self.k_p),
            ("drive.k_c", self.k_c),
            ("drive.k_1", self.k_1),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.omega_c >= 0.0 && self.omega_c.is_finite()) {
            return Err(Error::Config(format!(
                "drive.omega_c must be nonnegative, got {}",
                self.omega_c
            )));
        }
        if !(self.delta_p.is_finite() && self.delta_c.is_finite() && self.amplitude_scale.is_finite()) {
            return Err(Error::Config(
                "drive detunings and amplitude_scale must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Decay rates in rad/s: intrinsic idler, upper transition, and the
/// collective idler rate actually used for the temporal decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionRates {
    pub gamma_idler: f64,
    pub gamma_signal: f64,
    pub gamma_sr: f64,
}

impl EmissionRates {
    pub fn with_strength(gamma_idler: f64, gamma_signal: f64, strength: f64) -> Self {
        Self {
            gamma_idler,
            gamma_signal,
            gamma_sr: gamma_idler * strength,
        }
    }

    pub fn strength(&self) -> f64 {
        self.gamma_sr / self.gamma_idler
    }

    /// Same rates with the collective enhancement switched off.
    pub fn doppler_only(&self) -> Self {
        Self {
            gamma_sr: self.gamma_idler,
            ..*self
        }
    }
}

/// `Γ_SR = Γ_I (1 + μ N)`.
pub fn superradiant_rate(atom_count: f64, mu: f64, gamma_idler: f64) -> Result<f64> {
    ensure_nonnegative("atom_count", atom_count)?;
    ensure_nonnegative("mu", mu)?;
    ensure_positive("gamma_idler", gamma_idler)?;
    Ok(gamma_idler * (1.0 + mu * atom_count))
}

/// `Γ_SR` written through the mean interatomic distance:
/// `Γ_I [1 + μ (V/λ³) ((9/5) r/λ)^-3]`.
pub fn superradiant_rate_from_distance(
    r_sr: f64,
    volume: f64,
    lambda_1: f64,
    mu: f64,
    gamma_idler: f64,
) -> Result<f64> {
    ensure_positive("r_sr", r_sr)?;
    ensure_positive("volume", volume)?;
    ensure_positive("lambda_1", lambda_1)?;
    ensure_positive("mu", mu)?;
    ensure_positive("gamma_idler", gamma_idler)?;
    let ratio = 9.0 / 5.0 * r_sr / lambda_1;
    Ok(gamma_idler * (1.0 + mu * volume / lambda_1.powi(3) * ratio.powi(-3)))
}

/// Atom count implied by a mean distance in a given volume.
pub fn atom_count_from_distance(r_sr: f64, volume: f64) -> Result<f64> {
    Ok(volume * density_from_distance(r_sr)?)
}

pub fn velocity_amplitude(v: f64, drive: &DriveParams, gamma_idler: f64, gamma_signal: f64) -> Complex64 {
    let first = Complex64::new(2.0 * gamma_idler, 4.0 * (drive.delta_p - drive.k_p * v));
    let second = Complex64::new(gamma_signal, (-drive.k_p + drive.k_c) * v);
    Complex64::new(drive.amplitude_scale, 0.0) / (first * second + drive.omega_c * drive.omega_c)
}

/// `Ψ_v(τ) = A(v) exp[(-Γ_SR/2 + i k_1 v) τ]` for `τ ≥ 0`.
pub fn biphoton_wavefunction(v: f64, tau: f64, drive: &DriveParams, rates: &EmissionRates) -> Result<Complex64> {
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!(
            "biphoton wavefunction needs tau >= 0, got {tau}"
        )));
    }
    let a = velocity_amplitude(v, drive, rates.gamma_idler, rates.gamma_signal);
    Ok(a * Complex64::new(-0.5 * rates.gamma_sr * tau, drive.k_1 * v * tau).exp())
}

/// One-dimensional Maxwell-Boltzmann density `exp(-v²/u²) / (√π u)`.
pub fn maxwell_boltzmann(v: f64, u: f64) -> f64 {
    (-(v / u) * (v / u)).exp() / (PI.sqrt() * u)
}

/// `|∫ f(v) A(v) exp(i k_1 v τ) dv|²` on a grid, with unit amplitude and
/// zero for `τ < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerKernel {
    grid: TauGrid,
    intensity: Vec<f64>,
}

impl DopplerKernel {
    pub fn compute(
        grid: TauGrid,
        drive: &DriveParams,
        gamma_idler: f64,
        gamma_signal: f64,
        u: f64,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        drive.validate()?;
        quad.validate()?;
        ensure_positive("most probable speed", u)?;
        ensure_positive("gamma_idler", gamma_idler)?;
        ensure_positive("gamma_signal", gamma_signal)?;
        let unit = DriveParams {
            amplitude_scale: 1.0,
            ..*drive
        };
        let coarse = velocity_integral(&grid, &unit, gamma_idler, gamma_signal, u, quad);
        if let Some(tol) = quad.convergence_tol {
            let fine = velocity_integral(&grid, &unit, gamma_idler, gamma_signal, u, &quad.refined());
            for (k, (a, b)) in coarse.iter().zip(&fine).enumerate() {
                let scale = a.abs().max(b.abs());
                if scale > 0.0 && (a - b).abs() > tol * scale {
                    return Err(Error::NotConverged {
                        tau: grid.tau(k),
                        coarse: *a,
                        refined: *b,
                    });
                }
            }
        }
        Ok(Self {
            grid,
            intensity: coarse,
        })
    }

    pub fn grid(&self) -> TauGrid {
        self.grid
    }

    /// `g2(τ)` for collective rate `gamma_sr` and amplitude prefactor `c`.
    pub fn g2(&self, gamma_sr: f64, c: f64) -> Waveform {
        let c2 = c * c;
        let values = self
            .grid
            .taus()
            .zip(&self.intensity)
            .map(|(tau, &i)| {
                if tau < 0.0 {
                    0.0
                } else {
                    c2 * i * (-gamma_sr * tau).exp()
                }
            })
            .collect();
        Waveform {
            grid: self.grid,
            values,
            kind: WaveformKind::G2Unnormalized,
        }
    }

    /// Normalized `P1(τ)`. Never touches the amplitude prefactor, so it is
    /// bit-for-bit independent of it.
    pub fn p1(&self, gamma_sr: f64) -> Result<Waveform> {
        normalized_waveform(&self.g2(gamma_sr, 1.0))
    }
}

fn velocity_integral(
    grid: &TauGrid,
    drive: &DriveParams,
    gamma_idler: f64,
    gamma_signal: f64,
    u: f64,
    quad: &QuadratureSpec,
) -> Vec<f64> {
    let nodes: Vec<(f64, Complex64)> = quad
        .rule(quad.cutoff_sigmas * u)
        .into_iter()
        .map(|(v, w)| {
            (
                v,
                w * maxwell_boltzmann(v, u) * velocity_amplitude(v, drive, gamma_idler, gamma_signal),
            )
        })
        .collect();
    par::map_range(grid.len, |k| {
        let tau = grid.tau(k);
        if tau < 0.0 {
            return 0.0;
        }
        let phase = drive.k_1 * tau;
        let sum: Complex64 = nodes.iter().map(|&(v, c)| c * Complex64::cis(phase * v)).sum();
        sum.norm_sqr()
    })
}

pub fn g2_cross_correlation(
    grid: TauGrid,
    drive: &DriveParams,
    rates: &EmissionRates,
    u: f64,
    quad: &QuadratureSpec,
) -> Result<Waveform> {
    ensure_positive("gamma_sr", rates.gamma_sr)?;
    let kernel = DopplerKernel::compute(grid, drive, rates.gamma_idler, rates.gamma_signal, u, quad)?;
    Ok(kernel.g2(rates.gamma_sr, drive.amplitude_scale))
}

pub fn normalized_waveform(g2: &Waveform) -> Result<Waveform> {
    let area = g2.integral();
    if !(area > 0.0 && area.is_finite()) {
        return Err(Error::Degenerate(format!(
            "waveform integral must be positive, got {area}"
        )));
    }
    Ok(Waveform {
        grid: g2.grid,
        values: g2.values.iter().map(|v| v / area).collect(),
        kind: WaveformKind::P1Normalized,
    })
}

/// The reference model with thermal dephasing only: `Γ_SR` forced to `Γ_I`.
pub fn doppler_only_waveform(
    grid: TauGrid,
    drive: &DriveParams,
    rates: &EmissionRates,
    u: f64,
    quad: &QuadratureSpec,
) -> Result<Waveform> {
    g2_cross_correlation(grid, drive, &rates.doppler_only(), u, quad)
}

/// Unnormalized idler brightness `∫ g2 dτ` with `C = c0 N`, where
/// `c0 = drive.amplitude_scale` and `Γ_SR` follows the atom count.
pub fn brightness(
    state: &ThermalState,
    drive: &DriveParams,
    species: &SpeciesConstants,
    mu: f64,
    grid: TauGrid,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if state.atom_count == 0.0 {
        return Ok(0.0);
    }
    let gamma_sr = superradiant_rate(state.atom_count, mu, species.gamma_idler)?;
    let kernel = DopplerKernel::compute(grid, drive, species.gamma_idler, species.gamma_signal, state.u, quad)?;
    Ok(brightness_from_kernel(
        &kernel,
        gamma_sr,
        drive.amplitude_scale * state.atom_count,
    ))
}

pub(crate) fn brightness_from_kernel(kernel: &DopplerKernel, gamma_sr: f64, c: f64) -> f64 {
    let g2 = kernel.g2(gamma_sr, c);
    trapezoid(&g2.values, g2.grid.step)
}
