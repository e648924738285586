//! Physical constants and the boundary unit table.
//!
//! Config files and CSV outputs use laboratory units (°C, GHz, MHz, mW, μm,
//! mm, nm, ns); the core works in SI. Every conversion goes through this
//! module.

use std::f64::consts::PI;

/// Boltzmann constant, J/K (exact, SI 2019).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Offset between the Celsius and Kelvin scales.
pub const CELSIUS_OFFSET: f64 = 273.15;

pub const CS133_MASS_U: f64 = 132.905_451_933;
/// Cs D2 line (6S1/2 - 6P3/2), vacuum wavelength.
pub const CS_D2_WAVELENGTH: f64 = 852.347e-9;
/// Cs 6P3/2 - 6D5/2, vacuum wavelength.
pub const CS_6P_6D_WAVELENGTH: f64 = 917.48e-9;

pub fn celsius_to_kelvin(t_c: f64) -> f64 {
    t_c + CELSIUS_OFFSET
}

pub fn kelvin_to_celsius(t_k: f64) -> f64 {
    t_k - CELSIUS_OFFSET
}

/// Cyclic frequency in GHz to angular frequency in rad/s.
pub fn ghz_to_rad_per_s(f: f64) -> f64 {
    2.0 * PI * f * 1e9
}

pub fn mhz_to_rad_per_s(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

pub fn rad_per_s_to_mhz(w: f64) -> f64 {
    w / (2.0 * PI * 1e6)
}

pub fn ns_to_s(t: f64) -> f64 {
    t / 1e9
}

pub fn s_to_ns(t: f64) -> f64 {
    t * 1e9
}

pub fn ps_to_s(t: f64) -> f64 {
    t / 1e12
}

pub fn um_to_m(x: f64) -> f64 {
    x / 1e6
}

pub fn mm_to_m(x: f64) -> f64 {
    x / 1e3
}

pub fn nm_to_m(x: f64) -> f64 {
    x / 1e9
}

pub fn wavenumber(wavelength: f64) -> f64 {
    2.0 * PI / wavelength
}

/// Standard-deviation of a Gaussian with the given FWHM.
pub fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}
