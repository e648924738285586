//! Thermal vapor thermodynamics: from cell temperature to the quantities that
//! set the collective emission, namely density, atom count in the pumped
//! volume, mean interatomic distance, most probable speed and optical depth.

use std::f64::consts::PI;

use crate::error::{ensure_nonnegative, ensure_positive, Error, Result};
use crate::units;

/// Prefactor relating the mean interatomic distance to `density^(-1/3)`.
pub const DISTANCE_PREFACTOR: f64 = 5.0 / 9.0;

/// Two-coefficient liquid-phase vapor-pressure relation
/// `log10(P / Pa) = a - b / T`, valid on `[t_min, t_max]` kelvin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaporPressureCoeffs {
    pub a: f64,
    pub b: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl VaporPressureCoeffs {
    /// Liquid cesium, least-squares fit of the two coefficients to the
    /// measured interatomic-distance column of the 21-95 °C calibration table
    /// (see [`REFERENCE_TABLE`]).
    pub const CESIUM: Self = Self {
        a: 9.227,
        b: 3849.7,
        t_min: 273.0,
        t_max: 500.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite()) || self.b <= 0.0 {
            return Err(Error::Config(format!(
                "vapor-pressure coefficients must be finite with b > 0 (a = {}, b = {})",
                self.a, self.b
            )));
        }
        if !(self.t_min > 0.0 && self.t_max > self.t_min) {
            return Err(Error::Config(format!(
                "invalid vapor-pressure validity band [{}, {}] K",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesConstants {
    /// kg
    pub atomic_mass: f64,
    /// Idler / pump transition wavelength, m.
    pub lambda_idler: f64,
    /// Signal / coupling transition wavelength, m.
    pub lambda_signal: f64,
    /// Intrinsic idler-mode decay rate, rad/s.
    pub gamma_idler: f64,
    /// Upper-transition decay rate, rad/s.
    pub gamma_signal: f64,
    pub vapor_pressure: VaporPressureCoeffs,
}

impl SpeciesConstants {
    /// 133Cs on the 6S1/2 - 6P3/2 - 6D5/2 cascade.
    ///
    /// The two decay rates are calibration parameters (2π × 5.2 MHz and
    /// 2π × 2.7 MHz from standard line data), not measured here.
    pub fn cesium() -> Self {
        Self {
            atomic_mass: units::CS133_MASS_U * units::ATOMIC_MASS_UNIT,
            lambda_idler: units::CS_D2_WAVELENGTH,
            lambda_signal: units::CS_6P_6D_WAVELENGTH,
            gamma_idler: units::mhz_to_rad_per_s(5.2),
            gamma_signal: units::mhz_to_rad_per_s(2.7),
            vapor_pressure: VaporPressureCoeffs::CESIUM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("species.atomic_mass", self.atomic_mass),
            ("species.lambda_idler", self.lambda_idler),
            ("species.lambda_signal", self.lambda_signal),
            ("species.gamma_idler", self.gamma_idler),
            ("species.gamma_signal", self.gamma_signal),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.lambda_idler >= self.lambda_signal {
            return Err(Error::Config(format!(
                "species.lambda_idler ({:e} m) must be shorter than species.lambda_signal ({:e} m)",
                self.lambda_idler, self.lambda_signal
            )));
        }
        self.vapor_pressure.validate()
    }
}

/// Cylindrical interaction region of the pump and coupling beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    /// m
    pub length: f64,
    /// 1/e² intensity radius, m.
    pub beam_waist: f64,
}

impl CellGeometry {
    /// 1 mm cell, 78 μm waist.
    pub fn thin_cell() -> Self {
        Self {
            length: 1e-3,
            beam_waist: 78e-6,
        }
    }

    pub fn interaction_volume(&self) -> f64 {
        PI * self.beam_waist * self.beam_waist * self.length
    }

    /// Lengths must be nonnegative; a zero length is a valid empty medium.
    pub fn validate(&self) -> Result<()> {
        if !(self.length >= 0.0 && self.length.is_finite()) {
            return Err(Error::Config(format!(
                "geometry.length must be nonnegative, got {}",
                self.length
            )));
        }
        if !(self.beam_waist > 0.0 && self.beam_waist.is_finite()) {
            return Err(Error::Config(format!(
                "geometry.beam_waist must be positive, got {}",
                self.beam_waist
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    /// K
    pub temperature: f64,
    /// Pa
    pub pressure: f64,
    /// m⁻³
    pub density: f64,
    /// Atoms inside the interaction volume.
    pub atom_count: f64,
    /// Mean interatomic distance, m.
    pub r_sr: f64,
    /// Most probable speed, m/s.
    pub u: f64,
    pub optical_depth: f64,
}

impl ThermalState {
    pub fn r_sr_over_lambda(&self, lambda_idler: f64) -> f64 {
        self.r_sr / lambda_idler
    }
}

pub fn vapor_pressure(temperature: f64, coeffs: &VaporPressureCoeffs) -> Result<f64> {
    if !(temperature >= coeffs.t_min && temperature <= coeffs.t_max) {
        return Err(Error::OutOfBand {
            temperature,
            min: coeffs.t_min,
            max: coeffs.t_max,
        });
    }
    Ok(10f64.powf(coeffs.a - coeffs.b / temperature))
}

/// Ideal-gas number density `P / (k_B T)`.
pub fn number_density(temperature: f64, pressure: f64) -> Result<f64> {
    ensure_positive("temperature", temperature)?;
    ensure_positive("pressure", pressure)?;
    Ok(pressure / (units::BOLTZMANN * temperature))
}

pub fn interatomic_distance(density: f64) -> Result<f64> {
    ensure_positive("density", density)?;
    Ok(DISTANCE_PREFACTOR * density.cbrt().recip())
}

pub fn density_from_distance(r_sr: f64) -> Result<f64> {
    ensure_positive("r_sr", r_sr)?;
    let x = DISTANCE_PREFACTOR / r_sr;
    Ok(x * x * x)
}

pub fn most_probable_speed(temperature: f64, mass: f64) -> Result<f64> {
    ensure_positive("temperature", temperature)?;
    ensure_positive("mass", mass)?;
    Ok((2.0 * units::BOLTZMANN * temperature / mass).sqrt())
}

/// Beer-Lambert optical depth `kappa * n * L` with a calibrated effective
/// cross-section `kappa` (m²). `None` means the coefficient was never
/// calibrated.
pub fn optical_depth(density: f64, length: f64, kappa: Option<f64>) -> Result<f64> {
    let kappa = kappa.ok_or_else(|| Error::Config("optical-depth coefficient kappa has not been calibrated".into()))?;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
    }
    ensure_nonnegative("density", density)?;
    ensure_nonnegative("length", length)?;
    Ok(kappa * density * length)
}

/// Single-point calibration: the `kappa` for which a cell of `length` at
/// `temperature` has optical depth `od`.
pub fn calibrate_kappa(temperature: f64, od: f64, length: f64, species: &SpeciesConstants) -> Result<f64> {
    ensure_positive("calibration optical depth", od)?;
    ensure_positive("calibration length", length)?;
    let p = vapor_pressure(temperature, &species.vapor_pressure)?;
    let n = number_density(temperature, p)?;
    Ok(od / (n * length))
}

pub fn thermal_state(
    temperature: f64,
    geometry: &CellGeometry,
    species: &SpeciesConstants,
    kappa: Option<f64>,
) -> Result<ThermalState> {
    geometry.validate()?;
    let pressure = vapor_pressure(temperature, &species.vapor_pressure)?;
    let density = number_density(temperature, pressure)?;
    Ok(ThermalState {
        temperature,
        pressure,
        density,
        atom_count: density * geometry.interaction_volume(),
        r_sr: interatomic_distance(density)?,
        u: most_probable_speed(temperature, species.atomic_mass)?,
        optical_depth: optical_depth(density, geometry.length, kappa)?,
    })
}

/// One row of the measured calibration table: cell temperature, optical
/// depth and mean-distance ratio, each with its quoted uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub temperature_c: f64,
    pub od: f64,
    pub od_err: f64,
    pub r_sr_over_lambda: f64,
    pub r_sr_over_lambda_err: f64,
}

const fn row(t: f64, od: f64, od_err: f64, r: f64, r_err: f64) -> ReferenceRow {
    ReferenceRow {
        temperature_c: t,
        od,
        od_err,
        r_sr_over_lambda: r,
        r_sr_over_lambda_err: r_err,
    }
}

/// Measured OD and r_SR/λ versus cell temperature for the 1 mm cell.
pub const REFERENCE_TABLE: [ReferenceRow; 9] = [
    row(21.0, 0.06, 0.01, 2.04, 0.15),
    row(29.0, 0.14, 0.01, 1.55, 0.05),
    row(37.0, 0.29, 0.02, 1.21, 0.04),
    row(49.0, 0.76, 0.06, 0.86, 0.03),
    row(57.0, 1.5, 0.1, 0.70, 0.03),
    row(65.0, 2.7, 0.2, 0.57, 0.02),
    row(76.0, 5.6, 0.4, 0.44, 0.01),
    row(87.0, 12.0, 1.0, 0.34, 0.01),
    row(95.0, 20.0, 2.0, 0.29, 0.01),
];

/// The row used to calibrate `kappa` (57 °C, OD 1.5).
pub const OD_CALIBRATION_ROW: usize = 4;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cs() -> SpeciesConstants {
        SpeciesConstants::cesium()
    }

    fn density_at(t: f64) -> f64 {
        let p = vapor_pressure(t, &VaporPressureCoeffs::CESIUM).unwrap();
        number_density(t, p).unwrap()
    }

    #[test]
    fn volume_is_cylinder() {
        let g = CellGeometry::thin_cell();
        assert_eq!(g.interaction_volume(), PI * 78e-6 * 78e-6 * 1e-3);
    }

    #[test]
    fn pressure_anchors() {
        // Oracle: density from the tabulated r_SR/λ inverted through the
        // distance relation, n = ((5/9) / (r λ))³.
        let lam = units::CS_D2_WAVELENGTH;
        let table_n = |r: f64| (DISTANCE_PREFACTOR / (r * lam)).powi(3);
        let n21 = density_at(294.15);
        let n95 = density_at(368.15);
        assert_relative_eq!(n21, 3.3e16, max_relative = 0.05);
        assert_relative_eq!(n21, table_n(2.04), max_relative = 0.05);
        assert_relative_eq!(n95, table_n(0.29), max_relative = 0.05);
    }

    #[test]
    fn pressure_monotone_and_band() {
        let c = VaporPressureCoeffs::CESIUM;
        let p1 = vapor_pressure(300.0, &c).unwrap();
        let p2 = vapor_pressure(301.0, &c).unwrap();
        assert!(p2 > p1 && p1 > 0.0);
        match vapor_pressure(200.0, &c) {
            Err(Error::OutOfBand { min, max, .. }) => {
                assert_eq!((min, max), (273.0, 500.0));
            }
            other => panic!("expected band error, got {other:?}"),
        }
        assert!(vapor_pressure(600.0, &c).is_err());
    }

    #[test]
    fn ideal_gas() {
        let n = number_density(300.0, units::BOLTZMANN * 300.0).unwrap();
        assert_relative_eq!(n, 1.0, max_relative = 1e-15);
        let a = number_density(350.0, 1e-3).unwrap();
        let b = number_density(350.0, 2e-3).unwrap();
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-15);
        assert!(number_density(0.0, 1.0).is_err());
    }

    #[test]
    fn distance_examples() {
        let r = interatomic_distance(1.137e19).unwrap();
        assert_relative_eq!(r, 2.47e-7, max_relative = 0.01);
        assert_relative_eq!(r / units::CS_D2_WAVELENGTH, 0.29, max_relative = 0.01);
        let half = interatomic_distance(8.0 * 1.137e19).unwrap();
        assert_relative_eq!(half, r / 2.0, max_relative = 1e-14);
        let n = density_from_distance(852e-9).unwrap();
        assert_relative_eq!(n, 2.77e17, max_relative = 0.005);
        assert!(interatomic_distance(0.0).is_err());
        assert!(density_from_distance(-1.0).is_err());
    }

    #[test]
    fn speed_examples() {
        let m = cs().atomic_mass;
        assert_relative_eq!(most_probable_speed(368.15, m).unwrap(), 214.6, max_relative = 5e-4);
        assert_relative_eq!(most_probable_speed(294.15, m).unwrap(), 191.8, max_relative = 5e-4);
        let u1 = most_probable_speed(300.0, m).unwrap();
        let u4 = most_probable_speed(1200.0, m).unwrap();
        assert_relative_eq!(u4, 2.0 * u1, max_relative = 1e-15);
    }

    #[test]
    fn optical_depth_cases() {
        assert_eq!(optical_depth(0.0, 1e-3, Some(1e-15)).unwrap(), 0.0);
        assert_eq!(optical_depth(1e18, 0.0, Some(1e-15)).unwrap(), 0.0);
        assert!(matches!(optical_depth(1e18, 1e-3, None), Err(Error::Config(_))));

        let species = cs();
        let cal = REFERENCE_TABLE[OD_CALIBRATION_ROW];
        let t_cal = units::celsius_to_kelvin(cal.temperature_c);
        let kappa = calibrate_kappa(t_cal, cal.od, 1e-3, &species).unwrap();
        let at_cal = optical_depth(density_at(t_cal), 1e-3, Some(kappa)).unwrap();
        assert_relative_eq!(at_cal, 1.5, max_relative = 1e-12);
        let od95 = optical_depth(density_at(368.15), 1e-3, Some(kappa)).unwrap();
        assert_relative_eq!(od95, 20.0, max_relative = 0.2);
    }

    #[test]
    fn thermal_state_examples() {
        let species = cs();
        let geom = CellGeometry::thin_cell();
        let s21 = thermal_state(294.15, &geom, &species, Some(1.85e-15)).unwrap();
        assert_relative_eq!(s21.r_sr_over_lambda(species.lambda_idler), 2.04, max_relative = 0.1);
        let s95 = thermal_state(368.15, &geom, &species, Some(1.85e-15)).unwrap();
        assert_relative_eq!(s95.atom_count, 2.17e8, max_relative = 0.05);
        assert_relative_eq!(
            s95.r_sr,
            DISTANCE_PREFACTOR * s95.density.powf(-1.0 / 3.0),
            max_relative = 1e-12
        );
        assert_eq!(s95.atom_count, s95.density * geom.interaction_volume());

        let flat = CellGeometry { length: 0.0, ..geom };
        let s0 = thermal_state(368.15, &flat, &species, Some(1.85e-15)).unwrap();
        assert_eq!(flat.interaction_volume(), 0.0);
        assert_eq!(s0.atom_count, 0.0);
        assert_eq!(s0.optical_depth, 0.0);
    }

    #[test]
    fn species_validation() {
        cs().validate().unwrap();
        let mut bad = cs();
        bad.lambda_signal = 800e-9;
        assert!(bad.validate().is_err());
        let mut bad = cs();
        bad.gamma_idler = 0.0;
        assert!(bad.validate().is_err());
    }

    proptest::proptest! {
        #[test]
        fn distance_round_trip(log_n in 14.0f64..20.0) {
            let n = 10f64.powf(log_n);
            let back = density_from_distance(interatomic_distance(n).unwrap()).unwrap();
            proptest::prop_assert!(((back - n) / n).abs() < 1e-12);
        }

        #[test]
        fn monotone_in_temperature(t1 in 280.0f64..450.0, dt in 0.5f64..40.0) {
            let species = cs();
            let geom = CellGeometry::thin_cell();
            let a = thermal_state(t1, &geom, &species, Some(1e-15)).unwrap();
            let b = thermal_state(t1 + dt, &geom, &species, Some(1e-15)).unwrap();
            proptest::prop_assert!(b.density > a.density);
            proptest::prop_assert!(b.atom_count > a.atom_count);
            proptest::prop_assert!(b.optical_depth > a.optical_depth);
            proptest::prop_assert!(b.r_sr < a.r_sr);
        }
    }
}
