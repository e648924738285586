//! Run configuration: a sectioned TOML file in reporting units (°C, GHz,
//! MHz, ns, ps, µm, mm, nm). Every section and key is optional; missing values
//! take the defaults in `config/default.toml`. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use hssr_core::analysis::{CoincidenceWindows, DetectionModel, ExperimentConfig};
use hssr_core::atomvapor::{calibrate_kappa, CellGeometry, SpeciesConstants, VaporPressureCoeffs};
use hssr_core::kernel::DriveParams;
use hssr_core::mc::McRates;
use hssr_core::quadrature::{QuadratureSpec, Scheme};
use hssr_core::units;
use hssr_core::waveform::TauGrid;

use crate::error::{CliError, CliResult};

pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeciesSection {
    pub atomic_mass_u: f64,
    pub lambda_idler_nm: f64,
    pub lambda_signal_nm: f64,
    /// Γ / 2π
    pub gamma_idler_mhz: f64,
    pub gamma_signal_mhz: f64,
    /// `log10 P[Pa] = vapor_a - vapor_b / T[K]`
    pub vapor_a: f64,
    pub vapor_b: f64,
    pub vapor_t_min_k: f64,
    pub vapor_t_max_k: f64,
}

impl Default for SpeciesSection {
    fn default() -> Self {
        let c = VaporPressureCoeffs::CESIUM;
        Self {
            atomic_mass_u: units::CS133_MASS_U,
            lambda_idler_nm: 852.347,
            lambda_signal_nm: 917.48,
            gamma_idler_mhz: 5.2,
            gamma_signal_mhz: 2.7,
            vapor_a: c.a,
            vapor_b: c.b,
            vapor_t_min_k: c.t_min,
            vapor_t_max_k: c.t_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub length_mm: f64,
    pub beam_waist_um: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            length_mm: 1.0,
            beam_waist_um: 78.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    /// Frequencies are cyclic: rad/s = 2π × value.
    pub delta_p_ghz: f64,
    pub delta_c_ghz: f64,
    pub omega_c_mhz: f64,
    pub amplitude_scale: f64,
    /// Recorded with the outputs; the model takes Ω_C directly.
    pub pump_power_mw: f64,
    pub coupling_power_mw: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        Self {
            delta_p_ghz: 1.31,
            delta_c_ghz: -1.35,
            omega_c_mhz: 100.0,
            amplitude_scale: 1.0,
            pump_power_mw: 0.06,
            coupling_power_mw: 15.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionSection {
    pub jitter_fwhm_ps: f64,
    pub bin_width_ps: f64,
    pub efficiency_signal: f64,
    pub efficiency_idler: f64,
    /// Fixed coincidence half-width; otherwise `peak_fwhm_multiple` × FWHM.
    pub peak_half_width_ns: Option<f64>,
    pub peak_fwhm_multiple: f64,
    pub accidental_multiple: f64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        let d = DetectionModel::default();
        Self {
            jitter_fwhm_ps: 100.0,
            bin_width_ps: 5.0,
            efficiency_signal: d.efficiency_signal,
            efficiency_idler: d.efficiency_idler,
            peak_half_width_ns: None,
            peak_fwhm_multiple: d.windows.fwhm_multiple,
            accidental_multiple: d.windows.accidental_multiple,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    GaussLegendre,
    Trapezoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub scheme: SchemeName,
    pub node_count: usize,
    pub cutoff_sigmas: f64,
    pub convergence_tol: Option<f64>,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self {
            scheme: SchemeName::GaussLegendre,
            node_count: 4001,
            cutoff_sigmas: 4.0,
            convergence_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub mu: f64,
    /// Optical-depth coefficient in m²; calibrated from the two keys below
    /// when absent.
    pub kappa_m2: Option<f64>,
    pub calibration_temperature_c: f64,
    pub calibration_od: f64,
    pub tau_min_ns: f64,
    pub tau_max_ns: f64,
    pub tau_step_ps: f64,
    /// Upper end of the strength search in `fit-mu`.
    pub max_strength: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            mu: 1.15e-6,
            kappa_m2: None,
            calibration_temperature_c: 57.0,
            calibration_od: 1.5,
            tau_min_ns: -1.0,
            tau_max_ns: 5.0,
            tau_step_ps: 5.0,
            max_strength: hssr_core::analysis::DEFAULT_MAX_STRENGTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub temperatures_c: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            temperatures_c: vec![21.0, 29.0, 37.0, 49.0, 57.0, 65.0, 76.0, 87.0, 95.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventFormat {
    Text,
    Binary,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub signal_rate_hz: f64,
    pub heralding_probability: f64,
    pub background_idler_rate_hz: f64,
    pub jitter_fwhm_ps: f64,
    pub duration_s: f64,
    pub seed: u64,
    pub temperature_c: f64,
    pub event_format: EventFormat,
}

impl Default for McSection {
    fn default() -> Self {
        let r = McRates::operating_point();
        Self {
            signal_rate_hz: r.signal_rate,
            heralding_probability: r.heralding_probability,
            background_idler_rate_hz: r.background_idler_rate,
            jitter_fwhm_ps: 100.0,
            duration_s: 1.0,
            seed: 42,
            temperature_c: 95.0,
            event_format: EventFormat::Text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub species: SpeciesSection,
    pub geometry: GeometrySection,
    pub drive: DriveSection,
    pub detection: DetectionSection,
    pub quadrature: QuadratureSection,
    pub model: ModelSection,
    pub sweep: SweepSection,
    pub mc: McSection,
}

/// A parsed and validated configuration with its SI form resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub raw: RunConfig,
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Resolved> {
        if let Err(e) = text.parse::<toml::Table>() {
            return Err(CliError::Syntax(format!("config syntax error: {e}")));
        }
        let raw: RunConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("config error: {e}")))?;
        let experiment = raw.resolve()?;
        Ok(Resolved { raw, experiment })
    }

    pub fn load(path: Option<&Path>) -> CliResult<Resolved> {
        match path {
            None => Self::parse(DEFAULT_CONFIG),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::parse(&text)
            }
        }
    }

    fn resolve(&self) -> CliResult<ExperimentConfig> {
        let s = &self.species;
        let species = SpeciesConstants {
            atomic_mass: s.atomic_mass_u * units::ATOMIC_MASS_UNIT,
            lambda_idler: units::nm_to_m(s.lambda_idler_nm),
            lambda_signal: units::nm_to_m(s.lambda_signal_nm),
            gamma_idler: units::mhz_to_rad_per_s(s.gamma_idler_mhz),
            gamma_signal: units::mhz_to_rad_per_s(s.gamma_signal_mhz),
            vapor_pressure: VaporPressureCoeffs {
                a: s.vapor_a,
                b: s.vapor_b,
                t_min: s.vapor_t_min_k,
                t_max: s.vapor_t_max_k,
            },
        };
        species.validate()?;
        let geometry = CellGeometry {
            length: units::mm_to_m(self.geometry.length_mm),
            beam_waist: units::um_to_m(self.geometry.beam_waist_um),
        };
        geometry.validate()?;

        let d = &self.drive;
        for (name, v) in [
            ("drive.pump_power_mw", d.pump_power_mw),
            ("drive.coupling_power_mw", d.coupling_power_mw),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CliError::Validation(format!("{name} must be nonnegative, got {v}")));
            }
        }
        let drive = DriveParams {
            delta_p: units::ghz_to_rad_per_s(d.delta_p_ghz),
            delta_c: units::ghz_to_rad_per_s(d.delta_c_ghz),
            omega_c: units::mhz_to_rad_per_s(d.omega_c_mhz),
            amplitude_scale: d.amplitude_scale,
            ..DriveParams::cesium_default(&species)
        };

        let det = &self.detection;
        let detection = DetectionModel {
            jitter_fwhm: units::ps_to_s(det.jitter_fwhm_ps),
            bin_width: units::ps_to_s(det.bin_width_ps),
            efficiency_signal: det.efficiency_signal,
            efficiency_idler: det.efficiency_idler,
            windows: CoincidenceWindows {
                peak_half_width: det.peak_half_width_ns.map(units::ns_to_s),
                fwhm_multiple: det.peak_fwhm_multiple,
                accidental_multiple: det.accidental_multiple,
            },
        };

        let q = &self.quadrature;
        let quadrature = QuadratureSpec {
            cutoff_sigmas: q.cutoff_sigmas,
            node_count: q.node_count,
            scheme: match q.scheme {
                SchemeName::GaussLegendre => Scheme::GaussLegendre,
                SchemeName::Trapezoid => Scheme::Trapezoid,
            },
            convergence_tol: q.convergence_tol,
        };

        let m = &self.model;
        let grid = TauGrid::new(
            units::ns_to_s(m.tau_min_ns),
            units::ns_to_s(m.tau_max_ns),
            units::ps_to_s(m.tau_step_ps),
        )
        .map_err(|e| CliError::Validation(format!("model.tau_*: {e}")))?;
        if !(m.max_strength > 1.0 && m.max_strength.is_finite()) {
            return Err(CliError::Validation(format!(
                "model.max_strength must exceed 1, got {}",
                m.max_strength
            )));
        }
        let kappa = match m.kappa_m2 {
            Some(k) => Some(k),
            None => Some(
                calibrate_kappa(
                    units::celsius_to_kelvin(m.calibration_temperature_c),
                    m.calibration_od,
                    geometry.length,
                    &species,
                )
                .map_err(|e| CliError::Validation(format!("model.calibration_*: {e}")))?,
            ),
        };

        let mc = &self.mc;
        let rates = McRates {
            signal_rate: mc.signal_rate_hz,
            heralding_probability: mc.heralding_probability,
            background_idler_rate: mc.background_idler_rate_hz,
            jitter_fwhm: units::ps_to_s(mc.jitter_fwhm_ps),
        };
        if !(mc.duration_s >= 0.0 && mc.duration_s.is_finite()) {
            return Err(CliError::Validation(format!(
                "mc.duration_s must be nonnegative, got {}",
                mc.duration_s
            )));
        }
        if self.sweep.temperatures_c.iter().any(|t| !t.is_finite()) {
            return Err(CliError::Validation("sweep.temperatures_c must be finite".into()));
        }

        let experiment = ExperimentConfig {
            species,
            geometry,
            drive,
            detection,
            quadrature,
            grid,
            mu: m.mu,
            kappa,
            rates,
        };
        experiment.validate()?;
        Ok(experiment)
    }
}
