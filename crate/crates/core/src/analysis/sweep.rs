use std::fmt::Write as _;

use crate::atomvapor::{
    calibrate_kappa, thermal_state, CellGeometry, SpeciesConstants, OD_CALIBRATION_ROW, REFERENCE_TABLE,
};
use crate::error::{Error, Result};
use crate::kernel::{brightness_from_kernel, superradiant_rate, DopplerKernel, DriveParams};
use crate::mc::McRates;
use crate::par;
use crate::quadrature::QuadratureSpec;
use crate::units;
use crate::waveform::TauGrid;

use super::{convolve_jitter, fwhm, predicted_car, DetectionModel};

/// Everything needed to run the forward model at one or more temperatures.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub species: SpeciesConstants,
    pub geometry: CellGeometry,
    pub drive: DriveParams,
    pub detection: DetectionModel,
    pub quadrature: QuadratureSpec,
    pub grid: TauGrid,
    pub mu: f64,
    /// Beer-Lambert coefficient, m².
    pub kappa: Option<f64>,
    /// Source rates used for the predicted CAR column.
    pub rates: McRates,
}

impl ExperimentConfig {
    /// Cesium thin-cell defaults with `kappa` calibrated on the 57 °C row.
    pub fn cesium_default() -> Self {
        let species = SpeciesConstants::cesium();
        let geometry = CellGeometry::thin_cell();
        let cal = REFERENCE_TABLE[OD_CALIBRATION_ROW];
        let kappa = calibrate_kappa(
            units::celsius_to_kelvin(cal.temperature_c),
            cal.od,
            geometry.length,
            &species,
        )
        .ok();
        Self {
            drive: DriveParams::cesium_default(&species),
            species,
            geometry,
            detection: DetectionModel::default(),
            quadrature: QuadratureSpec::default(),
            grid: TauGrid::standard(),
            mu: 1.15e-6,
            kappa,
            rates: McRates::operating_point(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        self.geometry.validate()?;
        self.drive.validate()?;
        self.detection.validate()?;
        self.quadrature.validate()?;
        self.rates.validate()?;
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Config(format!("mu must be nonnegative, got {}", self.mu)));
        }
        Ok(())
    }
}

/// One temperature of a sweep, in reporting units (°C, ns).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub temperature_c: f64,
    pub od: f64,
    pub r_sr_over_lambda: f64,
    /// Jitter-included FWHM of P1, ns.
    pub fwhm_ns: f64,
    pub strength: f64,
    /// Brightness relative to the first row of the table.
    pub brightness_rel: f64,
    pub car_predicted: f64,
    pub fwhm_pre_jitter_ns: f64,
    /// Jitter-included FWHM of the Doppler-only model, ns.
    pub fwhm_doppler_ns: f64,
    pub atom_count: f64,
    pub brightness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub temperature_c: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

pub const CSV_HEADER: [&str; 11] = [
    "temperature_C",
    "OD",
    "r_sr_over_lambda",
    "fwhm_ns",
    "strength",
    "brightness_rel",
    "car_predicted",
    "fwhm_pre_jitter_ns",
    "fwhm_doppler_ns",
    "atom_count",
    "brightness",
];

impl SweepRow {
    fn fields(&self) -> [f64; 11] {
        [
            self.temperature_c,
            self.od,
            self.r_sr_over_lambda,
            self.fwhm_ns,
            self.strength,
            self.brightness_rel,
            self.car_predicted,
            self.fwhm_pre_jitter_ns,
            self.fwhm_doppler_ns,
            self.atom_count,
            self.brightness,
        ]
    }

    fn from_fields(f: &[f64; 11]) -> Self {
        Self {
            temperature_c: f[0],
            od: f[1],
            r_sr_over_lambda: f[2],
            fwhm_ns: f[3],
            strength: f[4],
            brightness_rel: f[5],
            car_predicted: f[6],
            fwhm_pre_jitter_ns: f[7],
            fwhm_doppler_ns: f[8],
            atom_count: f[9],
            brightness: f[10],
        }
    }
}

impl SweepTable {
    /// The seven leading columns are fixed; diagnostics follow. Floats are
    /// written in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.fields().iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Domain("empty sweep CSV".into()))?;
        if header.split(',').map(str::trim).ne(CSV_HEADER.iter().copied()) {
            return Err(Error::Domain(format!("unexpected sweep CSV header: {header}")));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            let parsed = parsed.map_err(|e| Error::Domain(format!("sweep CSV row {}: {e}", i + 1)))?;
            let fields: [f64; 11] = parsed
                .try_into()
                .map_err(|_| Error::Domain(format!("sweep CSV row {} has the wrong column count", i + 1)))?;
            rows.push(SweepRow::from_fields(&fields));
        }
        Ok(Self {
            rows,
            failures: Vec::new(),
        })
    }
}

fn sweep_row(config: &ExperimentConfig, temperature_c: f64) -> Result<SweepRow> {
    let t = units::celsius_to_kelvin(temperature_c);
    let state = thermal_state(t, &config.geometry, &config.species, config.kappa)?;
    let gi = config.species.gamma_idler;
    let gamma_sr = superradiant_rate(state.atom_count, config.mu, gi)?;
    let kernel = DopplerKernel::compute(
        config.grid,
        &config.drive,
        gi,
        config.species.gamma_signal,
        state.u,
        &config.quadrature,
    )?;
    let jitter = config.detection.jitter_fwhm;
    let p1 = kernel.p1(gamma_sr)?;
    let p1_conv = convolve_jitter(&p1, jitter)?;
    let fwhm_post = fwhm(&p1_conv)?;
    let doppler = convolve_jitter(&kernel.p1(gi)?, jitter)?;
    let brightness = brightness_from_kernel(&kernel, gamma_sr, config.drive.amplitude_scale * state.atom_count);
    let w = config.detection.windows;
    let car = predicted_car(
        &p1_conv,
        &config.rates,
        config.detection.bin_width,
        (config.grid.start(), config.grid.end()),
        w.peak_half_width_for(fwhm_post),
        w.accidental_multiple,
    )?;
    Ok(SweepRow {
        temperature_c,
        od: state.optical_depth,
        r_sr_over_lambda: state.r_sr_over_lambda(config.species.lambda_idler),
        fwhm_ns: units::s_to_ns(fwhm_post),
        strength: gamma_sr / gi,
        brightness_rel: f64::NAN,
        car_predicted: car.value,
        fwhm_pre_jitter_ns: units::s_to_ns(fwhm(&p1)?),
        fwhm_doppler_ns: units::s_to_ns(fwhm(&doppler)?),
        atom_count: state.atom_count,
        brightness,
    })
}

/// Forward model over a list of temperatures (°C). Rows are computed
/// independently and assembled in ascending temperature order; a failing
/// temperature is recorded in `failures` and the rest continue.
pub fn temperature_sweep(config: &ExperimentConfig, temperatures_c: &[f64]) -> Result<SweepTable> {
    config.validate()?;
    let mut temps = temperatures_c.to_vec();
    temps.sort_by(f64::total_cmp);
    let results = par::map_slice(&temps, |&t| (t, sweep_row(config, t)));
    let mut table = SweepTable::default();
    for (t, r) in results {
        match r {
            Ok(row) => table.rows.push(row),
            Err(error) => table.failures.push(SweepFailure {
                temperature_c: t,
                error,
            }),
        }
    }
    if let Some(first) = table.rows.first().map(|r| r.brightness) {
        for row in &mut table.rows {
            row.brightness_rel = if first > 0.0 { row.brightness / first } else { 0.0 };
        }
    }
    Ok(table)
}
