//! Coincidence-to-accidental ratio and pair-rate estimators, and their
//! analytic expectations for Poisson sources.

use crate::error::{ensure_positive, Error, Result};
use crate::mc::{CoincidenceHistogram, McRates};
use crate::waveform::Waveform;

use super::DetectionModel;

/// Peak and accidental regions of a start-stop histogram.
///
/// The peak region holds the bins within `peak_half_width` of the peak bin;
/// the accidental region holds those further than
/// `accidental_multiple * peak_half_width`. Without an explicit half-width
/// it is `fwhm_multiple` times the jitter-included FWHM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceWindows {
    pub peak_half_width: Option<f64>,
    pub fwhm_multiple: f64,
    pub accidental_multiple: f64,
}

impl Default for CoincidenceWindows {
    fn default() -> Self {
        Self {
            peak_half_width: None,
            fwhm_multiple: 2.0,
            accidental_multiple: 5.0,
        }
    }
}

impl CoincidenceWindows {
    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.peak_half_width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Config(format!("coincidence window must be positive, got {w}")));
            }
        }
        if !(self.fwhm_multiple > 0.0 && self.accidental_multiple >= 1.0) {
            return Err(Error::Config(format!(
                "window multiples must be positive with accidental >= 1 (got {}, {})",
                self.fwhm_multiple, self.accidental_multiple
            )));
        }
        Ok(())
    }

    /// Peak half-width for a waveform with the given (jitter-included) FWHM.
    pub fn peak_half_width_for(&self, fwhm: f64) -> f64 {
        self.peak_half_width.unwrap_or(self.fwhm_multiple * fwhm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarEstimate {
    pub value: f64,
    /// One-sigma Poisson error on `value`.
    pub sigma: f64,
    pub peak_index: usize,
    pub peak_bins: usize,
    pub accidental_bins: usize,
    pub peak_counts: f64,
    pub accidental_counts: f64,
}

impl CarEstimate {
    pub fn peak_mean(&self) -> f64 {
        self.peak_counts / self.peak_bins as f64
    }

    pub fn accidental_mean(&self) -> f64 {
        self.accidental_counts / self.accidental_bins as f64
    }
}

fn reach(width: f64, bin_width: f64) -> usize {
    (width / bin_width + 1e-9).floor() as usize
}

/// CAR over raw per-bin values (counts or expected counts). The peak bin is
/// the first maximum unless given.
pub fn car_from_counts(
    counts: &[f64],
    bin_width: f64,
    peak_index: Option<usize>,
    peak_half_width: f64,
    accidental_multiple: f64,
) -> Result<CarEstimate> {
    ensure_positive("peak window", peak_half_width)?;
    let total: f64 = counts.iter().sum();
    if counts.is_empty() || !(total > 0.0) {
        return Err(Error::Degenerate("empty histogram".into()));
    }
    let peak_index = peak_index.unwrap_or_else(|| {
        let mut best = 0;
        for (i, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = i;
            }
        }
        best
    });
    let inner = reach(peak_half_width, bin_width);
    let outer = reach(accidental_multiple * peak_half_width, bin_width);
    let (mut pk, mut pn, mut ak, mut an) = (0.0, 0usize, 0.0, 0usize);
    for (i, &c) in counts.iter().enumerate() {
        let d = i.abs_diff(peak_index);
        if d <= inner {
            pk += c;
            pn += 1;
        } else if d > outer {
            ak += c;
            an += 1;
        }
    }
    if an == 0 {
        return Err(Error::Precondition(
            "no histogram bins in the accidental region outside the peak window".into(),
        ));
    }
    let (value, sigma) = if ak == 0.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let v = (pk / pn as f64) / (ak / an as f64);
        let rel = if pk > 0.0 {
            (1.0 / pk + 1.0 / ak).sqrt()
        } else {
            (1.0 / ak).sqrt()
        };
        (v, v * rel)
    };
    Ok(CarEstimate {
        value,
        sigma,
        peak_index,
        peak_bins: pn,
        accidental_bins: an,
        peak_counts: pk,
        accidental_counts: ak,
    })
}

pub fn car_estimate(
    hist: &CoincidenceHistogram,
    peak_half_width: f64,
    accidental_multiple: f64,
) -> Result<CarEstimate> {
    let counts: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    car_from_counts(&counts, hist.bin_width, None, peak_half_width, accidental_multiple)
}

/// Mean counts per bin in the peak window over the mean per bin in the
/// accidental region (beyond five windows). Infinite when no accidentals
/// were recorded.
pub fn car(hist: &CoincidenceHistogram, peak_window: f64) -> Result<f64> {
    Ok(car_estimate(hist, peak_window, 5.0)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRate {
    /// Background-subtracted peak coincidences per second.
    pub detected: f64,
    /// `detected` divided by the signal and idler detection efficiencies.
    pub corrected: f64,
}

pub fn pair_rate(
    hist: &CoincidenceHistogram,
    acquisition: f64,
    peak_window: f64,
    detection: &DetectionModel,
) -> Result<PairRate> {
    ensure_positive("acquisition time", acquisition)?;
    let eff = detection.pair_efficiency();
    if !(eff > 0.0) {
        return Err(Error::Domain("pair efficiency must be positive".into()));
    }
    let counts: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    if counts.iter().all(|&c| c == 0.0) {
        return Ok(PairRate {
            detected: 0.0,
            corrected: 0.0,
        });
    }
    let net = match car_from_counts(
        &counts,
        hist.bin_width,
        None,
        peak_window,
        detection.windows.accidental_multiple,
    ) {
        Ok(est) => est.peak_counts - est.peak_bins as f64 * est.accidental_mean(),
        Err(Error::Precondition(_)) => {
            // no accidental region: take the whole peak window as signal
            let p = counts
                .iter()
                .enumerate()
                .fold(0, |b, (i, &c)| if c > counts[b] { i } else { b });
            let inner = reach(peak_window, hist.bin_width);
            counts
                .iter()
                .enumerate()
                .filter(|(i, _)| i.abs_diff(p) <= inner)
                .map(|(_, c)| c)
                .sum()
        }
        Err(e) => return Err(e),
    };
    let detected = net / acquisition;
    Ok(PairRate {
        detected,
        corrected: detected / eff,
    })
}

/// Expected start-stop counts per bin for Poisson signals at `signal_rate`,
/// heralding with probability `p` into a delay distributed as
/// `delay_density`, plus uncorrelated idlers at `background_idler_rate`.
///
/// Bin `k` covers `[tau_min + k w, tau_min + (k+1) w)`. Idlers heralded by
/// other signals count as accidentals, so the flat level is
/// `R_s (R_s p + R_bg) w T`.
pub fn expected_counts(
    delay_density: &Waveform,
    rates: &McRates,
    duration: f64,
    bin_width: f64,
    tau_min: f64,
    bins: usize,
) -> Vec<f64> {
    let r_s = rates.signal_rate;
    let p = rates.heralding_probability;
    let idler_rate = r_s * p + rates.background_idler_rate;
    let flat = r_s * idler_rate * bin_width * duration;
    let area = delay_density.integral();
    (0..bins)
        .map(|k| {
            let a = tau_min + k as f64 * bin_width;
            let mass = delay_density.integrate_linear(a, a + bin_width) / area;
            flat + r_s * p * duration * mass
        })
        .collect()
}

/// Analytic CAR for the given rates and delay density (which should already
/// include the detector jitter), using the same window rule as [`car`].
pub fn predicted_car(
    delay_density: &Waveform,
    rates: &McRates,
    bin_width: f64,
    span: (f64, f64),
    peak_half_width: f64,
    accidental_multiple: f64,
) -> Result<CarEstimate> {
    ensure_positive("bin width", bin_width)?;
    let bins = ((span.1 - span.0) / bin_width).round() as usize;
    let expected = expected_counts(delay_density, rates, 1.0, bin_width, span.0, bins);
    car_from_counts(&expected, bin_width, None, peak_half_width, accidental_multiple)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(counts: Vec<u64>) -> CoincidenceHistogram {
        CoincidenceHistogram {
            bin_width: 5e-12,
            tau_min: -1e-9,
            counts,
        }
    }

    #[test]
    fn uniform_histogram_has_unit_car() {
        let h = hist(vec![37; 1200]);
        assert_eq!(car(&h, 0.3e-9).unwrap(), 1.0);
    }

    #[test]
    fn single_peak_bin() {
        let mut c = vec![10u64; 1200];
        c[400] = 2000;
        let h = hist(c);
        assert_eq!(car(&h, 2.5e-12).unwrap(), 200.0);
    }

    #[test]
    fn zero_background_is_infinite() {
        let mut c = vec![0u64; 1200];
        c[400] = 5;
        assert_eq!(car(&hist(c), 2.5e-12).unwrap(), f64::INFINITY);
    }

    #[test]
    fn empty_histogram_rejected() {
        assert!(matches!(car(&hist(vec![]), 1e-10), Err(Error::Degenerate(_))));
        assert!(matches!(car(&hist(vec![0; 10]), 1e-10), Err(Error::Degenerate(_))));
    }

    #[test]
    fn pair_rate_examples() {
        let det = DetectionModel::default();
        let zero = pair_rate(&hist(vec![0; 1200]), 30.0, 0.3e-9, &det).unwrap();
        assert_eq!(zero.detected, 0.0);

        let mut c = vec![0u64; 1200];
        c[300] = 30_000_000;
        let r = pair_rate(&hist(c), 30.0, 0.3e-9, &det).unwrap();
        assert_eq!(r.detected, 1e6);
        assert!((r.corrected - 2.857e6).abs() < 1e3);
        assert!(pair_rate(&hist(vec![1; 10]), 0.0, 1e-10, &det).is_err());
    }

    #[test]
    fn pair_rate_subtracts_background() {
        let det = DetectionModel::default();
        let mut c = vec![4u64; 1200];
        c[300] += 1000;
        c[301] += 500;
        let r = pair_rate(&hist(c), 2.0, 6e-12, &det).unwrap();
        assert_eq!(r.detected, 750.0);
    }
}
