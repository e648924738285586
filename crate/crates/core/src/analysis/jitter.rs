use crate::error::{ensure_nonnegative, Error, Result};
use crate::par;
use crate::units::fwhm_to_sigma;
use crate::waveform::{Waveform, WaveformKind};

/// Sampled unit-sum Gaussian of the given FWHM on a grid of `step`,
/// truncated at five standard deviations. Index `half` is the centre.
pub fn gaussian_kernel(fwhm: f64, step: f64) -> Vec<f64> {
    let sigma = fwhm_to_sigma(fwhm);
    let half = (5.0 * sigma / step).ceil() as usize;
    let raw: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let x = (i as f64 - half as f64) * step / sigma;
            (-0.5 * x * x).exp()
        })
        .collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Convolve with a unit-area Gaussian of FWHM `jitter_fwhm`, keeping the
/// input grid. Mass pushed past either end of the grid is dropped.
pub fn convolve_jitter(w: &Waveform, jitter_fwhm: f64) -> Result<Waveform> {
    ensure_nonnegative("jitter_fwhm", jitter_fwhm)?;
    if jitter_fwhm == 0.0 {
        return Ok(w.clone());
    }
    let step = w.grid.step;
    if step > jitter_fwhm / 2.0 {
        return Err(Error::Resolution {
            step,
            jitter: jitter_fwhm,
        });
    }
    let kernel = gaussian_kernel(jitter_fwhm, step);
    let half = (kernel.len() / 2) as isize;
    let n = w.values.len() as isize;
    let values = par::map_range(w.values.len(), |i| {
        let i = i as isize;
        let lo = (i - half).max(0);
        let hi = (i + half).min(n - 1);
        (lo..=hi)
            .map(|j| w.values[j as usize] * kernel[(i - j + half) as usize])
            .sum::<f64>()
    });
    Ok(Waveform {
        grid: w.grid,
        values,
        kind: WaveformKind::Convolved,
    })
}
