use crate::error::{Error, Result, Side};
use crate::waveform::Waveform;

/// Full width at half maximum with linear interpolation between the
/// bracketing samples. The left edge is the first upward crossing from the
/// start of the grid, the right edge the last downward crossing.
pub fn fwhm(w: &Waveform) -> Result<f64> {
    let y = &w.values;
    let peak_idx = w
        .peak_index()
        .ok_or_else(|| Error::Degenerate("empty waveform".into()))?;
    let peak = y[peak_idx];
    if !(peak > 0.0) {
        return Err(Error::Degenerate("waveform maximum must be positive".into()));
    }
    let half = 0.5 * peak;
    let h = w.grid.step;
    let l = y.iter().position(|&v| v >= half).unwrap_or(peak_idx);
    if l == 0 {
        return Err(Error::NoCrossing { side: Side::Left });
    }
    let r = y.iter().rposition(|&v| v >= half).unwrap_or(peak_idx);
    if r == y.len() - 1 {
        return Err(Error::NoCrossing { side: Side::Right });
    }
    let left = w.grid.tau(l - 1) + (half - y[l - 1]) / (y[l] - y[l - 1]) * h;
    let right = w.grid.tau(r) + (y[r] - half) / (y[r] - y[r + 1]) * h;
    Ok(right - left)
}
