//! Uniformly sampled temporal functions.

use crate::error::{Error, Result};

/// Uniform delay grid `tau_k = (offset + k) * step`, `k = 0..len`.
///
/// Storing the origin as a multiple of the step keeps `tau = 0` exact when
/// `offset` is integral, so the causal step never depends on rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauGrid {
    pub offset: f64,
    pub step: f64,
    pub len: usize,
}

impl TauGrid {
    /// Grid from `start` to `end` inclusive; `start` is snapped to the nearest
    /// multiple of `step`.
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain(format!("tau step must be positive, got {step}")));
        }
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::Domain(format!("invalid tau span [{start}, {end}]")));
        }
        let offset = (start / step).round();
        let len = ((end / step).round() - offset) as usize + 1;
        Ok(Self { offset, step, len })
    }

    /// 5 ps steps over [-1 ns, +5 ns].
    pub fn standard() -> Self {
        Self {
            offset: -200.0,
            step: 5e-12,
            len: 1201,
        }
    }

    pub fn start(&self) -> f64 {
        self.offset * self.step
    }

    pub fn end(&self) -> f64 {
        self.tau(self.len - 1)
    }

    pub fn tau(&self, k: usize) -> f64 {
        (self.offset + k as f64) * self.step
    }

    pub fn taus(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.tau(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveformKind {
    G2Unnormalized,
    P1Normalized,
    Convolved,
    /// Bin-averaged density at bin centres; integrates by the rectangle rule.
    HistogramDensity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub grid: TauGrid,
    pub values: Vec<f64>,
    pub kind: WaveformKind,
}

impl Waveform {
    pub fn new(grid: TauGrid, values: Vec<f64>, kind: WaveformKind) -> Result<Self> {
        if values.len() != grid.len {
            return Err(Error::Domain(format!(
                "waveform has {} values for a grid of {}",
                values.len(),
                grid.len
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!(
                "waveform values must be finite and nonnegative, found {v}"
            )));
        }
        Ok(Self { grid, values, kind })
    }

    pub fn tau_start(&self) -> f64 {
        self.grid.start()
    }

    pub fn tau_step(&self) -> f64 {
        self.grid.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Trapezoid integral, or the rectangle sum for histogram densities.
    pub fn integral(&self) -> f64 {
        match self.kind {
            WaveformKind::HistogramDensity => self.values.iter().sum::<f64>() * self.grid.step,
            _ => trapezoid(&self.values, self.grid.step),
        }
    }

    /// Value of the piecewise-linear interpolant, zero outside the grid.
    pub fn interpolate(&self, tau: f64) -> f64 {
        let x = tau / self.grid.step - self.grid.offset;
        if x < 0.0 || x > (self.len() - 1) as f64 {
            return 0.0;
        }
        let i = x.floor() as usize;
        if i + 1 >= self.len() {
            return self.values[self.len() - 1];
        }
        let f = x - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }

    /// Exact integral of the piecewise-linear interpolant over `[a, b]`.
    pub fn integrate_linear(&self, a: f64, b: f64) -> f64 {
        let n = self.len();
        if n < 2 || b <= a {
            return 0.0;
        }
        let last = (n - 1) as f64;
        let xa = (a / self.grid.step - self.grid.offset).clamp(0.0, last);
        let xb = (b / self.grid.step - self.grid.offset).clamp(0.0, last);
        if xb <= xa {
            return 0.0;
        }
        let first = (xa.floor() as usize).min(n - 2);
        let end = (xb.ceil() as usize).min(n - 1);
        let mut total = 0.0;
        for i in first..end {
            let i0 = i as f64;
            let s0 = xa.max(i0) - i0;
            let s1 = xb.min(i0 + 1.0) - i0;
            if s1 <= s0 {
                continue;
            }
            let y0 = self.values[i];
            let dy = self.values[i + 1] - y0;
            total += (s1 - s0) * y0 + 0.5 * dy * (s1 * s1 - s0 * s0);
        }
        total * self.grid.step
    }

    pub fn peak_index(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|b| b.0)
    }
}

pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => step * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}

/// `∫ |a - b| dtau` on `a`'s grid, with `b` evaluated by linear
/// interpolation.
pub fn l1_distance(a: &Waveform, b: &Waveform) -> f64 {
    let diffs: Vec<f64> = a
        .grid
        .taus()
        .zip(&a.values)
        .map(|(t, &v)| (v - b.interpolate(t)).abs())
        .collect();
    match a.kind {
        WaveformKind::HistogramDensity => diffs.iter().sum::<f64>() * a.grid.step,
        _ => trapezoid(&diffs, a.grid.step),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grid_has_exact_zero() {
        let g = TauGrid::standard();
        assert_eq!(g.tau(200), 0.0);
        assert!(g.tau(199) < 0.0);
        assert_eq!(g, TauGrid::new(-1e-9, 5e-9, 5e-12).unwrap());
        assert!((g.end() - 5e-9).abs() < 1e-21);
    }

    #[test]
    fn rejects_negative_values() {
        let g = TauGrid::new(0.0, 1.0, 0.5).unwrap();
        assert!(Waveform::new(g, vec![1.0, -1.0, 0.0], WaveformKind::Convolved).is_err());
        assert!(Waveform::new(g, vec![1.0], WaveformKind::Convolved).is_err());
    }

    #[test]
    fn integral_rules() {
        let g = TauGrid::new(0.0, 2.0, 1.0).unwrap();
        let w = Waveform::new(g, vec![1.0, 1.0, 1.0], WaveformKind::P1Normalized).unwrap();
        assert_eq!(w.integral(), 2.0);
        let h = Waveform {
            kind: WaveformKind::HistogramDensity,
            ..w.clone()
        };
        assert_eq!(h.integral(), 3.0);
        assert_eq!(w.interpolate(0.5), 1.0);
        assert_eq!(w.interpolate(-0.5), 0.0);
    }

    #[test]
    fn linear_integral_matches_trapezoid() {
        let g = TauGrid::new(-1.0, 3.0, 0.5).unwrap();
        let v: Vec<f64> = g.taus().map(|t| (t * t).min(4.0)).collect();
        let w = Waveform::new(g, v, WaveformKind::P1Normalized).unwrap();
        assert!((w.integrate_linear(-5.0, 5.0) - w.integral()).abs() < 1e-12);
        let split = w.integrate_linear(-1.0, 0.3) + w.integrate_linear(0.3, 3.0);
        assert!((split - w.integral()).abs() < 1e-12);
        // on one segment [0, 0.5], y = 0 -> 0.25 linearly
        assert!((w.integrate_linear(0.0, 0.25) - 0.25 * 0.125 / 2.0).abs() < 1e-15);
    }
}
