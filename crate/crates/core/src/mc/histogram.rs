use crate::error::{Error, Result};
use crate::par;
use crate::waveform::{TauGrid, Waveform, WaveformKind};

use super::EventStream;

/// Start-stop delay histogram. Bin `k` covers
/// `[tau_min + k bin_width, tau_min + (k+1) bin_width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    /// s
    pub bin_width: f64,
    /// s
    pub tau_min: f64,
    pub counts: Vec<u64>,
}

impl CoincidenceHistogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_min + self.bins() as f64 * self.bin_width
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        self.tau_min + (k as f64 + 0.5) * self.bin_width
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Grid of bin centres.
    pub fn center_grid(&self) -> TauGrid {
        TauGrid {
            offset: self.tau_min / self.bin_width + 0.5,
            step: self.bin_width,
            len: self.bins(),
        }
    }

    /// Element-wise sum of two histograms on the same bins.
    pub fn merge(&mut self, other: &CoincidenceHistogram) -> Result<()> {
        if self.bin_width != other.bin_width || self.tau_min != other.tau_min || self.bins() != other.bins() {
            return Err(Error::Domain("cannot merge histograms with different binning".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }
}

fn to_ps(x: f64) -> i64 {
    (x * 1e12).round() as i64
}

const CHUNK: usize = 1 << 16;

/// All-pairs start-stop histogram: every (signal, idler) pair with
/// `tau = t_idler - t_signal` in `[span.0, span.1)` is counted.
///
/// Bin width and span are rounded to whole picoseconds.
pub fn build_histogram(
    signal: &EventStream,
    idler: &EventStream,
    bin_width: f64,
    span: (f64, f64),
) -> Result<CoincidenceHistogram> {
    let bw = to_ps(bin_width);
    if !(bin_width > 0.0) || bw <= 0 {
        return Err(Error::Domain(format!(
            "bin width must be at least 1 ps, got {bin_width:e} s"
        )));
    }
    let (lo, hi) = (to_ps(span.0), to_ps(span.1));
    if !(span.0.is_finite() && span.1.is_finite()) || hi <= lo {
        return Err(Error::Domain(format!(
            "invalid histogram span [{:e}, {:e}]",
            span.0, span.1
        )));
    }
    let bins = ((hi - lo) + bw - 1) / bw;
    let hi = lo + bins * bw;
    let idl = &idler.timestamps_ps;
    let chunks: Vec<&[i64]> = signal.timestamps_ps.chunks(CHUNK).collect();
    let partials = par::map_slice(&chunks, |chunk| {
        let mut counts = vec![0u64; bins as usize];
        let Some(&first) = chunk.first() else {
            return counts;
        };
        let mut start = idl.partition_point(|&t| t < first + lo);
        for &ts in chunk.iter() {
            while start < idl.len() && idl[start] < ts + lo {
                start += 1;
            }
            for &ti in &idl[start..] {
                let tau = ti - ts;
                if tau >= hi {
                    break;
                }
                counts[((tau - lo) / bw) as usize] += 1;
            }
        }
        counts
    });
    let mut counts = vec![0u64; bins as usize];
    for p in partials {
        for (a, b) in counts.iter_mut().zip(p) {
            *a += b;
        }
    }
    Ok(CoincidenceHistogram {
        bin_width: bw as f64 * 1e-12,
        tau_min: lo as f64 * 1e-12,
        counts,
    })
}

/// Empirical `P1`: accidental floor subtracted, negatives clamped, unit
/// mass. The floor is the mean over bins further than five `peak_window`s
/// from the peak bin (zero if there are none).
pub fn estimate_p1(hist: &CoincidenceHistogram, peak_window: f64) -> Result<Waveform> {
    if hist.counts.is_empty() || hist.total() == 0 {
        return Err(Error::InsufficientStatistics("histogram is empty".into()));
    }
    let peak = hist
        .counts
        .iter()
        .enumerate()
        .fold(0, |b, (i, &c)| if c > hist.counts[b] { i } else { b });
    let outer = (5.0 * peak_window / hist.bin_width + 1e-9).floor() as usize;
    let (sum, n) = hist
        .counts
        .iter()
        .enumerate()
        .filter(|(i, _)| i.abs_diff(peak) > outer)
        .fold((0u64, 0usize), |(s, n), (_, &c)| (s + c, n + 1));
    let floor = if n == 0 { 0.0 } else { sum as f64 / n as f64 };
    let excess = hist.counts[peak] as f64 - floor;
    if excess <= 5.0 * floor.max(1.0).sqrt() {
        return Err(Error::InsufficientStatistics(format!(
            "peak excess {excess:.1} over a floor of {floor:.1} counts is below 5 sigma"
        )));
    }
    let net: Vec<f64> = hist.counts.iter().map(|&c| (c as f64 - floor).max(0.0)).collect();
    let mass: f64 = net.iter().sum::<f64>() * hist.bin_width;
    Ok(Waveform {
        grid: hist.center_grid(),
        values: net.into_iter().map(|v| v / mass).collect(),
        kind: WaveformKind::HistogramDensity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::Channel;

    fn stream(channel: Channel, ts: Vec<i64>) -> EventStream {
        EventStream {
            channel,
            timestamps_ps: ts,
            duration_ps: 2_000_000_000_000,
            seed: 0,
        }
    }

    #[test]
    fn single_pair_lands_in_its_bin() {
        let s = stream(Channel::Signal, vec![1_000_000_000_000]);
        let i = stream(Channel::Idler, vec![1_000_000_000_100]);
        let h = build_histogram(&s, &i, 5e-12, (-1e-9, 5e-9)).unwrap();
        assert_eq!(h.bins(), 1200);
        assert_eq!(h.total(), 1);
        let k = h.counts.iter().position(|&c| c == 1).unwrap();
        assert!(h.bin_center(k) - 2.5e-12 <= 100e-12 && 100e-12 < h.bin_center(k) + 2.5e-12);
        assert_eq!(k, 220);
    }

    #[test]
    fn all_pairs_not_first_stop() {
        let s = stream(Channel::Signal, vec![1000, 1002]);
        let i = stream(Channel::Idler, vec![1003, 1004]);
        let h = build_histogram(&s, &i, 1e-12, (-10e-12, 10e-12)).unwrap();
        assert_eq!(h.total(), 4);
    }

    #[test]
    fn empty_idler_stream() {
        let s = stream(Channel::Signal, vec![10, 20, 30]);
        let i = stream(Channel::Idler, vec![]);
        let h = build_histogram(&s, &i, 5e-12, (-1e-9, 5e-9)).unwrap();
        assert!(h.counts.iter().all(|&c| c == 0));
        assert!(build_histogram(&s, &i, 0.0, (-1e-9, 5e-9)).is_err());
    }

    #[test]
    fn negative_delays_counted() {
        let s = stream(Channel::Signal, vec![5000]);
        let i = stream(Channel::Idler, vec![4000, 4995]);
        let h = build_histogram(&s, &i, 5e-12, (-1e-9, 5e-9)).unwrap();
        assert_eq!(h.counts[0], 1);
        assert_eq!(h.counts[199], 1);
    }

    #[test]
    fn single_bin_estimate() {
        let h = CoincidenceHistogram {
            bin_width: 5e-12,
            tau_min: 0.0,
            counts: vec![42],
        };
        let p = estimate_p1(&h, 1e-10).unwrap();
        assert_eq!(p.values.len(), 1);
        assert!((p.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_offset_leaves_estimate_unchanged() {
        let mut counts = vec![0u64; 1200];
        for (k, c) in counts.iter_mut().enumerate().skip(200).take(100) {
            *c = (1000.0 * (-((k - 200) as f64) / 20.0).exp()) as u64;
        }
        let h = CoincidenceHistogram {
            bin_width: 5e-12,
            tau_min: -1e-9,
            counts: counts.clone(),
        };
        let shifted = CoincidenceHistogram {
            counts: counts.iter().map(|c| c + 37).collect(),
            ..h.clone()
        };
        assert_eq!(estimate_p1(&h, 0.2e-9).unwrap(), estimate_p1(&shifted, 0.2e-9).unwrap());
    }

    #[test]
    fn flat_histogram_is_insufficient() {
        let h = CoincidenceHistogram {
            bin_width: 5e-12,
            tau_min: -1e-9,
            counts: vec![50; 1200],
        };
        assert!(matches!(estimate_p1(&h, 0.2e-9), Err(Error::InsufficientStatistics(_))));
    }
}
