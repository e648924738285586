use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::error::{ensure_nonnegative, Error, Result};
use crate::units::fwhm_to_sigma;
use crate::waveform::{Waveform, WaveformKind};

const PS_PER_S: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Signal = 0,
    Idler = 1,
}

impl Channel {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Channel::Signal),
            1 => Some(Channel::Idler),
            _ => None,
        }
    }
}

/// Detection timestamps of one channel, ascending, in integer picoseconds
/// within `[0, duration_ps)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    pub channel: Channel,
    pub timestamps_ps: Vec<i64>,
    pub duration_ps: i64,
    pub seed: u64,
}

impl EventStream {
    pub fn empty(channel: Channel, duration_ps: i64, seed: u64) -> Self {
        Self {
            channel,
            timestamps_ps: Vec::new(),
            duration_ps,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.timestamps_ps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps_ps.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.duration_ps as f64 / PS_PER_S
    }

    pub fn timestamp(&self, i: usize) -> f64 {
        self.timestamps_ps[i] as f64 / PS_PER_S
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McRates {
    /// Detected signal singles, Hz.
    pub signal_rate: f64,
    /// Probability that a detected signal has a detected partner idler.
    pub heralding_probability: f64,
    /// Uncorrelated idler singles, Hz.
    pub background_idler_rate: f64,
    /// FWHM of the Gaussian jitter on the signal-idler delay, s. Each
    /// channel receives an independent share of `1/√2` of it.
    pub jitter_fwhm: f64,
}

impl McRates {
    /// Roughly 10⁶ detected pairs/s at CAR ≈ 200 with 22 % heralding for
    /// the 95 °C waveform.
    pub fn operating_point() -> Self {
        Self {
            signal_rate: 4.6e6,
            heralding_probability: 0.22,
            background_idler_rate: 6.0e5,
            jitter_fwhm: 100e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mc.signal_rate", self.signal_rate),
            ("mc.background_idler_rate", self.background_idler_rate),
            ("mc.jitter_fwhm", self.jitter_fwhm),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.heralding_probability) {
            return Err(Error::Config(format!(
                "mc.heralding_probability must lie in [0, 1], got {}",
                self.heralding_probability
            )));
        }
        Ok(())
    }
}

/// Inverse-CDF sampler for the piecewise-linear interpolant of a
/// normalized waveform.
#[derive(Debug, Clone)]
pub struct DelaySampler {
    taus: Vec<f64>,
    values: Vec<f64>,
    cumulative: Vec<f64>,
    step: f64,
}

impl DelaySampler {
    pub fn new(p1: &Waveform) -> Result<Self> {
        if p1.kind == WaveformKind::HistogramDensity || p1.len() < 2 {
            return Err(Error::Precondition(
                "delay density must be a sampled P1 waveform".into(),
            ));
        }
        let area = p1.integral();
        if (area - 1.0).abs() > 1e-6 {
            return Err(Error::Precondition(format!(
                "delay density integrates to {area}, not 1"
            )));
        }
        let step = p1.grid.step;
        let mut cumulative = Vec::with_capacity(p1.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in p1.values.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * step;
            cumulative.push(acc);
        }
        Ok(Self {
            taus: p1.grid.taus().collect(),
            values: p1.values.clone(),
            cumulative,
            step,
        })
    }

    /// Maps `u ∈ [0, 1)` to a delay in seconds.
    pub fn delay(&self, u: f64) -> f64 {
        let total = *self.cumulative.last().unwrap();
        let target = u * total;
        let i = self
            .cumulative
            .partition_point(|&c| c <= target)
            .clamp(1, self.cumulative.len() - 1)
            - 1;
        let r = target - self.cumulative[i];
        let y0 = self.values[i];
        let slope = (self.values[i + 1] - y0) / self.step;
        // root of y0 x + slope x² / 2 = r, in the cancellation-free form
        let disc = (y0 * y0 + 2.0 * slope * r).max(0.0);
        let denom = y0 + disc.sqrt();
        let x = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
        self.taus[i] + x.clamp(0.0, self.step)
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn poisson_arrivals(rate: f64, duration: f64, rng: &mut ChaCha20Rng) -> Vec<f64> {
    let mut out = Vec::new();
    if rate <= 0.0 || duration <= 0.0 {
        return out;
    }
    let gaps = Exp::new(rate).expect("positive rate");
    out.reserve((rate * duration * 1.01) as usize + 16);
    let mut t = gaps.sample(rng);
    while t < duration {
        out.push(t);
        t += gaps.sample(rng);
    }
    out
}

fn jitter_ps(normal: &Option<Normal<f64>>, rng: &mut ChaCha20Rng) -> f64 {
    normal.as_ref().map_or(0.0, |n| n.sample(rng))
}

/// Signal and idler streams for `duration` seconds.
pub fn sample_events(rates: &McRates, p1: &Waveform, duration: f64, seed: u64) -> Result<(EventStream, EventStream)> {
    rates.validate()?;
    ensure_nonnegative("duration", duration)?;
    let sampler = DelaySampler::new(p1)?;
    let duration_ps = (duration * PS_PER_S).floor() as i64;
    let mut signal = EventStream::empty(Channel::Signal, duration_ps, seed);
    let mut idler = EventStream::empty(Channel::Idler, duration_ps, seed);
    if duration_ps == 0 {
        return Ok((signal, idler));
    }
    let normal = if rates.jitter_fwhm > 0.0 {
        let sigma_ps = fwhm_to_sigma(rates.jitter_fwhm) * PS_PER_S / std::f64::consts::SQRT_2;
        Some(Normal::new(0.0, sigma_ps).expect("finite sigma"))
    } else {
        None
    };
    let in_range = |t: i64| t >= 0 && t < duration_ps;

    let emissions = poisson_arrivals(rates.signal_rate, duration, &mut stream_rng(seed, 1));
    let mut herald_rng = stream_rng(seed, 2);
    let mut signal_jitter = stream_rng(seed, 4);
    let mut idler_jitter = stream_rng(seed, 5);
    for &t in &emissions {
        let emit_ps = (t * PS_PER_S).floor() as i64;
        let s = emit_ps + jitter_ps(&normal, &mut signal_jitter).floor() as i64;
        if in_range(s) {
            signal.timestamps_ps.push(s);
        }
        if herald_rng.random::<f64>() < rates.heralding_probability {
            let delay = sampler.delay(herald_rng.random::<f64>());
            let j = jitter_ps(&normal, &mut idler_jitter);
            let i = emit_ps + (delay * PS_PER_S + j).floor() as i64;
            if in_range(i) {
                idler.timestamps_ps.push(i);
            }
        }
    }

    let background = poisson_arrivals(rates.background_idler_rate, duration, &mut stream_rng(seed, 3));
    let mut bg_jitter = stream_rng(seed, 6);
    for &t in &background {
        let i = (t * PS_PER_S + jitter_ps(&normal, &mut bg_jitter)).floor() as i64;
        if in_range(i) {
            idler.timestamps_ps.push(i);
        }
    }

    signal.timestamps_ps.sort_unstable();
    idler.timestamps_ps.sort_unstable();
    Ok((signal, idler))
}
