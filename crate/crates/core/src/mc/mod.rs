//! Seeded Monte Carlo of signal / idler detection streams.
//!
//! Signals arrive as a homogeneous Poisson process. Each one heralds, with
//! fixed probability, an idler delayed by a draw from `P1`; uncorrelated
//! idlers arrive as a second Poisson process. Timestamps are integer
//! picoseconds, as a TCSPC card would report them.
//!
//! Random streams are split by purpose on one ChaCha20 key (the seed):
//!
//! | stream | draws                    |
//! |--------|--------------------------|
//! | 1      | signal arrival gaps      |
//! | 2      | herald decisions, delays |
//! | 3      | background arrival gaps  |
//! | 4      | signal jitter            |
//! | 5      | heralded idler jitter    |
//! | 6      | background jitter        |
//!
//! so changing the background rate leaves every correlated draw untouched.

mod events;
mod histogram;
pub mod io;

pub use events::{sample_events, Channel, DelaySampler, EventStream, McRates};
pub use histogram::{build_histogram, estimate_p1, CoincidenceHistogram};
