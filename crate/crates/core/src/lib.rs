//! Biphoton waveforms and collective idler decay for photon pairs emitted
//! from a Doppler-broadened cascade-type atomic vapor.
//!
//! The crate is organised bottom-up:
//!
//! * [`atomvapor`]: cell temperature to pressure, density, atom count,
//!   interatomic distance, thermal speed and optical depth.
//! * [`kernel`]: the velocity-resolved biphoton amplitude, the
//!   Doppler-integrated cross-correlation `g2(tau)` with superradiant idler
//!   decay, its normalized form `P1(tau)` and the brightness integral.
//! * [`analysis`]: detector jitter, FWHM extraction, strength inversion,
//!   the `mu` fit, coincidence metrics and temperature sweeps.
//! * [`mc`]: seeded Monte Carlo event streams and start-stop histograms used
//!   as an independent oracle for the analytic waveform.
//!
//! Everything is SI internally; unit conversion happens in [`units`].
//!
//! With the default `parallel` feature, loops over tau samples, sweep rows
//! and histogram chunks run on the rayon pool. Without it the same code runs
//! sequentially and yields identical results.

pub mod analysis;
pub mod atomvapor;
pub mod error;
pub mod kernel;
pub mod mc;
pub mod quadrature;
pub mod units;
pub mod waveform;

mod par;

pub use error::{Error, Result};
