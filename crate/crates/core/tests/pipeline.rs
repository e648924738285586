//! Multi-module paths: thread-count independence and the event-file route
//! through the Monte Carlo.

use hssr_core::analysis::{temperature_sweep, ExperimentConfig, SweepTable};
use hssr_core::atomvapor::{most_probable_speed, SpeciesConstants};
use hssr_core::kernel::{DopplerKernel, DriveParams};
use hssr_core::mc::{build_histogram, estimate_p1, io, sample_events, McRates};
use hssr_core::quadrature::QuadratureSpec;
use hssr_core::waveform::{l1_distance, TauGrid};

fn pool(n: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
}

fn kernel() -> DopplerKernel {
    let s = SpeciesConstants::cesium();
    let u = most_probable_speed(368.15, s.atomic_mass).unwrap();
    DopplerKernel::compute(
        TauGrid::standard(),
        &DriveParams::cesium_default(&s),
        s.gamma_idler,
        s.gamma_signal,
        u,
        &QuadratureSpec::default(),
    )
    .unwrap()
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let one = pool(1).install(kernel);
    let many = pool(4).install(kernel);
    assert_eq!(one, many);

    let cfg = ExperimentConfig::cesium_default();
    let temps = [21.0, 57.0, 95.0, 600.0];
    let a = pool(1).install(|| temperature_sweep(&cfg, &temps).unwrap());
    let b = pool(4).install(|| temperature_sweep(&cfg, &temps).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.failures.len(), 1);
    assert_eq!(SweepTable::from_csv(&a.to_csv()).unwrap().rows, a.rows);

    let p1 = one.p1(250.0 * SpeciesConstants::cesium().gamma_idler).unwrap();
    let (s, i) = sample_events(&McRates::operating_point(), &p1, 0.2, 9).unwrap();
    let h1 = pool(1).install(|| build_histogram(&s, &i, 5e-12, (-1e-9, 5e-9)).unwrap());
    let h4 = pool(4).install(|| build_histogram(&s, &i, 5e-12, (-1e-9, 5e-9)).unwrap());
    assert_eq!(h1, h4);
}

#[test]
fn events_survive_a_file_round_trip() {
    let k = kernel();
    let p1 = k.p1(250.0 * SpeciesConstants::cesium().gamma_idler).unwrap();
    let rates = McRates {
        jitter_fwhm: 0.0,
        ..McRates::operating_point()
    };
    let (s, i) = sample_events(&rates, &p1, 0.3, 5).unwrap();
    let mut buf = Vec::new();
    io::write_binary(&mut buf, &s, &i).unwrap();
    let (s2, i2) = io::read_binary(&buf[..], s.duration_ps, s.seed).unwrap();
    let h = build_histogram(&s, &i, 5e-12, (-1e-9, 5e-9)).unwrap();
    assert_eq!(build_histogram(&s2, &i2, 5e-12, (-1e-9, 5e-9)).unwrap(), h);

    // ~3e5 correlated pairs: the estimate tracks the generating density
    let est = estimate_p1(&h, 0.2e-9).unwrap();
    let d = l1_distance(&est, &p1);
    assert!(d < 0.05, "L1 {d}");
}
