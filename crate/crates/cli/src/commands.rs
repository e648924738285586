use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use hssr_core::analysis::{
    car_estimate, convolve_jitter, fit_mu, fwhm, pair_rate, predicted_car, temperature_sweep, ForwardModel,
    StrengthPoint, SweepTable,
};
use hssr_core::atomvapor::{thermal_state, ThermalState, REFERENCE_TABLE};
use hssr_core::kernel::{superradiant_rate, DopplerKernel};
use hssr_core::mc::{build_histogram, estimate_p1, io as events_io, sample_events, CoincidenceHistogram};
use hssr_core::units;
use hssr_core::waveform::{l1_distance, Waveform};

use crate::config::{EventFormat, Resolved};
use crate::error::{CliError, CliResult};
use crate::output::{csv, OutDir};

/// Relative tolerance of the optical-depth flag in `table1`.
pub const OD_TOLERANCE: f64 = 0.20;
/// Relative tolerance of the distance-ratio flag, unless the quoted
/// uncertainty is larger.
pub const RSR_TOLERANCE: f64 = 0.10;

pub struct Context<'a> {
    pub config: &'a Resolved,
    pub out: OutDir,
    pub temperature_c: Option<f64>,
    pub seed: Option<u64>,
    pub data: Option<&'a Path>,
}

fn state_at(ctx: &Context, temperature_c: f64) -> CliResult<ThermalState> {
    let e = &ctx.config.experiment;
    Ok(thermal_state(
        units::celsius_to_kelvin(temperature_c),
        &e.geometry,
        &e.species,
        e.kappa,
    )?)
}

struct Model {
    state: ThermalState,
    gamma_sr: f64,
    p1: Waveform,
}

fn model_at(ctx: &Context, temperature_c: f64) -> CliResult<Model> {
    let e = &ctx.config.experiment;
    let state = state_at(ctx, temperature_c)?;
    let gi = e.species.gamma_idler;
    let gamma_sr = superradiant_rate(state.atom_count, e.mu, gi)?;
    let kernel = DopplerKernel::compute(e.grid, &e.drive, gi, e.species.gamma_signal, state.u, &e.quadrature)?;
    Ok(Model {
        state,
        gamma_sr,
        p1: kernel.p1(gamma_sr)?,
    })
}

#[derive(Serialize)]
struct WaveformSummary {
    temperature_c: f64,
    fwhm_ns: f64,
    fwhm_pre_jitter_ns: f64,
    strength: f64,
    r_sr_over_lambda: f64,
    od: f64,
    atom_count: f64,
}

pub fn waveform(ctx: &Context) -> CliResult<()> {
    let t = ctx
        .temperature_c
        .ok_or_else(|| CliError::Validation("waveform needs --temp <°C>".into()))?;
    let e = &ctx.config.experiment;
    let m = model_at(ctx, t)?;
    let conv = convolve_jitter(&m.p1, e.detection.jitter_fwhm)?;
    let summary = WaveformSummary {
        temperature_c: t,
        fwhm_ns: units::s_to_ns(fwhm(&conv)?),
        fwhm_pre_jitter_ns: units::s_to_ns(fwhm(&m.p1)?),
        strength: m.gamma_sr / e.species.gamma_idler,
        r_sr_over_lambda: m.state.r_sr_over_lambda(e.species.lambda_idler),
        od: m.state.optical_depth,
        atom_count: m.state.atom_count,
    };
    let rows =
        m.p1.grid
            .taus()
            .zip(m.p1.values.iter().zip(&conv.values))
            .map(|(tau, (&raw, &c))| vec![units::s_to_ns(tau), raw * 1e-9, c * 1e-9]);
    ctx.out
        .write_str("waveform.csv", &csv(&["tau_ns", "p1_raw", "p1_convolved"], rows))?;
    ctx.out.write_json("waveform.json", &summary)?;
    println!(
        "{t} °C: FWHM {:.4} ns (pre-jitter {:.4} ns), strength {:.2}, r_SR/lambda {:.3}, OD {:.3}",
        summary.fwhm_ns, summary.fwhm_pre_jitter_ns, summary.strength, summary.r_sr_over_lambda, summary.od
    );
    Ok(())
}

fn failures_csv(table: &SweepTable) -> String {
    let mut out = String::from("temperature_C,error\n");
    for f in &table.failures {
        let _ = writeln!(
            out,
            "{:?},\"{}\"",
            f.temperature_c,
            f.error.to_string().replace('"', "'")
        );
    }
    out
}

pub fn sweep(ctx: &Context) -> CliResult<()> {
    let e = &ctx.config.experiment;
    let temps = match ctx.temperature_c {
        Some(t) => vec![t],
        None => ctx.config.raw.sweep.temperatures_c.clone(),
    };
    let table = temperature_sweep(e, &temps)?;
    ctx.out.write_str("sweep.csv", &table.to_csv())?;
    println!("temperature_C  fwhm_ns  doppler_ns  strength  brightness_rel  car");
    for r in &table.rows {
        println!(
            "{:>13.1}  {:>7.4}  {:>10.4}  {:>8.2}  {:>14.4e}  {:>6.1}",
            r.temperature_c, r.fwhm_ns, r.fwhm_doppler_ns, r.strength, r.brightness_rel, r.car_predicted
        );
    }
    if table.failures.is_empty() {
        return Ok(());
    }
    ctx.out.write_str("sweep_failures.csv", &failures_csv(&table))?;
    for f in &table.failures {
        eprintln!("FAILED {} °C: {}", f.temperature_c, f.error);
    }
    Err(CliError::Numeric(format!(
        "{} sweep row(s) failed",
        table.failures.len()
    )))
}

pub const TABLE1_HEADER: [&str; 11] = [
    "temperature_C",
    "od",
    "od_reference",
    "od_reference_err",
    "od_rel_err",
    "od_pass",
    "r_sr_over_lambda",
    "r_reference",
    "r_reference_err",
    "r_rel_err",
    "r_pass",
];

pub fn table1(ctx: &Context) -> CliResult<()> {
    let lambda = ctx.config.experiment.species.lambda_idler;
    let mut rows = Vec::new();
    let mut failed = 0;
    println!("temperature_C      OD  reference  pass   r/lambda  reference  pass");
    for r in REFERENCE_TABLE {
        let state = match state_at(ctx, r.temperature_c) {
            Ok(s) => s,
            Err(e) => {
                failed += 1;
                eprintln!("FAILED {} °C: {e}", r.temperature_c);
                rows.push(vec![
                    r.temperature_c,
                    f64::NAN,
                    r.od,
                    r.od_err,
                    f64::NAN,
                    0.0,
                    f64::NAN,
                    r.r_sr_over_lambda,
                    r.r_sr_over_lambda_err,
                    f64::NAN,
                    0.0,
                ]);
                continue;
            }
        };
        let od_err = (state.optical_depth / r.od - 1.0).abs();
        let ratio = state.r_sr_over_lambda(lambda);
        let r_err = (ratio / r.r_sr_over_lambda - 1.0).abs();
        let od_pass = od_err <= OD_TOLERANCE;
        let r_pass = r_err <= RSR_TOLERANCE.max(r.r_sr_over_lambda_err / r.r_sr_over_lambda);
        failed += usize::from(!od_pass) + usize::from(!r_pass);
        let flag = |p: bool| if p { "ok" } else { "FAIL" };
        println!(
            "{:>13.1}  {:>6.3}  {:>9.2}  {:>4}   {:>8.3}  {:>9.2}  {:>4}",
            r.temperature_c,
            state.optical_depth,
            r.od,
            flag(od_pass),
            ratio,
            r.r_sr_over_lambda,
            flag(r_pass)
        );
        rows.push(vec![
            r.temperature_c,
            state.optical_depth,
            r.od,
            r.od_err,
            od_err,
            f64::from(u8::from(od_pass)),
            ratio,
            r.r_sr_over_lambda,
            r.r_sr_over_lambda_err,
            r_err,
            f64::from(u8::from(r_pass)),
        ]);
    }
    ctx.out.write_str("table1.csv", &csv(&TABLE1_HEADER, rows))?;
    if failed > 0 {
        return Err(CliError::Numeric(format!("{failed} table flag(s) failed")));
    }
    Ok(())
}

/// Header plus numeric rows; blank lines and `#` comments are skipped.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (_, header) = lines.next().ok_or("empty CSV")?;
    let header: Vec<String> = header.split(',').map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (n, line) in lines {
        let row: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| format!("line {}: {e}", n + 1))?;
        if row.len() != header.len() {
            return Err(format!(
                "line {}: expected {} columns, found {}",
                n + 1,
                header.len(),
                row.len()
            ));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

#[derive(Serialize)]
struct FitPoint {
    temperature_c: Option<f64>,
    atom_count: f64,
    measured_fwhm_ns: Option<f64>,
    strength: f64,
    residual: f64,
}

#[derive(Serialize)]
struct FitFailure {
    row: usize,
    error: String,
}

#[derive(Serialize)]
struct FitOutput {
    mu: f64,
    mu_stderr: f64,
    points: Vec<FitPoint>,
    failures: Vec<FitFailure>,
}

pub fn fit_mu_cmd(ctx: &Context) -> CliResult<()> {
    let path = ctx
        .data
        .ok_or_else(|| CliError::Validation("fit-mu needs --data <csv>".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let (header, rows) = read_csv(&text).map_err(|e| CliError::Syntax(format!("{}: {e}", path.display())))?;
    let cols: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    let by_temperature = match cols.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["temperature_c", "fwhm_ns"] => true,
        ["n", "strength"] => false,
        _ => {
            return Err(CliError::Validation(format!(
                "{}: header must be temperature_C,fwhm_ns or N,strength, found {}",
                path.display(),
                header.join(",")
            )))
        }
    };
    let e = &ctx.config.experiment;
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let point = if by_temperature {
            let (t, w) = (row[0], units::ns_to_s(row[1]));
            state_at(ctx, t).and_then(|state| {
                let model = ForwardModel::new(e.grid, &e.drive, &e.species, state.u, &e.detection, &e.quadrature)?
                    .with_max_strength(ctx.config.raw.model.max_strength);
                Ok(StrengthPoint {
                    temperature: state.temperature,
                    atom_count: state.atom_count,
                    measured_fwhm: w,
                    strength: model.invert(w)?,
                })
            })
        } else {
            Ok(StrengthPoint {
                temperature: f64::NAN,
                atom_count: row[0],
                measured_fwhm: f64::NAN,
                strength: row[1],
            })
        };
        match point {
            Ok(p) => points.push(p),
            Err(err) => failures.push(FitFailure {
                row: i + 1,
                error: err.to_string(),
            }),
        }
    }
    let fit = fit_mu(&points)?;
    let finite = |v: f64| v.is_finite().then_some(v);
    let out = FitOutput {
        mu: fit.mu,
        mu_stderr: fit.mu_stderr,
        points: points
            .iter()
            .zip(&fit.residuals)
            .map(|(p, &r)| FitPoint {
                temperature_c: finite(p.temperature).map(units::kelvin_to_celsius),
                atom_count: p.atom_count,
                measured_fwhm_ns: finite(p.measured_fwhm).map(units::s_to_ns),
                strength: p.strength,
                residual: r,
            })
            .collect(),
        failures,
    };
    ctx.out.write_json("fit_mu.json", &out)?;
    println!(
        "mu = {:.6e} +/- {:.2e} from {} point(s)",
        out.mu,
        out.mu_stderr,
        out.points.len()
    );
    if !out.failures.is_empty() {
        for f in &out.failures {
            eprintln!("FAILED row {}: {}", f.row, f.error);
        }
        return Err(CliError::Numeric(format!("{} data row(s) failed", out.failures.len())));
    }
    Ok(())
}

pub const HISTOGRAM_HEADER: &str = "bin_start_ps,bin_end_ps,counts";

fn histogram_csv(h: &CoincidenceHistogram) -> String {
    let bw = (h.bin_width * 1e12).round() as i64;
    let start = (h.tau_min * 1e12).round() as i64;
    let mut out = format!("{HISTOGRAM_HEADER}\n");
    for (k, c) in h.counts.iter().enumerate() {
        let a = start + k as i64 * bw;
        let _ = writeln!(out, "{a},{},{c}", a + bw);
    }
    out
}

/// Inverse of the histogram CSV writer.
#[cfg(test)]
pub fn parse_histogram_csv(text: &str) -> Result<CoincidenceHistogram, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some(HISTOGRAM_HEADER) {
        return Err("unexpected histogram header".into());
    }
    let mut bins = Vec::new();
    for l in lines {
        let f: Result<Vec<i64>, _> = l.split(',').map(|c| c.trim().parse::<i64>()).collect();
        match f.map_err(|e| e.to_string())?[..] {
            [a, b, c] if b > a && c >= 0 => bins.push((a, b, c as u64)),
            _ => return Err(format!("bad histogram row {l:?}")),
        }
    }
    let (first, _, _) = *bins.first().ok_or("histogram has no bins")?;
    let bw = bins[0].1 - bins[0].0;
    Ok(CoincidenceHistogram {
        bin_width: bw as f64 * 1e-12,
        tau_min: first as f64 * 1e-12,
        counts: bins.iter().map(|b| b.2).collect(),
    })
}

#[derive(Serialize)]
struct McSummary {
    seed: u64,
    temperature_c: f64,
    duration_s: f64,
    signal_events: usize,
    idler_events: usize,
    coincidences: u64,
    peak_half_width_ns: f64,
    car: Option<f64>,
    car_sigma: Option<f64>,
    car_predicted: Option<f64>,
    pair_rate_detected: Option<f64>,
    pair_rate_corrected: Option<f64>,
    p1_l1_distance: Option<f64>,
    errors: Vec<String>,
}

pub fn mc(ctx: &Context) -> CliResult<()> {
    let e = &ctx.config.experiment;
    let section = &ctx.config.raw.mc;
    let t = ctx.temperature_c.unwrap_or(section.temperature_c);
    let seed = ctx.seed.unwrap_or(section.seed);
    let rates = e.rates;
    let m = model_at(ctx, t)?;
    let (signal, idler) = sample_events(&rates, &m.p1, section.duration_s, seed)?;

    if matches!(section.event_format, EventFormat::Text | EventFormat::Both) {
        let mut buf = Vec::new();
        events_io::write_text(&mut buf, &signal, &idler)
            .map_err(|err| CliError::io(&ctx.out.path("events.txt"), err))?;
        ctx.out.write_bytes("events.txt", &buf)?;
    }
    if matches!(section.event_format, EventFormat::Binary | EventFormat::Both) {
        let mut buf = Vec::new();
        events_io::write_binary(&mut buf, &signal, &idler)
            .map_err(|err| CliError::io(&ctx.out.path("events.bin"), err))?;
        ctx.out.write_bytes("events.bin", &buf)?;
    }

    let span = (e.grid.start(), e.grid.end());
    let hist = build_histogram(&signal, &idler, e.detection.bin_width, span)?;
    ctx.out.write_str("histogram.csv", &histogram_csv(&hist))?;

    let expected = convolve_jitter(&m.p1, rates.jitter_fwhm)?;
    let windows = e.detection.windows;
    let w = windows.peak_half_width_for(fwhm(&expected)?);
    let mut errors = Vec::new();
    let mut keep = |r: hssr_core::Result<f64>, what: &str| match r {
        Ok(v) => Some(v),
        Err(err) => {
            errors.push(format!("{what}: {err}"));
            None
        }
    };
    let est = car_estimate(&hist, w, windows.accidental_multiple);
    let car = keep(est.clone().map(|c| c.value), "car");
    let car_sigma = est.ok().map(|c| c.sigma);
    let car_predicted = keep(
        predicted_car(
            &expected,
            &rates,
            e.detection.bin_width,
            span,
            w,
            windows.accidental_multiple,
        )
        .map(|c| c.value),
        "car_predicted",
    );
    let pr = pair_rate(&hist, section.duration_s, w, &e.detection);
    let pair_rate_detected = keep(pr.clone().map(|p| p.detected), "pair_rate");
    let pair_rate_corrected = pr.ok().map(|p| p.corrected);
    let estimate = estimate_p1(&hist, w);
    let p1_l1_distance = keep(
        estimate
            .as_ref()
            .map(|p| l1_distance(p, &expected))
            .map_err(Clone::clone),
        "estimate_p1",
    );
    if let Ok(p) = &estimate {
        let rows = p
            .grid
            .taus()
            .zip(&p.values)
            .map(|(tau, &v)| vec![units::s_to_ns(tau), v * 1e-9, expected.interpolate(tau) * 1e-9]);
        ctx.out
            .write_str("p1_estimate.csv", &csv(&["tau_ns", "p1_estimate", "p1_expected"], rows))?;
    }

    let summary = McSummary {
        seed,
        temperature_c: t,
        duration_s: section.duration_s,
        signal_events: signal.len(),
        idler_events: idler.len(),
        coincidences: hist.total(),
        peak_half_width_ns: units::s_to_ns(w),
        car: car.filter(|v| v.is_finite()),
        car_sigma: car_sigma.filter(|v| v.is_finite()),
        car_predicted,
        pair_rate_detected,
        pair_rate_corrected,
        p1_l1_distance,
        errors,
    };
    ctx.out.write_json("mc.json", &summary)?;
    println!(
        "seed {seed}: {} signal / {} idler events, {} coincidences, CAR {} (predicted {}), {} pairs/s detected",
        summary.signal_events,
        summary.idler_events,
        summary.coincidences,
        fmt_opt(summary.car),
        fmt_opt(summary.car_predicted),
        fmt_opt(summary.pair_rate_detected)
    );
    if !summary.errors.is_empty() {
        for err in &summary.errors {
            eprintln!("FAILED {err}");
        }
        return Err(CliError::Numeric(format!(
            "{} estimator(s) failed",
            summary.errors.len()
        )));
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.4e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_csv_round_trip() {
        let h = CoincidenceHistogram {
            bin_width: 5e-12,
            tau_min: -1e-9,
            counts: (0..1200).map(|k| (k * 7919 % 31) as u64).collect(),
        };
        let back = parse_histogram_csv(&histogram_csv(&h)).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn read_csv_checks_columns() {
        let (h, rows) = read_csv("# c\nN,strength\n1e8,116\n\n2e8,231\n").unwrap();
        assert_eq!(h, vec!["N", "strength"]);
        assert_eq!(rows, vec![vec![1e8, 116.0], vec![2e8, 231.0]]);
        assert!(read_csv("N,strength\n1,2,3\n").is_err());
        assert!(read_csv("N,strength\n1,x\n").is_err());
    }
}
