use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hssr(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hssr"));
    cmd.args(args).env_remove("HSSR_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("run hssr")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = args.to_vec();
    all.extend(["--out", dir.to_str().unwrap()]);
    hssr(&all, &[])
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn table1_defaults_all_distance_flags_pass() {
    let dir = TempDir::new().unwrap();
    let o = run_in(dir.path(), &["table1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = csv_rows(&fs::read_to_string(dir.path().join("table1.csv")).unwrap());
    let r_pass = header.iter().position(|h| h == "r_pass").unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r[r_pass] == 1.0));
    assert!(dir.path().join("run_config.toml").exists());
}

#[test]
fn waveform_endpoints_and_determinism() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        let o = run_in(d.path(), &["waveform", "--temp", "95"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in ["waveform.csv", "waveform.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let s = json(&a.path().join("waveform.json"));
    assert!(rel(s["fwhm_ns"].as_f64().unwrap(), 0.17) < 0.25, "{s}");
    let (header, rows) = csv_rows(&fs::read_to_string(a.path().join("waveform.csv")).unwrap());
    assert_eq!(header, ["tau_ns", "p1_raw", "p1_convolved"]);
    assert_eq!(rows.len(), 1201);
    assert!(rows.iter().filter(|r| r[0] < 0.0).all(|r| r[1] == 0.0));

    let o = run_in(a.path(), &["waveform", "--temp", "21"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = json(&a.path().join("waveform.json"));
    assert!(rel(s["r_sr_over_lambda"].as_f64().unwrap(), 2.04) < 0.10, "{s}");
}

#[test]
fn thread_cap_does_not_change_output() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = |d: &TempDir| -> Vec<String> {
        ["waveform", "--temp", "57", "--out", d.path().to_str().unwrap()]
            .map(String::from)
            .to_vec()
    };
    let argv = args(&a);
    let o = hssr(
        &argv.iter().map(String::as_str).collect::<Vec<_>>(),
        &[("HSSR_THREADS", "1")],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let argv = args(&b);
    let o = hssr(
        &argv.iter().map(String::as_str).collect::<Vec<_>>(),
        &[("HSSR_THREADS", "4")],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read(a.path().join("waveform.csv")).unwrap(),
        fs::read(b.path().join("waveform.csv")).unwrap()
    );
    let o = hssr(
        &["table1", "--out", a.path().to_str().unwrap()],
        &[("HSSR_THREADS", "zero")],
    );
    assert_eq!(code(&o), 4);
}

#[test]
fn sweep_csv_round_trips_and_flags_failures() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[sweep]\ntemperatures_c = [95, 21]\n");
    let o = run_in(dir.path(), &["sweep", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let table = hssr_core::analysis::SweepTable::from_csv(&text).unwrap();
    assert_eq!(table.to_csv(), text);
    assert_eq!(table.rows[0].temperature_c, 21.0);
    assert!(text.lines().next().unwrap().contains("fwhm_doppler_ns"));

    let cfg = write_config(dir.path(), "bad.toml", "[sweep]\ntemperatures_c = [21, 500]\n");
    let o = run_in(dir.path(), &["sweep", "--config", &cfg]);
    assert_eq!(code(&o), 5);
    let failures = fs::read_to_string(dir.path().join("sweep_failures.csv")).unwrap();
    assert!(failures.contains("500.0"), "{failures}");
}

#[test]
fn fit_mu_noiseless_strengths() {
    let dir = TempDir::new().unwrap();
    let mu0 = 1.15e-6;
    let mut data = String::from("N,strength\n");
    for n in [6.2e5, 3.1e6, 1.4e7, 4.4e7, 2.2e8] {
        data.push_str(&format!("{n:?},{:?}\n", 1.0 + mu0 * n));
    }
    let path = write_config(dir.path(), "data.csv", &data);
    let o = run_in(dir.path(), &["fit-mu", "--data", &path]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&dir.path().join("fit_mu.json"));
    assert!(rel(r["mu"].as_f64().unwrap(), mu0) < 1e-10, "{r}");
    assert_eq!(r["points"].as_array().unwrap().len(), 5);
}

#[test]
fn fit_mu_from_forward_widths() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[sweep]\ntemperatures_c = [49, 76, 95]\n");
    let o = run_in(dir.path(), &["sweep", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table =
        hssr_core::analysis::SweepTable::from_csv(&fs::read_to_string(dir.path().join("sweep.csv")).unwrap()).unwrap();
    let mut data = String::from("temperature_C,fwhm_ns\n");
    for r in &table.rows {
        data.push_str(&format!("{:?},{:?}\n", r.temperature_c, r.fwhm_ns));
    }
    let path = write_config(dir.path(), "widths.csv", &data);
    let o = run_in(dir.path(), &["fit-mu", "--data", &path]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&dir.path().join("fit_mu.json"));
    assert!(rel(r["mu"].as_f64().unwrap(), 1.15e-6) < 1e-3, "{r}");

    let path = write_config(dir.path(), "bad.csv", "temperature_C,fwhm_ns\n95,0.17\n95,5.0\n");
    assert_eq!(code(&run_in(dir.path(), &["fit-mu", "--data", &path])), 5);
    let path = write_config(dir.path(), "hdr.csv", "a,b\n1,2\n");
    assert_eq!(code(&run_in(dir.path(), &["fit-mu", "--data", &path])), 4);
}

#[test]
fn mc_is_byte_identical_per_seed() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = write_config(a.path(), "c.toml", "[mc]\nduration_s = 0.05\nevent_format = \"both\"\n");
    for d in [&a, &b] {
        let o = run_in(d.path(), &["mc", "--config", &cfg, "--seed", "42"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in [
        "events.txt",
        "events.bin",
        "histogram.csv",
        "mc.json",
        "p1_estimate.csv",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let text = fs::read(a.path().join("events.txt")).unwrap();
    let (s, i) = hssr_core::mc::io::read_text(&text[..]).unwrap();
    let bin = fs::read(a.path().join("events.bin")).unwrap();
    assert_eq!(
        hssr_core::mc::io::read_binary(&bin[..], s.duration_ps, s.seed).unwrap(),
        (s.clone(), i.clone())
    );
    assert_eq!(s.seed, 42);
    let summary = json(&a.path().join("mc.json"));
    assert_eq!(summary["signal_events"].as_u64().unwrap() as usize, s.len());
    assert!(summary["car"].as_f64().unwrap() > 1.0, "{summary}");

    let o = run_in(b.path(), &["mc", "--config", &cfg, "--seed", "43"]);
    assert_eq!(code(&o), 0);
    assert_ne!(
        fs::read(a.path().join("events.bin")).unwrap(),
        fs::read(b.path().join("events.bin")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = run_in(dir.path(), &["table1", "--config", missing.to_str().unwrap()]);
    assert_eq!(code(&o), 2);

    let cfg = write_config(dir.path(), "syntax.toml", "[geometry\n");
    assert_eq!(code(&run_in(dir.path(), &["table1", "--config", &cfg])), 3);

    let cfg = write_config(dir.path(), "neg.toml", "[geometry]\nlength_mm = -1.0\n");
    let o = run_in(dir.path(), &["table1", "--config", &cfg]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("geometry.length"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "unknown.toml", "[mc]\nsed = 1\n");
    assert_eq!(code(&run_in(dir.path(), &["table1", "--config", &cfg])), 4);

    assert_eq!(code(&run_in(dir.path(), &["waveform", "--temp", "500"])), 4);
    assert_eq!(code(&run_in(dir.path(), &["waveform"])), 4);
    assert_eq!(code(&hssr(&["frobnicate"], &[])), 3);
    assert_eq!(code(&hssr(&["--help"], &[])), 0);
}
