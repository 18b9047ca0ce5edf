use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wavehurst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavehurst"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn hurst_values(dir: &Path) -> Vec<f64> {
    json(&dir.join("segments.json"))["segments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["H"].as_f64().unwrap())
        .collect()
}

#[test]
fn synthetic_estimate_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = wavehurst(&[
        "estimate",
        "--synth",
        "fbm",
        "--hurst",
        "0.6",
        "--length",
        "524288",
        "--segment-length",
        "32768",
        "--seed",
        "1",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let h = hurst_values(dir.path());
    assert_eq!(h.len(), 16);
    let mean = h.iter().sum::<f64>() / 16.0;
    assert!((0.57..=0.63).contains(&mean), "mean {mean}");
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["config"]["synth"]["seed"], 1);
    let csv = fs::read_to_string(dir.path().join("hurst.csv")).unwrap();
    assert!(csv.starts_with("segment,start,H_raw,H_filtered\n"));
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = wavehurst(&[
            "estimate",
            "--length",
            "65536",
            "--segment-length",
            "4096",
            "--seed",
            "9",
            "--format",
            "json",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    for name in ["segments.json", "hurst.json", "variogram.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn csv_input_one_record_per_window() {
    let dir = tempfile::tempdir().unwrap();
    let synth = dir.path().join("synth");
    let o = wavehurst(&[
        "synth",
        "--length",
        "20000",
        "--seed",
        "4",
        "--out",
        synth.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let est = dir.path().join("est");
    let o = wavehurst(&[
        "estimate",
        "--input",
        synth.join("prices.csv").to_str().unwrap(),
        "--segment-length",
        "4096",
        "--no-filter",
        "--out",
        est.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(hurst_values(&est).len(), 4);
    assert!(!est.join("variogram.json").exists());
    let manifest = json(&est.join("manifest.json"));
    assert_eq!(manifest["summary"][0]["dropped_samples"], 20000 - 4 * 4096);
}

#[test]
fn compare_writes_aligned_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavehurst(&[
        "compare",
        "--length",
        "262144",
        "--segment-lengths",
        "4096,8192,16384,32768",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("aligned.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 9);
    assert_eq!(text.lines().count(), 1 + 64);
    assert_eq!(
        json(&dir.path().join("manifest.json"))["summary"]
            .as_array()
            .unwrap()
            .len(),
        4
    );
}

#[test]
fn constant_prices_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.csv");
    let mut text = String::from("timestamp,price\n");
    for i in 0..4096 {
        text.push_str(&format!("{},10\n", i * 60));
    }
    fs::write(&input, text).unwrap();
    let out = dir.path().join("out");
    let o = wavehurst(&[
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--segment-length",
        "1024",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["status"], "error");
    assert_eq!(manifest["error"]["kind"], "degenerate");
}

#[test]
fn bad_price_row_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "timestamp,price\n0,10\n60,0\n").unwrap();
    let o = wavehurst(&[
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 3"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "segment_lengths = [8192]\nfilter = false\n\n[synth]\nhurst = 0.7\nlength = 65536\nseed = 3\n\n[estimator]\np = 3\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = wavehurst(&[
        "estimate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["config"]["synth"]["seed"], 5);
    assert_eq!(m["config"]["synth"]["hurst"], 0.7);
    assert_eq!(m["config"]["estimator"]["p"], 3);
    assert_eq!(m["config"]["segment_lengths"][0], 8192);
    // Untouched fields keep their defaults.
    assert_eq!(m["config"]["estimator"]["min_coeffs"], 8);
    assert_eq!(hurst_values(&out).len(), 8);

    let json_cfg = dir.path().join("run.json");
    fs::write(
        &json_cfg,
        r#"{"synth": {"length": 32768}, "segment_lengths": [4096]}"#,
    )
    .unwrap();
    let out = dir.path().join("j");
    let o = wavehurst(&[
        "estimate",
        "--config",
        json_cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(hurst_values(&out).len(), 8);
}

#[test]
fn filter_subcommand_reads_segments() {
    let dir = tempfile::tempdir().unwrap();
    let est = dir.path().join("est");
    assert!(wavehurst(&[
        "estimate",
        "--length",
        "131072",
        "--segment-length",
        "4096",
        "--out",
        est.to_str().unwrap(),
    ])
    .status
    .success());
    let out = dir.path().join("filt");
    let o = wavehurst(&[
        "filter",
        "--segments",
        est.join("segments.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(est.join("hurst.csv")).unwrap(),
        fs::read(out.join("hurst.csv")).unwrap()
    );
}

#[test]
fn usage_errors() {
    let o = wavehurst(&[
        "estimate",
        "--segment-length",
        "1000",
        "--out",
        "/nonexistent/x",
    ]);
    assert!(!o.status.success());
    let o = wavehurst(&["estimate", "--scales", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = wavehurst(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}
