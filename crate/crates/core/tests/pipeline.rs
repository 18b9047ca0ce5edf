use std::fs;
use std::path::Path;

use wavehurst::output::{
    read_csv, read_versioned, HurstRow, PathRow, SegmentsDocument, SpectrumRow, VariogramDocument,
};
use wavehurst::pipeline::{
    run_pipeline, AlignedTable, Command, Manifest, OutputFormat, RunConfig, TableDocument,
};
use wavehurst::Error;

fn config(dir: &Path) -> RunConfig {
    let mut c = RunConfig::default();
    c.synth.length = 1 << 16;
    c.synth.seed = 12;
    c.segment_lengths = vec![1 << 12];
    c.output_dir = dir.to_path_buf();
    c
}

#[test]
fn estimate_outputs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path());
    c.format = OutputFormat::Both;
    let manifest = run_pipeline(Command::Estimate, &c).unwrap();
    assert_eq!(manifest.status, "ok");

    let back = Manifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(back, manifest);
    assert_eq!(back.config, c);

    let segs: SegmentsDocument = read_versioned(&dir.path().join("segments.json")).unwrap();
    assert_eq!(segs.segments.len(), 16);
    let csv_rows: Vec<HurstRow> = read_csv(&dir.path().join("hurst.csv")).unwrap();
    let json_rows: TableDocument<HurstRow> =
        read_versioned(&dir.path().join("hurst.json")).unwrap();
    assert_eq!(csv_rows, json_rows.rows);
    for (row, rec) in csv_rows.iter().zip(&segs.segments) {
        assert_eq!(Some(row.h_raw), rec.hurst);
        assert_eq!(row.start, rec.start);
        assert!(row.h_filtered.is_some());
    }
    let vario: VariogramDocument = read_versioned(&dir.path().join("variogram.json")).unwrap();
    assert_eq!(vario.entries.len(), 1);
    assert_eq!(vario.entries[0].variogram.len(), 8);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_pipeline(Command::Estimate, &config(a.path())).unwrap();
    run_pipeline(Command::Estimate, &config(b.path())).unwrap();
    for name in ["segments.json", "hurst.csv", "variogram.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    // Manifests differ only in the output directory.
    let ma = Manifest::read(&a.path().join("manifest.json")).unwrap();
    let mut mb = Manifest::read(&b.path().join("manifest.json")).unwrap();
    mb.config.output_dir = ma.config.output_dir.clone();
    assert_eq!(ma, mb);
}

#[test]
fn filter_reproduces_estimate() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(Command::Estimate, &config(dir.path())).unwrap();
    let est: Vec<HurstRow> = read_csv(&dir.path().join("hurst.csv")).unwrap();

    let out = tempfile::tempdir().unwrap();
    let mut c = config(out.path());
    c.segments_file = Some(dir.path().join("segments.json"));
    run_pipeline(Command::Filter, &c).unwrap();
    let filt: Vec<HurstRow> = read_csv(&out.path().join("hurst.csv")).unwrap();
    assert_eq!(est.len(), filt.len());
    for (a, b) in est.iter().zip(&filt) {
        assert!((a.h_raw - b.h_raw).abs() < 1e-14);
        assert_eq!(a.h_filtered, b.h_filtered);
    }
}

#[test]
fn synth_prices_ingest_back_to_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path());
    c.synth.length = 5000;
    run_pipeline(Command::Synth, &c).unwrap();
    let path: Vec<PathRow> = read_csv(&dir.path().join("path.csv")).unwrap();
    assert_eq!(path.len(), 5000);

    let ingested = wavehurst::ingest::ingest_csv(
        &dir.path().join("prices.csv"),
        &wavehurst::ingest::IngestOptions::default(),
    )
    .unwrap();
    for (row, y) in path.iter().zip(&ingested.log_prices.values) {
        assert!((row.value - y).abs() < 1e-9);
    }
}

#[test]
fn spectrum_rows_cover_every_segment() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(Command::Spectrum, &config(dir.path())).unwrap();
    let rows: Vec<SpectrumRow> = read_csv(&dir.path().join("spectrum.csv")).unwrap();
    let text = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(text.starts_with("segment,j,N_j,S_j,log2_S_j\n"));
    // 4096 samples: scales 4..=9 by default.
    assert_eq!(rows.len(), 16 * 6);
    for r in &rows {
        assert_eq!(r.n_j, 4096 >> r.j);
        assert!((r.s_j.log2() - r.log2_s_j).abs() < 1e-12);
    }
}

#[test]
fn compare_aligns_resolutions() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path());
    c.segment_lengths = vec![1 << 12, 1 << 13, 1 << 14];
    let manifest = run_pipeline(Command::Compare, &c).unwrap();
    assert_eq!(manifest.summary.len(), 3);
    let path = dir.path().join("aligned.csv");
    let table = AlignedTable::read(&path).unwrap();
    assert_eq!(table.step, 4096);
    assert_eq!(table.starts.len(), 16);
    assert_eq!(table.columns.len(), 6);
    // L = 2^14 gives 4 segments: too few to filter.
    assert!(table.columns[5].1.iter().all(Option::is_none));
    assert!(!manifest.warnings.is_empty());
    let copy = dir.path().join("copy.csv");
    table.write(&copy).unwrap();
    assert_eq!(fs::read(&path).unwrap(), fs::read(&copy).unwrap());
}

#[test]
fn constant_prices_fail_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.csv");
    let mut text = String::from("timestamp,price\n");
    for i in 0..8192 {
        text.push_str(&format!("{},42.5\n", i * 60));
    }
    fs::write(&input, text).unwrap();
    let out = dir.path().join("out");
    let mut c = config(&out);
    c.input = Some(input);
    let err = run_pipeline(Command::Estimate, &c).unwrap_err();
    assert!(matches!(err, Error::Degenerate(_)), "{err}");
    let m = Manifest::read(&out.join("manifest.json")).unwrap();
    assert_eq!(m.status, "error");
    assert_eq!(m.error.unwrap().kind, "degenerate");
}

#[test]
fn forward_fill_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("gappy.csv");
    let path = wavehurst::synth::generate_fbm(&wavehurst::synth::FbmSpec {
        dt: 1.0 / 8192.0,
        ..wavehurst::synth::FbmSpec::new(0.6, 8192, 4)
    })
    .unwrap();
    let mut text = String::from("timestamp,price\n");
    for (i, y) in path.values.iter().enumerate() {
        if i != 100 {
            text.push_str(&format!("{},{}\n", i * 60, 100.0 * y.exp()));
        }
    }
    fs::write(&input, text).unwrap();
    let out = dir.path().join("out");
    let mut c = config(&out);
    c.input = Some(input.clone());
    c.filter = false;
    assert!(run_pipeline(Command::Estimate, &c).is_err());

    c.ingest.gap_policy = wavehurst::ingest::GapPolicy::ForwardFill;
    let m = run_pipeline(Command::Estimate, &c).unwrap();
    let ingest = m.input.unwrap().ingest.unwrap();
    assert_eq!((ingest.filled, ingest.gaps), (1, 1));
    assert_eq!(m.summary[0].segments, 2);
}

#[test]
fn invalid_configs_are_rejected_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path());
    c.segment_lengths = vec![1000];
    assert!(matches!(
        run_pipeline(Command::Estimate, &c),
        Err(Error::Config(_))
    ));
    let mut c = config(dir.path());
    c.estimator.p = 7;
    assert!(matches!(
        run_pipeline(Command::Estimate, &c),
        Err(Error::Config(_))
    ));
    let c = config(dir.path());
    assert!(matches!(
        run_pipeline(Command::Filter, &c),
        Err(Error::Config(_))
    ));
}
