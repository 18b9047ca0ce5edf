//! End-to-end runs: load or synthesize a series, estimate, filter, and write
//! outputs plus a `manifest.json` describing the run.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{analyze_segment, EstimatorConfig, HurstEstimate};
use crate::ingest::{ingest_csv, IngestOptions, IngestReport};
use crate::output::{
    read_versioned, write_csv, write_json, CompareRow, HurstRow, PathRow, PriceRow, SegmentRecord,
    SegmentsDocument, SpectrumRow, VariogramDocument, VariogramEntry, SCHEMA_VERSION,
};
use crate::segmentation::{
    analyze_resolution, estimate_segments, filter_slope_series, segment_series, ComparisonConfig,
    Resolution, SegmentPlan, SlopeFiltering, VariogramFitOptions,
};
use crate::series::{mean, std_dev, TimeSeries};
use crate::synth::{geometric_fbm_path, FbmSpec, VolatilityEnvelope};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PATH_FILE: &str = "path.csv";
pub const PRICES_FILE: &str = "prices.csv";
pub const SEGMENTS_FILE: &str = "segments.json";
pub const HURST_FILE: &str = "hurst";
pub const SPECTRUM_FILE: &str = "spectrum";
pub const COMPARE_FILE: &str = "compare";
pub const ALIGNED_FILE: &str = "aligned.csv";
pub const VARIOGRAM_FILE: &str = "variogram.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Synth,
    Estimate,
    Spectrum,
    Filter,
    Compare,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Estimate => "estimate",
            Command::Spectrum => "spectrum",
            Command::Filter => "filter",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Both,
}

/// Synthetic source: geometric fBm with an optional volatility envelope.
/// The default constant unit envelope with zero drift is plain fBm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub hurst: f64,
    pub length: usize,
    pub seed: u64,
    /// Sample spacing; `None` spreads the path over the unit interval.
    pub dt: Option<f64>,
    pub envelope: VolatilityEnvelope,
    pub mu: f64,
    pub p0: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            hurst: 0.6,
            length: 1 << 19,
            seed: 1,
            dt: None,
            envelope: VolatilityEnvelope::Constant { scale: 1.0 },
            mu: 0.0,
            p0: 100.0,
        }
    }
}

impl SynthConfig {
    pub fn spec(&self) -> FbmSpec {
        FbmSpec {
            hurst: self.hurst,
            n: self.length,
            seed: self.seed,
            dt: self.dt.unwrap_or(1.0 / self.length.max(1) as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Price CSV; when absent the series is synthesized from `synth`.
    pub input: Option<PathBuf>,
    pub ingest: IngestOptions,
    pub synth: SynthConfig,
    /// Segment lengths; `estimate`, `spectrum` and `filter` use the first.
    pub segment_lengths: Vec<usize>,
    pub estimator: EstimatorConfig,
    pub filter: bool,
    pub max_lag: Option<usize>,
    pub fit: VariogramFitOptions,
    pub format: OutputFormat,
    pub output_dir: PathBuf,
    /// `segments.json` from a previous `estimate` run, read by `filter`.
    pub segments_file: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            ingest: IngestOptions::default(),
            synth: SynthConfig::default(),
            segment_lengths: vec![1 << 15],
            estimator: EstimatorConfig::default(),
            filter: true,
            max_lag: None,
            fit: VariogramFitOptions::default(),
            format: OutputFormat::Csv,
            output_dir: PathBuf::from("out"),
            segments_file: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self, command: Command) -> Result<()> {
        if self.segment_lengths.is_empty() && command != Command::Synth {
            return Err(Error::Config(
                "at least one segment length is required".into(),
            ));
        }
        if let Some(l) = self.segment_lengths.iter().find(|l| !l.is_power_of_two()) {
            return Err(Error::Config(format!(
                "segment length {l} is not a power of two"
            )));
        }
        crate::wavelet::daubechies_filters(self.estimator.p)?;
        match command {
            Command::Synth => {
                if self.input.is_some() {
                    return Err(Error::Config("synth does not read an input file".into()));
                }
                self.synth.spec().validate()?;
            }
            Command::Filter => {
                if self.segments_file.is_none() {
                    return Err(Error::Config("filter needs a segments file".into()));
                }
            }
            _ => {
                if self.input.is_none() {
                    self.synth.spec().validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn first_segment_length(&self) -> Result<usize> {
        self.segment_lengths
            .first()
            .copied()
            .ok_or_else(|| Error::Config("no segment length given".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    /// `csv` or `synthetic`.
    pub kind: String,
    pub samples: usize,
    pub ingest: Option<IngestReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionSummary {
    pub segment_length: usize,
    pub segments: usize,
    pub dropped_samples: usize,
    pub failed_segments: usize,
    #[serde(rename = "mean_H_raw")]
    pub mean_raw: Option<f64>,
    #[serde(rename = "std_H_raw")]
    pub std_raw: Option<f64>,
    #[serde(rename = "mean_H_filtered")]
    pub mean_filtered: Option<f64>,
    #[serde(rename = "std_H_filtered")]
    pub std_filtered: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestError {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: Command,
    /// `ok` or `error`.
    pub status: String,
    pub config: RunConfig,
    pub input: Option<InputSummary>,
    pub outputs: Vec<String>,
    pub summary: Vec<ResolutionSummary>,
    pub warnings: Vec<String>,
    pub error: Option<ManifestError>,
}

impl Manifest {
    fn new(command: Command, config: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "wavehurst".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            status: "ok".into(),
            config: config.clone(),
            input: None,
            outputs: Vec::new(),
            summary: Vec::new(),
            warnings: Vec::new(),
            error: None,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        read_versioned(path)
    }
}

/// Execute `command` and write its outputs and manifest into `config.output_dir`.
///
/// The manifest is written on failure too, with `status = "error"`.
pub fn run_pipeline(command: Command, config: &RunConfig) -> Result<Manifest> {
    std::fs::create_dir_all(&config.output_dir)?;
    let mut manifest = Manifest::new(command, config);
    let result = config.validate(command).and_then(|_| match command {
        Command::Synth => run_synth(config, &mut manifest),
        Command::Estimate => run_estimate(config, &mut manifest),
        Command::Spectrum => run_spectrum(config, &mut manifest),
        Command::Filter => run_filter(config, &mut manifest),
        Command::Compare => run_compare(config, &mut manifest),
    });
    if let Err(e) = &result {
        manifest.status = "error".into();
        manifest.error = Some(ManifestError {
            kind: e.kind().into(),
            message: e.to_string(),
        });
    }
    write_json(&config.output_dir.join(MANIFEST_FILE), &manifest)?;
    result.map(|_| manifest)
}

/// Load the configured input, or synthesize it. Returns the log path.
pub fn load_series(config: &RunConfig) -> Result<(TimeSeries, InputSummary)> {
    match &config.input {
        Some(path) => {
            let ing = ingest_csv(path, &config.ingest)?;
            let summary = InputSummary {
                kind: "csv".into(),
                samples: ing.log_prices.len(),
                ingest: Some(ing.report),
            };
            Ok((ing.log_prices, summary))
        }
        None => {
            let s = &config.synth;
            let path = geometric_fbm_path(&s.spec(), &s.envelope, s.mu, s.p0)?;
            let summary = InputSummary {
                kind: "synthetic".into(),
                samples: path.log_path.len(),
                ingest: None,
            };
            Ok((path.log_path, summary))
        }
    }
}

fn output(manifest: &mut Manifest, dir: &Path, name: &str) -> PathBuf {
    manifest.outputs.push(name.to_string());
    dir.join(name)
}

#[derive(Serialize)]
struct JsonTable<'a, T> {
    schema_version: u32,
    rows: &'a [T],
}

/// Rows of a table written by the pipeline as `<stem>.json`.
#[derive(Debug, Deserialize)]
pub struct TableDocument<T> {
    pub schema_version: u32,
    pub rows: Vec<T>,
}

fn write_table<T: Serialize>(
    manifest: &mut Manifest,
    config: &RunConfig,
    stem: &str,
    rows: &[T],
) -> Result<()> {
    let dir = &config.output_dir;
    if matches!(config.format, OutputFormat::Csv | OutputFormat::Both) {
        write_csv(&output(manifest, dir, &format!("{stem}.csv")), rows)?;
    }
    if matches!(config.format, OutputFormat::Json | OutputFormat::Both) {
        write_json(
            &output(manifest, dir, &format!("{stem}.json")),
            &JsonTable {
                schema_version: SCHEMA_VERSION,
                rows,
            },
        )?;
    }
    Ok(())
}

fn run_synth(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let s = &config.synth;
    let path = geometric_fbm_path(&s.spec(), &s.envelope, s.mu, s.p0)?;
    manifest.input = Some(InputSummary {
        kind: "synthetic".into(),
        samples: path.prices.len(),
        ingest: None,
    });
    let dir = &config.output_dir;
    let rows: Vec<PathRow> = path
        .log_path
        .values
        .iter()
        .enumerate()
        .map(|(index, &value)| PathRow { index, value })
        .collect();
    write_csv(&output(manifest, dir, PATH_FILE), &rows)?;
    let interval = config.ingest.interval_secs;
    let prices: Vec<PriceRow> = path
        .prices
        .iter()
        .enumerate()
        .map(|(i, &price)| PriceRow {
            timestamp: i as i64 * interval,
            price,
        })
        .collect();
    write_csv(&output(manifest, dir, PRICES_FILE), &prices)
}

fn segment_records(plan: &SegmentPlan, results: &[Result<HurstEstimate>]) -> Vec<SegmentRecord> {
    results
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let base = SegmentRecord {
                segment_index: i,
                start: plan.start(i),
                length: plan.segment_length,
                c: None,
                h: None,
                hurst: None,
                var_h: None,
                scales_used: None,
                error: None,
            };
            match r {
                Ok(e) => SegmentRecord {
                    c: Some(e.c),
                    h: Some(e.h),
                    hurst: Some(e.hurst),
                    var_h: Some(e.variance),
                    scales_used: Some([e.scale_range.j_min, e.scale_range.j_max]),
                    ..base
                },
                Err(err) => SegmentRecord {
                    error: Some(err.to_string()),
                    ..base
                },
            }
        })
        .collect()
}

fn summarize(
    plan: &SegmentPlan,
    failed: usize,
    raw: &[f64],
    filtered: Option<&[f64]>,
) -> ResolutionSummary {
    let stats = |v: &[f64]| (!v.is_empty()).then(|| (mean(v), std_dev(v)));
    let r = stats(raw);
    let f = filtered.and_then(stats);
    ResolutionSummary {
        segment_length: plan.segment_length,
        segments: plan.count,
        dropped_samples: plan.remainder,
        failed_segments: failed,
        mean_raw: r.map(|x| x.0),
        std_raw: r.map(|x| x.1),
        mean_filtered: f.map(|x| x.0),
        std_filtered: f.map(|x| x.1),
    }
}

fn variogram_entry(plan_count: usize, filtering: &SlopeFiltering) -> VariogramEntry {
    VariogramEntry {
        segment_length: filtering.model.segment_length,
        segment_count: plan_count,
        lags: (1..=filtering.variogram.len()).collect(),
        variogram: filtering.variogram.clone(),
        model: filtering.model,
        std_raw: filtering.filtered.std_before,
        std_filtered: filtering.filtered.std_after,
    }
}

fn try_filter(
    slopes: &[f64],
    segment_length: usize,
    config: &RunConfig,
    warnings: &mut Vec<String>,
) -> Result<Option<SlopeFiltering>> {
    if !config.filter {
        return Ok(None);
    }
    if config.max_lag.is_none() && crate::segmentation::default_max_lag(slopes.len()).is_none() {
        let msg = format!(
            "{} segment(s) of length {segment_length} are too few to filter; reporting raw estimates",
            slopes.len()
        );
        log::warn!("{msg}");
        warnings.push(msg);
        return Ok(None);
    }
    filter_slope_series(slopes, segment_length, config.max_lag, &config.fit).map(Some)
}

fn run_estimate(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let (series, input) = load_series(config)?;
    manifest.input = Some(input);
    let seg_len = config.first_segment_length()?;
    let (plan, results) = estimate_segments(series.as_slice(), seg_len, &config.estimator)?;
    let dir = config.output_dir.clone();
    write_json(
        &output(manifest, &dir, SEGMENTS_FILE),
        &SegmentsDocument {
            schema_version: SCHEMA_VERSION,
            segment_length: seg_len,
            segments: segment_records(&plan, &results),
        },
    )?;

    let failed = results.iter().filter(|r| r.is_err()).count();
    if failed == results.len() {
        let first = results
            .into_iter()
            .find_map(|r| r.err())
            .expect("at least one segment");
        return Err(first);
    }
    let ok: Vec<&HurstEstimate> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let raw: Vec<f64> = ok.iter().map(|e| e.hurst).collect();

    let filtering = if failed > 0 {
        let msg = format!("{failed} segment(s) failed; filtering skipped");
        log::warn!("{msg}");
        manifest.warnings.push(msg);
        None
    } else {
        let slopes: Vec<f64> = ok.iter().map(|e| e.h).collect();
        try_filter(&slopes, seg_len, config, &mut manifest.warnings)?
    };

    let filtered_h = filtering.as_ref().map(|f| f.filtered.hurst.as_slice());
    let mut next_ok = 0;
    let rows: Vec<HurstRow> = results
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            let e = r.as_ref().ok()?;
            let row = HurstRow {
                segment: i,
                start: plan.start(i),
                h_raw: e.hurst,
                h_filtered: filtered_h.map(|f| f[next_ok]),
            };
            next_ok += 1;
            Some(row)
        })
        .collect();
    write_table(manifest, config, HURST_FILE, &rows)?;
    if let Some(f) = &filtering {
        write_json(
            &output(manifest, &dir, VARIOGRAM_FILE),
            &VariogramDocument {
                schema_version: SCHEMA_VERSION,
                entries: vec![variogram_entry(plan.count, f)],
            },
        )?;
    }
    manifest
        .summary
        .push(summarize(&plan, failed, &raw, filtered_h));
    Ok(())
}

fn run_spectrum(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let (series, input) = load_series(config)?;
    manifest.input = Some(input);
    let seg_len = config.first_segment_length()?;
    let plan = segment_series(series.len(), seg_len)?;
    let windows: Vec<&[f64]> = plan.windows(series.as_slice()).collect();
    let analyses: Vec<_> = windows
        .par_iter()
        .map(|w| analyze_segment(w, &config.estimator))
        .collect();

    let mut rows = Vec::new();
    for (segment, a) in analyses.iter().enumerate() {
        if let Ok(a) = a {
            let sp = &a.spectrum;
            for (i, j) in sp.scale_range.scales().enumerate() {
                rows.push(SpectrumRow {
                    segment,
                    j,
                    n_j: sp.counts[i],
                    s_j: sp.s[i],
                    log2_s_j: sp.log2_s[i],
                });
            }
        }
    }
    let results: Vec<Result<HurstEstimate>> = analyses
        .into_iter()
        .map(|r| r.map(|a| a.estimate))
        .collect();
    let dir = config.output_dir.clone();
    write_json(
        &output(manifest, &dir, SEGMENTS_FILE),
        &SegmentsDocument {
            schema_version: SCHEMA_VERSION,
            segment_length: seg_len,
            segments: segment_records(&plan, &results),
        },
    )?;
    let failed = results.iter().filter(|r| r.is_err()).count();
    if failed == results.len() {
        return Err(results
            .into_iter()
            .find_map(|r| r.err())
            .expect("non-empty"));
    }
    write_table(manifest, config, SPECTRUM_FILE, &rows)?;
    let raw: Vec<f64> = results
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .map(|e| e.hurst)
        .collect();
    manifest.summary.push(summarize(&plan, failed, &raw, None));
    Ok(())
}

fn run_filter(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let path = config.segments_file.as_ref().expect("validated");
    let doc: SegmentsDocument = read_versioned(path)?;
    let slopes: Vec<f64> = doc
        .segments
        .iter()
        .map(|s| {
            s.h.ok_or_else(|| {
                Error::Input(format!(
                    "segment {} has no estimate{}",
                    s.segment_index,
                    s.error
                        .as_deref()
                        .map(|e| format!(": {e}"))
                        .unwrap_or_default()
                ))
            })
        })
        .collect::<Result<_>>()?;
    manifest.input = Some(InputSummary {
        kind: "segments".into(),
        samples: slopes.len(),
        ingest: None,
    });
    let filtering = filter_slope_series(&slopes, doc.segment_length, config.max_lag, &config.fit)?;
    let rows: Vec<HurstRow> = doc
        .segments
        .iter()
        .zip(&filtering.filtered.hurst)
        .map(|(s, &f)| HurstRow {
            segment: s.segment_index,
            start: s.start,
            h_raw: (s.h.expect("checked") - 1.0) / 2.0,
            h_filtered: Some(f),
        })
        .collect();
    write_table(manifest, config, HURST_FILE, &rows)?;
    let dir = config.output_dir.clone();
    write_json(
        &output(manifest, &dir, VARIOGRAM_FILE),
        &VariogramDocument {
            schema_version: SCHEMA_VERSION,
            entries: vec![variogram_entry(slopes.len(), &filtering)],
        },
    )?;
    let plan = SegmentPlan {
        segment_length: doc.segment_length,
        count: slopes.len(),
        remainder: 0,
    };
    let raw: Vec<f64> = rows.iter().map(|r| r.h_raw).collect();
    manifest
        .summary
        .push(summarize(&plan, 0, &raw, Some(&filtering.filtered.hurst)));
    Ok(())
}

/// Multi-resolution table sampled every `step` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedTable {
    pub step: usize,
    pub starts: Vec<usize>,
    /// `(column name, values)`; missing values are `None`.
    pub columns: Vec<(String, Vec<Option<f64>>)>,
}

impl AlignedTable {
    pub fn from_resolutions(resolutions: &[Resolution]) -> Self {
        let step = resolutions
            .iter()
            .map(|r| r.plan.segment_length)
            .min()
            .unwrap_or(1);
        let span = resolutions
            .iter()
            .map(|r| r.plan.count * r.plan.segment_length)
            .min()
            .unwrap_or(0);
        let starts: Vec<usize> = (0..span / step).map(|i| i * step).collect();
        let mut columns = Vec::new();
        for r in resolutions {
            let l = r.plan.segment_length;
            let pick = |values: &[f64]| starts.iter().map(|s| Some(values[s / l])).collect();
            columns.push((format!("H_raw_L{l}"), pick(&r.hurst_raw)));
            let filtered = match r.hurst_filtered() {
                Some(f) => pick(f),
                None => vec![None; starts.len()],
            };
            columns.push((format!("H_filtered_L{l}"), filtered));
        }
        Self {
            step,
            starts,
            columns,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["start".to_string()];
        header.extend(self.columns.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
        for (i, s) in self.starts.iter().enumerate() {
            let mut rec = vec![s.to_string()];
            rec.extend(
                self.columns
                    .iter()
                    .map(|(_, v)| v[i].map(|x| x.to_string()).unwrap_or_default()),
            );
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.clone();
        if header.get(0) != Some("start") {
            return Err(Error::Input(format!(
                "{}: first column must be 'start'",
                path.display()
            )));
        }
        let mut starts = Vec::new();
        let mut columns: Vec<(String, Vec<Option<f64>>)> = header
            .iter()
            .skip(1)
            .map(|h| (h.to_string(), Vec::new()))
            .collect();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |message: String| Error::Data {
                row: i + 2,
                message,
            };
            starts.push(
                rec[0]
                    .parse()
                    .map_err(|_| bad(format!("bad start '{}'", &rec[0])))?,
            );
            for (c, col) in columns.iter_mut().enumerate() {
                let field = rec.get(c + 1).unwrap_or("");
                col.1.push(if field.is_empty() {
                    None
                } else {
                    Some(
                        field
                            .parse()
                            .map_err(|_| bad(format!("bad value '{field}'")))?,
                    )
                });
            }
        }
        let step = if starts.len() > 1 {
            starts[1] - starts[0]
        } else {
            1
        };
        Ok(Self {
            step,
            starts,
            columns,
        })
    }
}

fn run_compare(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let (series, input) = load_series(config)?;
    manifest.input = Some(input);
    let cmp = ComparisonConfig {
        estimator: config.estimator.clone(),
        filter: config.filter,
        max_lag: config.max_lag,
        fit: config.fit,
    };
    let mut resolutions = Vec::with_capacity(config.segment_lengths.len());
    for &l in &config.segment_lengths {
        let r = analyze_resolution(series.as_slice(), l, &cmp)?;
        manifest.warnings.extend(r.warnings.iter().cloned());
        manifest
            .summary
            .push(summarize(&r.plan, 0, &r.hurst_raw, r.hurst_filtered()));
        resolutions.push(r);
    }

    let rows: Vec<CompareRow> = resolutions
        .iter()
        .flat_map(|r| {
            let filtered = r.hurst_filtered();
            r.hurst_raw
                .iter()
                .enumerate()
                .map(move |(i, &h)| CompareRow {
                    segment_length: r.plan.segment_length,
                    segment: i,
                    start: r.plan.start(i),
                    h_raw: h,
                    h_filtered: filtered.map(|f| f[i]),
                })
        })
        .collect();
    write_table(manifest, config, COMPARE_FILE, &rows)?;
    let dir = config.output_dir.clone();
    AlignedTable::from_resolutions(&resolutions).write(&output(manifest, &dir, ALIGNED_FILE))?;
    let entries: Vec<VariogramEntry> = resolutions
        .iter()
        .filter_map(|r| {
            r.filtering
                .as_ref()
                .map(|f| variogram_entry(r.plan.count, f))
        })
        .collect();
    if !entries.is_empty() {
        write_json(
            &output(manifest, &dir, VARIOGRAM_FILE),
            &VariogramDocument {
                schema_version: SCHEMA_VERSION,
                entries,
            },
        )?;
    }
    Ok(())
}
