use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use wavehurst::ingest::GapPolicy;
use wavehurst::pipeline::{run_pipeline, Command, OutputFormat, RunConfig};
use wavehurst::spectrum::{CovarianceMode, ScaleRange};
use wavehurst::wavelet::Boundary;
use wavehurst::Error;

/// Wavelet Hurst-exponent estimation over dyadic segments.
#[derive(Debug, Parser)]
#[command(name = "wavehurst", version, about)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Write a synthetic fBm log-price path and price file.
    Synth(Opts),
    /// Estimate H per segment, then filter the slope series.
    Estimate(Opts),
    /// Write the scale spectrum of every segment.
    Spectrum(Opts),
    /// Filter the slope series of a previous `estimate` run.
    Filter(Opts),
    /// Estimate at several segment lengths and align the results.
    Compare(Opts),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SynthKind {
    Fbm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Periodic,
    Valid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CovarianceArg {
    Diagonal,
    Full,
}

#[derive(Debug, Clone, Args)]
struct Opts {
    /// TOML or JSON run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    /// Price CSV to analyze.
    #[arg(long, conflicts_with = "synth")]
    input: Option<PathBuf>,

    /// Price column, by header name or zero-based index.
    #[arg(long)]
    price_column: Option<String>,

    /// Timestamp column, by header name or index.
    #[arg(long, conflicts_with = "no_timestamps")]
    timestamp_column: Option<String>,

    /// Treat rows as uniformly spaced and ignore timestamps.
    #[arg(long)]
    no_timestamps: bool,

    /// Sampling interval in seconds.
    #[arg(long)]
    interval: Option<i64>,

    /// error, forward-fill or ignore.
    #[arg(long)]
    gap_policy: Option<GapPolicy>,

    /// Synthesize the input instead of reading a file.
    #[arg(long, value_enum)]
    synth: Option<SynthKind>,

    #[arg(long)]
    hurst: Option<f64>,

    /// Number of synthetic samples.
    #[arg(long)]
    length: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    /// Synthetic sampling step.
    #[arg(long)]
    dt: Option<f64>,

    /// Drift of the synthetic log price.
    #[arg(long)]
    mu: Option<f64>,

    #[arg(long, conflicts_with = "segment_lengths")]
    segment_length: Option<usize>,

    /// Comma-separated segment lengths.
    #[arg(long, value_delimiter = ',')]
    segment_lengths: Option<Vec<usize>>,

    /// Daubechies order, 1 to 4.
    #[arg(short = 'p', long = "order")]
    order: Option<usize>,

    #[arg(long, value_enum)]
    boundary: Option<BoundaryArg>,

    /// Scale band as `JMIN:JMAX`.
    #[arg(long)]
    scales: Option<String>,

    /// Minimum coefficients per scale for the default band.
    #[arg(long)]
    min_coeffs: Option<usize>,

    #[arg(long, value_enum)]
    covariance: Option<CovarianceArg>,

    /// Diagonal inflation factor for the full covariance.
    #[arg(long)]
    diag_factor: Option<f64>,

    /// Keep the chord between segment endpoints.
    #[arg(long)]
    keep_chord: bool,

    /// Report raw estimates only.
    #[arg(long)]
    no_filter: bool,

    /// Largest variogram lag used in the fit.
    #[arg(long)]
    max_lag: Option<usize>,

    /// `segments.json` from a previous estimate run.
    #[arg(long)]
    segments: Option<PathBuf>,
}

fn parse_scales(raw: &str) -> anyhow::Result<ScaleRange> {
    let (a, b) = raw
        .split_once(':')
        .with_context(|| format!("scale band '{raw}' is not JMIN:JMAX"))?;
    Ok(ScaleRange::new(a.trim().parse()?, b.trim().parse()?)?)
}

fn load_config_file(path: &Path) -> anyhow::Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let config = if is_json {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    };
    Ok(config)
}

fn build_config(opts: &Opts) -> anyhow::Result<RunConfig> {
    let mut c = match &opts.config {
        Some(path) => load_config_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &opts.out {
        c.output_dir = v.clone();
    }
    if let Some(v) = opts.format {
        c.format = match v {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Both => OutputFormat::Both,
        };
    }
    if let Some(v) = &opts.input {
        c.input = Some(v.clone());
    }
    if opts.synth.is_some() {
        c.input = None;
    }
    if let Some(v) = &opts.price_column {
        c.ingest.price_column = v.clone();
    }
    if let Some(v) = &opts.timestamp_column {
        c.ingest.timestamp_column = Some(v.clone());
    }
    if opts.no_timestamps {
        c.ingest.timestamp_column = None;
    }
    if let Some(v) = opts.interval {
        c.ingest.interval_secs = v;
    }
    if let Some(v) = opts.gap_policy {
        c.ingest.gap_policy = v;
    }
    if let Some(v) = opts.hurst {
        c.synth.hurst = v;
    }
    if let Some(v) = opts.length {
        c.synth.length = v;
    }
    if let Some(v) = opts.seed {
        c.synth.seed = v;
    }
    if let Some(v) = opts.dt {
        c.synth.dt = Some(v);
    }
    if let Some(v) = opts.mu {
        c.synth.mu = v;
    }
    if let Some(v) = opts.segment_length {
        c.segment_lengths = vec![v];
    }
    if let Some(v) = &opts.segment_lengths {
        if v.is_empty() {
            bail!("--segment-lengths needs at least one value");
        }
        c.segment_lengths = v.clone();
    }
    if let Some(v) = opts.order {
        c.estimator.p = v;
    }
    if let Some(v) = opts.boundary {
        c.estimator.boundary = match v {
            BoundaryArg::Periodic => Boundary::Periodic,
            BoundaryArg::Valid => Boundary::Valid,
        };
    }
    if let Some(v) = &opts.scales {
        c.estimator.scale_range = Some(parse_scales(v)?);
    }
    if let Some(v) = opts.min_coeffs {
        c.estimator.min_coeffs = v;
    }
    if let Some(v) = opts.covariance {
        c.estimator.covariance = match v {
            CovarianceArg::Diagonal => CovarianceMode::Diagonal,
            CovarianceArg::Full => CovarianceMode::Full,
        };
    }
    if let Some(v) = opts.diag_factor {
        c.estimator.diag_factor = v;
    }
    if opts.keep_chord {
        c.estimator.remove_chord = false;
    }
    if opts.no_filter {
        c.filter = false;
    }
    if let Some(v) = opts.max_lag {
        c.max_lag = Some(v);
    }
    if let Some(v) = &opts.segments {
        c.segments_file = Some(v.clone());
    }
    Ok(c)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::Input(_) | Error::Data { .. } | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let (command, opts) = match &cli.command {
        Sub::Synth(o) => (Command::Synth, o),
        Sub::Estimate(o) => (Command::Estimate, o),
        Sub::Spectrum(o) => (Command::Spectrum, o),
        Sub::Filter(o) => (Command::Filter, o),
        Sub::Compare(o) => (Command::Compare, o),
    };
    let config = match build_config(opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run_pipeline(command, &config) {
        Ok(manifest) => {
            for s in &manifest.summary {
                let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
                println!(
                    "L={} segments={} failed={} H_raw={} ± {} H_filtered={} ± {}",
                    s.segment_length,
                    s.segments,
                    s.failed_segments,
                    fmt(s.mean_raw),
                    fmt(s.std_raw),
                    fmt(s.mean_filtered),
                    fmt(s.std_filtered),
                );
            }
            println!("wrote {}", config.output_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error ({}): {e}", e.kind());
            ExitCode::from(exit_code(&e))
        }
    }
}
