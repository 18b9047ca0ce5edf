//! Exact fractional Gaussian noise / fBm synthesis by circulant embedding,
//! plus volatility envelopes and geometric-fBm price paths.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Relative tolerance on negative circulant eigenvalues before the embedding is enlarged.
const EIGEN_TOLERANCE: f64 = 1e-10;
const MAX_EMBEDDING_DOUBLINGS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbmSpec {
    pub hurst: f64,
    /// Number of path points, including `B(0) = 0`.
    pub n: usize,
    pub seed: u64,
    pub dt: f64,
}

impl FbmSpec {
    pub fn new(hurst: f64, n: usize, seed: u64) -> Self {
        Self {
            hurst,
            n,
            seed,
            dt: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_open_hurst(self.hurst)?;
        if self.n < 2 {
            return Err(Error::Config(format!(
                "fBm path needs at least 2 points, got {}",
                self.n
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!(
                "sample spacing must be positive, got {}",
                self.dt
            )));
        }
        Ok(())
    }
}

fn check_open_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Hurst parameter {h} outside (0, 1)")))
    }
}

/// Autocovariance of unit-variance fractional Gaussian noise at lag `k`.
pub fn fgn_covariance(k: i64, hurst: f64) -> Result<f64> {
    check_open_hurst(hurst)?;
    Ok(fgn_cov_unchecked(k.unsigned_abs() as f64, hurst))
}

fn fgn_cov_unchecked(k: f64, hurst: f64) -> f64 {
    let e = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// `n` samples of unit-variance fGn, exact in distribution.
pub fn generate_fgn(hurst: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_open_hurst(hurst)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut size = (2 * n.saturating_sub(1)).next_power_of_two().max(2);
    let mut planner = FftPlanner::<f64>::new();
    for _ in 0..=MAX_EMBEDDING_DOUBLINGS {
        let half = size / 2;
        let mut buf: Vec<Complex64> = (0..size)
            .map(|i| {
                let lag = if i <= half { i } else { size - i };
                Complex64::new(fgn_cov_unchecked(lag as f64, hurst), 0.0)
            })
            .collect();
        let fft = planner.plan_fft_forward(size);
        fft.process(&mut buf);
        let lambda_max = buf.iter().map(|c| c.re).fold(f64::MIN, f64::max);
        let lambda_min = buf.iter().map(|c| c.re).fold(f64::MAX, f64::min);
        if lambda_min < -EIGEN_TOLERANCE * lambda_max {
            size *= 2;
            continue;
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let norm = 1.0 / size as f64;
        for c in buf.iter_mut() {
            let amp = (c.re.max(0.0) * norm).sqrt();
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *c = Complex64::new(amp * re, amp * im);
        }
        fft.process(&mut buf);
        return Ok(buf[..n].iter().map(|c| c.re).collect());
    }
    Err(Error::Numeric(format!(
        "circulant embedding has negative eigenvalues for H = {hurst}, n = {n}"
    )))
}

/// Scaled fBm increments `B(t + dt) - B(t)` for `spec.n - 1` steps.
pub fn fbm_increments(spec: &FbmSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let scale = spec.dt.powf(spec.hurst);
    let mut inc = generate_fgn(spec.hurst, spec.n - 1, spec.seed)?;
    if scale != 1.0 {
        inc.iter_mut().for_each(|x| *x *= scale);
    }
    Ok(inc)
}

fn cumulative(increments: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for x in increments {
        acc += x;
        out.push(acc);
    }
    out
}

/// Fractional Brownian motion path with `B(0) = 0`.
pub fn generate_fbm(spec: &FbmSpec) -> Result<TimeSeries> {
    let inc = fbm_increments(spec)?;
    Ok(TimeSeries::with_dt(cumulative(&inc), spec.dt))
}

/// Deterministic or stochastic multiplicative volatility envelope `g(x)`,
/// with `x` the time elapsed since the start of the path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolatilityEnvelope {
    Constant {
        scale: f64,
    },
    /// U-shaped intraday pattern `scale (1 + amplitude (2u - 1)^2)` with
    /// `u` the fractional position within the period.
    Periodic {
        scale: f64,
        amplitude: f64,
        period: f64,
    },
    /// `scale log(x + offset)`.
    LogShift {
        scale: f64,
        offset: f64,
    },
    /// `scale (x + offset) log(x + offset)`.
    #[serde(rename = "xlogx")]
    XLogX {
        scale: f64,
        offset: f64,
    },
    /// `scale (x + offset)^2`.
    Quadratic {
        scale: f64,
        offset: f64,
    },
    /// `level + scale |W(x)|` for a seeded standard Wiener path `W`.
    Wiener {
        scale: f64,
        level: f64,
        seed: u64,
    },
}

impl VolatilityEnvelope {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Periodic { .. } => "periodic",
            Self::LogShift { .. } => "log_shift",
            Self::XLogX { .. } => "xlogx",
            Self::Quadratic { .. } => "quadratic",
            Self::Wiener { .. } => "wiener",
        }
    }

    /// Same envelope with its overall scale multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        match &mut out {
            Self::Constant { scale }
            | Self::Periodic { scale, .. }
            | Self::LogShift { scale, .. }
            | Self::XLogX { scale, .. }
            | Self::Quadratic { scale, .. }
            | Self::Wiener { scale, .. } => *scale *= factor,
        }
        if let Self::Wiener { level, .. } = &mut out {
            *level *= factor;
        }
        out
    }
}

fn positive(value: f64, env: &VolatilityEnvelope, x: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!(
            "{} envelope is not positive at x = {x} (value {value})",
            env.name()
        )))
    }
}

fn deterministic_value(env: &VolatilityEnvelope, x: f64) -> f64 {
    match *env {
        VolatilityEnvelope::Constant { scale } => scale,
        VolatilityEnvelope::Periodic {
            scale,
            amplitude,
            period,
        } => {
            let u = (x / period).rem_euclid(1.0);
            scale * (1.0 + amplitude * (2.0 * u - 1.0).powi(2))
        }
        VolatilityEnvelope::LogShift { scale, offset } => scale * (x + offset).ln(),
        VolatilityEnvelope::XLogX { scale, offset } => {
            let y = x + offset;
            scale * y * y.ln()
        }
        VolatilityEnvelope::Quadratic { scale, offset } => scale * (x + offset).powi(2),
        VolatilityEnvelope::Wiener { .. } => unreachable!("stochastic envelope"),
    }
}

fn wiener_levels(seed: u64, steps: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Vec::with_capacity(steps + 1);
    let mut acc = 0.0;
    w.push(acc);
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        acc += z;
        w.push(acc);
    }
    w
}

/// Envelope value at time `x >= 0`.
///
/// The Wiener kind is sampled on the unit grid and interpolated linearly.
pub fn envelope_value(env: &VolatilityEnvelope, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "envelope time must be non-negative, got {x}"
        )));
    }
    let value = match *env {
        VolatilityEnvelope::Wiener { scale, level, seed } => {
            let i = x.floor() as usize;
            let w = wiener_levels(seed, i + 1);
            let frac = x - i as f64;
            level + scale * (w[i] + frac * (w[i + 1] - w[i])).abs()
        }
        _ => deterministic_value(env, x),
    };
    positive(value, env, x)
}

/// Envelope sampled at `x_i = i * dt` for `i = 0..n`.
pub fn envelope_samples(env: &VolatilityEnvelope, n: usize, dt: f64) -> Result<Vec<f64>> {
    match *env {
        VolatilityEnvelope::Wiener { scale, level, seed } => {
            let horizon = ((n.saturating_sub(1)) as f64 * dt).ceil() as usize;
            let w = wiener_levels(seed, horizon + 1);
            (0..n)
                .map(|i| {
                    let x = i as f64 * dt;
                    let k = x.floor() as usize;
                    let frac = x - k as f64;
                    let v = level + scale * (w[k] + frac * (w[k + 1] - w[k])).abs();
                    positive(v, env, x)
                })
                .collect()
        }
        _ => (0..n)
            .map(|i| {
                let x = i as f64 * dt;
                positive(deterministic_value(env, x), env, x)
            })
            .collect(),
    }
}

/// Price path `P_t = P_0 exp(Y_t)` with its log path `Y_t = log(P_t / P_0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePath {
    pub prices: Vec<f64>,
    pub log_path: TimeSeries,
}

/// `Y_t = mu t + sum_{s < t} g(s) (B(s + dt) - B(s))`, a left-endpoint
/// Riemann-Stieltjes sum of the envelope against fBm.
pub fn geometric_fbm_path(
    spec: &FbmSpec,
    env: &VolatilityEnvelope,
    mu: f64,
    p0: f64,
) -> Result<PricePath> {
    if !(p0 > 0.0) {
        return Err(Error::Domain(format!(
            "initial price must be positive, got {p0}"
        )));
    }
    let inc = fbm_increments(spec)?;
    let g = envelope_samples(env, inc.len(), spec.dt)?;
    let weighted: Vec<f64> = inc.iter().zip(&g).map(|(b, s)| s * b).collect();
    let mut y = cumulative(&weighted);
    if mu != 0.0 {
        y.iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v += mu * i as f64 * spec.dt);
    }
    let prices = y.iter().map(|v| p0 * v.exp()).collect();
    Ok(PricePath {
        prices,
        log_path: TimeSeries::with_dt(y, spec.dt),
    })
}
