//! Dyadic segmentation, the slope process, its variogram model, and the
//! mean-preserving minimum-variance filter for finite-segmentation noise.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{estimate_segment, EstimatorConfig, HurstEstimate};
use crate::neldermead;
use crate::series::{mean, std_dev};

/// Consecutive non-overlapping windows of a fixed power-of-two length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentPlan {
    pub segment_length: usize,
    pub count: usize,
    /// Trailing samples that do not fill a segment.
    pub remainder: usize,
}

impl SegmentPlan {
    pub fn start(&self, index: usize) -> usize {
        index * self.segment_length
    }

    pub fn windows<'a>(&self, data: &'a [f64]) -> impl Iterator<Item = &'a [f64]> + 'a {
        data.chunks_exact(self.segment_length).take(self.count)
    }
}

pub fn segment_series(total_len: usize, segment_length: usize) -> Result<SegmentPlan> {
    if !segment_length.is_power_of_two() {
        return Err(Error::Config(format!(
            "segment length {segment_length} is not a power of two"
        )));
    }
    if segment_length > total_len {
        return Err(Error::Config(format!(
            "segment length {segment_length} exceeds series length {total_len}"
        )));
    }
    let count = total_len / segment_length;
    let remainder = total_len - count * segment_length;
    if remainder > 0 {
        log::info!(
            "dropping {remainder} trailing samples that do not fill a segment of {segment_length}"
        );
    }
    Ok(SegmentPlan {
        segment_length,
        count,
        remainder,
    })
}

/// One estimate per segment; failures are kept in place so indices stay aligned.
pub fn estimate_segments(
    data: &[f64],
    segment_length: usize,
    config: &EstimatorConfig,
) -> Result<(SegmentPlan, Vec<Result<HurstEstimate>>)> {
    let plan = segment_series(data.len(), segment_length)?;
    let windows: Vec<&[f64]> = plan.windows(data).collect();
    let estimates = windows
        .par_iter()
        .map(|w| estimate_segment(w, config))
        .collect();
    Ok((plan, estimates))
}

/// `V(j) = 1 / (2 (J - j)) sum_k (h[k + j] - h[k])^2` for `j = 1..=max_lag`.
pub fn empirical_variogram(slopes: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let count = slopes.len();
    if max_lag == 0 || max_lag >= count {
        return Err(Error::Input(format!(
            "max lag {max_lag} must lie in 1..{count} for {count} segments"
        )));
    }
    if slopes.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input(
            "slope series contains non-finite values".into(),
        ));
    }
    Ok((1..=max_lag)
        .map(|j| {
            let pairs = count - j;
            let ss: f64 = (0..pairs)
                .map(|k| (slopes[k + j] - slopes[k]).powi(2))
                .sum();
            ss / (2.0 * pairs as f64)
        })
        .collect())
}

/// Exponentially correlated slope process observed with white estimation noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeProcessModel {
    pub sigma_h2: f64,
    pub sigma_zeta2: f64,
    /// Correlation length in samples.
    pub l_h: f64,
    pub segment_length: usize,
    /// Stationary mean of the slope process.
    pub mean: f64,
}

impl SlopeProcessModel {
    /// `E{V(j)} = sigma_h^2 (1 - exp(-L j / l_h)) + sigma_zeta^2`.
    pub fn expected_variogram(&self, lag: f64) -> f64 {
        self.sigma_h2 * (1.0 - (-(self.segment_length as f64) * lag / self.l_h).exp())
            + self.sigma_zeta2
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.sigma_h2, self.sigma_zeta2, self.l_h]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite())
            && self.mean.is_finite()
            && self.segment_length > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid slope-process model {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VariogramFitOptions {
    pub max_iterations: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for VariogramFitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            abs_tol: 1e-26,
            rel_tol: 1e-13,
        }
    }
}

/// Weighted least-squares fit of the exponential variogram model.
///
/// Parameters are searched as `log sigma_h^2`, `log sigma_zeta^2` and
/// `log(l_h / L - 1)`, which keeps both variances positive and the
/// correlation length above one segment. Weights are proportional to the pair
/// count `J - j`. Start: `l_h = 4L`, `sigma_zeta^2 = min(V(1), v / 2)` and
/// `sigma_h^2 = v - sigma_zeta^2`, where `v` is the mean of the upper half of
/// the variogram (the total variance at long lags). The returned `mean` is
/// zero; callers set it from the slope series.
pub fn fit_variogram(
    variogram: &[f64],
    segment_count: usize,
    segment_length: usize,
    options: &VariogramFitOptions,
) -> Result<SlopeProcessModel> {
    let lags = variogram.len();
    if lags < 4 {
        return Err(Error::Input(format!(
            "variogram fit needs at least 4 lags, got {lags}"
        )));
    }
    if segment_count <= lags {
        return Err(Error::Input(format!(
            "{lags} lags need more than {lags} segments, got {segment_count}"
        )));
    }
    if variogram.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Input(
            "variogram values must be finite and non-negative".into(),
        ));
    }
    let tail = &variogram[lags / 2..];
    let total = mean(tail);
    if !(total > 0.0) {
        return Err(Error::Degenerate("variogram is identically zero".into()));
    }

    let seg = segment_length as f64;
    let weights: Vec<f64> = {
        let raw: Vec<f64> = (1..=lags).map(|j| (segment_count - j) as f64).collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / sum).collect()
    };
    let unpack = |x: &[f64]| (x[0].exp(), x[1].exp(), seg * (1.0 + x[2].exp()));
    let objective = |x: &[f64]| {
        let (sh, sz, lh) = unpack(x);
        variogram
            .iter()
            .zip(&weights)
            .enumerate()
            .map(|(i, (v, w))| {
                let j = (i + 1) as f64;
                let model = sh * (1.0 - (-seg * j / lh).exp()) + sz;
                w * ((model - v) / total).powi(2)
            })
            .sum::<f64>()
    };

    let zeta0 = variogram[0].min(total / 2.0).max(total * 1e-3);
    let h0 = (total - zeta0).max(total * 1e-3);
    let start = [h0.ln(), zeta0.ln(), 3f64.ln()];
    let out = neldermead::minimize(
        objective,
        &start,
        &neldermead::Options {
            max_iterations: options.max_iterations,
            abs_tol: options.abs_tol,
            rel_tol: options.rel_tol,
            step: 0.5,
            restarts: 4,
        },
    );
    if !out.converged {
        return Err(Error::Fit {
            message: format!("parameters at stop: {:?}", unpack(&out.x)),
            iterations: out.iterations,
            best_objective: out.value,
        });
    }
    let (sigma_h2, sigma_zeta2, l_h) = unpack(&out.x);
    Ok(SlopeProcessModel {
        sigma_h2,
        sigma_zeta2,
        l_h,
        segment_length,
        mean: 0.0,
    })
}

/// Row-wise minimum-variance filter subject to `Gamma m = m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterMatrix {
    pub gamma: DMatrix<f64>,
    /// Lagrange multipliers of the mean-preservation constraint, one per row.
    pub u: DVector<f64>,
}

/// Tolerance on `|Gamma m - m|_inf`, relative to `max(1, |mean|)`.
const MEAN_PRESERVATION_TOL: f64 = 1e-8;

/// Build `Gamma` for `segment_count` segments.
///
/// Row `i` minimizes `E[(gamma_i . K_hat - h_i)^2]` subject to
/// `gamma_i . m = m_i`, giving `gamma_i = C^{-1} (C_h e_i + u_i m)` with
/// `C = C_h + C_zeta` and
/// `u_i = (m_i - m^T C^{-1} C_h e_i) / (m^T C^{-1} m)`.
pub fn build_filter(model: &SlopeProcessModel, segment_count: usize) -> Result<FilterMatrix> {
    model.validate()?;
    if segment_count == 0 {
        return Err(Error::Input("filter needs at least one segment".into()));
    }
    let n = segment_count;
    let seg = model.segment_length as f64;
    let c_h = DMatrix::from_fn(n, n, |i, j| {
        model.sigma_h2 * (-seg * (i as f64 - j as f64).abs() / model.l_h).exp()
    });
    let mut c = c_h.clone();
    for i in 0..n {
        c[(i, i)] += model.sigma_zeta2;
    }
    let chol = c
        .cholesky()
        .ok_or_else(|| Error::Numeric("C_h + C_zeta is not positive definite".into()))?;
    let m = DVector::from_element(n, model.mean);
    let cinv_m = chol.solve(&m);
    let denom = m.dot(&cinv_m);
    if !(denom.abs() > 0.0) || !denom.is_finite() {
        return Err(Error::Numeric(format!(
            "mean-preservation constraint is degenerate (m^T C^-1 m = {denom})"
        )));
    }
    // m^T C^{-1} C_h e_i = (C_h C^{-1} m)_i
    let proj = &c_h * &cinv_m;
    let u = DVector::from_fn(n, |i, _| (m[i] - proj[i]) / denom);
    // Columns of C^{-1}(C_h + m u^T) are the rows of Gamma.
    let rhs = &c_h + &m * u.transpose();
    let gamma = chol.solve(&rhs).transpose();

    let residual = (&gamma * &m - &m).amax();
    if !(residual < MEAN_PRESERVATION_TOL * model.mean.abs().max(1.0)) {
        return Err(Error::Numeric(format!(
            "filter violates mean preservation by {residual:e}"
        )));
    }
    if gamma.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("filter has non-finite entries".into()));
    }
    Ok(FilterMatrix { gamma, u })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredSlopes {
    pub slopes: Vec<f64>,
    /// `(h - 1) / 2` of the filtered slopes.
    pub hurst: Vec<f64>,
    /// Standard deviation of the Hurst series before filtering.
    pub std_before: f64,
    pub std_after: f64,
}

pub fn apply_filter(filter: &FilterMatrix, slopes: &[f64]) -> Result<FilteredSlopes> {
    if filter.gamma.ncols() != slopes.len() {
        return Err(Error::Input(format!(
            "filter is {}x{} but the slope series has {} entries",
            filter.gamma.nrows(),
            filter.gamma.ncols(),
            slopes.len()
        )));
    }
    let out = &filter.gamma * DVector::from_column_slice(slopes);
    let filtered: Vec<f64> = out.iter().copied().collect();
    let to_hurst = |h: &[f64]| h.iter().map(|v| (v - 1.0) / 2.0).collect::<Vec<_>>();
    let before = to_hurst(slopes);
    let hurst = to_hurst(&filtered);
    Ok(FilteredSlopes {
        std_before: std_dev(&before),
        std_after: std_dev(&hurst),
        slopes: filtered,
        hurst,
    })
}

/// Variogram, model fit, and filter applied to one slope series.
#[derive(Debug, Clone)]
pub struct SlopeFiltering {
    pub variogram: Vec<f64>,
    pub model: SlopeProcessModel,
    pub filter: FilterMatrix,
    pub filtered: FilteredSlopes,
}

/// Default lag count: half the segment count, at least 4 when possible.
pub fn default_max_lag(segment_count: usize) -> Option<usize> {
    let lag = (segment_count / 2).max(4.min(segment_count.saturating_sub(1)));
    (lag >= 4).then_some(lag)
}

pub fn filter_slope_series(
    slopes: &[f64],
    segment_length: usize,
    max_lag: Option<usize>,
    options: &VariogramFitOptions,
) -> Result<SlopeFiltering> {
    let max_lag = match max_lag {
        Some(l) => l,
        None => default_max_lag(slopes.len()).ok_or_else(|| {
            Error::Input(format!(
                "{} segments are too few to fit a variogram",
                slopes.len()
            ))
        })?,
    };
    let variogram = empirical_variogram(slopes, max_lag)?;
    let mut model = fit_variogram(&variogram, slopes.len(), segment_length, options)?;
    model.mean = mean(slopes);
    let filter = build_filter(&model, slopes.len())?;
    let filtered = apply_filter(&filter, slopes)?;
    Ok(SlopeFiltering {
        variogram,
        model,
        filter,
        filtered,
    })
}

/// Results of the full pipeline at one segment length.
#[derive(Debug, Clone)]
pub struct Resolution {
    pub plan: SegmentPlan,
    pub estimates: Vec<HurstEstimate>,
    pub hurst_raw: Vec<f64>,
    /// `None` when filtering was skipped (see `warnings`).
    pub filtering: Option<SlopeFiltering>,
    pub warnings: Vec<String>,
}

impl Resolution {
    pub fn hurst_filtered(&self) -> Option<&[f64]> {
        self.filtering.as_ref().map(|f| f.filtered.hurst.as_slice())
    }

    /// Each segment's value repeated over its span of samples.
    pub fn aligned(values: &[f64], segment_length: usize) -> Vec<f64> {
        values
            .iter()
            .flat_map(|v| std::iter::repeat_n(*v, segment_length))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComparisonConfig {
    pub estimator: EstimatorConfig,
    pub filter: bool,
    pub max_lag: Option<usize>,
    pub fit: VariogramFitOptions,
}

/// Estimate, and optionally filter, at one segment length.
pub fn analyze_resolution(
    data: &[f64],
    segment_length: usize,
    config: &ComparisonConfig,
) -> Result<Resolution> {
    let (plan, results) = estimate_segments(data, segment_length, &config.estimator)?;
    let estimates = results.into_iter().collect::<Result<Vec<_>>>()?;
    let hurst_raw: Vec<f64> = estimates.iter().map(|e| e.hurst).collect();
    let slopes: Vec<f64> = estimates.iter().map(|e| e.h).collect();
    let mut warnings = Vec::new();
    let filtering = if !config.filter {
        None
    } else if config.max_lag.is_none() && default_max_lag(slopes.len()).is_none() {
        let msg = format!(
            "segment length {segment_length}: {} segment(s) are too few to filter; reporting raw estimates",
            slopes.len()
        );
        log::warn!("{msg}");
        warnings.push(msg);
        None
    } else {
        Some(filter_slope_series(
            &slopes,
            segment_length,
            config.max_lag,
            &config.fit,
        )?)
    };
    Ok(Resolution {
        plan,
        estimates,
        hurst_raw,
        filtering,
        warnings,
    })
}

/// Run the pipeline at each segment length for side-by-side comparison.
pub fn multi_resolution_comparison(
    data: &[f64],
    lengths: &[usize],
    config: &ComparisonConfig,
) -> Result<Vec<Resolution>> {
    if lengths.is_empty() {
        return Err(Error::Config("no segment lengths given".into()));
    }
    lengths
        .iter()
        .map(|&l| analyze_resolution(data, l, config))
        .collect()
}
