//! Generalized least squares fit of the log scale spectrum.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{
    covariance_model, scale_spectrum, CovarianceMode, CovarianceModel, ScaleRange, ScaleSpectrum,
    DEFAULT_MIN_COEFFS,
};
use crate::wavelet::{daubechies_filters, full_decomposition, max_levels, Boundary, DetailPyramid};

/// Detail amplitudes below this fraction of the series' peak magnitude count as zero.
const DEGENERATE_RELATIVE_AMPLITUDE: f64 = 1e-10;

/// Settings shared by every per-segment estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    /// Vanishing moments of the Daubechies wavelet.
    pub p: usize,
    pub boundary: Boundary,
    /// Explicit scale band; `None` selects `ScaleRange::default_for`.
    pub scale_range: Option<ScaleRange>,
    pub min_coeffs: usize,
    pub covariance: CovarianceMode,
    /// Diagonal inflation `c_d` for the full covariance model.
    pub diag_factor: f64,
    /// Subtract the chord joining the first and last sample before a
    /// periodic transform, so the wrap-around does not create a jump.
    /// Leaves every non-wrapping coefficient unchanged when `p >= 2`.
    pub remove_chord: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            p: 2,
            boundary: Boundary::Periodic,
            scale_range: None,
            min_coeffs: DEFAULT_MIN_COEFFS,
            covariance: CovarianceMode::Diagonal,
            diag_factor: 2.0,
            remove_chord: true,
        }
    }
}

/// Two-column regression matrix `[1, j]` over the fitted scales.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix(DMatrix<f64>);

impl DesignMatrix {
    pub fn from_scales(scales: &[usize]) -> Result<Self> {
        let distinct = scales
            .iter()
            .any(|&j| scales.first().is_some_and(|&first| first != j));
        if !distinct {
            return Err(Error::Input(
                "regression needs at least two distinct scales".into(),
            ));
        }
        Ok(Self(DMatrix::from_fn(scales.len(), 2, |i, col| {
            if col == 0 {
                1.0
            } else {
                scales[i] as f64
            }
        })))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlsFit {
    /// Intercept, an estimate of `log2(sigma^2 K(H))`.
    pub c: f64,
    /// Slope, an estimate of `2H + 1`.
    pub h: f64,
    /// `(X^T D^{-1} X)^{-1} / ln(2)^2`, row-major over `(c, h)`.
    pub covariance: [[f64; 2]; 2],
}

/// `b = (X^T D^{-1} X)^{-1} X^T D^{-1} M`.
pub fn gls_fit(
    log_spectrum: &[f64],
    cov: &CovarianceModel,
    design: &DesignMatrix,
) -> Result<GlsFit> {
    let n = log_spectrum.len();
    if design.rows() != n || cov.matrix.nrows() != n || cov.matrix.ncols() != n {
        return Err(Error::Input(format!(
            "dimension mismatch: {} observations, design {}x2, covariance {}x{}",
            n,
            design.rows(),
            cov.matrix.nrows(),
            cov.matrix.ncols()
        )));
    }
    let chol = cov
        .matrix
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Input("covariance matrix is not positive definite".into()))?;
    let x = design.matrix();
    let dinv_x = chol.solve(x);
    let dinv_m = chol.solve(&DVector::from_column_slice(log_spectrum));
    let xt = x.transpose();
    let normal = &xt * &dinv_x;
    let rhs = &xt * &dinv_m;
    let a = Matrix2::new(
        normal[(0, 0)],
        normal[(0, 1)],
        normal[(1, 0)],
        normal[(1, 1)],
    );
    let inv = a
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Input("X^T D^-1 X is singular".into()))?;
    let b = inv * Vector2::new(rhs[0], rhs[1]);
    let scale = 1.0 / (LN_2 * LN_2);
    Ok(GlsFit {
        c: b[0],
        h: b[1],
        covariance: [
            [inv[(0, 0)] * scale, inv[(0, 1)] * scale],
            [inv[(1, 0)] * scale, inv[(1, 1)] * scale],
        ],
    })
}

/// Map a spectrum slope and its variance to `(H, Var(H))` with `H = (h - 1) / 2`.
///
/// Values of `H` outside `(0, 1]` are returned unchanged and logged.
pub fn hurst_from_slope(h: f64, var_h: f64) -> (f64, f64) {
    let hurst = (h - 1.0) / 2.0;
    if !(hurst > 0.0 && hurst <= 1.0) {
        log::warn!("Hurst estimate {hurst:.4} lies outside (0, 1] (slope {h:.4})");
    }
    (hurst, var_h / 4.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub c: f64,
    pub h: f64,
    #[serde(rename = "H")]
    pub hurst: f64,
    /// Variance proxy of the Hurst estimate, `Var(h) / 4`.
    pub variance: f64,
    pub scale_range: ScaleRange,
    /// Number of samples in the segment.
    pub n_points: usize,
}

impl HurstEstimate {
    pub fn in_unit_interval(&self) -> bool {
        self.hurst > 0.0 && self.hurst <= 1.0
    }
}

/// Full output of one segment analysis.
#[derive(Debug, Clone)]
pub struct SegmentAnalysis {
    pub estimate: HurstEstimate,
    pub spectrum: ScaleSpectrum,
    pub fit: GlsFit,
}

fn remove_chord(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let first = values[0];
    let slope = (values[n - 1] - first) / (n - 1) as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v - first - slope * i as f64)
        .collect()
}

fn decompose_segment(
    values: &[f64],
    config: &EstimatorConfig,
) -> Result<(DetailPyramid, ScaleRange)> {
    if values.len() < 2 {
        return Err(Error::Input(format!(
            "segment of length {} is too short",
            values.len()
        )));
    }
    let filters = daubechies_filters(config.p)?;
    let available = max_levels(values.len(), &filters, config.boundary);
    let levels = match config.scale_range {
        Some(r) => {
            if values.len() < 1usize << (r.j_max + 3).min(usize::BITS as usize - 1) {
                return Err(Error::Config(format!(
                    "segment length {} is shorter than 2^(j_max + 3) for j_max = {}",
                    values.len(),
                    r.j_max
                )));
            }
            r.j_max
        }
        None => available,
    };
    let chorded;
    let input = if config.boundary == Boundary::Periodic && config.remove_chord {
        chorded = remove_chord(values);
        &chorded[..]
    } else {
        values
    };
    let pyramid = full_decomposition(input, &filters, levels, config.boundary)?;
    let range = match config.scale_range {
        Some(r) => r,
        None => ScaleRange::default_for(&pyramid.counts(), config.min_coeffs).ok_or_else(|| {
            Error::Config(format!(
                "segment of length {} leaves fewer than two scales with at least {} coefficients",
                values.len(),
                config.min_coeffs
            ))
        })?,
    };
    Ok((pyramid, range))
}

/// Decompose, take the scale spectrum, fit it, and convert the slope.
pub fn analyze_segment(values: &[f64], config: &EstimatorConfig) -> Result<SegmentAnalysis> {
    let (pyramid, range) = decompose_segment(values, config)?;
    let spectrum = scale_spectrum(&pyramid, range, config.min_coeffs)?;
    // Rounding residue of an annihilated polynomial is not signal.
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (DEGENERATE_RELATIVE_AMPLITUDE * peak).powi(2);
    if let Some((j, s)) = spectrum
        .scales()
        .into_iter()
        .zip(&spectrum.s)
        .find(|(_, &s)| s <= floor)
    {
        return Err(Error::Degenerate(format!(
            "scale spectrum is at rounding level at scale {j} (S_j = {s:e})"
        )));
    }
    let cov = covariance_model(&spectrum.counts, config.covariance, config.diag_factor)?;
    let design = DesignMatrix::from_scales(&spectrum.scales())?;
    let fit = gls_fit(&spectrum.log2_s, &cov, &design)?;
    let (hurst, variance) = hurst_from_slope(fit.h, fit.covariance[1][1]);
    Ok(SegmentAnalysis {
        estimate: HurstEstimate {
            c: fit.c,
            h: fit.h,
            hurst,
            variance,
            scale_range: range,
            n_points: values.len(),
        },
        spectrum,
        fit,
    })
}

pub fn estimate_segment(values: &[f64], config: &EstimatorConfig) -> Result<HurstEstimate> {
    analyze_segment(values, config).map(|a| a.estimate)
}
