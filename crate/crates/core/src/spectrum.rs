//! Scale spectrum of detail coefficients and its fBm model.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavelet::DetailPyramid;

/// Minimum number of coefficients for a scale to enter the spectrum by default.
pub const DEFAULT_MIN_COEFFS: usize = 8;

/// Finest scale used by default. The two finest scales of a sampled path
/// carry a discretization bias that pulls the slope down for `p >= 2`.
pub const DEFAULT_J_MIN: usize = 4;

/// Inclusive range of scales `[j_min, j_max]`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleRange {
    pub j_min: usize,
    pub j_max: usize,
}

impl ScaleRange {
    pub fn new(j_min: usize, j_max: usize) -> Result<Self> {
        if j_min == 0 || j_max < j_min {
            return Err(Error::Config(format!(
                "invalid scale range [{j_min}, {j_max}]"
            )));
        }
        Ok(Self { j_min, j_max })
    }

    pub fn len(&self) -> usize {
        self.j_max - self.j_min + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn scales(&self) -> impl Iterator<Item = usize> {
        self.j_min..=self.j_max
    }

    /// Default band: start at `DEFAULT_J_MIN` and stop at the last scale that
    /// still has `min_coeffs` coefficients. `None` when that leaves fewer
    /// than two scales.
    pub fn default_for(counts: &[usize], min_coeffs: usize) -> Option<Self> {
        let j_max = counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n >= min_coeffs)
            .map(|(i, _)| i + 1)
            .max()?;
        (j_max > DEFAULT_J_MIN).then_some(Self {
            j_min: DEFAULT_J_MIN,
            j_max,
        })
    }
}

/// Per-scale empirical variance of the detail coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSpectrum {
    /// `s[i]` is `S_j` for `j = scale_range.j_min + i`.
    pub s: Vec<f64>,
    pub log2_s: Vec<f64>,
    pub counts: Vec<usize>,
    pub scale_range: ScaleRange,
}

impl ScaleSpectrum {
    pub fn scales(&self) -> Vec<usize> {
        self.scale_range.scales().collect()
    }
}

/// `S_j = (1 / N_j) sum_k d_j(k)^2` over the scales in `range`.
pub fn scale_spectrum(
    pyramid: &DetailPyramid,
    range: ScaleRange,
    min_coeffs: usize,
) -> Result<ScaleSpectrum> {
    if range.j_max > pyramid.levels() {
        return Err(Error::Config(format!(
            "scale range reaches j = {} but the pyramid has {} levels",
            range.j_max,
            pyramid.levels()
        )));
    }
    let mut s = Vec::with_capacity(range.len());
    let mut counts = Vec::with_capacity(range.len());
    for j in range.scales() {
        let d = pyramid.detail(j).expect("checked above");
        if d.len() < min_coeffs {
            return Err(Error::Config(format!(
                "scale {j} has {} coefficients, fewer than the minimum {min_coeffs}",
                d.len()
            )));
        }
        let sj = d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64;
        if !(sj > 0.0) || !sj.is_finite() {
            return Err(Error::Degenerate(format!(
                "scale spectrum vanishes at scale {j} (S_j = {sj})"
            )));
        }
        s.push(sj);
        counts.push(d.len());
    }
    let log2_s = s.iter().map(|x| x.log2()).collect();
    Ok(ScaleSpectrum {
        s,
        log2_s,
        counts,
        scale_range: range,
    })
}

fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Hurst parameter {h} outside (0, 1]")))
    }
}

/// `K(H) = (1 - 2^{-2H}) / ((2H + 1)(2H + 2))`, the Haar-wavelet variance
/// constant of unit fBm at scale 0.
pub fn k_constant(hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    let two_h = 2.0 * hurst;
    Ok((1.0 - (-two_h).exp2()) / ((two_h + 1.0) * (two_h + 2.0)))
}

/// `log2(sigma^2 K(H)) + j (2H + 1)`.
pub fn expected_log_spectrum(hurst: f64, sigma: f64, j: f64) -> Result<f64> {
    let k = k_constant(hurst)?;
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!(
            "volatility scale {sigma} must be positive"
        )));
    }
    Ok((sigma * sigma * k).log2() + j * (2.0 * hurst + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceMode {
    /// `D_jj = 1 / N_j`, zero off the diagonal.
    #[default]
    Diagonal,
    /// `D_ji = 1 / sqrt(N_j N_i)` off the diagonal, `c_d / N_j` on it.
    Full,
}

/// Normalized covariance of the log scale spectrum used as GLS weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    pub mode: CovarianceMode,
    pub matrix: DMatrix<f64>,
    pub diag_factor: f64,
}

pub fn covariance_model(
    counts: &[usize],
    mode: CovarianceMode,
    diag_factor: f64,
) -> Result<CovarianceModel> {
    if counts.is_empty() || counts.contains(&0) {
        return Err(Error::Config("scale counts must be positive".into()));
    }
    let m = counts.len();
    let matrix = match mode {
        CovarianceMode::Diagonal => {
            DMatrix::from_fn(
                m,
                m,
                |i, j| if i == j { 1.0 / counts[i] as f64 } else { 0.0 },
            )
        }
        CovarianceMode::Full => {
            if !(diag_factor > 1.0) {
                return Err(Error::Config(format!(
                    "full covariance needs a diagonal factor c_d > 1, got {diag_factor}"
                )));
            }
            let m = DMatrix::from_fn(m, m, |i, j| {
                let base = 1.0 / ((counts[i] * counts[j]) as f64).sqrt();
                if i == j {
                    diag_factor * base
                } else {
                    base
                }
            });
            if m.clone().cholesky().is_none() {
                return Err(Error::Config(
                    "full covariance model is not positive definite".into(),
                ));
            }
            m
        }
    };
    Ok(CovarianceModel {
        mode,
        matrix,
        diag_factor: if mode == CovarianceMode::Diagonal {
            1.0
        } else {
            diag_factor
        },
    })
}
