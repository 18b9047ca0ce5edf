//! Daubechies filter banks and the pyramidal (Mallat) decomposition.
//!
//! Indexing convention: `h` is causal, `h[n]` for `n = 0..2p`. The high-pass
//! filter follows `g(n) = (-1)^(1-n) h(1-n)`, which is supported on
//! `2 - 2p ..= 1`; it is stored shifted by the even offset `2p - 2` so that
//! `g[n]` for `n = 0..2p` is causal over the same support as `h`. An even
//! shift keeps the dyadic subsampling grid, so details only move by whole
//! coefficients. With this convention the Haar detail of an increasing ramp is
//! positive: `d_1 = [1/sqrt(2), ...]` for `a_0 = [1, 2, 3, 4]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DB1: [f64; 2] = [
    std::f64::consts::FRAC_1_SQRT_2,
    std::f64::consts::FRAC_1_SQRT_2,
];
const DB2: [f64; 4] = [
    0.482_962_913_144_534_143_374_9,
    0.836_516_303_737_807_905_575_3,
    0.224_143_868_042_013_381_026,
    -0.129_409_522_551_260_381_174_4,
];
const DB3: [f64; 6] = [
    0.332_670_552_950_082_615_998_5,
    0.806_891_509_311_092_576_494_5,
    0.459_877_502_118_491_570_095_2,
    -0.135_011_020_010_254_588_696_4,
    -0.085_441_273_882_026_661_692_82,
    0.035_226_291_885_709_536_602_74,
];
const DB4: [f64; 8] = [
    0.230_377_813_308_896_500_863_3,
    0.714_846_570_552_915_647_089_9,
    0.630_880_767_929_858_907_881_7,
    -0.027_983_769_416_859_854_211_41,
    -0.187_034_811_719_093_084_079_6,
    0.030_841_381_835_560_763_627_22,
    0.032_883_011_666_885_199_735_41,
    -0.010_597_401_785_069_032_104_88,
];

/// Boundary treatment for the filter bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Indices wrap modulo the input length; dyadic inputs give `N_j = N / 2^j`.
    #[default]
    Periodic,
    /// Only coefficients whose filter support lies inside the input are kept.
    Valid,
}

/// Low-pass / high-pass conjugate mirror filters of a Daubechies wavelet.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    /// Number of vanishing moments.
    pub p: usize,
}

impl FilterPair {
    pub fn support_length(&self) -> usize {
        self.h.len()
    }

    /// Index, in the unshifted numbering of `g(n) = (-1)^(1-n) h(1-n)`, of `g[0]`.
    pub fn g_offset(&self) -> isize {
        2 - 2 * self.p as isize
    }
}

/// Daubechies compactly supported orthonormal filters with `p` vanishing moments.
///
/// `p = 1` is Haar. Supported orders are 1 through 4.
pub fn daubechies_filters(p: usize) -> Result<FilterPair> {
    let h: Vec<f64> = match p {
        1 => DB1.to_vec(),
        2 => DB2.to_vec(),
        3 => DB3.to_vec(),
        4 => DB4.to_vec(),
        _ => {
            return Err(Error::Config(format!(
                "unsupported number of vanishing moments p = {p} (supported: 1..=4)"
            )))
        }
    };
    let len = h.len();
    let g = (0..len)
        .map(|n| {
            let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            sign * h[len - 1 - n]
        })
        .collect();
    Ok(FilterPair { h, g, p })
}

/// Samples of the scaling function at the integers of its support `[0, 2p - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSamples {
    /// `values[n] = phi(n)` for `n = 0..=2p-1`.
    pub values: Vec<f64>,
    pub support: (isize, isize),
}

impl ScalingSamples {
    /// Taps used by the initialization sum. The right end of the support is
    /// always zero and is dropped.
    pub fn taps(&self) -> &[f64] {
        &self.values[..self.values.len() - 1]
    }
}

/// Solve the two-scale relation `phi(t) = sqrt(2) sum_k h(k) phi(2t - k)` on the
/// integers, normalized so that `sum_n phi(n) = 1`.
pub fn scaling_samples(filters: &FilterPair) -> Result<ScalingSamples> {
    let len = filters.support_length();
    // phi vanishes at the right end of the support; the system lives on 0..len-1.
    let m = len - 1;
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut a = DMatrix::<f64>::zeros(m, m);
    for t in 0..m {
        for s in 0..m {
            let idx = 2 * t as isize - s as isize;
            if (0..len as isize).contains(&idx) {
                a[(t, s)] = sqrt2 * filters.h[idx as usize];
            }
        }
        a[(t, t)] -= 1.0;
    }

    let svd = a.clone().svd(false, true);
    let smax = svd.singular_values.max().max(1.0);
    let null_dim = svd
        .singular_values
        .iter()
        .filter(|&&s| s < 1e-10 * smax)
        .count();
    if null_dim != 1 {
        return Err(Error::Numeric(format!(
            "eigenvalue-1 eigenspace of the two-scale recursion has dimension {null_dim}"
        )));
    }
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty");
    let v_t = svd.v_t.expect("requested V^T");
    let v: Vec<f64> = v_t.row(imin).iter().copied().collect();
    let total: f64 = v.iter().sum();
    if total.abs() < 1e-12 {
        return Err(Error::Numeric(
            "scaling-function eigenvector sums to zero".into(),
        ));
    }
    let mut values: Vec<f64> = v.iter().map(|x| x / total).collect();
    values.push(0.0);
    Ok(ScalingSamples {
        values,
        support: (0, len as isize - 1),
    })
}

/// Initial approximation coefficients `a_0(k) = sum_n f(n) phi(n - k)`.
///
/// Periodic boundary keeps the input length; valid boundary drops the last
/// `support - 1` positions where the sum would leave the series.
pub fn initialize_approximation(
    samples: &[f64],
    phi: &ScalingSamples,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::Input(
            "cannot initialize from an empty series".into(),
        ));
    }
    let taps = phi.taps();
    if samples.len() < phi.values.len() {
        return Err(Error::Input(format!(
            "series of length {} is shorter than the filter support {}",
            samples.len(),
            phi.values.len()
        )));
    }
    let n = samples.len();
    let out = match boundary {
        Boundary::Periodic => (0..n)
            .map(|k| {
                taps.iter()
                    .enumerate()
                    .map(|(m, &w)| w * samples[(k + m) % n])
                    .sum()
            })
            .collect(),
        Boundary::Valid => (0..=n - taps.len())
            .map(|k| {
                taps.iter()
                    .zip(&samples[k..k + taps.len()])
                    .map(|(w, f)| w * f)
                    .sum()
            })
            .collect(),
    };
    Ok(out)
}

/// One analysis step: `a_{j+1}(k) = sum_n h(n - 2k) a_j(n)` and
/// `d_{j+1}(k) = sum_n g(n - 2k) a_j(n)`.
pub fn decompose_step(
    approx: &[f64],
    filters: &FilterPair,
    boundary: Boundary,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = approx.len();
    let len = filters.support_length();
    match boundary {
        Boundary::Periodic => {
            if n < 2 || !n.is_multiple_of(2) {
                return Err(Error::Input(format!(
                    "periodic decomposition needs an even length >= 2, got {n}"
                )));
            }
            let half = n / 2;
            let mut a = vec![0.0; half];
            let mut d = vec![0.0; half];
            for k in 0..half {
                let (mut sa, mut sd) = (0.0, 0.0);
                for t in 0..len {
                    let x = approx[(2 * k + t) % n];
                    sa += filters.h[t] * x;
                    sd += filters.g[t] * x;
                }
                a[k] = sa;
                d[k] = sd;
            }
            Ok((a, d))
        }
        Boundary::Valid => {
            if n < len {
                return Err(Error::Input(format!(
                    "valid decomposition needs at least {len} samples, got {n}"
                )));
            }
            let count = (n - len) / 2 + 1;
            let mut a = Vec::with_capacity(count);
            let mut d = Vec::with_capacity(count);
            for k in 0..count {
                let w = &approx[2 * k..2 * k + len];
                a.push(w.iter().zip(&filters.h).map(|(x, f)| x * f).sum());
                d.push(w.iter().zip(&filters.g).map(|(x, f)| x * f).sum());
            }
            Ok((a, d))
        }
    }
}

/// One synthesis step: `a_j(m) = sum_k h(m - 2k) a_{j+1}(k) + g(m - 2k) d_{j+1}(k)`.
///
/// Under periodic boundary this inverts [`decompose_step`] exactly. Under valid
/// boundary it is the adjoint of the analysis step, with output length
/// `2 (n - 1) + support`.
pub fn reconstruct_step(
    approx: &[f64],
    detail: &[f64],
    filters: &FilterPair,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    if approx.len() != detail.len() {
        return Err(Error::Input(format!(
            "approximation ({}) and detail ({}) lengths differ",
            approx.len(),
            detail.len()
        )));
    }
    if approx.is_empty() {
        return Err(Error::Input("nothing to reconstruct".into()));
    }
    let half = approx.len();
    let len = filters.support_length();
    let out_len = match boundary {
        Boundary::Periodic => 2 * half,
        Boundary::Valid => 2 * (half - 1) + len,
    };
    let mut out = vec![0.0; out_len];
    for k in 0..half {
        for t in 0..len {
            let idx = match boundary {
                Boundary::Periodic => (2 * k + t) % out_len,
                Boundary::Valid => 2 * k + t,
            };
            out[idx] += filters.h[t] * approx[k] + filters.g[t] * detail[k];
        }
    }
    Ok(out)
}

/// Detail coefficients for scales `j = 1..=J` plus the final approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailPyramid {
    /// `details[j - 1]` holds `d_j`.
    pub details: Vec<Vec<f64>>,
    pub approx_final: Vec<f64>,
    pub boundary: Boundary,
}

impl DetailPyramid {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Detail coefficients at scale `j` (1-based).
    pub fn detail(&self, j: usize) -> Option<&[f64]> {
        j.checked_sub(1)
            .and_then(|i| self.details.get(i))
            .map(Vec::as_slice)
    }

    /// `N_j` for `j = 1..=J`.
    pub fn counts(&self) -> Vec<usize> {
        self.details.iter().map(Vec::len).collect()
    }
}

/// Largest number of levels the pyramid can run on `n` samples.
pub fn max_levels(n: usize, filters: &FilterPair, boundary: Boundary) -> usize {
    let mut levels = 0;
    let mut len = n;
    match boundary {
        Boundary::Periodic => {
            while len >= 2 && len.is_multiple_of(2) {
                len /= 2;
                levels += 1;
            }
        }
        Boundary::Valid => {
            let support = filters.support_length();
            // Initialization consumes support - 2 samples.
            len = match len.checked_sub(support.saturating_sub(2)) {
                Some(l) => l,
                None => return 0,
            };
            while len >= support {
                len = (len - support) / 2 + 1;
                levels += 1;
            }
        }
    }
    levels
}

/// Initialize from samples and run `levels` analysis steps.
pub fn full_decomposition(
    series: &[f64],
    filters: &FilterPair,
    levels: usize,
    boundary: Boundary,
) -> Result<DetailPyramid> {
    if levels == 0 {
        return Err(Error::Config(
            "at least one decomposition level is required".into(),
        ));
    }
    let available = max_levels(series.len(), filters, boundary);
    if levels > available {
        return Err(Error::Config(format!(
            "{levels} levels requested but a series of length {} supports at most {available}",
            series.len()
        )));
    }
    let phi = scaling_samples(filters)?;
    let mut approx = initialize_approximation(series, &phi, boundary)?;
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (a, d) = decompose_step(&approx, filters, boundary)?;
        details.push(d);
        approx = a;
    }
    Ok(DetailPyramid {
        details,
        approx_final: approx,
        boundary,
    })
}

/// Reference computation of a single periodic detail coefficient `d_j(k)`.
///
/// Builds the discretized wavelet at scale `j` by cascading the filters
/// (with the scaling-function initialization folded in) and takes its
/// circular inner product with the raw samples. `O(N)` per coefficient; meant
/// for cross-checking [`full_decomposition`] on small inputs.
pub fn direct_detail_oracle(
    series: &[f64],
    filters: &FilterPair,
    j: usize,
    k: usize,
) -> Result<f64> {
    let n = series.len();
    if j == 0 || j >= usize::BITS as usize {
        return Err(Error::Input(format!("scale j = {j} out of range")));
    }
    let step = 1usize << j;
    if n == 0 || !n.is_multiple_of(step) {
        return Err(Error::Input(format!(
            "series length {n} is not a multiple of 2^{j}"
        )));
    }
    if k >= n / step {
        return Err(Error::Input(format!(
            "shift k = {k} out of range for scale {j} (N_j = {})",
            n / step
        )));
    }

    // Equivalent low-pass filter after j - 1 levels, then one high-pass level.
    let mut low = vec![1.0];
    for level in 0..j - 1 {
        low = upsample_convolve(&low, &filters.h, 1 << level);
    }
    let wavelet = upsample_convolve(&low, &filters.g, 1 << (j - 1));

    let phi = scaling_samples(filters)?;
    let mut kernel = vec![0.0; wavelet.len() + phi.taps().len() - 1];
    for (m, &w) in phi.taps().iter().enumerate() {
        for (u, &g) in wavelet.iter().enumerate() {
            kernel[u + m] += w * g;
        }
    }

    let origin = k * step;
    Ok(kernel
        .iter()
        .enumerate()
        .map(|(u, &w)| w * series[(origin + u) % n])
        .sum())
}

/// `out(u) = sum_m taps(m) base(u - stride * m)`.
fn upsample_convolve(base: &[f64], taps: &[f64], stride: usize) -> Vec<f64> {
    let mut out = vec![0.0; base.len() + stride * (taps.len() - 1)];
    for (m, &t) in taps.iter().enumerate() {
        for (u, &b) in base.iter().enumerate() {
            out[u + stride * m] += t * b;
        }
    }
    out
}
