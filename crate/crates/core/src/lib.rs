//! Wavelet log-scale spectrum estimation of the Hurst parameter.
//!
//! The pipeline for one segment is
//! [`wavelet::initialize_approximation`] → [`wavelet::full_decomposition`]
//! → [`spectrum::scale_spectrum`] → [`estimator::gls_fit`] →
//! [`estimator::hurst_from_slope`]. Long series are cut into dyadic segments
//! and the resulting slope process is smoothed with a mean-preserving
//! minimum-variance filter ([`segmentation`]). [`synth`] produces exact
//! fractional Brownian motion test data.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod estimator;
pub mod ingest;
mod neldermead;
pub mod output;
pub mod pipeline;
pub mod segmentation;
pub mod series;
pub mod spectrum;
pub mod synth;
pub mod wavelet;

pub use error::{Error, Result};
pub use estimator::{estimate_segment, EstimatorConfig, HurstEstimate};
pub use series::TimeSeries;
