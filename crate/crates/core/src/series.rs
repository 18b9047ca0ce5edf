use serde::{Deserialize, Serialize};

/// A uniformly sampled scalar series: a log-price path or a synthetic path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    /// Sample spacing in the caller's time unit.
    pub dt: f64,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, dt: 1.0 }
    }

    pub fn with_dt(values: Vec<f64>, dt: f64) -> Self {
        Self { values, dt }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Borrow a window `[start, start + len)` as a new series with the same spacing.
    pub fn window(&self, start: usize, len: usize) -> TimeSeries {
        TimeSeries::with_dt(self.values[start..start + len].to_vec(), self.dt)
    }
}

impl From<Vec<f64>> for TimeSeries {
    fn from(values: Vec<f64>) -> Self {
        TimeSeries::new(values)
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two points.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}
