//! Descriptive statistics in the fixed column set n, mean, variance,
//! minimum, median, maximum, range.

use mesinar_core::model::IntSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Centered sum of squares over n-1 (the estimating-equation variance
    /// convention); 0 for a single observation.
    pub variance: f64,
    pub minimum: i64,
    pub median: f64,
    pub maximum: i64,
    pub range: i64,
}

pub fn summarize(series: &IntSeries) -> Summary {
    let vals = series.values();
    let n = vals.len();
    assert!(n > 0, "series must be nonempty");
    let mean = vals.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let variance = if n > 1 {
        vals.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let mut sorted = vals.to_vec();
    sorted.sort_unstable();
    let median = if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    };
    let minimum = sorted[0];
    let maximum = sorted[n - 1];
    Summary {
        n,
        mean,
        variance,
        minimum,
        median,
        maximum,
        range: maximum - minimum,
    }
}
