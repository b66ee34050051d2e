use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator).
    pub std_dev: f64,
    /// `std_dev / |mean|`; `None` when the mean is zero.
    pub ratio: Option<f64>,
}

pub fn noise_stats(samples: &[f64]) -> Result<NoiseStats, StatsError> {
    let n = samples.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples { n, min: 2 });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std_dev = var.sqrt();
    let ratio = (mean != 0.0).then(|| std_dev / mean.abs());
    Ok(NoiseStats { n, mean, std_dev, ratio })
}
