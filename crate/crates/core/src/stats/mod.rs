//! Evaluation statistics: rank correlation, noise, and A/B comparison of seeded runs.

mod compare;
mod kendall;
mod noise;
mod report;

use thiserror::Error;

pub use compare::{ab_compare, median, sign_test_p, AbComparison};
pub use kendall::kendall_tau;
pub use noise::{noise_stats, NoiseStats};
pub use report::{correlation_report, read_metrics_csv, CorrelationReport, MetricRow, MetricSample, MetricTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("correlation undefined: an input is constant")]
    UndefinedCorrelation,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {min} samples, got {n}")]
    TooFewSamples { n: usize, min: usize },
    #[error("need at least {min} runs per side, got {a} and {b}")]
    InsufficientSamples { a: usize, b: usize, min: usize },
    #[error("non-finite sample value")]
    NonFinite,
}
