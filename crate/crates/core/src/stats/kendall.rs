use std::cmp::Ordering;

use super::StatsError;

/// Kendall's tau-b, by enumeration of all pairs.
///
/// `(C - D) / sqrt((n0 - Ta)(n0 - Tb))` where `n0 = n(n-1)/2` and `Ta`, `Tb` count
/// pairs tied in `a` and in `b` respectively.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples { n, min: 2 });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let (mut s, mut ties_a, mut ties_b) = (0i64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let da = a[i].partial_cmp(&a[j]).expect("finite");
            let db = b[i].partial_cmp(&b[j]).expect("finite");
            if da == Ordering::Equal {
                ties_a += 1;
            }
            if db == Ordering::Equal {
                ties_b += 1;
            }
            if da != Ordering::Equal && db != Ordering::Equal {
                s += if da == db { 1 } else { -1 };
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as u64;
    let (ua, ub) = (n0 - ties_a, n0 - ties_b);
    if ua == 0 || ub == 0 {
        return Err(StatsError::UndefinedCorrelation);
    }
    Ok(s as f64 / ((ua as f64) * (ub as f64)).sqrt())
}
