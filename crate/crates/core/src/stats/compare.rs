use serde::{Deserialize, Serialize};

use super::StatsError;

const MIN_RUNS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbComparison {
    pub n_a: usize,
    pub n_b: usize,
    pub median_a: f64,
    pub median_b: f64,
    /// Fraction of comparisons where `a` is lower, ties counting one half.
    pub win_rate: f64,
    /// Equal-length runs are compared index by index.
    pub paired: bool,
    /// Two-sided sign test (ties excluded); only for paired runs.
    pub p_value: Option<f64>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Two-sided exact binomial sign test for `wins` out of `wins + losses` at p = 1/2.
pub fn sign_test_p(wins: usize, losses: usize) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    let k = wins.min(losses);
    let ln_half_n = n as f64 * std::f64::consts::LN_2;
    let mut ln_c = 0.0;
    let mut tail = 0.0;
    for i in 0..=k {
        if i > 0 {
            ln_c += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        tail += (ln_c - ln_half_n).exp();
    }
    (2.0 * tail).min(1.0)
}

/// Compares two sets of costs (lower is better).
pub fn ab_compare(a: &[f64], b: &[f64]) -> Result<AbComparison, StatsError> {
    if a.len() < MIN_RUNS || b.len() < MIN_RUNS {
        return Err(StatsError::InsufficientSamples { a: a.len(), b: b.len(), min: MIN_RUNS });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let paired = a.len() == b.len();
    let (mut wins, mut losses, mut ties) = (0usize, 0usize, 0usize);
    let mut tally = |x: f64, y: f64| match x.partial_cmp(&y).expect("finite") {
        std::cmp::Ordering::Less => wins += 1,
        std::cmp::Ordering::Greater => losses += 1,
        std::cmp::Ordering::Equal => ties += 1,
    };
    if paired {
        a.iter().zip(b).for_each(|(&x, &y)| tally(x, y));
    } else {
        for &x in a {
            for &y in b {
                tally(x, y);
            }
        }
    }
    let total = (wins + losses + ties) as f64;
    Ok(AbComparison {
        n_a: a.len(),
        n_b: b.len(),
        median_a: median(a),
        median_b: median(b),
        win_rate: (wins as f64 + 0.5 * ties as f64) / total,
        paired,
        p_value: paired.then(|| sign_test_p(wins, losses)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_runs() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let c = ab_compare(&a, &a).unwrap();
        assert_eq!((c.win_rate, c.p_value), (0.5, Some(1.0)));
    }

    #[test]
    fn strictly_better_paired() {
        let b: Vec<f64> = (0..10).map(f64::from).collect();
        let a: Vec<f64> = b.iter().map(|v| v - 0.5).collect();
        let c = ab_compare(&a, &b).unwrap();
        assert_eq!(c.win_rate, 1.0);
        assert!((c.p_value.unwrap() - 2f64.powi(-9)).abs() < 1e-15);
    }

    #[test]
    fn shuffled_medians_match() {
        let a = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6];
        let b = [9.0, 2.6, 1.0, 4.0, 3.0, 1.5];
        let c = ab_compare(&a, &b).unwrap();
        assert_eq!(c.median_a, c.median_b);
    }

    #[test]
    fn unpaired_has_no_p_value() {
        let c = ab_compare(&[1.0; 5], &[2.0; 6]).unwrap();
        assert_eq!((c.win_rate, c.p_value, c.paired), (1.0, None, false));
    }

    #[test]
    fn too_few_runs() {
        assert!(matches!(ab_compare(&[1.0; 4], &[1.0; 5]), Err(StatsError::InsufficientSamples { .. })));
    }

    #[test]
    fn sign_test_small_values() {
        // n = 3, one loss: P(X <= 1) = 4/8, doubled.
        assert_eq!(sign_test_p(2, 1), 1.0);
        assert!((sign_test_p(5, 0) - 2.0 / 32.0).abs() < 1e-15);
        assert!((sign_test_p(6, 1) - 2.0 * 8.0 / 128.0).abs() < 1e-15);
    }
}
