//! Order statistics used by the step estimators and the experiment summaries.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Real;

fn sorted_finite<T: Real>(values: &[T]) -> Result<Vec<T>> {
    if values.is_empty() {
        return Err(Error::Empty("statistic over an empty sequence"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("statistic input"));
    }
    let mut v = values.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(v)
}

fn interpolate_sorted<T: Real>(sorted: &[T], p: T) -> T {
    let rank = p / T::lit(100.0) * T::from_count(sorted.len() - 1);
    let lo = rank.floor();
    let i = lo.to_usize().unwrap_or(0).min(sorted.len() - 1);
    let frac = rank - lo;
    if frac == T::zero() || i + 1 >= sorted.len() {
        sorted[i]
    } else {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    }
}

/// Linear-interpolation percentile: rank `p/100 * (n-1)` into the sorted data.
pub fn percentile<T: Real>(values: &[T], p: T) -> Result<T> {
    if !(p >= T::zero() && p <= T::lit(100.0)) {
        return Err(Error::PercentileRange(p.to_f64_lossy()));
    }
    let sorted = sorted_finite(values)?;
    Ok(interpolate_sorted(&sorted, p))
}

/// Several percentiles from one sort.
pub fn percentiles<T: Real>(values: &[T], ps: &[T]) -> Result<Vec<T>> {
    if let Some(&p) = ps.iter().find(|&&p| !(p >= T::zero() && p <= T::lit(100.0))) {
        return Err(Error::PercentileRange(p.to_f64_lossy()));
    }
    let sorted = sorted_finite(values)?;
    Ok(ps.iter().map(|&p| interpolate_sorted(&sorted, p)).collect())
}

/// Median; the mean of the two central order statistics for even lengths.
pub fn median<T: Real>(values: &[T]) -> Result<T> {
    percentile(values, T::lit(50.0))
}

pub fn mean<T: Real>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::Empty("mean of an empty sequence"));
    }
    Ok(crate::field::pairwise_sum(values) / T::from_count(values.len()))
}

/// Fractional ranks (1-based), ties sharing their average rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
///
/// Returns `None` when either sequence is constant (correlation undefined).
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 2.5);
        assert_eq!(median(&[5.0]).unwrap(), 5.0);
        assert!(matches!(median::<f64>(&[]), Err(Error::Empty(_))));
        assert!(median(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn percentile_examples() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(percentile(&v, 100.0).unwrap(), 5.0);
        assert_eq!(percentile(&v, 50.0).unwrap(), 3.0);
        assert!(matches!(percentile(&v, 100.5), Err(Error::PercentileRange(_))));
        assert!(matches!(percentile(&v, -1.0), Err(Error::PercentileRange(_))));
        assert!(percentile::<f64>(&[], 10.0).is_err());
    }

    #[test]
    fn quartiles_use_linear_interpolation() {
        let q = percentiles(&[1.0, 2.0, 3.0, 4.0], &[25.0, 75.0]).unwrap();
        assert_eq!(q, vec![1.75, 3.25]);
    }

    #[test]
    fn spearman_basics() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&x, &[10.0, 20.0, 30.0, 40.0]), Some(1.0));
        assert_eq!(spearman(&x, &[4.0, 3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&x, &[1.0, 1.0, 1.0, 1.0]), None);
        // ties: ranks [1, 2.5, 2.5, 4]
        let r = spearman(&x, &[1.0, 5.0, 5.0, 9.0]).unwrap();
        assert!((r - 0.9486832980505138).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn median_is_permutation_invariant(mut v in proptest::collection::vec(-1e6f64..1e6, 1..60), seed in any::<u64>()) {
            let m = median(&v).unwrap();
            // deterministic shuffle
            let mut s = seed | 1;
            for i in (1..v.len()).rev() {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                v.swap(i, (s % (i as u64 + 1)) as usize);
            }
            prop_assert_eq!(median(&v).unwrap(), m);
        }

        #[test]
        fn percentile_50_is_median(v in proptest::collection::vec(-1e6f64..1e6, 1..60)) {
            prop_assert_eq!(percentile(&v, 50.0).unwrap(), median(&v).unwrap());
        }
    }
}
