//! Binomial intervals and chi-square homogeneity tests for the Monte Carlo suites.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Standard deviation of a binomial frequency.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Two-sample chi-square test of homogeneity over categorical counts.
///
/// Adjacent categories (in key order) are merged until every bin's expected
/// count is at least 5 in both samples.
pub fn chi_square_homogeneity<K: Ord + Copy>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> ChiSquare {
    let keys: Vec<K> = a
        .keys()
        .chain(b.keys())
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let (na, nb) = (a.values().sum::<u64>() as f64, b.values().sum::<u64>() as f64);
    let total = na + nb;
    let min_share = 5.0 / na.min(nb);

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for k in keys {
        acc.0 += *a.get(&k).unwrap_or(&0) as f64;
        acc.1 += *b.get(&k).unwrap_or(&0) as f64;
        if (acc.0 + acc.1) / total >= min_share {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => bins.push(acc),
        }
    }
    if bins.len() < 2 {
        return ChiSquare {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
        };
    }
    let statistic = bins
        .iter()
        .map(|&(x, y)| {
            let share = (x + y) / total;
            let (ea, eb) = (na * share, nb * share);
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum::<f64>();
    let dof = bins.len() - 1;
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(0.0);
    ChiSquare {
        statistic,
        dof,
        p_value,
    }
}

pub fn histogram<K: Ord + Copy>(values: impl IntoIterator<Item = K>) -> BTreeMap<K, u64> {
    let mut out = BTreeMap::new();
    for v in values {
        *out.entry(v).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_have_zero_statistic() {
        let a = histogram([1, 1, 3, 3, 3, 5].repeat(20));
        let c = chi_square_homogeneity(&a, &a);
        assert!(c.statistic.abs() < 1e-12);
        assert!((c.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_hand_computed_two_by_two() {
        // Counts 30/70 vs 50/50: pooled shares 0.4/0.6, expected 40/60 each.
        let a = BTreeMap::from([(0, 30u64), (1, 70)]);
        let b = BTreeMap::from([(0, 50u64), (1, 50)]);
        let c = chi_square_homogeneity(&a, &b);
        let expected = 2.0 * (100.0 / 40.0 + 100.0 / 60.0);
        assert!((c.statistic - expected).abs() < 1e-12);
        assert_eq!(c.dof, 1);
        assert!(c.p_value < 0.01);
    }

    #[test]
    fn sparse_tail_is_merged() {
        let a = BTreeMap::from([(1, 900u64), (3, 95), (5, 4), (7, 1)]);
        let b = BTreeMap::from([(1, 905u64), (3, 90), (5, 5)]);
        let c = chi_square_homogeneity(&a, &b);
        // Bins {1}, {3}, {5, 7}.
        assert_eq!(c.dof, 2);
        assert!(c.p_value > 0.1);
    }

    #[test]
    fn binomial_sigma_value() {
        assert!((binomial_sigma(0.75, 100_000) - (0.1875f64 / 1e5).sqrt()).abs() < 1e-15);
    }
}
