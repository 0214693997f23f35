//! The Euclidean tree of coprime pairs.
//!
//! The root `{1,1}` has the single child `{2,1}`; below that each node `{a,b}`
//! has children `{a,a+b}` and `{a+b,b}`. A coprime pair sits at level `n`
//! exactly when the subtractive Euclidean algorithm needs `n` steps to reduce
//! it to `{1,1}`.
//!
//! Levels are kept aggregated as `(larger, smaller) -> count`. Only the
//! per-level counts `a(n,k)` of larger labels and the sums
//! `s(n) = sum_k a(n,k) k log2 k` are consumed downstream.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::certified::{CertifiedValue, Log2Table, Precision};
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// Limits on how deep the tree may be expanded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EuclidBudget {
    pub max_level: u32,
    /// Largest number of pairs allowed on a single level.
    pub max_level_pairs: u128,
}

impl Default for EuclidBudget {
    fn default() -> Self {
        Self {
            max_level: 40,
            max_level_pairs: 1 << 24,
        }
    }
}

impl EuclidBudget {
    fn check(&self, level: u32) -> Result<()> {
        let pairs = if level == 0 {
            1
        } else {
            1u128 << (level - 1).min(127)
        };
        if level > self.max_level || pairs > self.max_level_pairs {
            return Err(Error::PrecisionUnreachable(format!(
                "Euclidean tree level {level} ({pairs} pairs) exceeds the budget \
                 (max level {}, max {} pairs per level)",
                self.max_level, self.max_level_pairs
            )));
        }
        Ok(())
    }
}

/// One level of the tree, pairs stored as `(larger, smaller)` in sorted order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EuclidLevel {
    level: u32,
    pairs: Vec<((u64, u64), u64)>,
}

impl EuclidLevel {
    pub fn root() -> Self {
        Self {
            level: 0,
            pairs: vec![((1, 1), 1)],
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn pairs(&self) -> &[((u64, u64), u64)] {
        &self.pairs
    }

    pub fn pair_count(&self) -> u128 {
        self.pairs.iter().map(|&(_, c)| u128::from(c)).sum()
    }

    pub fn max_label(&self) -> u64 {
        self.pairs.iter().map(|&((k, _), _)| k).max().unwrap_or(0)
    }

    pub fn expand(&self) -> Self {
        let mut next = Vec::with_capacity(self.pairs.len() * 2);
        for &((a, b), count) in &self.pairs {
            if a == b {
                next.push(((a + b, a), count));
            } else {
                next.push(((a + b, a), count));
                next.push(((a + b, b), count));
            }
        }
        next.sort_unstable_by_key(|&(pair, _)| pair);
        let mut merged: Vec<((u64, u64), u64)> = Vec::with_capacity(next.len());
        for (pair, count) in next {
            match merged.last_mut() {
                Some((last, c)) if *last == pair => *c += count,
                _ => merged.push((pair, count)),
            }
        }
        Self {
            level: self.level + 1,
            pairs: merged,
        }
    }

    /// `k -> a(n,k)`, the number of pairs with larger label `k`.
    pub fn larger_counts(&self) -> BTreeMap<u64, u64> {
        let mut counts = BTreeMap::new();
        for &((k, _), c) in &self.pairs {
            *counts.entry(k).or_insert(0) += c;
        }
        counts
    }
}

pub fn expand_level(level: &EuclidLevel) -> EuclidLevel {
    level.expand()
}

/// Subtractive Euclid steps to reduce `{k,i}` to `{g,g}`, `g = gcd(k,i)`.
pub fn e_steps(k: u64, i: u64) -> u64 {
    assert!(k >= 1 && i >= 1, "e_steps needs positive arguments");
    let (mut a, mut b) = (k.max(i), k.min(i));
    let mut steps = 0;
    // A run of q subtractions of b from a collapses to one division.
    while a != b {
        let (q, r) = (a / b, a % b);
        if r == 0 {
            return steps + q - 1;
        }
        steps += q;
        (a, b) = (b, r);
    }
    steps
}

/// Level data consumed downstream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EuclidAggregates {
    pub level: u32,
    pub larger_counts: BTreeMap<u64, u64>,
    /// `sum_k a(n,k) k log2 k`.
    pub s: CertifiedValue,
}

impl EuclidAggregates {
    pub fn count(&self, k: u64) -> u64 {
        self.larger_counts.get(&k).copied().unwrap_or(0)
    }
}

/// Aggregates for levels `1..=N`, extended on demand.
#[derive(Debug)]
pub struct EuclidTable {
    budget: EuclidBudget,
    frontier: EuclidLevel,
    aggregates: Vec<EuclidAggregates>,
    logs: Log2Table,
}

impl EuclidTable {
    pub fn new(prec: Precision, budget: EuclidBudget) -> Self {
        Self {
            budget,
            frontier: EuclidLevel::root(),
            aggregates: Vec::new(),
            logs: Log2Table::new(prec),
        }
    }

    pub fn precision(&self) -> Precision {
        self.logs.precision()
    }

    pub fn depth(&self) -> u32 {
        self.aggregates.len() as u32
    }

    pub fn extend_to(&mut self, n: u32) -> Result<()> {
        while self.depth() < n {
            let level = self.depth() + 1;
            self.budget.check(level)?;
            self.frontier = self.frontier.expand();
            let larger_counts = self.frontier.larger_counts();
            let mut s = CertifiedValue::zero(self.precision());
            for (&k, &a) in &larger_counts {
                let weight = BigInt::from(k) * BigInt::from(a);
                s = &s + &self.logs.get(u128::from(k)).mul_int(&weight);
            }
            self.aggregates.push(EuclidAggregates {
                level,
                larger_counts,
                s,
            });
        }
        Ok(())
    }

    pub fn aggregates(&self) -> &[EuclidAggregates] {
        &self.aggregates
    }

    /// `s(n)` for `n >= 1`; `s(n) = 0` for `n <= 0`.
    pub fn s(&self, n: i64) -> CertifiedValue {
        if n < 1 {
            CertifiedValue::zero(self.precision())
        } else {
            self.aggregates[(n - 1) as usize].s.clone()
        }
    }
}

pub fn aggregates_up_to(n: u32, prec: Precision) -> Result<Vec<EuclidAggregates>> {
    aggregates_up_to_with_budget(n, prec, EuclidBudget::default())
}

pub fn aggregates_up_to_with_budget(
    n: u32,
    prec: Precision,
    budget: EuclidBudget,
) -> Result<Vec<EuclidAggregates>> {
    if n < 1 {
        return Err(Error::Domain(
            "need at least one Euclidean tree level".into(),
        ));
    }
    let mut table = EuclidTable::new(prec, budget);
    table.extend_to(n)?;
    Ok(table.aggregates)
}

/// Exact counts `a(n,k)` for levels `1..=N`, without the logarithmic sums.
pub fn larger_counts_up_to(n: u32) -> Vec<BTreeMap<u64, u64>> {
    let mut level = EuclidLevel::root();
    (1..=n)
        .map(|_| {
            level = level.expand();
            level.larger_counts()
        })
        .collect()
}

/// `A_k(x) = sum_n a(n,k) x^n` to order `N`, from the step counts `e(k,i)` over
/// `1 <= i <= k` coprime to `k`.
pub fn a_k_coefficients(k: u64, order: usize) -> Result<TruncatedSeries> {
    if k < 2 {
        return Err(Error::Domain(format!("A_k needs k >= 2, got {k}")));
    }
    let mut coeffs = vec![0i64; order + 1];
    for i in 1..k {
        if num_integer::gcd(k, i) == 1 {
            let n = e_steps(k, i) as usize;
            if n <= order {
                coeffs[n] += 1;
            }
        }
    }
    Ok(TruncatedSeries::from_integers(&coeffs))
}

/// The same series read off tree-enumerated counts (`counts[n-1]` is level `n`).
pub fn a_k_from_counts(counts: &[BTreeMap<u64, u64>], k: u64, order: usize) -> TruncatedSeries {
    let coeffs = (0..=order)
        .map(|n| {
            let a = if n == 0 {
                0
            } else {
                counts
                    .get(n - 1)
                    .and_then(|level| level.get(&k))
                    .copied()
                    .unwrap_or(0)
            };
            BigRational::from_integer(a.into())
        })
        .collect();
    TruncatedSeries::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib(n: u32) -> u64 {
        let (mut a, mut b) = (0u64, 1u64);
        for _ in 0..n {
            (a, b) = (b, a + b);
        }
        a
    }

    fn levels(n: u32) -> Vec<EuclidLevel> {
        let mut out = vec![EuclidLevel::root()];
        for _ in 0..n {
            let next = out.last().unwrap().expand();
            out.push(next);
        }
        out
    }

    #[test]
    fn first_levels() {
        let l = levels(3);
        assert_eq!(l[1].pairs(), &[((2, 1), 1)]);
        assert_eq!(l[2].pairs(), &[((3, 1), 1), ((3, 2), 1)]);
        assert_eq!(
            l[3].pairs(),
            &[((4, 1), 1), ((4, 3), 1), ((5, 2), 1), ((5, 3), 1)]
        );
    }

    #[test]
    fn e_steps_examples() {
        assert_eq!(e_steps(2, 1), 1);
        assert_eq!(e_steps(5, 2), 3);
        assert_eq!(e_steps(1, 1), 0);
        assert_eq!(e_steps(4, 1), 3);
        // non-coprime: (6,4) -> (2,4) -> (2,2)
        assert_eq!(e_steps(6, 4), 2);
        assert_eq!(e_steps(1_000_000, 1), 999_999);
    }

    #[test]
    fn e_steps_matches_slow_subtraction() {
        for k in 1..60u64 {
            for i in 1..60u64 {
                let (mut a, mut b, mut steps) = (k, i, 0);
                while a != b {
                    if a > b {
                        a -= b;
                    } else {
                        b -= a;
                    }
                    steps += 1;
                }
                assert_eq!(e_steps(k, i), steps, "e({k},{i})");
            }
        }
    }

    #[test]
    fn level_structure_to_twenty() {
        for l in levels(20).iter().skip(1) {
            let n = l.level();
            assert_eq!(l.pair_count(), 1u128 << (n - 1));
            assert!(l
                .pairs()
                .iter()
                .all(|&((a, b), _)| num_integer::gcd(a, b) == 1));
            assert!(l
                .pairs()
                .iter()
                .all(|&((a, b), _)| e_steps(a, b) == u64::from(n)));
            assert_eq!(l.max_label(), fib(n + 2));
            let weighted: u128 = l
                .larger_counts()
                .iter()
                .map(|(&k, &a)| u128::from(k) * u128::from(a))
                .sum();
            assert_eq!(weighted, 2 * 3u128.pow(n - 1));
        }
    }

    #[test]
    fn s_values() {
        let prec = Precision::from_bits(100);
        let aggs = aggregates_up_to(3, prec).unwrap();
        assert_eq!(aggs[0].s.mid(), BigRational::from_integer(2.into()));
        assert!((aggs[1].s.to_f64() - 9.509_775_004_326_937).abs() < 1e-13);
        assert!((aggs[2].s.to_f64() - 39.219_280_948_873_62).abs() < 1e-12);
    }

    #[test]
    fn a_k_examples() {
        let a2 = a_k_coefficients(2, 6).unwrap();
        assert_eq!(a2, TruncatedSeries::from_integers(&[0, 1, 0, 0, 0, 0, 0]));
        let a3 = a_k_coefficients(3, 6).unwrap();
        assert_eq!(a3, TruncatedSeries::from_integers(&[0, 0, 2, 0, 0, 0, 0]));
        let a5 = a_k_coefficients(5, 6).unwrap();
        assert_eq!(a5, TruncatedSeries::from_integers(&[0, 0, 0, 2, 2, 0, 0]));
        assert!(a_k_coefficients(1, 3).is_err());
    }

    #[test]
    fn both_a_k_constructions_agree() {
        let counts = larger_counts_up_to(20);
        for k in 2..=50 {
            assert_eq!(
                a_k_coefficients(k, 20).unwrap(),
                a_k_from_counts(&counts, k, 20),
                "A_{k}"
            );
        }
    }

    #[test]
    fn budget_refuses_deep_levels() {
        let budget = EuclidBudget {
            max_level: 40,
            max_level_pairs: 1 << 4,
        };
        assert!(aggregates_up_to_with_budget(5, Precision::from_bits(64), budget).is_ok());
        let err = aggregates_up_to_with_budget(6, Precision::from_bits(64), budget).unwrap_err();
        assert!(matches!(err, Error::PrecisionUnreachable(_)));
        assert!(aggregates_up_to(0, Precision::from_bits(64)).is_err());
    }
}
