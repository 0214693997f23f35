//! The weighted (m,d)-graph, built level by level.
//!
//! The node reached by the word `s_1 s_2 .. s_n` is identified with the integer
//! `v = sum s_k d^(n-k)`; the point itself is `v (d-1) / ((m-1) d^n)`. Two words
//! land on the same node exactly when their integers agree, so the overlap
//! `S_{i,j+d} = S_{i+1,j}` is plain integer equality. Occupied positions always
//! form the full range `0..=(m-1)(d^n-1)/(d-1)`, which lets weights live in a
//! dense vector.
//!
//! Weights are exact: each level stores integer numerators over one common
//! denominator, so conservation of mass holds with no rounding at all.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::certified::{CertifiedValue, Interval, Log2Table, Precision};
use crate::error::{Error, Result};
use crate::params::{MdParams, ProbabilityVector};

pub const DEFAULT_POSITION_BUDGET: u128 = 100_000_000;

/// Level `n` of the graph: exact node weights `numerators[v] / denominator`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelDistribution {
    params: MdParams,
    level: u32,
    denominator: u128,
    numerators: Vec<u128>,
}

/// Number of occupied positions at level `n`, `(m-1)(d^n-1)/(d-1) + 1`.
pub fn positions_at(params: MdParams, level: u32) -> Option<u128> {
    let d = u128::from(params.d());
    let dn = d.checked_pow(level)?;
    let span = u128::from(params.m() - 1).checked_mul((dn - 1) / (d - 1))?;
    span.checked_add(1)
}

pub fn initial_level(params: MdParams) -> LevelDistribution {
    LevelDistribution {
        params,
        level: 0,
        denominator: 1,
        numerators: vec![1],
    }
}

impl LevelDistribution {
    pub fn params(&self) -> MdParams {
        self.params
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    /// Largest occupied position.
    pub fn max_position(&self) -> usize {
        self.numerators.len() - 1
    }

    pub fn denominator(&self) -> u128 {
        self.denominator
    }

    pub fn numerators(&self) -> &[u128] {
        &self.numerators
    }

    pub fn weight(&self, v: usize) -> BigRational {
        BigRational::new(
            BigInt::from(self.numerators[v]),
            BigInt::from(self.denominator),
        )
    }

    pub fn total_weight(&self) -> BigRational {
        let sum: BigInt = self.numerators.iter().map(|&c| BigInt::from(c)).sum();
        BigRational::new(sum, BigInt::from(self.denominator))
    }

    pub fn advance(&self, probs: &ProbabilityVector) -> Result<Self> {
        self.advance_with_budget(probs, DEFAULT_POSITION_BUDGET)
    }

    /// Pushes every node's mass to its `m` children: position `d v + j`
    /// receives `p_j w_v`.
    pub fn advance_with_budget(&self, probs: &ProbabilityVector, budget: u128) -> Result<Self> {
        let params = self.params;
        if probs.len() != params.m() as usize {
            return Err(Error::InvalidProbabilities(format!(
                "{} probabilities for m = {}",
                probs.len(),
                params.m()
            )));
        }
        let level = self.level + 1;
        let positions = positions_at(params, level).unwrap_or(u128::MAX);
        if positions > budget {
            return Err(Error::LevelCap {
                level,
                positions,
                budget,
            });
        }
        let (q, numers) = probs.common_denominator();
        let overflow = || Error::WeightOverflow(level);
        let q = q.to_u128().ok_or_else(overflow)?;
        let digit: Vec<u128> = numers
            .iter()
            .map(|c| c.to_u128().ok_or_else(overflow))
            .collect::<Result<_>>()?;
        // Numerators at the new level sum to the new denominator, so checking
        // the denominator rules out overflow in every accumulation below.
        let denominator = self.denominator.checked_mul(q).ok_or_else(overflow)?;

        let d = params.d() as usize;
        let mut next = vec![0u128; positions as usize];
        for (v, &w) in self.numerators.iter().enumerate() {
            let base = d * v;
            for (j, &c) in digit.iter().enumerate() {
                next[base + j] += c * w;
            }
        }
        Ok(Self {
            params,
            level,
            denominator,
            numerators: next,
        })
    }

    /// Distinct numerators with their multiplicities.
    fn numerator_counts(&self) -> HashMap<u128, u64> {
        let mut counts = HashMap::new();
        for &c in &self.numerators {
            *counts.entry(c).or_insert(0u64) += 1;
        }
        counts
    }
}

pub fn advance_level(
    dist: &LevelDistribution,
    probs: &ProbabilityVector,
) -> Result<LevelDistribution> {
    dist.advance(probs)
}

/// Levels `0..=n` under the same probabilities.
pub fn levels_up_to(
    params: MdParams,
    probs: &ProbabilityVector,
    n: u32,
) -> Result<Vec<LevelDistribution>> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(initial_level(params));
    for _ in 0..n {
        let next = out.last().expect("nonempty").advance(probs)?;
        out.push(next);
    }
    Ok(out)
}

/// Shannon entropy `-sum w log2 w` of the level, in bits.
///
/// With `w = c / D` this is `log2 D - (1/D) sum c log2 c`; equal numerators share
/// one logarithm.
pub fn level_entropy(dist: &LevelDistribution, prec: Precision) -> CertifiedValue {
    let mut logs = Log2Table::new(prec);
    let mut counts: Vec<(u128, u64)> = dist.numerator_counts().into_iter().collect();
    counts.sort_unstable();
    let mut acc = CertifiedValue::zero(prec);
    for (c, count) in counts {
        if c > 1 {
            let weight = BigInt::from(c) * BigInt::from(count);
            acc = &acc + &logs.get(c).mul_int(&weight);
        }
    }
    let denominator = BigInt::from(dist.denominator);
    let scaled = acc.div_int(&denominator).expect("denominator is positive");
    &logs.get(dist.denominator) - &scaled
}

/// Count of nodes per frequency (number of root-to-node paths).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyHistogram {
    pub level: u32,
    pub counts: BTreeMap<u64, u64>,
}

impl FrequencyHistogram {
    /// `sum_k f(n,k) k`, which must equal `m^n`.
    pub fn path_total(&self) -> BigUint {
        self.counts
            .iter()
            .map(|(&k, &f)| BigUint::from(k) * BigUint::from(f))
            .sum()
    }

    pub fn max_frequency(&self) -> u64 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    pub fn count(&self, k: u64) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }
}

/// Frequencies `w_v m^n`; fails if any of them is not an integer.
pub fn frequency_histogram(dist: &LevelDistribution) -> Result<FrequencyHistogram> {
    let paths = BigUint::from(dist.params.m()).pow(dist.level);
    let denominator = BigUint::from(dist.denominator);
    let mut by_numerator: BTreeMap<u128, (u64, usize)> = BTreeMap::new();
    for (v, &c) in dist.numerators.iter().enumerate() {
        by_numerator.entry(c).or_insert((0, v)).0 += 1;
    }
    let mut counts = BTreeMap::new();
    for (c, (count, first)) in by_numerator {
        let scaled = BigUint::from(c) * &paths;
        if !(&scaled % &denominator).is_zero() {
            return Err(Error::NonUniform(first));
        }
        let k = (scaled / &denominator)
            .to_u64()
            .ok_or(Error::WeightOverflow(dist.level))?;
        *counts.entry(k).or_insert(0) += count;
    }
    Ok(FrequencyHistogram {
        level: dist.level,
        counts,
    })
}

/// `n log2 m - m^-n sum_k f(n,k) k log2 k`.
pub fn entropy_via_frequencies(
    hist: &FrequencyHistogram,
    params: MdParams,
    prec: Precision,
) -> CertifiedValue {
    let mut logs = Log2Table::new(prec);
    let mut acc = CertifiedValue::zero(prec);
    for (&k, &f) in &hist.counts {
        if k > 1 {
            let weight = BigInt::from(k) * BigInt::from(f);
            acc = &acc + &logs.get(u128::from(k)).mul_int(&weight);
        }
    }
    let paths = BigInt::from(params.m()).pow(hist.level);
    let scaled = acc.div_int(&paths).expect("m^n is positive");
    let head = logs
        .get(u128::from(params.m()))
        .mul_int(&BigInt::from(hist.level));
    &head - &scaled
}

/// Extremes of `p / (p + q)` over consecutive positions, as exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioRange {
    pub min: BigRational,
    pub max: BigRational,
}

impl RatioRange {
    pub fn to_interval(&self, prec: Precision) -> Interval {
        Interval::exact(&self.min, &self.max, prec)
    }
}

/// Compares `a/b` with `c/d` for positive denominators.
fn cmp_fraction(a: u128, b: u128, c: u128, d: u128) -> Ordering {
    match (a.checked_mul(d), c.checked_mul(b)) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => (BigUint::from(a) * BigUint::from(d)).cmp(&(BigUint::from(c) * BigUint::from(b))),
    }
}

pub fn adjacency_ratio_range(dist: &LevelDistribution) -> Result<RatioRange> {
    if dist.len() < 2 {
        return Err(Error::Domain(format!(
            "level {} has a single node, no adjacent pairs",
            dist.level
        )));
    }
    let w = &dist.numerators;
    let mut min = (w[0], w[0] + w[1]);
    let mut max = min;
    for pair in w.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        let ratio = (p, p + q);
        if cmp_fraction(ratio.0, ratio.1, min.0, min.1) == Ordering::Less {
            min = ratio;
        }
        if cmp_fraction(ratio.0, ratio.1, max.0, max.1) == Ordering::Greater {
            max = ratio;
        }
    }
    let to_q = |(a, b): (u128, u128)| BigRational::new(BigInt::from(a), BigInt::from(b));
    Ok(RatioRange {
        min: to_q(min),
        max: to_q(max),
    })
}
