//! Entropy bounds for non-uniform (m,d)-measures.
//!
//! With `a = -sum p_i log2 p_i` and `b = sum_{i<m-d} (p_i + p_{d+i})`, the
//! entropy increments of the graph satisfy `a - b_n <= h(n) - h(n-1) <= a`,
//! where `b_n` increases to `b`. Dividing the limit by `log2 d` gives
//!
//! ```text
//! H in [(a - b) / log2 d, a / log2 d].
//! ```
//!
//! The bracket comes from the binary entropy `D(x)` ranging over `[-1, 0]`.
//! For the symmetric (3,2) family `(1/(t+2), t/(t+2), 1/(t+2))` the adjacent
//! node ratios `p/(p+q)` stay inside `[1/(t+1), t/(t+1)]` (checked against the
//! graph, not assumed), which narrows `D` to `[-1, D(1/(t+1))]` and lowers the
//! upper bound to `a + b D(1/(t+1))`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::certified::{log2_int, log2_ratio, CertifiedValue, Interval, Precision};
use crate::error::{Error, Result};
use crate::graph::{adjacency_ratio_range, initial_level, level_entropy, LevelDistribution};
use crate::params::{MdParams, ProbabilityVector};

pub const DEFAULT_RATIO_CHECK_DEPTH: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundsMethod {
    Plain,
    ImprovedSymmetric,
}

impl BoundsMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Plain => "plain",
            Self::ImprovedSymmetric => "improved_symmetric",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsResult {
    pub params: MdParams,
    /// `-sum p_i log2 p_i`, in bits.
    pub a: CertifiedValue,
    pub b_limit: BigRational,
    /// Entropy bounds, already divided by `log2 d`.
    pub interval: Interval,
    pub method: BoundsMethod,
    pub similarity_dimension: CertifiedValue,
    pub warning: Option<String>,
}

impl BoundsResult {
    /// The interval intersected with `(-inf, 1]`, for reading it as a
    /// dimension bound.
    pub fn clamped_to_dimension(&self) -> Interval {
        Interval::new(self.interval.lo.min_one().0, self.interval.hi.min_one().0)
    }
}

/// `-sum p_i log2 p_i`.
pub fn shannon_entropy(probs: &ProbabilityVector, prec: Precision) -> CertifiedValue {
    probs
        .as_slice()
        .iter()
        .fold(CertifiedValue::zero(prec), |acc, p| {
            let term = log2_ratio(p, prec)
                .expect("probabilities are positive")
                .mul_ratio(p);
            &acc - &term
        })
}

fn check_lengths(params: MdParams, probs: &ProbabilityVector) -> Result<()> {
    if probs.len() != params.m() as usize {
        return Err(Error::InvalidProbabilities(format!(
            "{} probabilities for m = {}",
            probs.len(),
            params.m()
        )));
    }
    Ok(())
}

/// `(-sum p_i log2 p_i) / log2 d`.
pub fn similarity_dimension(
    params: MdParams,
    probs: &ProbabilityVector,
    prec: Precision,
) -> Result<CertifiedValue> {
    check_lengths(params, probs)?;
    shannon_entropy(probs, prec).div(&log2_int(params.d(), prec)?)
}

/// `sum_{i=0}^{m-d-1} (p_i + p_{d+i})`.
pub fn b_limit(params: MdParams, probs: &ProbabilityVector) -> BigRational {
    let p = probs.as_slice();
    let d = params.d() as usize;
    (0..params.r() as usize).map(|i| &p[i] + &p[d + i]).sum()
}

/// `b_n = b - sum_{i<m-d} p_i p_0^(n-1) - sum_{i>=d} p_i p_{m-1}^(n-1)`.
pub fn b_n(params: MdParams, probs: &ProbabilityVector, n: u32) -> Result<BigRational> {
    if n < 1 {
        return Err(Error::Domain("b_n is defined for n >= 1".into()));
    }
    let p = probs.as_slice();
    let (m, d, r) = (
        params.m() as usize,
        params.d() as usize,
        params.r() as usize,
    );
    let left: BigRational = p[..r].iter().sum();
    let right: BigRational = p[d..m].iter().sum();
    let exp = (n - 1) as i32;
    Ok(b_limit(params, probs) - left * p[0].pow(exp) - right * p[m - 1].pow(exp))
}

pub fn entropy_bounds(
    params: MdParams,
    probs: &ProbabilityVector,
    prec: Precision,
) -> Result<BoundsResult> {
    check_lengths(params, probs)?;
    let a = shannon_entropy(probs, prec);
    let b = b_limit(params, probs);
    let log2d = log2_int(params.d(), prec)?;
    let upper = a.div(&log2d)?;
    let lower = (&a - &CertifiedValue::from_ratio(&b, prec)).div(&log2d)?;
    Ok(BoundsResult {
        params,
        a,
        b_limit: b,
        interval: Interval::new(lower, upper.clone()),
        method: BoundsMethod::Plain,
        similarity_dimension: upper,
        warning: None,
    })
}

/// `D(x) = x log2 x + (1-x) log2 (1-x)` on `0 < x < 1`.
pub fn binary_entropy(x: &BigRational, prec: Precision) -> Result<CertifiedValue> {
    if !x.is_positive() || *x >= BigRational::one() {
        return Err(Error::Domain(format!("D(x) needs 0 < x < 1, got {x}")));
    }
    let y = BigRational::one() - x;
    let left = log2_ratio(x, prec)?.mul_ratio(x);
    let right = log2_ratio(&y, prec)?.mul_ratio(&y);
    Ok(&left + &right)
}

/// Per-level outcome of the adjacent-ratio audit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioLevel {
    pub n: u32,
    pub min: BigRational,
    pub max: BigRational,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioClaimReport {
    pub t: BigRational,
    pub levels: Vec<RatioLevel>,
}

impl RatioClaimReport {
    pub fn passed(&self) -> bool {
        self.levels.iter().all(|l| l.pass)
    }

    pub fn first_failure(&self) -> Option<&RatioLevel> {
        self.levels.iter().find(|l| !l.pass)
    }
}

/// Checks `1/(t+1) <= p/(p+q) <= t/(t+1)` for adjacent nodes on levels
/// `1..=n_max` of the symmetric (3,2) graph.
pub fn ratio_claim_check(t: &BigRational, n_max: u32) -> Result<RatioClaimReport> {
    let probs = ProbabilityVector::symmetric_three(t)?;
    let params = MdParams::new(3, 2)?;
    let t1 = t + BigRational::one();
    let lo = t1.recip();
    let hi = t / &t1;
    let mut dist: LevelDistribution = initial_level(params);
    let mut levels = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        dist = dist.advance(&probs)?;
        let range = adjacency_ratio_range(&dist)?;
        let pass = range.min >= lo && range.max <= hi;
        levels.push(RatioLevel {
            n,
            min: range.min,
            max: range.max,
            pass,
        });
    }
    Ok(RatioClaimReport {
        t: t.clone(),
        levels,
    })
}

pub fn improved_bounds_symmetric(t: &BigRational, prec: Precision) -> Result<BoundsResult> {
    improved_bounds_symmetric_with(t, prec, DEFAULT_RATIO_CHECK_DEPTH)
}

/// Bounds for `(1/(t+2), t/(t+2), 1/(t+2))` on the (3,2) graph.
///
/// The narrowed upper bound is used for `t >= 2` when the ratio audit passes
/// to `check_depth`; otherwise the plain interval is returned, with a warning
/// if the audit was the reason.
pub fn improved_bounds_symmetric_with(
    t: &BigRational,
    prec: Precision,
    check_depth: u32,
) -> Result<BoundsResult> {
    if *t < BigRational::one() {
        return Err(Error::Domain(format!("t = {t} must be at least 1")));
    }
    let params = MdParams::new(3, 2)?;
    let probs = ProbabilityVector::symmetric_three(t)?;
    let mut plain = entropy_bounds(params, &probs, prec)?;
    if *t < BigRational::from_integer(2.into()) {
        return Ok(plain);
    }
    let audit = ratio_claim_check(t, check_depth)?;
    if let Some(bad) = audit.first_failure() {
        plain.warning = Some(format!(
            "adjacent ratio {}..{} at level {} leaves [1/(t+1), t/(t+1)]; using plain bounds",
            bad.min, bad.max, bad.n
        ));
        return Ok(plain);
    }
    // d = 2, so nothing to divide by.
    let b = CertifiedValue::from_ratio(&plain.b_limit, prec);
    let narrowed = binary_entropy(&(t + BigRational::one()).recip(), prec)?;
    let upper = &plain.a + &b.mul(&narrowed);
    Ok(BoundsResult {
        interval: Interval::new(plain.interval.lo.clone(), upper),
        method: BoundsMethod::ImprovedSymmetric,
        ..plain
    })
}

/// One observed entropy increment with its predicted bracket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaH {
    pub n: u32,
    pub delta_h: CertifiedValue,
    pub a: CertifiedValue,
    pub b_n: BigRational,
}

impl DeltaH {
    /// Whether `a - b_n <= delta_h <= a` is consistent with the certified radii.
    pub fn sandwiched(&self) -> bool {
        let prec = self.a.precision();
        let lower = &self.a - &CertifiedValue::from_ratio(&self.b_n, prec);
        self.delta_h.hi() >= lower.lo() && self.delta_h.lo() <= self.a.hi()
    }
}

/// `h(n) - h(n-1)` from the graph, for every `1 <= n <= n_max`.
pub fn empirical_delta_h_series(
    params: MdParams,
    probs: &ProbabilityVector,
    n_max: u32,
    prec: Precision,
) -> Result<Vec<DeltaH>> {
    check_lengths(params, probs)?;
    let a = shannon_entropy(probs, prec);
    let mut dist = initial_level(params);
    let mut prev = CertifiedValue::zero(prec);
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        dist = dist.advance(probs)?;
        let h = level_entropy(&dist, prec);
        out.push(DeltaH {
            n,
            delta_h: &h - &prev,
            a: a.clone(),
            b_n: b_n(params, probs, n)?,
        });
        prev = h;
    }
    Ok(out)
}

pub fn empirical_delta_h(
    params: MdParams,
    probs: &ProbabilityVector,
    n: u32,
    prec: Precision,
) -> Result<DeltaH> {
    if n < 1 {
        return Err(Error::Domain("increments start at n = 1".into()));
    }
    Ok(empirical_delta_h_series(params, probs, n, prec)?
        .pop()
        .expect("n >= 1"))
}

/// Integer `t` as a rational.
pub fn t_value(t: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(t))
}

/// Rows of the symmetric table for `t = 1..=t_max`.
pub fn symmetric_table(t_max: u32, prec: Precision) -> Result<Vec<BoundsResult>> {
    (1..=t_max)
        .map(|t| improved_bounds_symmetric(&t_value(t), prec))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_params;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn prec() -> Precision {
        Precision::for_digits(10)
    }

    fn p32() -> MdParams {
        validate_params(3, 2).unwrap()
    }

    fn probs(text: &str) -> ProbabilityVector {
        ProbabilityVector::parse(p32(), text).unwrap()
    }

    fn near(v: &CertifiedValue, x: f64) -> bool {
        (v.to_f64() - x).abs() < 1e-12
    }

    // Reference values below are from an independent 30-digit evaluation.

    #[test]
    fn similarity_dimension_examples() {
        let u = ProbabilityVector::uniform(p32());
        assert!(near(
            &similarity_dimension(p32(), &u, prec()).unwrap(),
            1.584_962_500_721_156
        ));
        let v = similarity_dimension(p32(), &probs("1/4,1/2,1/4"), prec()).unwrap();
        assert!(v.is_exact() && v.mid() == q(3, 2));
        let v = similarity_dimension(p32(), &probs("1/8,6/8,1/8"), prec()).unwrap();
        assert!(near(&v, 1.061_278_124_459_133));
    }

    #[test]
    fn plain_bounds_examples() {
        let b = entropy_bounds(p32(), &ProbabilityVector::uniform(p32()), prec()).unwrap();
        assert_eq!(b.interval.lo.to_fixed(10).as_deref(), Some("0.9182958341"));
        assert_eq!(
            b.interval.hi.to_significant(10).as_deref(),
            Some("1.584962501")
        );
        assert_eq!(b.b_limit, q(2, 3));
        assert_eq!(b.method, BoundsMethod::Plain);
        assert_eq!(b.interval.hi, b.similarity_dimension);

        let b = entropy_bounds(p32(), &probs("1/5,3/5,1/5"), prec()).unwrap();
        assert!(near(&b.interval.lo, 0.970_950_594_454_669));
        assert!(near(&b.interval.hi, 1.370_950_594_454_669));
        let b = entropy_bounds(p32(), &probs("1/8,6/8,1/8"), prec()).unwrap();
        assert!(near(&b.interval.lo, 0.811_278_124_459_133));
    }

    #[test]
    fn bounds_divide_by_log2_d() {
        let p = validate_params(4, 3).unwrap();
        let b = entropy_bounds(p, &ProbabilityVector::uniform(p), prec()).unwrap();
        // a = 2, b = 1/2, log2 3
        assert!(near(&b.interval.hi, 2.0 / 1.584_962_500_721_156));
        assert!(near(&b.interval.lo, 1.5 / 1.584_962_500_721_156));
    }

    #[test]
    fn binary_entropy_examples() {
        let d = binary_entropy(&q(1, 2), prec()).unwrap();
        assert!(d.is_exact() && d.mid() == q(-1, 1));
        assert!(near(
            &binary_entropy(&q(1, 3), prec()).unwrap(),
            -0.918_295_834_054_489_6
        ));
        assert!(near(
            &binary_entropy(&q(1, 4), prec()).unwrap(),
            -0.811_278_124_459_132_9
        ));
        assert!(binary_entropy(&q(0, 1), prec()).is_err());
        assert!(binary_entropy(&q(1, 1), prec()).is_err());
        assert!(binary_entropy(&q(3, 2), prec()).is_err());
    }

    #[test]
    fn symmetric_examples() {
        let b = improved_bounds_symmetric(&t_value(2), prec()).unwrap();
        assert_eq!(b.method, BoundsMethod::ImprovedSymmetric);
        assert!(b.interval.lo.is_exact() && b.interval.lo.mid().is_one());
        assert_eq!(
            b.interval.hi.to_significant(10).as_deref(),
            Some("1.040852083")
        );

        let b = improved_bounds_symmetric(&t_value(5), prec()).unwrap();
        assert!(near(&b.interval.lo, 0.863_120_568_566_631));
        assert!(near(&b.interval.hi, 0.963_114_162_381_387));

        let b = improved_bounds_symmetric(&t_value(1), prec()).unwrap();
        assert_eq!(b.method, BoundsMethod::Plain);
        assert!(near(&b.interval.lo, 0.918_295_834_054_49));
        assert!(near(&b.interval.hi, 1.584_962_500_721_156));

        let b = improved_bounds_symmetric(&t_value(10), prec()).unwrap();
        assert_eq!(b.interval.lo.to_fixed(10).as_deref(), Some("0.6500224216"));
        assert_eq!(b.interval.hi.to_fixed(10).as_deref(), Some("0.7434395905"));

        assert!(improved_bounds_symmetric(&q(1, 2), prec()).is_err());
        let between = improved_bounds_symmetric(&q(3, 2), prec()).unwrap();
        assert_eq!(between.method, BoundsMethod::Plain);
    }

    #[test]
    fn ratio_claim_examples() {
        assert!(ratio_claim_check(&t_value(2), 8).unwrap().passed());
        assert!(ratio_claim_check(&t_value(3), 8).unwrap().passed());
        let r = ratio_claim_check(&t_value(1), 2).unwrap();
        assert!(r.levels[0].pass && !r.levels[1].pass);
    }

    #[test]
    fn delta_h_examples() {
        let u = ProbabilityVector::uniform(p32());
        let d1 = empirical_delta_h(p32(), &u, 1, prec()).unwrap();
        assert!(d1.b_n.is_zero());
        assert!(d1.delta_h.overlaps(&d1.a));
        let d2 = empirical_delta_h(p32(), &u, 2, prec()).unwrap();
        assert_eq!(d2.b_n, q(4, 9));
        let lower = &d2.a - &CertifiedValue::from_ratio(&d2.b_n, prec());
        assert!(d2.delta_h.overlaps(&lower));
        assert!(d2.delta_h.radius_f64() < 1e-20);
        let d3 = empirical_delta_h(p32(), &probs("1/4,1/2,1/4"), 3, prec()).unwrap();
        assert!(d3.sandwiched());
        assert!(empirical_delta_h(p32(), &u, 0, prec()).is_err());
    }

    #[test]
    fn b_n_increases_to_limit() {
        for text in ["1/3,1/3,1/3", "1/4,1/2,1/4", "1/7,5/7,1/7", "1/2,1/3,1/6"] {
            let p = probs(text);
            let limit = b_limit(p32(), &p);
            let mut prev = b_n(p32(), &p, 1).unwrap();
            for n in 2..30 {
                let cur = b_n(p32(), &p, n).unwrap();
                assert!(cur >= prev && cur <= limit);
                prev = cur;
            }
        }
    }

    #[test]
    fn improved_is_inside_plain() {
        for t in 2..=10 {
            let t = t_value(t);
            let improved = improved_bounds_symmetric(&t, prec()).unwrap();
            let plain = entropy_bounds(
                p32(),
                &ProbabilityVector::symmetric_three(&t).unwrap(),
                prec(),
            )
            .unwrap();
            assert_eq!(improved.interval.lo, plain.interval.lo);
            assert!(improved.interval.hi.hi() <= plain.interval.hi.lo());
            assert_eq!(plain.interval.hi, plain.similarity_dimension);
        }
    }

    #[test]
    fn clamping() {
        let b = entropy_bounds(p32(), &ProbabilityVector::uniform(p32()), prec()).unwrap();
        let c = b.clamped_to_dimension();
        assert!(c.hi.mid().is_one());
        assert_eq!(c.lo, b.interval.lo);
    }

    proptest! {
        #[test]
        fn binary_entropy_symmetric_and_bounded(n in 1i64..1000, extra in 1i64..1000) {
            let x = q(n, n + extra);
            let d = binary_entropy(&x, prec()).unwrap();
            let e = binary_entropy(&(BigRational::one() - &x), prec()).unwrap();
            prop_assert!(d.overlaps(&e));
            prop_assert!(d.lo() >= q(-1, 1) - q(1, 1 << 40));
            prop_assert!(d.hi() < BigRational::zero());
        }
    }
}
