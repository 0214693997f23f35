//! Certified entropy of uniform (m,d)-measures.
//!
//! With `s(n) = sum over level-n Euclidean pairs of k log2 k` (k the larger
//! label) and `l(n) = s(n) - 6 s(n-1) + 9 s(n-2)`,
//!
//! ```text
//! H_{m,d} = (log2 m - R(1) sum_{n>=1} l(n) m^-n) / log2 d,   R(1) = r m / (m-1).
//! ```
//!
//! Since `|l(n)| <= 2/(15 ln 2)` for `n >= 3`, truncating after `N >= 2` terms
//! leaves a tail of at most `2 m^-N / (15 (m-1) ln 2)`. The tail bound goes into
//! the radius alongside the accumulated rounding error.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::certified::{ln2, log2_int, ratio_to_f64, CertifiedValue, Precision};
use crate::error::{Error, Result};
use crate::euclid::{EuclidBudget, EuclidTable};
use crate::params::MdParams;

pub const DEFAULT_DIGITS: u32 = 10;
pub const DEFAULT_MAX_DIGITS: u32 = 30;

/// Share of the `0.5 10^-digits` error allowance given to the series tail; the
/// remaining `0.1 10^-digits` covers rounding.
fn tail_allowance(digits: u32) -> BigRational {
    BigRational::new(4.into(), BigInt::from(10u32).pow(digits + 1))
}

fn half_unit(digits: u32) -> BigRational {
    BigRational::new(5.into(), BigInt::from(10u32).pow(digits + 1))
}

/// `l(1..=N)`; the table is extended to depth `N` as needed.
pub fn ell_coefficients(n: u32, table: &mut EuclidTable) -> Result<Vec<CertifiedValue>> {
    if n < 1 {
        return Err(Error::Domain("need N >= 1 series coefficients".into()));
    }
    table.extend_to(n)?;
    let six = BigInt::from(6);
    let nine = BigInt::from(9);
    Ok((1..=i64::from(n))
        .map(|k| {
            let head = &table.s(k) - &table.s(k - 1).mul_int(&six);
            &head + &table.s(k - 2).mul_int(&nine)
        })
        .collect())
}

/// A rational upper bound on `2 m^-N / (15 (m-1) ln 2)`.
pub fn tail_bound(m: u32, n: u32) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "the tail bound needs N >= 2, got {n}"
        )));
    }
    if m < 2 {
        return Err(Error::Domain(format!("m = {m} must be at least 2")));
    }
    let ln2_lo = ln2(Precision::from_bits(64)).lo();
    let denom =
        BigRational::from_integer(BigInt::from(15 * (m - 1)) * BigInt::from(m).pow(n)) * ln2_lo;
    Ok(BigRational::from_integer(2.into()) / denom)
}

/// `R(1) = r m / (m - 1)`.
pub fn r_at_one(params: MdParams) -> BigRational {
    BigRational::new(
        BigInt::from(params.r() * params.m()),
        BigInt::from(params.m() - 1),
    )
}

/// `T(1) = log2 m - R(1) sum_{n<=N} l(n) m^-n`, radius including the tail.
pub fn t_at_one(params: MdParams, n: u32, table: &mut EuclidTable) -> Result<CertifiedValue> {
    let tail = tail_bound(params.m(), n)?;
    let ell = ell_coefficients(n, table)?;
    let prec = table.precision();
    let m = BigInt::from(params.m());
    let mut sum = CertifiedValue::zero(prec);
    let mut power = BigInt::one();
    for term in &ell {
        power *= &m;
        sum = &sum + &term.div_int(&power)?;
    }
    let r1 = r_at_one(params);
    let head = log2_int(params.m(), prec)?;
    Ok((&head - &sum.mul_ratio(&r1)).widen(&(&r1 * &tail)))
}

/// Smallest `N >= 2` whose tail contribution to the entropy is below
/// `0.4 10^-digits`.
pub fn choose_truncation(params: MdParams, digits: u32) -> u32 {
    let r1 = r_at_one(params);
    let log2d_lo = log2_int(params.d(), Precision::from_bits(64))
        .expect("d >= 2")
        .lo();
    let allowance = tail_allowance(digits);
    let mut n = 2;
    loop {
        let tail = tail_bound(params.m(), n).expect("n >= 2");
        if &r1 * tail / &log2d_lo < allowance {
            return n;
        }
        n += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntropyResult {
    pub params: MdParams,
    pub entropy: CertifiedValue,
    pub dimension: CertifiedValue,
    /// Set when the entropy ball straddles 1 so `min(1, H)` is not decided.
    pub dimension_widened: bool,
    /// Truncation the certified value was computed with.
    pub n_used: u32,
    /// Truncation picked by [`choose_truncation`] before any deepening.
    pub n_rule: u32,
    pub requested_digits: u32,
    /// The entropy to `requested_digits` decimals, identical for every point of the ball.
    pub rendered: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniformConfig {
    pub max_digits: u32,
    pub budget: EuclidBudget,
    /// Overrides the working precision derived from the digit count.
    pub precision: Option<Precision>,
}

impl Default for UniformConfig {
    fn default() -> Self {
        Self {
            max_digits: DEFAULT_MAX_DIGITS,
            budget: EuclidBudget::default(),
            precision: None,
        }
    }
}

impl UniformConfig {
    pub fn precision_for(&self, digits: u32) -> Precision {
        self.precision
            .unwrap_or_else(|| Precision::for_digits(digits))
    }

    pub fn table_for(&self, digits: u32) -> EuclidTable {
        EuclidTable::new(self.precision_for(digits), self.budget)
    }
}

/// `H_{m,d}` and `min(1, H_{m,d})` to `digits` decimals.
pub fn uniform_entropy(params: MdParams, digits: u32) -> Result<EntropyResult> {
    let config = UniformConfig::default();
    let mut table = config.table_for(digits);
    uniform_entropy_with(params, digits, &mut table, &config)
}

/// As [`uniform_entropy`], reusing a Euclidean table across calls.
///
/// Starts at the truncation rule's `N` and deepens one level at a time until
/// the radius is below half a unit in the last requested digit and both ends
/// of the ball round to the same decimal string.
pub fn uniform_entropy_with(
    params: MdParams,
    digits: u32,
    table: &mut EuclidTable,
    config: &UniformConfig,
) -> Result<EntropyResult> {
    if digits < 1 || digits > config.max_digits {
        return Err(Error::Domain(format!(
            "digits = {digits} outside 1..={}",
            config.max_digits
        )));
    }
    let prec = table.precision();
    let log2d = log2_int(params.d(), prec)?;
    let half = half_unit(digits);
    let n_rule = choose_truncation(params, digits);
    let mut n = n_rule;
    loop {
        let t = t_at_one(params, n, table).map_err(|e| match e {
            Error::PrecisionUnreachable(msg) => Error::PrecisionUnreachable(format!(
                "{params} to {digits} digits needs N = {n}: {msg}"
            )),
            other => other,
        })?;
        let entropy = t.div(&log2d)?;
        if entropy.radius() < half {
            if let Some(rendered) = entropy.to_fixed(digits) {
                let (dimension, dimension_widened) = entropy.min_one();
                return Ok(EntropyResult {
                    params,
                    entropy,
                    dimension,
                    dimension_widened,
                    n_used: n,
                    n_rule,
                    requested_digits: digits,
                    rendered,
                });
            }
        }
        n += 1;
    }
}

/// `min(1, H)` with interval semantics; the flag marks a ball straddling 1.
pub fn hausdorff_dimension(result: &EntropyResult) -> (CertifiedValue, bool) {
    result.entropy.min_one()
}

pub fn tail_bound_f64(m: u32, n: u32) -> Result<f64> {
    tail_bound(m, n).map(|b| ratio_to_f64(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_params;

    fn params(m: i64, d: i64) -> MdParams {
        validate_params(m, d).unwrap()
    }

    fn table() -> EuclidTable {
        EuclidTable::new(Precision::for_digits(10), EuclidBudget::default())
    }

    #[test]
    fn first_ell_values() {
        let mut t = table();
        let ell = ell_coefficients(3, &mut t).unwrap();
        assert_eq!(ell[0].mid(), BigRational::from_integer(2.into()));
        assert!(ell[0].is_exact());
        // 6 log2 3 - 12
        assert!((ell[1].to_f64() - -2.490_224_995_673_063).abs() < 1e-14);
        // 34 + 10 log2 5 - 36 log2 3
        assert!((ell[2].to_f64() - 0.160_630_922_911_991_4).abs() < 1e-14);
        assert!(ell_coefficients(0, &mut t).is_err());
    }

    #[test]
    fn tail_bounds() {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-3 * b;
        assert!(close(tail_bound_f64(3, 20).unwrap(), 2.7565e-11));
        assert!(close(tail_bound_f64(4, 15).unwrap(), 5.9713e-11));
        assert!(close(tail_bound_f64(3, 2).unwrap(), 1.06864e-2));
        assert!(tail_bound(3, 1).is_err());
        // an upper bound: never below the f64 evaluation of the formula
        let exact = 2.0 / (15.0 * 2.0 * 3f64.powi(20) * std::f64::consts::LN_2);
        assert!(tail_bound_f64(3, 20).unwrap() >= exact * (1.0 - 1e-15));
    }

    #[test]
    fn t_at_one_short_truncation() {
        let mut t = table();
        let v = t_at_one(params(3, 2), 3, &mut t).unwrap();
        assert!((v.to_f64() - 0.991_076_059_838_222).abs() < 1e-14, "{v}");
        let tail = tail_bound_f64(3, 3).unwrap();
        assert!(v.radius_f64() <= 1.5 * tail * (1.0 + 1e-12));
        assert!(v.radius_f64() >= 1.5 * tail);
        assert_eq!(r_at_one(params(3, 2)), BigRational::new(3.into(), 2.into()));
    }

    #[test]
    fn truncation_rule() {
        assert_eq!(choose_truncation(params(3, 2), 10), 21);
        assert_eq!(choose_truncation(params(4, 3), 10), 16);
        assert!(choose_truncation(params(3, 2), 1) <= 6);
    }

    #[test]
    fn spot_values() {
        for (m, d, want) in [
            (3, 2, "0.9887658714"),
            (4, 3, "0.9696751053"),
            (5, 3, "0.9888495673"),
            (19, 10, "0.9973815856"),
        ] {
            let r = uniform_entropy(params(m, d), 10).unwrap();
            assert_eq!(r.rendered, want);
            assert!(r.entropy.radius_f64() < 5e-11);
            assert_eq!(r.dimension, r.entropy);
            assert!(!r.dimension_widened);
        }
    }

    #[test]
    fn deepens_when_rounding_is_undecided() {
        // The (3,2) ball at the rule's N straddles a rounding boundary.
        let r = uniform_entropy(params(3, 2), 10).unwrap();
        assert_eq!(r.n_rule, 21);
        assert!(r.n_used >= r.n_rule);
    }

    #[test]
    fn monotone_certification() {
        let mut t = table();
        for p in MdParams::all_up_to(6) {
            let a = t_at_one(p, 8, &mut t).unwrap();
            let b = t_at_one(p, 11, &mut t).unwrap();
            assert!(a.overlaps(&b), "{p}");
        }
    }

    #[test]
    fn digits_outside_range() {
        assert!(uniform_entropy(params(3, 2), 0).is_err());
        assert!(uniform_entropy(params(3, 2), 31).is_err());
    }

    #[test]
    fn unreachable_precision() {
        // 30 digits for m = 3 needs a tree far beyond the default budget.
        let err = uniform_entropy(params(3, 2), 30).unwrap_err();
        assert!(matches!(err, Error::PrecisionUnreachable(_)), "{err}");
    }

    #[test]
    fn dimension_clamps_at_one() {
        let mut t = table();
        let result =
            uniform_entropy_with(params(3, 2), 4, &mut t, &UniformConfig::default()).unwrap();
        let (dim, widened) = hausdorff_dimension(&result);
        assert_eq!(dim, result.entropy);
        assert!(!widened);
    }
}
