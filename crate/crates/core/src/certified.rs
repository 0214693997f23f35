//! Ball arithmetic on binary fixed-point numbers.
//!
//! A [`CertifiedValue`] is a pair of integers `(mid, rad)` read as the closed
//! interval `[(mid - rad) 2^-p, (mid + rad) 2^-p]`, where `p` is the number of
//! fractional bits of its [`Precision`]. Every operation rounds the midpoint and
//! then adds enough units in the last place to the radius that the exact image
//! of the input intervals stays inside the output.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Extra bits carried inside elementary function evaluation before the result
/// is rounded back to working precision.
const INTERNAL_GUARD_BITS: u32 = 32;

/// Number of fractional bits shared by the values taking part in one computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision {
    bits: u32,
}

impl Precision {
    pub const GUARD_DIGITS: u32 = 15;

    pub fn from_bits(bits: u32) -> Self {
        Self { bits: bits.max(8) }
    }

    /// Working precision for results wanted to `digits` decimals: the digits plus
    /// fifteen guard digits, converted to bits.
    pub fn for_digits(digits: u32) -> Self {
        let bits = (f64::from(digits + Self::GUARD_DIGITS) * LOG2_10).ceil() as u32;
        Self::from_bits(bits)
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    fn widened(self, extra: u32) -> Self {
        Self {
            bits: self.bits + extra,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedValue {
    mid: BigInt,
    rad: BigUint,
    prec: Precision,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits
}

fn ceil_shr(x: &BigUint, bits: u32) -> BigUint {
    let q = x >> bits;
    if (&q << bits) == *x {
        q
    } else {
        q + 1u32
    }
}

fn ceil_div_u(num: &BigUint, den: &BigUint) -> BigUint {
    let (q, r) = num.div_rem(den);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

/// `ceil(q * 2^bits)` for a nonnegative rational.
fn ceil_scaled(q: &BigRational, bits: u32) -> BigUint {
    let num = (q.numer() << bits).magnitude().clone();
    ceil_div_u(&num, q.denom().magnitude())
}

impl CertifiedValue {
    pub fn zero(prec: Precision) -> Self {
        Self {
            mid: BigInt::zero(),
            rad: BigUint::zero(),
            prec,
        }
    }

    pub fn from_integer(n: impl Into<BigInt>, prec: Precision) -> Self {
        Self {
            mid: n.into() << prec.bits,
            rad: BigUint::zero(),
            prec,
        }
    }

    /// Nearest fixed-point value below `q`, with radius one ulp when inexact.
    pub fn from_ratio(q: &BigRational, prec: Precision) -> Self {
        let scaled = q.numer() << prec.bits;
        let (mid, rem) = scaled.div_mod_floor(q.denom());
        let rad = if rem.is_zero() {
            BigUint::zero()
        } else {
            BigUint::one()
        };
        Self { mid, rad, prec }
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    fn scale(&self) -> BigInt {
        pow2(self.prec.bits)
    }

    pub fn mid(&self) -> BigRational {
        BigRational::new(self.mid.clone(), self.scale())
    }

    pub fn radius(&self) -> BigRational {
        BigRational::new(BigInt::from(self.rad.clone()), self.scale())
    }

    pub fn lo(&self) -> BigRational {
        BigRational::new(&self.mid - BigInt::from(self.rad.clone()), self.scale())
    }

    pub fn hi(&self) -> BigRational {
        BigRational::new(&self.mid + BigInt::from(self.rad.clone()), self.scale())
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.mid())
    }

    /// The radius as an `f64` rounded away from zero.
    pub fn radius_f64(&self) -> f64 {
        let r = ratio_to_f64(&self.radius());
        if r == 0.0 {
            0.0
        } else {
            r * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE
        }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.lo() <= *x && *x <= self.hi()
    }

    /// Whether the two balls intersect.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.lo() <= other.hi() && other.lo() <= self.hi()
    }

    /// Whether every point of the ball lies strictly below `x`.
    pub fn certainly_lt(&self, x: &BigRational) -> bool {
        self.hi() < *x
    }

    pub fn certainly_le(&self, x: &BigRational) -> bool {
        self.hi() <= *x
    }

    pub fn certainly_gt(&self, x: &BigRational) -> bool {
        self.lo() > *x
    }

    pub fn certainly_ge(&self, x: &BigRational) -> bool {
        self.lo() >= *x
    }

    /// Re-expresses the value with a different number of fractional bits.
    pub fn with_precision(&self, prec: Precision) -> Self {
        match prec.bits.cmp(&self.prec.bits) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let shift = prec.bits - self.prec.bits;
                Self {
                    mid: &self.mid << shift,
                    rad: &self.rad << shift,
                    prec,
                }
            }
            Ordering::Less => {
                let shift = self.prec.bits - prec.bits;
                let (mid, rem) = self.mid.div_mod_floor(&pow2(shift));
                let mut rad = ceil_shr(&self.rad, shift);
                if !rem.is_zero() {
                    rad += 1u32;
                }
                Self { mid, rad, prec }
            }
        }
    }

    fn aligned(&self, other: &Self) -> Precision {
        assert_eq!(
            self.prec, other.prec,
            "certified values combined at different precisions"
        );
        self.prec
    }

    /// Adds a nonnegative rational to the radius, rounded up.
    pub fn widen(&self, extra: &BigRational) -> Self {
        assert!(!extra.is_negative(), "radius increment must be nonnegative");
        Self {
            mid: self.mid.clone(),
            rad: &self.rad + ceil_scaled(extra, self.prec.bits),
            prec: self.prec,
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        Self {
            mid: &self.mid * k,
            rad: &self.rad * k.magnitude(),
            prec: self.prec,
        }
    }

    pub fn div_int(&self, k: &BigInt) -> Result<Self> {
        if k.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (mid, rem) = self.mid.div_mod_floor(k);
        let mut rad = ceil_div_u(&self.rad, k.magnitude());
        if !rem.is_zero() {
            rad += 1u32;
        }
        Ok(Self {
            mid,
            rad,
            prec: self.prec,
        })
    }

    pub fn mul_ratio(&self, q: &BigRational) -> Self {
        self.mul_int(q.numer())
            .div_int(q.denom())
            .expect("rational denominators are nonzero")
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.aligned(other);
        let bits = prec.bits;
        let product = &self.mid * &other.mid;
        let (mid, rem) = product.div_mod_floor(&pow2(bits));
        // |a b - A B| <= |A| rb + |B| ra + ra rb, all in units of 2^-2p
        let err = self.mid.magnitude() * &other.rad
            + other.mid.magnitude() * &self.rad
            + &self.rad * &other.rad;
        let mut rad = ceil_shr(&err, bits);
        if !rem.is_zero() {
            rad += 1u32;
        }
        Self { mid, rad, prec }
    }

    /// Quotient of two balls; fails when the divisor ball contains zero.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let prec = self.aligned(other);
        let bits = prec.bits;
        let b_abs = other.mid.magnitude();
        if *b_abs <= other.rad {
            return Err(Error::DivisionByZero);
        }
        let num = &self.mid << bits;
        let (mid, rem) = num.div_mod_floor(&other.mid);
        // |a/b - A/B| <= (|A| rb + |B| ra) / (|B| (|B| - rb)), scaled by 2^p
        let err_num = (self.mid.magnitude() * &other.rad + b_abs * &self.rad) << bits;
        let err_den = b_abs * (b_abs - &other.rad);
        let mut rad = ceil_div_u(&err_num, &err_den);
        if !rem.is_zero() {
            rad += 1u32;
        }
        Ok(Self { mid, rad, prec })
    }

    /// `min(self, 1)` with interval semantics. The flag is set when the ball
    /// straddles 1, so the minimum is not decided by the enclosure.
    pub fn min_one(&self) -> (Self, bool) {
        let one = BigRational::one();
        if self.certainly_le(&one) {
            return (self.clone(), false);
        }
        if self.certainly_ge(&one) {
            return (Self::from_integer(1, self.prec), false);
        }
        // lo < 1 < hi: the image is [lo, 1]
        let one_fixed = self.scale();
        let lo = &self.mid - BigInt::from(self.rad.clone());
        let sum: BigInt = &lo + &one_fixed;
        let mid = sum.div_floor(&BigInt::from(2));
        let rad = (&one_fixed - &mid).magnitude().clone();
        (
            Self {
                mid,
                rad,
                prec: self.prec,
            },
            true,
        )
    }

    /// Renders the ball to `decimals` places when both endpoints round (half to
    /// even) to the same string; `None` when the rounding is not decided.
    pub fn to_fixed(&self, decimals: u32) -> Option<String> {
        let lo = round_half_even(&self.lo(), decimals);
        let hi = round_half_even(&self.hi(), decimals);
        (lo == hi).then(|| format_scaled(&lo, decimals))
    }

    /// The midpoint rounded half to even, regardless of the radius.
    pub fn mid_fixed(&self, decimals: u32) -> String {
        format_scaled(&round_half_even(&self.mid(), decimals), decimals)
    }

    /// Renders to `sig` significant digits when the whole ball agrees.
    pub fn to_significant(&self, sig: u32) -> Option<String> {
        let lo = significant(&self.lo(), sig);
        let hi = significant(&self.hi(), sig);
        (lo == hi).then_some(lo)
    }
}

impl fmt::Display for CertifiedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let decimals = (f64::from(self.prec.bits) / LOG2_10).floor() as u32;
        write!(
            f,
            "{} +/- {:.3e}",
            self.mid_fixed(decimals.min(40)),
            self.radius_f64()
        )
    }
}

impl Add for &CertifiedValue {
    type Output = CertifiedValue;

    fn add(self, rhs: &CertifiedValue) -> CertifiedValue {
        let prec = self.aligned(rhs);
        CertifiedValue {
            mid: &self.mid + &rhs.mid,
            rad: &self.rad + &rhs.rad,
            prec,
        }
    }
}

impl Sub for &CertifiedValue {
    type Output = CertifiedValue;

    fn sub(self, rhs: &CertifiedValue) -> CertifiedValue {
        let prec = self.aligned(rhs);
        CertifiedValue {
            mid: &self.mid - &rhs.mid,
            rad: &self.rad + &rhs.rad,
            prec,
        }
    }
}

impl Add for CertifiedValue {
    type Output = CertifiedValue;

    fn add(self, rhs: CertifiedValue) -> CertifiedValue {
        &self + &rhs
    }
}

impl Sub for CertifiedValue {
    type Output = CertifiedValue;

    fn sub(self, rhs: CertifiedValue) -> CertifiedValue {
        &self - &rhs
    }
}

impl Neg for &CertifiedValue {
    type Output = CertifiedValue;

    fn neg(self) -> CertifiedValue {
        CertifiedValue {
            mid: -&self.mid,
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }
}

impl Neg for CertifiedValue {
    type Output = CertifiedValue;

    fn neg(self) -> CertifiedValue {
        -&self
    }
}

/// A closed interval whose endpoints are themselves certified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: CertifiedValue,
    pub hi: CertifiedValue,
}

impl Interval {
    pub fn new(lo: CertifiedValue, hi: CertifiedValue) -> Self {
        debug_assert!(lo.lo() <= hi.hi(), "interval endpoints out of order");
        Self { lo, hi }
    }

    pub fn exact(lo: &BigRational, hi: &BigRational, prec: Precision) -> Self {
        Self::new(
            CertifiedValue::from_ratio(lo, prec),
            CertifiedValue::from_ratio(hi, prec),
        )
    }

    /// Whether `[self]` lies inside `[outer]` with certainty.
    pub fn within(&self, outer: &Interval) -> bool {
        self.lo.lo() >= outer.lo.hi() && self.hi.hi() <= outer.hi.lo()
    }
}

pub fn ratio_to_f64(q: &BigRational) -> f64 {
    // Scale into a range where both parts convert without overflow.
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift > 0 {
        q.numer() / (q.denom() << shift as u32)
    } else {
        (q.numer() << (-shift) as u32) / q.denom()
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

/// `x * 10^decimals` rounded to the nearest integer, ties to even.
fn round_half_even(x: &BigRational, decimals: u32) -> BigInt {
    let scaled = x * BigRational::from_integer(BigInt::from(10u32).pow(decimals));
    let floor = scaled.floor();
    let frac = &scaled - &floor;
    let half = BigRational::new(1.into(), 2.into());
    let base = floor.to_integer();
    match frac.cmp(&half) {
        Ordering::Less => base,
        Ordering::Greater => base + 1,
        Ordering::Equal => {
            if base.is_even() {
                base
            } else {
                base + 1
            }
        }
    }
}

fn format_scaled(n: &BigInt, decimals: u32) -> String {
    let neg = n.sign() == Sign::Minus;
    let digits = n.magnitude().to_string();
    let width = decimals as usize + 1;
    let padded = if digits.len() < width {
        format!("{}{}", "0".repeat(width - digits.len()), digits)
    } else {
        digits
    };
    let (int, frac) = padded.split_at(padded.len() - decimals as usize);
    let sign = if neg && n.magnitude() != &BigUint::zero() {
        "-"
    } else {
        ""
    };
    if decimals == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

fn pow10(k: i64) -> BigRational {
    let p = BigRational::from_integer(BigInt::from(10u32).pow(k.unsigned_abs() as u32));
    if k >= 0 {
        p
    } else {
        p.recip()
    }
}

fn significant(x: &BigRational, sig: u32) -> String {
    if x.is_zero() {
        return format_scaled(&BigInt::zero(), sig.saturating_sub(1));
    }
    let abs = x.abs();
    // exponent e with 10^e <= |x| < 10^(e+1)
    let mut e = ratio_to_f64(&abs).log10().floor() as i64;
    while pow10(e) > abs {
        e -= 1;
    }
    while pow10(e + 1) <= abs {
        e += 1;
    }
    let mut decimals = i64::from(sig) - 1 - e;
    let rounded = |dec: i64| round_half_even(&(x * pow10(dec)), 0);
    let mut n = rounded(decimals);
    if BigRational::from_integer(n.abs()) >= pow10(i64::from(sig)) {
        // rounding carried into a new leading digit
        decimals -= 1;
        n = rounded(decimals);
    }
    if decimals >= 0 {
        format_scaled(&n, decimals as u32)
    } else {
        (n * pow10(-decimals).to_integer()).to_string()
    }
}

// ---------------------------------------------------------------------------
// Logarithms
// ---------------------------------------------------------------------------

/// `sum z^(2i+1)/(2i+1)` for `z = u/v`, `0 <= z <= 1/3`, as a floor-rounded
/// fixed-point sum with `bits` fractional bits, and its error bound in ulps.
fn atanh_series(u: &BigInt, v: &BigInt, bits: u32) -> (BigInt, BigUint) {
    debug_assert!(!u.is_negative() && v.is_positive());
    debug_assert!(BigInt::from(3) * u <= *v);
    if u.is_zero() {
        return (BigInt::zero(), BigUint::zero());
    }
    let u2 = u * u;
    let v2 = v * v;
    let mut num = u.clone();
    let mut den = v.clone();
    let mut sum = BigInt::zero();
    let mut terms = 0u64;
    let mut k = 1u64;
    loop {
        let term = (&num << bits) / (&den * k);
        if term.is_zero() {
            break;
        }
        sum += term;
        terms += 1;
        num *= &u2;
        den *= &v2;
        k += 2;
    }
    // Each floor loses < 1 ulp. The first omitted term is < 1 ulp and later
    // ones shrink by z^2 <= 1/9, so the tail is < 9/8 ulp.
    (sum, BigUint::from(terms + 2))
}

/// `ln 2 = 2 atanh(1/3)` at `bits` fractional bits, uncached.
fn ln2_raw(bits: u32) -> CertifiedValue {
    let (s, r) = atanh_series(&BigInt::one(), &BigInt::from(3), bits);
    CertifiedValue {
        mid: s << 1,
        rad: r << 1,
        prec: Precision { bits },
    }
}

fn ln2_cache() -> &'static Mutex<HashMap<u32, CertifiedValue>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, CertifiedValue>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `ln 2` to the given precision.
pub fn ln2(prec: Precision) -> CertifiedValue {
    let internal = prec.widened(INTERNAL_GUARD_BITS);
    let mut cache = ln2_cache().lock().unwrap_or_else(|e| e.into_inner());
    let full = cache
        .entry(internal.bits)
        .or_insert_with(|| ln2_raw(internal.bits))
        .clone();
    drop(cache);
    full.with_precision(prec)
}

/// Splits a positive rational as `2^e * y` with `2/3 <= y <= 4/3`.
fn split_binary(q: &BigRational) -> (i64, BigRational) {
    let e0 = q.numer().bits() as i64 - q.denom().bits() as i64;
    let mut e = e0;
    let shift = |e: i64| -> BigRational {
        if e >= 0 {
            q / BigRational::from_integer(pow2(e as u32))
        } else {
            q * BigRational::from_integer(pow2((-e) as u32))
        }
    };
    let mut y = shift(e);
    let two_thirds = BigRational::new(2.into(), 3.into());
    let four_thirds = BigRational::new(4.into(), 3.into());
    while y < two_thirds {
        e -= 1;
        y = shift(e);
    }
    while y > four_thirds {
        e += 1;
        y = shift(e);
    }
    (e, y)
}

/// `ln y` for `2/3 <= y <= 4/3` at the given (internal) precision.
fn ln_near_one(y: &BigRational, prec: Precision) -> CertifiedValue {
    // ln y = 2 atanh((y-1)/(y+1)); |z| <= 1/5
    let u = y.numer() - y.denom();
    let v = y.numer() + y.denom();
    let (s, r) = atanh_series(&u.abs(), &v, prec.bits);
    let mid = if u.is_negative() { -s } else { s };
    CertifiedValue {
        mid: mid << 1,
        rad: r << 1,
        prec,
    }
}

fn check_positive(q: &BigRational) -> Result<()> {
    if q.is_positive() {
        Ok(())
    } else {
        Err(Error::Domain(format!("logarithm of nonpositive {q}")))
    }
}

/// Natural logarithm of a positive rational.
pub fn ln_ratio(q: &BigRational, prec: Precision) -> Result<CertifiedValue> {
    check_positive(q)?;
    let internal = prec.widened(INTERNAL_GUARD_BITS);
    let (e, y) = split_binary(q);
    let mut acc = ln_near_one(&y, internal);
    if e != 0 {
        acc = &acc + &ln2(internal).mul_int(&BigInt::from(e));
    }
    Ok(acc.with_precision(prec))
}

/// Base-2 logarithm of a positive rational. Exact when `q` is a power of two.
pub fn log2_ratio(q: &BigRational, prec: Precision) -> Result<CertifiedValue> {
    check_positive(q)?;
    let (e, y) = split_binary(q);
    if y.is_one() {
        return Ok(CertifiedValue::from_integer(e, prec));
    }
    let internal = prec.widened(INTERNAL_GUARD_BITS);
    let frac = ln_near_one(&y, internal).div(&ln2(internal))?;
    let whole = CertifiedValue::from_integer(e, internal);
    Ok((&frac + &whole).with_precision(prec))
}

pub fn log2_int(k: impl Into<BigInt>, prec: Precision) -> Result<CertifiedValue> {
    log2_ratio(&BigRational::from_integer(k.into()), prec)
}

/// Cache of `log2 k` for integers, shared across one computation.
#[derive(Debug)]
pub struct Log2Table {
    prec: Precision,
    cache: HashMap<u128, CertifiedValue>,
}

impl Log2Table {
    pub fn new(prec: Precision) -> Self {
        Self {
            prec,
            cache: HashMap::new(),
        }
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn get(&mut self, k: u128) -> CertifiedValue {
        assert!(k > 0, "log2 of zero");
        let prec = self.prec;
        self.cache
            .entry(k)
            .or_insert_with(|| log2_int(k, prec).expect("positive argument"))
            .clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Decimal string to exact rational.
    fn dec(s: &str) -> BigRational {
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        let digits: BigInt = format!("{int}{frac}").parse().unwrap();
        BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32))
    }

    /// Asserts the ball lies within `slack` of a 40-digit reference value.
    fn assert_near(v: &CertifiedValue, reference: &str) {
        let r = dec(reference);
        let slack = q(1, 1) / BigRational::from_integer(BigInt::from(10u32).pow(39));
        assert!(
            v.lo() - &slack <= r && r <= v.hi() + &slack,
            "{v} does not enclose {reference}"
        );
    }

    #[test]
    fn precision_for_digits() {
        // 25 decimal digits need 84 bits
        assert_eq!(Precision::for_digits(10).bits(), 84);
        assert_eq!(Precision::for_digits(30).bits(), 150);
    }

    #[test]
    fn ln2_encloses_reference() {
        for bits in [60, 84, 128, 200] {
            let v = ln2(Precision::from_bits(bits));
            assert_near(&v, "0.6931471805599453094172321214581765680755");
            assert!(v.rad <= BigUint::from(2u32), "radius {} ulps", v.rad);
        }
    }

    #[test]
    fn log2_references() {
        let p = Precision::from_bits(140);
        assert_near(
            &log2_int(3, p).unwrap(),
            "1.584962500721156181453738943947816508759",
        );
        assert_near(
            &log2_int(5, p).unwrap(),
            "2.321928094887362347870319429489390175864",
        );
        assert_near(
            &log2_ratio(&q(1, 3), p).unwrap(),
            "-1.584962500721156181453738943947816508759",
        );
        assert_near(
            &ln_ratio(&q(10, 1), p).unwrap(),
            "2.302585092994045684017991454684364207601",
        );
    }

    #[test]
    fn log2_of_powers_of_two_is_exact() {
        let p = Precision::from_bits(84);
        let v = log2_ratio(&q(1, 4), p).unwrap();
        assert!(v.is_exact());
        assert_eq!(v.mid(), q(-2, 1));
        assert!(log2_int(1024, p).unwrap().is_exact());
        assert!(log2_int(1, p).unwrap().mid().is_zero());
        assert!(log2_ratio(&q(0, 1), p).is_err());
        assert!(ln_ratio(&q(-1, 2), p).is_err());
    }

    #[test]
    fn log_radius_is_a_few_ulps() {
        let p = Precision::from_bits(84);
        for k in [3u64, 7, 17711, 28657, 1 << 40, 999_999_937] {
            let v = log2_int(k, p).unwrap();
            assert!(v.rad <= BigUint::from(3u32), "log2 {k}: {} ulps", v.rad);
        }
    }

    #[test]
    fn fixed_rendering() {
        let p = Precision::from_bits(84);
        let v = CertifiedValue::from_ratio(&q(1, 3), p);
        assert_eq!(v.to_fixed(5).as_deref(), Some("0.33333"));
        let half = CertifiedValue::from_ratio(&q(5, 2), p);
        assert_eq!(half.to_fixed(0).as_deref(), Some("2"));
        let half = CertifiedValue::from_ratio(&q(7, 2), p);
        assert_eq!(half.to_fixed(0).as_deref(), Some("4"));
        let neg = CertifiedValue::from_ratio(&q(-1, 8), p);
        assert_eq!(neg.to_fixed(2).as_deref(), Some("-0.12"));
        // a ball straddling a rounding boundary does not render
        let wide = CertifiedValue::from_ratio(&q(1, 2), p).widen(&q(1, 1000));
        assert_eq!(wide.to_fixed(0), None);
        assert_eq!(wide.mid_fixed(1), "0.5");
    }

    #[test]
    fn significant_rendering() {
        let p = Precision::from_bits(84);
        let v = log2_int(3, p).unwrap();
        assert_eq!(v.to_significant(10).as_deref(), Some("1.584962501"));
        let v = CertifiedValue::from_ratio(&q(963_114_162, 1_000_000_000), p);
        assert_eq!(v.to_significant(10).as_deref(), Some("0.9631141620"));
        let one = CertifiedValue::from_integer(1, p);
        assert_eq!(one.to_significant(10).as_deref(), Some("1.000000000"));
        let carry = CertifiedValue::from_ratio(&q(99_999_999_999, 100_000_000_000), p);
        assert_eq!(carry.to_significant(10).as_deref(), Some("1.000000000"));
    }

    #[test]
    fn min_one_semantics() {
        let p = Precision::from_bits(84);
        let below = CertifiedValue::from_ratio(&q(9, 10), p);
        assert_eq!(below.min_one(), (below.clone(), false));
        let above = CertifiedValue::from_ratio(&q(3, 2), p);
        let (v, widened) = above.min_one();
        assert!(!widened && v.is_exact() && v.mid().is_one());
        let straddle = CertifiedValue::from_integer(1, p).widen(&q(1, 100));
        let (v, widened) = straddle.min_one();
        assert!(widened);
        assert!(v.hi() >= q(1, 1) && v.lo() <= q(99, 100));
        assert!(v.hi() <= q(1, 1) + q(1, 1 << 40));
    }

    #[test]
    fn division_by_ball_containing_zero() {
        let p = Precision::from_bits(60);
        let z = CertifiedValue::zero(p).widen(&q(1, 1000));
        let one = CertifiedValue::from_integer(1, p);
        assert_eq!(one.div(&z), Err(Error::DivisionByZero));
        assert_eq!(one.div_int(&BigInt::zero()), Err(Error::DivisionByZero));
    }

    fn small_ratio() -> impl Strategy<Value = BigRational> {
        (-10_000i64..10_000, 1i64..5_000).prop_map(|(n, d)| q(n, d))
    }

    fn ball(x: &BigRational, slop: u32, prec: Precision) -> CertifiedValue {
        CertifiedValue::from_ratio(x, prec).widen(&q(i64::from(slop), 1 << 30))
    }

    proptest! {
        #[test]
        fn arithmetic_encloses_exact_results(
            a in small_ratio(),
            b in small_ratio(),
            k in -50i64..50,
            sa in 0u32..4,
            sb in 0u32..4,
            bits in 20u32..90,
        ) {
            let p = Precision::from_bits(bits);
            let x = ball(&a, sa, p);
            let y = ball(&b, sb, p);
            prop_assert!((&x + &y).contains(&(&a + &b)));
            prop_assert!((&x - &y).contains(&(&a - &b)));
            prop_assert!((-&x).contains(&-a.clone()));
            prop_assert!(x.mul(&y).contains(&(&a * &b)));
            prop_assert!(x.mul_int(&k.into()).contains(&(&a * BigRational::from_integer(k.into()))));
            if k != 0 {
                let kk = BigRational::from_integer(k.into());
                prop_assert!(x.div_int(&k.into()).unwrap().contains(&(&a / &kk)));
                prop_assert!(x.mul_ratio(&q(3, k)).contains(&(&a * q(3, k))));
            }
            if let Ok(quot) = x.div(&y) {
                prop_assert!(quot.contains(&(&a / &b)));
            }
            let coarse = x.with_precision(Precision::from_bits(bits / 2));
            prop_assert!(coarse.contains(&a));
        }

        #[test]
        fn log2_encloses_via_exponentiation(n in 1u64..100_000, d in 1u64..100_000) {
            // 2^lo <= n/d <= 2^hi checked through f64 with generous slack,
            // plus the exact identity log2(n/d) = log2 n - log2 d.
            let p = Precision::from_bits(100);
            let x = BigRational::new(n.into(), d.into());
            let v = log2_ratio(&x, p).unwrap();
            let split = &log2_int(n, p).unwrap() - &log2_int(d, p).unwrap();
            prop_assert!(v.overlaps(&split));
            let f = (n as f64 / d as f64).log2();
            prop_assert!((v.to_f64() - f).abs() < 1e-12);
        }
    }
}
