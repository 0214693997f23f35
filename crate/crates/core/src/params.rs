//! Contraction parameters and probability vectors.
//!
//! An (m,d)-measure is generated by the m maps `x -> x/d + j(d-1)/((m-1)d)`,
//! `j = 0..m-1`. The integer pair is constrained to `2 <= d < m <= 2d-1`, so
//! neighbouring images overlap but no three maps share a point at level one.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MdParams {
    m: u32,
    d: u32,
}

impl MdParams {
    /// Validates `2 <= d < m <= 2d-1`.
    pub fn new(m: i64, d: i64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParams(format!("d = {d} violates 2 <= d")));
        }
        if m <= d {
            return Err(Error::InvalidParams(format!(
                "m = {m}, d = {d} violates d < m"
            )));
        }
        if m > 2 * d - 1 {
            return Err(Error::InvalidParams(format!(
                "m = {m}, d = {d} violates m <= 2d-1"
            )));
        }
        let m =
            u32::try_from(m).map_err(|_| Error::InvalidParams(format!("m = {m} is too large")))?;
        let d =
            u32::try_from(d).map_err(|_| Error::InvalidParams(format!("d = {d} is too large")))?;
        Ok(Self { m, d })
    }

    pub fn m(self) -> u32 {
        self.m
    }

    pub fn d(self) -> u32 {
        self.d
    }

    /// Number of overlapping neighbours, `m - d`.
    pub fn r(self) -> u32 {
        self.m - self.d
    }

    /// Every valid pair with `2 <= d <= max_d`, ordered by `d` then `r`.
    pub fn all_up_to(max_d: u32) -> Vec<Self> {
        (2..=max_d)
            .flat_map(|d| (1..d).map(move |r| Self { m: d + r, d }))
            .collect()
    }
}

impl fmt::Display for MdParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(m={}, d={})", self.m, self.d)
    }
}

pub fn validate_params(m: i64, d: i64) -> Result<MdParams> {
    MdParams::new(m, d)
}

/// Exact probabilities `p_0..p_{m-1}`, all positive and summing to one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbabilityVector {
    p: Vec<BigRational>,
}

impl ProbabilityVector {
    pub fn new(params: MdParams, p: Vec<BigRational>) -> Result<Self> {
        if p.len() != params.m() as usize {
            return Err(Error::InvalidProbabilities(format!(
                "expected {} entries, got {}",
                params.m(),
                p.len()
            )));
        }
        if let Some(i) = p.iter().position(|x| !x.is_positive()) {
            return Err(Error::InvalidProbabilities(format!(
                "p_{i} = {} is not positive",
                p[i]
            )));
        }
        let total: BigRational = p.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidProbabilities(format!(
                "entries sum to {total}, not 1"
            )));
        }
        Ok(Self { p })
    }

    pub fn uniform(params: MdParams) -> Self {
        let each = BigRational::new(BigInt::one(), BigInt::from(params.m()));
        Self {
            p: vec![each; params.m() as usize],
        }
    }

    /// Parses comma-separated `a/b` (or integer) tokens. Decimal notation is rejected.
    pub fn parse(params: MdParams, text: &str) -> Result<Self> {
        let p = text
            .split(',')
            .map(|tok| parse_rational(tok.trim()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(params, p)
    }

    /// The symmetric (3,2) family `(1/(t+2), t/(t+2), 1/(t+2))`.
    pub fn symmetric_three(t: &BigRational) -> Result<Self> {
        if !t.is_positive() {
            return Err(Error::Domain(format!("t = {t} must be positive")));
        }
        let denom = t + BigRational::from_integer(2.into());
        let outer = denom.recip();
        let middle = t / &denom;
        Self::new(MdParams { m: 3, d: 2 }, vec![outer.clone(), middle, outer])
    }

    pub fn as_slice(&self) -> &[BigRational] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.p.windows(2).all(|w| w[0] == w[1])
    }

    /// Least common denominator `Q` and integer numerators `c_i` with `p_i = c_i / Q`.
    pub fn common_denominator(&self) -> (BigInt, Vec<BigInt>) {
        let q = self
            .p
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let numers = self
            .p
            .iter()
            .map(|x| x.numer() * (&q / x.denom()))
            .collect();
        (q, numers)
    }
}

pub fn uniform_probabilities(params: MdParams) -> ProbabilityVector {
    ProbabilityVector::uniform(params)
}

pub fn parse_rational(tok: &str) -> Result<BigRational> {
    let bad = || Error::InvalidProbabilities(format!("cannot parse {tok:?} as a rational a/b"));
    if tok.contains(['.', 'e', 'E']) {
        return Err(Error::InvalidProbabilities(format!(
            "{tok:?}: decimal notation is not accepted, use a/b"
        )));
    }
    let (num, den) = match tok.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (tok, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn validates_examples() {
        let p = validate_params(3, 2).unwrap();
        assert_eq!((p.m(), p.d(), p.r()), (3, 2, 1));
        let p = validate_params(19, 10).unwrap();
        assert_eq!((p.m(), p.d(), p.r()), (19, 10, 9));
        let err = validate_params(4, 2).unwrap_err();
        assert!(err.to_string().contains("m <= 2d-1"), "{err}");
        assert!(validate_params(2, 2)
            .unwrap_err()
            .to_string()
            .contains("d < m"));
        assert!(validate_params(2, 1)
            .unwrap_err()
            .to_string()
            .contains("2 <= d"));
    }

    #[test]
    fn lattice_of_valid_pairs() {
        let mut accepted = 0;
        for d in -3..=12 {
            for m in -3..=30 {
                if validate_params(m, d).is_ok() {
                    assert!(2 <= d && d < m && m < 2 * d);
                    if d <= 10 {
                        accepted += 1;
                    }
                }
            }
        }
        assert_eq!(accepted, 45);
        assert_eq!(MdParams::all_up_to(10).len(), 45);
    }

    #[test]
    fn uniform_is_exact() {
        for (m, d) in [(3, 2), (4, 3), (19, 10)] {
            let params = validate_params(m, d).unwrap();
            let u = uniform_probabilities(params);
            assert_eq!(u.len(), m as usize);
            assert!(u.as_slice().iter().all(|x| *x == q(1, m)));
            assert!(u.as_slice().iter().sum::<BigRational>().is_one());
            assert!(ProbabilityVector::new(params, u.as_slice().to_vec()).is_ok());
        }
    }

    #[test]
    fn parse_and_reject() {
        let params = validate_params(3, 2).unwrap();
        let p = ProbabilityVector::parse(params, "1/4, 1/2,1/4").unwrap();
        assert_eq!(p.as_slice()[1], q(1, 2));
        assert!(ProbabilityVector::parse(params, "0.25,0.5,0.25").is_err());
        assert!(ProbabilityVector::parse(params, "1/3,1/3").is_err());
        assert!(ProbabilityVector::parse(params, "1/2,1/2,0").is_err());
        assert!(ProbabilityVector::parse(params, "1/3,1/3,1/2").is_err());
        assert!(ProbabilityVector::parse(params, "1/0,1/3,1/3").is_err());
    }

    #[test]
    fn common_denominator_splits_exactly() {
        let params = validate_params(3, 2).unwrap();
        let p = ProbabilityVector::parse(params, "1/6,2/3,1/6").unwrap();
        let (den, num) = p.common_denominator();
        assert_eq!(den, BigInt::from(6));
        assert_eq!(num, vec![1.into(), 4.into(), 1.into()]);
    }
}
