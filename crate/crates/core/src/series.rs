//! Truncated power series with exact rational coefficients, and the
//! generating functions that count graph nodes by frequency.
//!
//! For frequency `k`, `[x^n] F_k` is the number of level-`n` nodes reached by
//! exactly `k` paths. The graph splits into repeating G- and P-subgraphs whose
//! counting series satisfy, with `r = m - d`,
//!
//! ```text
//! P_1 = 1/(1-(d-r)x)              G_1 = 0
//! P_k = ((d-r-1)x/(1-(d-r)x)) G_k
//! G_k = sum_{l | k, l > 1} A_l (r P_{k/l} + (r-1) G_{k/l})
//! F_k = P_k + (2rx/(1-x)) (P_k + G_k)
//! ```
//!
//! where `A_l` counts larger labels `l` per level of the Euclidean tree.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::euclid::{a_k_from_counts, larger_counts_up_to};
use crate::graph::{frequency_histogram, levels_up_to};
use crate::params::{MdParams, ProbabilityVector};

/// Coefficients `c_0..c_N`; everything beyond `x^N` is unknown and dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<BigRational>,
}

impl TruncatedSeries {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series has at least c_0");
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![BigRational::zero(); order + 1])
    }

    pub fn constant(c: BigRational, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// `c x^power`.
    pub fn monomial(c: BigRational, power: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if power <= order {
            s.coeffs[power] = c;
        }
        s
    }

    /// `1/(1 - c x) = sum c^n x^n`.
    pub fn geometric(c: &BigRational, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut term = BigRational::one();
        for _ in 0..=order {
            coeffs.push(term.clone());
            term *= c;
        }
        Self::new(coeffs)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> BigRational {
        self.coeffs
            .get(n)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// `[x^n]` as an integer, if it is one.
    pub fn integer_coeff(&self, n: usize) -> Option<BigInt> {
        let c = self.coeff(n);
        c.is_integer().then(|| c.to_integer())
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, BigRational::zero());
        Self::new(coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self::new(
            (0..=order)
                .map(|n| &self.coeffs[n] + &other.coeffs[n])
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Cauchy product, truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = vec![BigRational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// `1/self`, defined here only for series with constant term 1.
    pub fn reciprocal(&self) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return Err(Error::Series(format!(
                "reciprocal needs constant term 1, got {}",
                self.coeffs[0]
            )));
        }
        let order = self.order();
        let mut inv = vec![BigRational::zero(); order + 1];
        inv[0] = BigRational::one();
        for n in 1..=order {
            let mut acc = BigRational::zero();
            for i in 1..=n {
                acc -= &self.coeffs[i] * &inv[n - i];
            }
            inv[n] = acc;
        }
        Ok(Self::new(inv))
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(ToString::to_string).collect();
        write!(f, "[{}] + O(x^{})", parts.join(", "), self.order() + 1)
    }
}

/// Operation selector mirroring the series API.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Mul,
    /// `a / b`, with `b` required to have constant term 1.
    GeomInverse,
}

pub fn series_arith(
    a: &TruncatedSeries,
    b: &TruncatedSeries,
    op: SeriesOp,
) -> Result<TruncatedSeries> {
    match op {
        SeriesOp::Add => Ok(a.add(b)),
        SeriesOp::Mul => Ok(a.mul(b)),
        SeriesOp::GeomInverse => Ok(a.mul(&b.reciprocal()?)),
    }
}

/// The counting series for frequency `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphSeries {
    pub k: u64,
    pub p: TruncatedSeries,
    pub g: TruncatedSeries,
    pub f: TruncatedSeries,
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `P_k, G_k, F_k` for every `1 <= k <= max_k`, in order of `k`.
///
/// `a_series(l)` must return `A_l` to at least `order`. Each `G_k` only reads
/// entries for proper divisors of `k`, which are already built.
pub fn subgraph_family(
    params: MdParams,
    max_k: u64,
    order: usize,
    a_series: impl Fn(u64) -> TruncatedSeries,
) -> Result<Vec<SubgraphSeries>> {
    if max_k < 1 {
        return Err(Error::Domain("frequency k must be at least 1".into()));
    }
    let r = i64::from(params.r());
    let d = i64::from(params.d());
    let x = TruncatedSeries::monomial(int(1), 1, order);
    let free = TruncatedSeries::geometric(&int(d - r), order);
    let p_factor = x.scale(&int(d - r - 1)).mul(&free);
    let boundary = x
        .scale(&int(2 * r))
        .mul(&TruncatedSeries::geometric(&int(1), order));

    let mut family: Vec<SubgraphSeries> = Vec::with_capacity(max_k as usize);
    for k in 1..=max_k {
        let (p, g) = if k == 1 {
            (free.clone(), TruncatedSeries::zero(order))
        } else {
            let mut g = TruncatedSeries::zero(order);
            for l in (2..=k).filter(|l| k % l == 0) {
                let inner = &family[(k / l - 1) as usize];
                let weight = inner.p.scale(&int(r)).add(&inner.g.scale(&int(r - 1)));
                g = g.add(&a_series(l).truncate(order).mul(&weight));
            }
            (p_factor.mul(&g), g)
        };
        let f = p.add(&boundary.mul(&p)).add(&boundary.mul(&g));
        family.push(SubgraphSeries { k, p, g, f });
    }
    Ok(family)
}

/// `P_k, G_k, F_k` for one frequency, with `A_l` from Euclidean tree counts.
pub fn subgraph_series(params: MdParams, k: u64, order: usize) -> Result<SubgraphSeries> {
    let counts = larger_counts_up_to(order as u32);
    let mut family = subgraph_family(params, k, order, |l| a_k_from_counts(&counts, l, order))?;
    Ok(family.pop().expect("family is nonempty"))
}

/// A coefficient of `F_k` that disagrees with the graph oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub m: u32,
    pub d: u32,
    pub k: u64,
    pub n: usize,
    /// Oracle count `f(n,k)`.
    pub expected: u64,
    pub actual: BigRational,
}

/// Failure of `sum_k k [x^n] F_k = m^n` at some level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MassFailure {
    pub n: usize,
    pub expected: BigUint,
    pub actual: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub params: MdParams,
    pub max_k: u64,
    pub order: usize,
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
    pub mass_failures: Vec<MassFailure>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.mass_failures.is_empty()
    }
}

/// Compares `[x^n] F_k` with oracle frequencies for `k <= max_k`, `n <= order`,
/// and checks the mass identity at every level. Frequencies never exceed
/// `2^n`, so the mass sum runs over `k <= 2^order`.
pub fn verify_identities(params: MdParams, max_k: u64, order: usize) -> Result<IdentityReport> {
    let probs = ProbabilityVector::uniform(params);
    let levels = levels_up_to(params, &probs, order as u32)?;
    let hists = levels
        .iter()
        .map(frequency_histogram)
        .collect::<Result<Vec<_>>>()?;

    let mass_k = 1u64 << order.min(62);
    let family_k = max_k.max(mass_k);
    let counts = larger_counts_up_to(order as u32);
    let family = subgraph_family(params, family_k, order, |l| {
        a_k_from_counts(&counts, l, order)
    })?;

    let mut mismatches = Vec::new();
    let mut checked = 0;
    for series in family.iter().take(max_k as usize) {
        for (n, hist) in hists.iter().enumerate() {
            let expected = hist.count(series.k);
            let actual = series.f.coeff(n);
            checked += 1;
            if actual != int(expected as i64) {
                mismatches.push(Mismatch {
                    m: params.m(),
                    d: params.d(),
                    k: series.k,
                    n,
                    expected,
                    actual,
                });
            }
        }
    }

    let mut mass_failures = Vec::new();
    for n in 0..=order {
        let limit = 1u64 << n.min(62);
        let actual: BigRational = family
            .iter()
            .take(limit as usize)
            .map(|s| s.f.coeff(n) * int(s.k as i64))
            .sum();
        let expected = BigUint::from(params.m()).pow(n as u32);
        if actual != BigRational::from_integer(BigInt::from(expected.clone())) {
            mass_failures.push(MassFailure {
                n,
                expected,
                actual,
            });
        }
    }

    Ok(IdentityReport {
        params,
        max_k,
        order,
        checked,
        mismatches,
        mass_failures,
    })
}

/// Nonzero `[x^n] F_k` as a frequency table for level `n`.
pub fn frequencies_from_series(family: &[SubgraphSeries], n: usize) -> BTreeMap<u64, u64> {
    family
        .iter()
        .filter_map(|s| {
            let c = s.f.integer_coeff(n)?.to_u64()?;
            (c > 0).then_some((s.k, c))
        })
        .collect()
}
