//! Precision-`p` floating-point arguments, the HR-case predicate and domain splitting.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fixedpoint::{FracWidth, UFrac};
use crate::interval::Dyadic;

/// Target precision `p` and HR threshold `ε = 2^-eps_bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpFormat {
    pub p: u32,
    pub eps_bits: u32,
}

impl FpFormat {
    pub fn new(p: u32, eps_bits: u32) -> Result<Self> {
        if !(2..=64).contains(&p) {
            return Err(Error::Config(format!("precision p = {p} outside 2..=64")));
        }
        if !(1..=62).contains(&eps_bits) {
            return Err(Error::Config(format!("threshold exponent {eps_bits} outside 2..=62")));
        }
        Ok(FpFormat { p, eps_bits })
    }

    pub fn eps(&self, width: FracWidth) -> Result<UFrac> {
        UFrac::pow2_neg(self.eps_bits, width)
    }

    pub fn eps_dyadic(&self) -> Dyadic {
        Dyadic::new(1, -(self.eps_bits as i64))
    }

    /// Rounding to nearest at precision `p` reduces to the directed problem at
    /// `p + 1` with threshold `2ε`.
    pub fn to_nearest(&self) -> Result<FpFormat> {
        FpFormat::new(self.p + 1, self.eps_bits - 1)
    }
}

/// A positive precision-`p` float `significand · 2^(exponent - p)` with
/// `2^(p-1) <= significand < 2^p`, so that the value lies in `[2^(exponent-1), 2^exponent)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpNumber {
    pub exponent: i32,
    pub significand: u64,
    pub precision: u32,
}

impl FpNumber {
    pub fn new(significand: u64, exponent: i32, precision: u32) -> Result<Self> {
        let lo = 1u128 << (precision - 1);
        if (significand as u128) < lo || significand as u128 >= 2 * lo {
            return Err(Error::Range(format!("significand {significand:#x} not normalised for p = {precision}")));
        }
        Ok(FpNumber { exponent, significand, precision })
    }

    pub fn to_dyadic(&self) -> Dyadic {
        Dyadic::new(self.significand, self.exponent as i64 - self.precision as i64)
    }

    /// Binary64 encoding of the value; exact for `p <= 53` and normal exponents.
    pub fn to_f64_bits(&self) -> Result<u64> {
        if self.precision > 53 {
            return Err(Error::Range(format!("p = {} does not fit binary64", self.precision)));
        }
        let biased = self.exponent as i64 - 1 + 1023;
        if !(1..=2046).contains(&biased) {
            return Err(Error::Range(format!("exponent {} outside binary64 normals", self.exponent)));
        }
        let frac = (self.significand << (53 - self.precision)) & ((1u64 << 52) - 1);
        Ok(((biased as u64) << 52) | frac)
    }

    pub fn to_f64(&self) -> f64 {
        self.significand as f64 * 2f64.powi(self.exponent - self.precision as i32)
    }
}

/// Splits `|x| = m · 2^e` with `m ∈ [1/2, 1)`.
pub fn mantissa_exponent(x: &Dyadic) -> Result<(Dyadic, i64)> {
    let e = x.exponent().ok_or(Error::Domain("zero has no exponent".into()))?;
    Ok((Dyadic::new(x.mant.abs(), x.exp - e), e))
}

/// Exact `|2^p·m cmod 1|` in `[0, 1/2]`.
pub fn dist_exact(x: &Dyadic, p: u32) -> Result<Dyadic> {
    let (m, _) = mantissa_exponent(x)?;
    let y = m.mul_pow2(p as i64);
    if y.exp >= 0 {
        return Ok(Dyadic::zero());
    }
    let k = (-y.exp) as usize;
    let modulus = BigInt::one() << k;
    let r = &y.mant % &modulus;
    let half = BigInt::one() << (k - 1);
    let d = if r <= half { r } else { modulus - r };
    Ok(Dyadic::new(d, y.exp))
}

/// `dist_p(x)` truncated to a `width`-bit fraction. Zero is rejected.
pub fn dist_p(x: &Dyadic, p: u32, width: FracWidth) -> Result<UFrac> {
    let d = dist_exact(x, p)?;
    let raw = d.scaled_floor(width.bits() as i64);
    Ok(UFrac::wrapping(u128::try_from(raw).expect("distance below 1/2"), width))
}

/// Whether `x` (a function value) is an HR case for `fmt`.
///
/// Uses the one-sided form `{2^p·m + ε} < 2ε`, excluding the single point
/// `{2^p·m + ε} = 0` where the two-sided distance equals `ε` exactly.
pub fn is_hr_case(x: &Dyadic, fmt: &FpFormat) -> Result<bool> {
    let (m, _) = mantissa_exponent(x)?;
    let shifted = m.mul_pow2(fmt.p as i64).add(&fmt.eps_dyadic());
    if shifted.exp >= 0 {
        return Ok(false);
    }
    let k = (-shifted.exp) as usize;
    let frac = &shifted.mant % (BigInt::one() << k);
    let two_eps = BigInt::one() << (k as i64 - fmt.eps_bits as i64 + 1) as usize;
    Ok(!frac.is_zero() && frac < two_eps)
}

/// Domains of `N = 2^log_n` consecutive arguments covering the binade
/// `[2^(exponent-1), 2^exponent)` at precision `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DomainSplit {
    pub exponent: i32,
    pub p: u32,
    pub log_n: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Domain {
    pub index: u64,
    pub start: FpNumber,
    pub len: u64,
}

impl DomainSplit {
    pub fn n(&self) -> u64 {
        1 << self.log_n
    }

    pub fn count(&self) -> u64 {
        1 << (self.p - 1 - self.log_n)
    }

    pub fn arguments(&self) -> u64 {
        1 << (self.p - 1)
    }

    pub fn domain(&self, index: u64) -> Result<Domain> {
        if index >= self.count() {
            return Err(Error::Range(format!("domain {index} beyond {}", self.count())));
        }
        let sig = (1u64 << (self.p - 1)) + (index << self.log_n);
        Ok(Domain { index, start: FpNumber::new(sig, self.exponent, self.p)?, len: self.n() })
    }

    pub fn iter(&self) -> impl Iterator<Item = Domain> + '_ {
        (0..self.count()).map(|i| self.domain(i).expect("index in range"))
    }
}

pub fn split_binade(exponent: i32, fmt: &FpFormat, n: u64) -> Result<DomainSplit> {
    if !n.is_power_of_two() {
        return Err(Error::Config(format!("domain size {n} is not a power of two")));
    }
    let log_n = n.trailing_zeros();
    if log_n > fmt.p - 1 {
        return Err(Error::Config(format!(
            "domain size 2^{log_n} does not divide the 2^{} arguments of a binade",
            fmt.p - 1
        )));
    }
    Ok(DomainSplit { exponent, p: fmt.p, log_n })
}

/// Index `x = 2^(p-e)·(X - X_i)` of an argument inside its domain.
pub fn arg_index(x: &FpNumber, d: &Domain) -> Result<u64> {
    if x.exponent != d.start.exponent || x.precision != d.start.precision || x.significand < d.start.significand {
        return Err(Error::Range("argument outside its domain".into()));
    }
    let i = x.significand - d.start.significand;
    if i >= d.len {
        return Err(Error::Range("argument outside its domain".into()));
    }
    Ok(i)
}

pub fn arg_unindex(i: u64, d: &Domain) -> Result<FpNumber> {
    if i >= d.len {
        return Err(Error::Range(format!("index {i} outside a domain of {}", d.len)));
    }
    FpNumber::new(d.start.significand + i, d.start.exponent, d.start.precision)
}

/// The per-domain error terms, each a non-wrapping fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ErrorBudget {
    pub eps: UFrac,
    pub eps_approx: UFrac,
    pub eps_trunc: UFrac,
    pub eps_shift: UFrac,
}

impl ErrorBudget {
    pub fn new(eps: UFrac, eps_approx: UFrac, eps_trunc: UFrac, eps_shift: UFrac) -> Result<Self> {
        let b = ErrorBudget { eps, eps_approx, eps_trunc, eps_shift };
        b.eps_second()?;
        Ok(b)
    }

    fn sum(terms: &[UFrac]) -> Result<UFrac> {
        let mut acc = UFrac::zero(terms[0].width());
        for &t in terms {
            acc = acc.checked_add(t).ok_or_else(|| Error::Range("error budget reaches 1".into()))?;
        }
        Ok(acc)
    }

    /// `ε' = ε + ε_approx + ε_shift`.
    pub fn eps_prime(&self) -> Result<UFrac> {
        Self::sum(&[self.eps, self.eps_approx, self.eps_shift])
    }

    /// `ε'' = ε' + ε_trunc`, required to stay below 1/4.
    pub fn eps_second(&self) -> Result<UFrac> {
        let e = Self::sum(&[self.eps, self.eps_approx, self.eps_shift, self.eps_trunc])?;
        if e.raw() as u128 * 4 >= e.width().unit() {
            return Err(Error::Range(format!("eps'' = {e} is not below 1/4")));
        }
        Ok(e)
    }
}
