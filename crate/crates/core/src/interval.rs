//! Rigorous fixed-point interval arithmetic on big integers.
//!
//! An [`Interval`] is `[lo, hi]·2^-prec`; every operation rounds outward, so
//! the exact result of the real operation is always enclosed.

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// An exact binary rational `mant · 2^exp`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    pub mant: BigInt,
    pub exp: i64,
}

impl Dyadic {
    pub fn new(mant: impl Into<BigInt>, exp: i64) -> Self {
        Dyadic { mant: mant.into(), exp }
    }

    pub fn zero() -> Self {
        Dyadic::new(0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// Exponent `e` with `|self| ∈ [2^(e-1), 2^e)`; `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        (!self.mant.is_zero()).then(|| self.mant.bits() as i64 + self.exp)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        Dyadic::new(a + b, e)
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic::new(-&self.mant, self.exp)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        Dyadic::new(self.mant.clone(), self.exp + k)
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.mant.bits() as i64;
        let shift = (bits - 60).max(0);
        let m: f64 = floor_shr(&self.mant, shift as u64).to_string().parse().unwrap_or(f64::NAN);
        m * 2f64.powi((self.exp + shift) as i32)
    }

    /// `floor(self · 2^prec)`.
    pub fn scaled_floor(&self, prec: i64) -> BigInt {
        shift_floor(&self.mant, self.exp + prec)
    }

    pub fn scaled_ceil(&self, prec: i64) -> BigInt {
        -shift_floor(&-&self.mant, self.exp + prec)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·2^{}", self.mant, self.exp)
    }
}

pub fn floor_shr(x: &BigInt, k: u64) -> BigInt {
    if k == 0 {
        return x.clone();
    }
    x.div_floor(&(BigInt::one() << k))
}

/// `floor(x · 2^k)` for any sign of `k`.
pub fn shift_floor(x: &BigInt, k: i64) -> BigInt {
    if k >= 0 {
        x << k as u64
    } else {
        floor_shr(x, (-k) as u64)
    }
}

fn shift_ceil(x: &BigInt, k: i64) -> BigInt {
    -shift_floor(&-x, k)
}

#[derive(Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigInt,
    pub hi: BigInt,
    pub prec: u32,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo_f64(), self.hi_f64())
    }
}

impl Interval {
    pub fn new(lo: BigInt, hi: BigInt, prec: u32) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        Interval { lo, hi, prec }
    }

    pub fn point(v: BigInt, prec: u32) -> Self {
        Interval { lo: v.clone(), hi: v, prec }
    }

    pub fn from_int(v: impl Into<BigInt>, prec: u32) -> Self {
        Self::point(v.into() << prec as usize, prec)
    }

    pub fn from_dyadic(x: &Dyadic, prec: u32) -> Self {
        Interval::new(x.scaled_floor(prec as i64), x.scaled_ceil(prec as i64), prec)
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = num << prec as usize;
        let (lo, hi) = if den.is_positive() {
            (n.div_floor(den), n.div_ceil(den))
        } else {
            ((-&n).div_floor(&-den), (-&n).div_ceil(&-den))
        };
        Ok(Interval::new(lo, hi, prec))
    }

    /// Both endpoints as exact dyadics.
    pub fn lo_dyadic(&self) -> Dyadic {
        Dyadic::new(self.lo.clone(), -(self.prec as i64))
    }

    pub fn hi_dyadic(&self) -> Dyadic {
        Dyadic::new(self.hi.clone(), -(self.prec as i64))
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo_dyadic().to_f64()
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi_dyadic().to_f64()
    }

    pub fn width(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// Upper bound of `|x|` over the interval, at the interval's precision.
    pub fn mag_hi(&self) -> BigInt {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        let k = prec as i64 - self.prec as i64;
        Interval::new(shift_floor(&self.lo, k), shift_ceil(&self.hi, k), prec)
    }

    fn align(&self, other: &Interval) {
        assert_eq!(self.prec, other.prec, "mixed interval precisions");
    }

    pub fn add(&self, other: &Interval) -> Interval {
        self.align(other);
        Interval::new(&self.lo + &other.lo, &self.hi + &other.hi, self.prec)
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        self.align(other);
        Interval::new(&self.lo - &other.hi, &self.hi - &other.lo, self.prec)
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-&self.hi, -&self.lo, self.prec)
    }

    pub fn abs(&self) -> Interval {
        if self.lo.is_negative() && self.hi.is_positive() {
            Interval::new(BigInt::zero(), self.mag_hi(), self.prec)
        } else if self.hi.is_negative() || self.hi.is_zero() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        self.align(other);
        let prods = [&self.lo * &other.lo, &self.lo * &other.hi, &self.hi * &other.lo, &self.hi * &other.hi];
        let lo = prods.iter().min().unwrap();
        let hi = prods.iter().max().unwrap();
        let k = -(self.prec as i64);
        Interval::new(shift_floor(lo, k), shift_ceil(hi, k), self.prec)
    }

    pub fn square(&self) -> Interval {
        let a = self.abs();
        let k = -(self.prec as i64);
        Interval::new(shift_floor(&(&a.lo * &a.lo), k), shift_ceil(&(&a.hi * &a.hi), k), self.prec)
    }

    pub fn mul_int(&self, k: &BigInt) -> Interval {
        let (a, b) = (&self.lo * k, &self.hi * k);
        if a <= b {
            Interval::new(a, b, self.prec)
        } else {
            Interval::new(b, a, self.prec)
        }
    }

    pub fn div_int(&self, k: &BigInt) -> Result<Interval> {
        if k.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (a, b) = if k.is_positive() { (self.lo.clone(), self.hi.clone()) } else { (-&self.hi, -&self.lo) };
        let k = k.abs();
        Ok(Interval::new(a.div_floor(&k), b.div_ceil(&k), self.prec))
    }

    /// Multiplication by `2^k`, exact for `k ≥ 0`.
    pub fn mul_pow2(&self, k: i64) -> Interval {
        Interval::new(shift_floor(&self.lo, k), shift_ceil(&self.hi, k), self.prec)
    }

    pub fn recip(&self) -> Result<Interval> {
        if self.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let one = BigInt::one() << (2 * self.prec) as usize;
        Ok(Interval::new(one.div_floor(&self.hi), one.div_ceil(&self.lo), self.prec))
    }

    pub fn div(&self, other: &Interval) -> Result<Interval> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        self.align(other);
        Interval::new(self.lo.clone().min(other.lo.clone()), self.hi.clone().max(other.hi.clone()), self.prec)
    }

    /// Symmetric widening by `r` units.
    pub fn widen(&self, r: &BigInt) -> Interval {
        Interval::new(&self.lo - r, &self.hi + r, self.prec)
    }

    pub fn exp(&self) -> Result<Interval> {
        let lo = exp_point(&self.lo_dyadic(), self.prec)?;
        let hi = exp_point(&self.hi_dyadic(), self.prec)?;
        Ok(Interval::new(lo.lo, hi.hi, self.prec))
    }

    pub fn ln(&self) -> Result<Interval> {
        if !self.is_positive() {
            return Err(Error::Domain("logarithm of a non-positive value".into()));
        }
        let lo = ln_point(&self.lo_dyadic(), self.prec)?;
        let hi = ln_point(&self.hi_dyadic(), self.prec)?;
        Ok(Interval::new(lo.lo, hi.hi, self.prec))
    }
}

/// Arguments of `exp` beyond this magnitude are rejected.
const EXP_ARG_LIMIT: i64 = 1 << 14;

/// Encloses `exp(x)` at absolute precision `prec`.
pub fn exp_point(x: &Dyadic, prec: u32) -> Result<Interval> {
    let xe = x.exponent().unwrap_or(i64::MIN);
    if xe > 15 || (xe == 15 && x.to_f64().abs() > EXP_ARG_LIMIT as f64) {
        return Err(Error::Domain(format!("exp argument {} out of range", x.to_f64())));
    }
    // Reduce to |r| < 2^-10, then square s times.
    let s = (xe + 10).max(0) as u32;
    let magnitude = if x.is_negative() { 0 } else { (x.to_f64() * 1.5).ceil().max(0.0) as u32 + 2 };
    let wp = prec + s + magnitude + 24;
    let r = Interval::from_dyadic(&x.mul_pow2(-(s as i64)), wp);
    let terms = wp / 10 + 3;
    let mut sum = Interval::from_int(1, wp);
    let mut term = Interval::from_int(1, wp);
    for k in 1..=terms {
        term = term.mul(&r).div_int(&BigInt::from(k))?;
        sum = sum.add(&term);
    }
    // Remainder below 2·|r|^(K+1)/(K+1)! < 2^(1 - 10(K+1)), far under one unit.
    sum = sum.widen(&BigInt::one());
    for _ in 0..s {
        sum = sum.square();
    }
    Ok(sum.with_prec(prec))
}

/// `atanh(z)·2` for an interval `0 ≤ z ≤ 1/3`, via `2·Σ z^(2j+1)/(2j+1)`.
fn atanh2_series(z: &Interval) -> Result<Interval> {
    let wp = z.prec;
    let z2 = z.square();
    let mut pow = z.clone();
    let mut sum = z.clone();
    let terms = wp / 3 + 4;
    for j in 1..=terms {
        pow = pow.mul(&z2);
        sum = sum.add(&pow.div_int(&BigInt::from(2 * j + 1))?);
    }
    // Tail below (9/8)·z^(2J+3) < 3^-(2J+3) + slack; one unit covers it.
    Ok(sum.widen(&BigInt::one()).mul_int(&BigInt::from(2)))
}

/// Encloses `ln 2 = 2·atanh(1/3)` at precision `prec`.
pub fn ln2(prec: u32) -> Result<Interval> {
    let wp = prec + 16;
    let third = Interval::from_ratio(&BigInt::one(), &BigInt::from(3), wp)?;
    Ok(atanh2_series(&third)?.with_prec(prec))
}

/// Encloses `ln(y)` for `y > 0` at precision `prec`.
pub fn ln_point(y: &Dyadic, prec: u32) -> Result<Interval> {
    if y.mant.sign() != Sign::Plus {
        return Err(Error::Domain("logarithm of a non-positive value".into()));
    }
    let k = y.exponent().expect("non-zero") - 1;
    let m = y.mul_pow2(-k);
    let wp = prec + 24 + (64 - k.unsigned_abs().leading_zeros());
    let mi = Interval::from_dyadic(&m, wp);
    let one = Interval::from_int(1, wp);
    let z = mi.sub(&one).div(&mi.add(&one))?;
    let z = Interval::new(z.lo.max(BigInt::zero()), z.hi, wp);
    let mut out = atanh2_series(&z)?;
    if k != 0 {
        out = out.add(&ln2(wp)?.mul_int(&BigInt::from(k)));
    }
    Ok(out.with_prec(prec))
}
