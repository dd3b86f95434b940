use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};

use super::ufrac::{FracWidth, UFrac};
use crate::error::{Error, Result};

/// 10 limbs of 32 bits, i.e. a 320-bit magnitude.
pub const DEFAULT_LIMBS: usize = 10;

/// Sign-magnitude integer with a fixed number of 32-bit limbs.
///
/// Every operation keeps the limb count of its operands and reports overflow
/// instead of growing. Zero is always stored as non-negative.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MpInt {
    mag: Vec<u32>,
    negative: bool,
}

impl MpInt {
    pub fn zero(limbs: usize) -> Self {
        assert!(limbs > 0, "an MpInt needs at least one limb");
        MpInt { mag: vec![0; limbs], negative: false }
    }

    pub fn from_i128(v: i128, limbs: usize) -> Result<Self> {
        let mut out = Self::from_u128(v.unsigned_abs(), limbs)?;
        out.negative = v < 0 && !out.is_zero();
        Ok(out)
    }

    pub fn from_u128(v: u128, limbs: usize) -> Result<Self> {
        let mut out = Self::zero(limbs);
        let mut rest = v;
        for limb in out.mag.iter_mut() {
            *limb = rest as u32;
            rest >>= 32;
        }
        if rest != 0 {
            return Err(Error::Overflow("from_u128"));
        }
        Ok(out)
    }

    pub fn from_bigint(v: &BigInt, limbs: usize) -> Result<Self> {
        let digits = v.magnitude().to_u32_digits();
        if digits.len() > limbs {
            return Err(Error::Overflow("from_bigint"));
        }
        let mut out = Self::zero(limbs);
        out.mag[..digits.len()].copy_from_slice(&digits);
        out.negative = v.sign() == Sign::Minus;
        Ok(out)
    }

    pub fn to_bigint(&self) -> BigInt {
        let mag = BigUint::from_slice(&self.mag);
        let sign = if self.negative { Sign::Minus } else { Sign::Plus };
        BigInt::from_biguint(sign, mag)
    }

    pub fn limbs(&self) -> usize {
        self.mag.len()
    }

    pub fn is_zero(&self) -> bool {
        self.mag.iter().all(|&l| l == 0)
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// Number of significant bits of the magnitude.
    pub fn bit_len(&self) -> u32 {
        match self.mag.iter().rposition(|&l| l != 0) {
            Some(i) => 32 * i as u32 + (32 - self.mag[i].leading_zeros()),
            None => 0,
        }
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.negative = !out.negative && !out.is_zero();
        out
    }

    pub fn abs(&self) -> Self {
        MpInt { mag: self.mag.clone(), negative: false }
    }

    fn check_width(&self, other: &MpInt) {
        assert_eq!(self.mag.len(), other.mag.len(), "mixed limb counts");
    }

    fn cmp_mag(a: &[u32], b: &[u32]) -> Ordering {
        for (x, y) in a.iter().rev().zip(b.iter().rev()) {
            match x.cmp(y) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    /// `self += other`, failing on overflow. On error `self` is left unspecified.
    pub fn add_assign(&mut self, other: &MpInt) -> Result<()> {
        self.check_width(other);
        if self.negative == other.negative {
            let mut carry = 0u64;
            for (s, o) in self.mag.iter_mut().zip(&other.mag) {
                let t = *s as u64 + *o as u64 + carry;
                *s = t as u32;
                carry = t >> 32;
            }
            if carry != 0 {
                return Err(Error::Overflow("add"));
            }
        } else if Self::cmp_mag(&self.mag, &other.mag) != Ordering::Less {
            let mut borrow = 0i64;
            for (s, o) in self.mag.iter_mut().zip(&other.mag) {
                let t = *s as i64 - *o as i64 - borrow;
                *s = t as u32;
                borrow = (t < 0) as i64;
            }
            if self.is_zero() {
                self.negative = false;
            }
        } else {
            let mut borrow = 0i64;
            for (s, o) in self.mag.iter_mut().zip(&other.mag) {
                let t = *o as i64 - *s as i64 - borrow;
                *s = t as u32;
                borrow = (t < 0) as i64;
            }
            self.negative = other.negative;
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &MpInt) -> Result<MpInt> {
        let mut out = self.clone();
        out.add_assign(other)?;
        Ok(out)
    }

    pub fn checked_sub(&self, other: &MpInt) -> Result<MpInt> {
        self.checked_add(&other.neg())
    }

    /// Schoolbook product; fails if the result needs more limbs.
    pub fn checked_mul(&self, other: &MpInt) -> Result<MpInt> {
        self.check_width(other);
        let n = self.mag.len();
        let mut acc = vec![0u64; 2 * n];
        for (i, &a) in self.mag.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let mut carry = 0u64;
            for (j, &b) in other.mag.iter().enumerate() {
                let t = acc[i + j] + a as u64 * b as u64 + carry;
                acc[i + j] = t & 0xffff_ffff;
                carry = t >> 32;
            }
            let mut k = i + n;
            while carry != 0 {
                let t = acc[k] + carry;
                acc[k] = t & 0xffff_ffff;
                carry = t >> 32;
                k += 1;
            }
        }
        if acc[n..].iter().any(|&l| l != 0) {
            return Err(Error::Overflow("mul"));
        }
        let mut out = MpInt { mag: acc[..n].iter().map(|&l| l as u32).collect(), negative: false };
        out.negative = (self.negative != other.negative) && !out.is_zero();
        Ok(out)
    }

    /// Multiplies by an unsigned 64-bit factor.
    pub fn mul_small(&self, k: u64) -> Result<MpInt> {
        let mut out = self.clone();
        let mut carry = 0u128;
        for limb in out.mag.iter_mut() {
            let t = *limb as u128 * k as u128 + carry;
            *limb = t as u32;
            carry = t >> 32;
        }
        if carry != 0 {
            return Err(Error::Overflow("mul_small"));
        }
        if out.is_zero() {
            out.negative = false;
        }
        Ok(out)
    }

    /// Divides by `k`, requiring the division to be exact.
    pub fn div_exact_small(&self, k: u64) -> Result<MpInt> {
        if k == 0 {
            return Err(Error::DivisionByZero);
        }
        let mut out = self.clone();
        let mut rem = 0u128;
        for limb in out.mag.iter_mut().rev() {
            let t = (rem << 32) | *limb as u128;
            *limb = (t / k as u128) as u32;
            rem = t % k as u128;
        }
        if rem != 0 {
            return Err(Error::Range(format!("inexact division by {k}")));
        }
        Ok(out)
    }

    fn bits_at(&self, lo: u32, count: u32) -> u64 {
        debug_assert!(count <= 64);
        let mut out = 0u64;
        for b in 0..count {
            let pos = lo + b;
            let limb = (pos / 32) as usize;
            if limb < self.mag.len() && (self.mag[limb] >> (pos % 32)) & 1 == 1 {
                out |= 1 << b;
            }
        }
        out
    }

    fn any_bits_below(&self, lo: u32) -> bool {
        let full = (lo / 32) as usize;
        if self.mag[..full.min(self.mag.len())].iter().any(|&l| l != 0) {
            return true;
        }
        let part = lo % 32;
        full < self.mag.len() && part != 0 && self.mag[full] & ((1u32 << part) - 1) != 0
    }

    /// Reads `self / 2^scale` modulo 1, truncated to a `width`-bit fraction.
    ///
    /// Negative values use the mathematical (non-negative) residue.
    pub fn frac_floor(&self, scale: u32, width: FracWidth) -> UFrac {
        let w = width.bits();
        let (window, low_nonzero) = if scale >= w {
            let lo = scale - w;
            (self.bits_at(lo, w), self.any_bits_below(lo))
        } else if scale == 0 {
            (0, false)
        } else {
            (self.bits_at(0, scale) << (w - scale), false)
        };
        if !self.negative {
            return UFrac::wrapping(window as u128, width);
        }
        // 2^scale - r, read through the same window.
        let inverted = !window & width.max_raw();
        let carry = !low_nonzero as u128;
        UFrac::wrapping(inverted as u128 + carry, width)
    }

    pub fn to_f64(&self) -> f64 {
        let v = self.mag.iter().rev().fold(0.0, |acc, &l| acc * 4294967296.0 + l as f64);
        if self.negative {
            -v
        } else {
            v
        }
    }
}

impl Ord for MpInt {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.negative, other.negative) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            (false, false) => Self::cmp_mag(&self.mag, &other.mag),
            (true, true) => Self::cmp_mag(&other.mag, &self.mag),
        }
    }
}

impl PartialOrd for MpInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MpInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MpInt({})", self.to_bigint())
    }
}

impl fmt::Display for MpInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bigint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    const L: usize = 4;

    fn mp(v: i128) -> MpInt {
        MpInt::from_i128(v, L).unwrap()
    }

    fn limit() -> BigInt {
        BigInt::one() << (32 * L)
    }

    fn arb_big() -> impl Strategy<Value = BigInt> {
        (any::<bool>(), prop::collection::vec(any::<u32>(), 0..=L)).prop_map(|(neg, d)| {
            let m = BigInt::from_biguint(Sign::Plus, BigUint::from_slice(&d));
            if neg {
                -m
            } else {
                m
            }
        })
    }

    #[test]
    fn zero_is_never_negative() {
        let z = mp(5).checked_sub(&mp(5)).unwrap();
        assert!(!z.is_negative());
        assert_eq!(z, MpInt::zero(L));
        assert!(!mp(0).neg().is_negative());
    }

    #[test]
    fn overflow_is_reported() {
        let max = MpInt::from_bigint(&(limit() - 1), L).unwrap();
        assert_eq!(max.checked_add(&mp(1)), Err(Error::Overflow("add")));
        assert!(max.checked_mul(&mp(2)).is_err());
        assert!(MpInt::from_bigint(&limit(), L).is_err());
    }

    #[test]
    fn frac_floor_of_negative_values() {
        // -1/4 mod 1 = 3/4
        let v = mp(-(1 << 30));
        assert_eq!(v.frac_floor(32, FracWidth::W32).raw(), 3 << 30);
        // -1/2^40 mod 1 truncates to 1 - 2^-32
        let v = mp(-1);
        assert_eq!(v.frac_floor(40, FracWidth::W32).raw(), u32::MAX as u64);
        assert_eq!(mp(-(1 << 40)).frac_floor(40, FracWidth::W32).raw(), 0);
        // Small scales shift left.
        assert_eq!(mp(5).frac_floor(3, FracWidth::W32).raw(), 5 << 29);
    }

    proptest! {
        #[test]
        fn matches_bigint(a in arb_big(), b in arb_big()) {
            let (x, y) = (MpInt::from_bigint(&a, L).unwrap(), MpInt::from_bigint(&b, L).unwrap());
            prop_assert_eq!(x.to_bigint(), a.clone());
            let sum = &a + &b;
            match x.checked_add(&y) {
                Ok(s) => prop_assert_eq!(s.to_bigint(), sum),
                Err(_) => prop_assert!(sum.magnitude() >= limit().magnitude()),
            }
            let diff = &a - &b;
            match x.checked_sub(&y) {
                Ok(s) => prop_assert_eq!(s.to_bigint(), diff),
                Err(_) => prop_assert!(diff.magnitude() >= limit().magnitude()),
            }
            let prod = &a * &b;
            match x.checked_mul(&y) {
                Ok(s) => prop_assert_eq!(s.to_bigint(), prod),
                Err(_) => prop_assert!(prod.magnitude() >= limit().magnitude()),
            }
            prop_assert_eq!(x.cmp(&y), a.cmp(&b));
            prop_assert_eq!(x.bit_len() as u64, a.bits());
        }

        #[test]
        fn small_ops_match_bigint(a in arb_big(), k in 1u64..) {
            let x = MpInt::from_bigint(&a, L).unwrap();
            let prod = &a * BigInt::from(k);
            match x.mul_small(k) {
                Ok(s) => {
                    prop_assert_eq!(s.to_bigint(), prod);
                    prop_assert_eq!(s.div_exact_small(k).unwrap(), x);
                }
                Err(_) => prop_assert!(prod.magnitude() >= limit().magnitude()),
            }
        }

        #[test]
        fn frac_floor_matches_bigint(a in arb_big(), scale in 0u32..140) {
            let x = MpInt::from_bigint(&a, L).unwrap();
            let m = BigInt::one() << scale;
            let mut r = &a % &m;
            if r < BigInt::zero() {
                r += &m;
            }
            let expect = (r << 64u32) >> scale;
            let got = x.frac_floor(scale, FracWidth::W64).raw();
            prop_assert_eq!(BigInt::from(got), expect);
        }
    }
}
