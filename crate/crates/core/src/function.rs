//! The functions under search, with rigorous enclosures of values and derivatives.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::{exp_point, ln2, ln_point, Dyadic, Interval};

/// Exact rational number `num / den` with `den > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rational {
    pub num: BigInt,
    pub den: BigInt,
}

impl Rational {
    pub fn new(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let g = num.gcd(&den);
        let s = if den.is_negative() { -BigInt::one() } else { BigInt::one() };
        Ok(Rational { num: &num / &g * &s, den: &den / &g * &s })
    }

    pub fn int(v: i64) -> Self {
        Rational { num: v.into(), den: BigInt::one() }
    }

    /// Parses `17`, `-3/8` or a decimal literal such as `0.125` exactly.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse coefficient `{s}`"));
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            return Rational::new(n, d);
        }
        if let Some((i, f)) = s.split_once('.') {
            let digits = format!("{i}{f}");
            let n: BigInt = digits.parse().map_err(|_| bad())?;
            return Rational::new(n, BigInt::from(10).pow(f.len() as u32));
        }
        Ok(Rational { num: s.parse().map_err(|_| bad())?, den: BigInt::one() })
    }

    fn enclose(&self, prec: u32) -> Interval {
        Interval::from_ratio(&self.num, &self.den, prec).expect("positive denominator")
    }
}

/// Polynomial with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    pub coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Config("polynomial without coefficients".into()));
        }
        Ok(Polynomial { coeffs })
    }

    /// One coefficient per whitespace-separated token, constant term first.
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let coeffs = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace)
            .map(Rational::parse)
            .collect::<Result<Vec<_>>>()?;
        Polynomial::new(coeffs)
    }

    fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `t^k` in `P(x + t)` as an interval.
    fn shifted_coeff(&self, x: &Interval, k: usize) -> Interval {
        let prec = x.prec;
        let mut acc = Interval::from_int(0, prec);
        for j in (k..self.coeffs.len()).rev() {
            let c = self.coeffs[j].enclose(prec).mul_int(&binomial(j as u64, k as u64));
            acc = acc.mul(x).add(&c);
        }
        acc
    }
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * i)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Function {
    Exp,
    Log,
    Exp2,
    Poly(Polynomial),
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Function::Exp => write!(f, "exp"),
            Function::Log => write!(f, "log"),
            Function::Exp2 => write!(f, "exp2"),
            Function::Poly(p) => write!(f, "poly(degree {})", p.degree()),
        }
    }
}

/// Largest absolute precision tried before giving up on a value.
pub const PRECISION_CAP: u32 = 1 << 14;

impl Function {
    fn check_arg(&self, x: &Interval) -> Result<()> {
        if matches!(self, Function::Log) && !x.is_positive() {
            return Err(Error::Domain("log needs positive arguments".into()));
        }
        Ok(())
    }

    /// Encloses `f` over the interval `x`, at `x`'s precision.
    pub fn eval_interval(&self, x: &Interval) -> Result<Interval> {
        self.check_arg(x)?;
        match self {
            Function::Exp => x.exp(),
            Function::Log => x.ln(),
            Function::Exp2 => x.mul(&ln2(x.prec + 8)?.with_prec(x.prec)).exp(),
            Function::Poly(p) => Ok(p.shifted_coeff(x, 0)),
        }
    }

    /// Encloses `f(x)` with absolute error below `2^-prec`.
    pub fn eval(&self, x: &Dyadic, prec: u32) -> Result<Interval> {
        match self {
            Function::Exp => exp_point(x, prec),
            Function::Log => {
                if x.sub(&Dyadic::new(1, 0)).is_zero() {
                    return Ok(Interval::from_int(0, prec));
                }
                ln_point(x, prec)
            }
            Function::Exp2 => {
                let wp = prec + 16 + (x.exponent().unwrap_or(0).max(0) as u32);
                let arg = Interval::from_dyadic(x, wp).mul(&ln2(wp)?);
                let lo = exp_point(&arg.lo_dyadic(), prec + 4)?;
                let hi = exp_point(&arg.hi_dyadic(), prec + 4)?;
                let out = Interval::new(lo.lo, hi.hi, prec + 4).with_prec(prec);
                // Integer arguments have exact results.
                if x.exp >= 0 || x.mant.trailing_zeros().unwrap_or(0) as i64 >= -x.exp {
                    let k = x.scaled_floor(0);
                    if let Ok(k) = i64::try_from(&k) {
                        if k.unsigned_abs() < PRECISION_CAP as u64 {
                            return Ok(Interval::from_dyadic(&Dyadic::new(1, k), prec));
                        }
                    }
                }
                Ok(out)
            }
            Function::Poly(p) => Ok(p.shifted_coeff(&Interval::from_dyadic(x, prec + 64), 0).with_prec(prec)),
        }
    }

    /// Encloses `f(x)` with `rel_bits` correct bits relative to `|f(x)|`.
    /// Returns `None` when `f(x)` is exactly zero.
    pub fn eval_rel(&self, x: &Dyadic, rel_bits: u32) -> Result<Option<Interval>> {
        let mut prec = rel_bits + 8;
        loop {
            let v = self.eval(x, prec)?;
            if v.lo.is_zero() && v.hi.is_zero() {
                return Ok(None);
            }
            if !v.contains_zero() {
                let small = v.lo.abs().min(v.hi.abs());
                let mag = small.bits() as i64 - prec as i64;
                let need = rel_bits as i64 - mag + 2;
                if need <= prec as i64 {
                    return Ok(Some(v));
                }
                prec = need as u32 + 4;
            } else {
                prec = prec.saturating_mul(2);
            }
            if prec > PRECISION_CAP {
                return Err(Error::Undecided(PRECISION_CAP));
            }
        }
    }

    /// Encloses `f^(k)(x) / k!` for `k = 0..=degree`.
    pub fn taylor_coeffs(&self, x: &Dyadic, degree: usize, prec: u32) -> Result<Vec<Interval>> {
        let wp = prec + 8 + 2 * degree as u32;
        let out: Vec<Interval> = match self {
            Function::Exp => {
                let e = exp_point(x, wp)?;
                (0..=degree).map(|k| e.div_int(&factorial(k as u64))).collect::<Result<_>>()?
            }
            Function::Exp2 => {
                let e = self.eval(x, wp)?;
                let l = ln2(wp)?;
                let mut pow = Interval::from_int(1, wp);
                let mut v = Vec::with_capacity(degree + 1);
                for k in 0..=degree {
                    v.push(e.mul(&pow).div_int(&factorial(k as u64))?);
                    pow = pow.mul(&l);
                }
                v
            }
            Function::Log => {
                let xi = Interval::from_dyadic(x, wp);
                self.check_arg(&xi)?;
                let inv = xi.recip()?;
                let mut v = vec![self.eval(x, wp)?];
                let mut pow = Interval::from_int(1, wp);
                for k in 1..=degree {
                    pow = pow.mul(&inv);
                    let mut t = pow.div_int(&BigInt::from(k))?;
                    if k % 2 == 0 {
                        t = t.neg();
                    }
                    v.push(t);
                }
                v
            }
            Function::Poly(p) => {
                let xi = Interval::from_dyadic(x, wp + 64);
                (0..=degree).map(|k| p.shifted_coeff(&xi, k).with_prec(wp)).collect()
            }
        };
        Ok(out.into_iter().map(|i| i.with_prec(prec)).collect())
    }

    /// Upper bound of `|f^(k)(ξ)| / k!` over `ξ ∈ [lo, hi]`, returned as the
    /// upper endpoint of an interval at precision `prec`.
    pub fn taylor_bound(&self, k: usize, lo: &Dyadic, hi: &Dyadic, prec: u32) -> Result<Interval> {
        let fk = factorial(k as u64);
        let bound = match self {
            Function::Exp => exp_point(hi, prec + 8)?.div_int(&fk)?,
            Function::Exp2 => {
                let l = ln2(prec + 8)?;
                let mut pow = Interval::from_int(1, prec + 8);
                for _ in 0..k {
                    pow = pow.mul(&l);
                }
                let wp = prec + 8;
                let e = self.eval(hi, wp)?;
                e.mul(&pow).div_int(&fk)?
            }
            Function::Log => {
                let l = Interval::from_dyadic(lo, prec + 8);
                self.check_arg(&l)?;
                if k == 0 {
                    let a = self.eval(lo, prec + 8)?.abs();
                    let b = self.eval(hi, prec + 8)?.abs();
                    a.hull(&b)
                } else {
                    let mut pow = Interval::from_int(1, prec + 8);
                    let inv = l.recip()?;
                    for _ in 0..k {
                        pow = pow.mul(&inv);
                    }
                    pow.div_int(&BigInt::from(k))?
                }
            }
            Function::Poly(p) => {
                let wp = prec + 8;
                let m = Interval::from_dyadic(lo, wp).abs().hull(&Interval::from_dyadic(hi, wp).abs());
                let m = Interval::new(m.hi.clone(), m.hi, wp);
                let mut acc = Interval::from_int(0, wp);
                for j in (k..p.coeffs.len()).rev() {
                    let c = p.coeffs[j].enclose(wp).abs().mul_int(&binomial(j as u64, k as u64));
                    acc = acc.mul(&m).add(&c);
                }
                acc
            }
        };
        Ok(bound.with_prec(prec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(i: &Interval, v: f64) -> bool {
        (i.lo_f64() - v).abs() <= 1e-12 * v.abs().max(1.0) && (i.hi_f64() - v).abs() <= 1e-12 * v.abs().max(1.0)
    }

    #[test]
    fn values() {
        let x = Dyadic::new(3, -1);
        assert!(close(&Function::Exp.eval(&x, 80).unwrap(), 1.5f64.exp()));
        assert!(close(&Function::Log.eval(&x, 80).unwrap(), 1.5f64.ln()));
        assert!(close(&Function::Exp2.eval(&x, 80).unwrap(), 1.5f64.exp2()));
        let p = Polynomial::parse("1 -2 1/2").unwrap();
        assert!(close(&Function::Poly(p).eval(&x, 80).unwrap(), 1.0 - 3.0 + 1.125));
    }

    #[test]
    fn exact_zeros_and_powers() {
        assert_eq!(Function::Log.eval_rel(&Dyadic::new(1, 0), 50).unwrap(), None);
        let e = Function::Exp2.eval(&Dyadic::new(3, 0), 40).unwrap();
        assert_eq!(e.lo, e.hi);
        assert_eq!(e.lo_f64(), 8.0);
        let p = Function::Poly(Polynomial::parse("-1 1").unwrap());
        assert_eq!(p.eval_rel(&Dyadic::new(1, 0), 50).unwrap(), None);
    }

    #[test]
    fn relative_precision_on_small_values() {
        let x = Dyadic::new(-40, 0);
        let v = Function::Exp.eval_rel(&x, 60).unwrap().unwrap();
        let rel = (v.hi_f64() - v.lo_f64()) / v.lo_f64();
        assert!(rel < 2f64.powi(-58), "{rel}");
    }

    #[test]
    fn taylor_of_log() {
        let x = Dyadic::new(3, -1);
        let c = Function::Log.taylor_coeffs(&x, 3, 60).unwrap();
        let want = [1.5f64.ln(), 1.0 / 1.5, -1.0 / (2.0 * 2.25), 1.0 / (3.0 * 3.375)];
        for (ci, w) in c.iter().zip(want) {
            assert!(close(ci, w), "{ci:?} vs {w}");
        }
    }

    #[test]
    fn taylor_of_poly_and_exp2() {
        let p = Function::Poly(Polynomial::parse("0 0 0 1").unwrap());
        let c = p.taylor_coeffs(&Dyadic::new(2, 0), 4, 40).unwrap();
        let got: Vec<f64> = c.iter().map(|i| i.lo_f64()).collect();
        assert_eq!(got, vec![8.0, 12.0, 6.0, 1.0, 0.0]);
        let c = Function::Exp2.taylor_coeffs(&Dyadic::new(1, 0), 2, 60).unwrap();
        let l = std::f64::consts::LN_2;
        assert!(close(&c[2], 2.0 * l * l / 2.0));
    }

    #[test]
    fn derivative_bounds() {
        let lo = Dyadic::new(1, 0);
        let hi = Dyadic::new(2, 0);
        let b = Function::Exp.taylor_bound(3, &lo, &hi, 40).unwrap();
        assert!(b.hi_f64() >= 2f64.exp() / 6.0);
        let b = Function::Log.taylor_bound(2, &lo, &hi, 40).unwrap();
        assert!(b.hi_f64() >= 0.5);
        let p = Function::Poly(Polynomial::parse("1 -3 0 2").unwrap());
        let b = p.taylor_bound(1, &lo, &hi, 40).unwrap();
        assert!(b.hi_f64() >= 6.0 * 4.0 - 3.0);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(Rational::parse("0.125").unwrap(), Rational::new(1.into(), 8.into()).unwrap());
        assert_eq!(Rational::parse("-6/4").unwrap(), Rational::new((-3).into(), 2.into()).unwrap());
        assert!(Rational::parse("x").is_err());
        assert!(Polynomial::parse("# nothing").is_err());
    }
}
