//! Per-domain polynomial generation.
//!
//! `f` is approximated on a super-domain of `τ·N` arguments by a Taylor
//! polynomial `R_t` with integer coefficients in the binomial basis. The
//! hierarchical method turns `R_t(x + iN)` into polynomials `r_{t,j}(i)`, which
//! are then shifted to every domain `i` exactly, either by repeated additions
//! (tabulated differences) or by one Toeplitz product.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fixedpoint::{FracWidth, MpInt, DEFAULT_LIMBS};
use crate::fpmodel::{FpFormat, FpNumber};
use crate::function::Function;
use crate::interval::{Dyadic, Interval};

/// Polynomial `Σ coeffs[j]·binomial(x, j)`, every coefficient scaled by `2^-scale`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinomialPoly {
    pub coeffs: Vec<MpInt>,
    pub scale: u32,
}

impl BinomialPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn limbs(&self) -> usize {
        self.coeffs[0].limbs()
    }

    /// Exact value at a non-negative integer.
    pub fn eval(&self, x: u64) -> Result<MpInt> {
        let binoms = binomials(x, self.degree(), self.limbs())?;
        let mut acc = MpInt::zero(self.limbs());
        for (c, b) in self.coeffs.iter().zip(&binoms) {
            acc.add_assign(&c.checked_mul(b)?)?;
        }
        Ok(acc)
    }
}

/// `binomial(i, l)` for `l = 0..=degree`, via `binomial(i, l+1) = binomial(i, l)·(i-l)/(l+1)`.
pub fn binomials(i: u64, degree: usize, limbs: usize) -> Result<Vec<MpInt>> {
    let mut out = Vec::with_capacity(degree + 1);
    let mut b = MpInt::from_u128(1, limbs)?;
    out.push(b.clone());
    for l in 0..degree as u64 {
        b = if l >= i { MpInt::zero(limbs) } else { b.mul_small(i - l)?.div_exact_small(l + 1)? };
        out.push(b.clone());
    }
    Ok(out)
}

/// Successive rows of forward differences, stopping at a constant or single-entry row.
pub fn forward_difference(values: &[MpInt]) -> Result<Vec<Vec<MpInt>>> {
    let mut rows: Vec<Vec<MpInt>> = Vec::new();
    let mut cur = values.to_vec();
    while cur.len() >= 2 {
        let next = cur.windows(2).map(|w| w[1].checked_sub(&w[0])).collect::<Result<Vec<_>>>()?;
        let done = next.windows(2).all(|w| w[0] == w[1]);
        rows.push(next.clone());
        if done {
            break;
        }
        cur = next;
    }
    Ok(rows)
}

/// Binomial-basis coefficients `Δ^j[values](0)` of the interpolating polynomial.
pub fn newton_interpolate(values: &[MpInt], scale: u32) -> Result<BinomialPoly> {
    if values.is_empty() {
        return Err(Error::Range("interpolation needs at least one value".into()));
    }
    let mut coeffs = Vec::with_capacity(values.len());
    let mut row = values.to_vec();
    while !row.is_empty() {
        coeffs.push(row[0].clone());
        row = row.windows(2).map(|w| w[1].checked_sub(&w[0])).collect::<Result<Vec<_>>>()?;
    }
    Ok(BinomialPoly { coeffs, scale })
}

fn big_newton(values: &[BigInt]) -> Vec<BigInt> {
    let mut coeffs = Vec::with_capacity(values.len());
    let mut row = values.to_vec();
    while !row.is_empty() {
        coeffs.push(row[0].clone());
        row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    coeffs
}

/// `Δ^j[R](y) = Σ_{l≥j} c_l·binomial(y, l-j)`.
fn difference_at(r: &BinomialPoly, j: usize, y: u64) -> Result<MpInt> {
    let binoms = binomials(y, r.degree() - j, r.limbs())?;
    let mut acc = MpInt::zero(r.limbs());
    for (l, b) in (j..=r.degree()).zip(&binoms) {
        acc.add_assign(&r.coeffs[l].checked_mul(b)?)?;
    }
    Ok(acc)
}

/// The polynomials `r_j(i) = Δ^j[R](iN)`, `j = 0..=δ`, each in the binomial basis in `i`.
pub fn hierarchical_split(r: &BinomialPoly, stride: u64) -> Result<Vec<BinomialPoly>> {
    let delta = r.degree();
    (0..=delta)
        .map(|j| {
            let values = (0..=(delta - j) as u64)
                .map(|i| difference_at(r, j, i * stride))
                .collect::<Result<Vec<_>>>()?;
            newton_interpolate(&values, r.scale)
        })
        .collect()
}

/// Moves a difference-table column from argument `i` to `i + 1` with `γ` additions.
pub fn tabulated_shift_step(column: &mut [MpInt]) -> Result<()> {
    for l in 0..column.len().saturating_sub(1) {
        let (lo, hi) = column.split_at_mut(l + 1);
        lo[l].add_assign(&hi[0])?;
    }
    Ok(())
}

/// Shifts a polynomial by `i` in one upper-triangular Toeplitz product:
/// `c'_l = Σ_{m≥l} binomial(i, m-l)·c_m`.
pub fn straightforward_shift(poly: &BinomialPoly, i: u64) -> Result<BinomialPoly> {
    let g = poly.degree();
    let binoms = binomials(i, g, poly.limbs())?;
    let mut coeffs = Vec::with_capacity(g + 1);
    for l in 0..=g {
        let mut acc = MpInt::zero(poly.limbs());
        for m in l..=g {
            if !binoms[m - l].is_zero() {
                acc.add_assign(&poly.coeffs[m].checked_mul(&binoms[m - l])?)?;
            }
        }
        coeffs.push(acc);
    }
    Ok(BinomialPoly { coeffs, scale: poly.scale })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolyGenConfig {
    /// Domains per super-domain.
    pub tau: u64,
    /// Arguments per domain.
    pub n: u64,
    /// Number of packets.
    pub mu: u64,
    /// Domains per packet.
    pub nu: u64,
    /// Starting Taylor degree; raised automatically up to `max_delta`.
    pub delta: usize,
    pub max_delta: usize,
    pub limbs: usize,
    /// Extra fractional bits kept beyond what the threshold needs.
    pub guard_bits: u32,
}

impl Default for PolyGenConfig {
    fn default() -> Self {
        PolyGenConfig { tau: 1 << 8, n: 1 << 6, mu: 1 << 4, nu: 1 << 4, delta: 2, max_delta: 12, limbs: DEFAULT_LIMBS, guard_bits: 24 }
    }
}

impl PolyGenConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() {
            return Err(Error::Config(format!("domain size {} is not a power of two", self.n)));
        }
        if self.tau == 0 || self.mu.checked_mul(self.nu) != Some(self.tau) {
            return Err(Error::Config(format!("mu·nu = {}·{} must equal tau = {}", self.mu, self.nu, self.tau)));
        }
        if self.delta == 0 || self.delta > self.max_delta {
            return Err(Error::Config(format!("Taylor degree {} outside 1..={}", self.delta, self.max_delta)));
        }
        if self.limbs == 0 {
            return Err(Error::Config("limb count must be positive".into()));
        }
        Ok(())
    }

    /// Same configuration with `τ` reduced to `tau` domains, keeping `ν ≤ 16`.
    pub fn with_tau(&self, tau: u64) -> Self {
        let nu = (1..=tau.min(16)).rev().find(|d| tau.is_multiple_of(*d)).unwrap_or(1);
        PolyGenConfig { tau, nu, mu: tau / nu, ..*self }
    }
}

/// A run of consecutive arguments sharing one Taylor polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuperDomain {
    pub start: FpNumber,
    pub len: u64,
}

impl SuperDomain {
    fn ulp_exp(&self) -> i64 {
        self.start.exponent as i64 - self.start.precision as i64
    }

    fn arg(&self, x: u64) -> Dyadic {
        Dyadic::new(self.start.significand + x, self.ulp_exp())
    }
}

#[derive(Clone, Debug)]
pub struct TaylorApprox {
    /// `R_t(x) ≈ |f(X_t + x·ulp)|·2^(p-E)`, scaled by `2^-scale`.
    pub poly: BinomialPoly,
    /// Upper bound of `|R_t(x) - |f|·2^(p-E)|` over the super-domain.
    pub eps_approx: Dyadic,
    /// `E`, the smallest exponent of `f` on the super-domain.
    pub ref_exponent: i64,
    pub negative: bool,
    pub delta: usize,
}

impl TaylorApprox {
    /// The bound in `width`-bit units, rounded up.
    pub fn eps_approx_frac_units(&self, width: FracWidth) -> BigInt {
        self.eps_approx.scaled_ceil(width.bits() as i64)
    }
}

fn ceil_log2(x: u64) -> u32 {
    64 - x.saturating_sub(1).leading_zeros()
}

/// Exponents of `min |f|` and `max |f|` on the super-domain, and the sign of `f`.
fn exponent_range(f: &Function, sd: &SuperDomain) -> Result<(i64, i64, bool)> {
    let lo = sd.arg(0);
    let hi = sd.arg(sd.len - 1);
    let mut prec = 64;
    loop {
        let wp = prec + (-sd.ulp_exp()).max(0) as u32;
        let x = Interval::new(lo.scaled_floor(wp as i64), hi.scaled_ceil(wp as i64), wp);
        let r = f.eval_interval(&x)?;
        if !r.contains_zero() {
            let a = r.abs();
            let e_min = a.lo_dyadic().exponent().expect("non-zero");
            let e_max = a.hi_dyadic().exponent().expect("non-zero");
            return Ok((e_min, e_max, r.is_negative()));
        }
        prec *= 2;
        if prec > 1024 {
            return Err(Error::Domain("function vanishes on or near the super-domain".into()));
        }
    }
}

/// Taylor expansion of `|f|` at the middle of the super-domain, in integer
/// binomial coefficients, with a rigorous error bound.
///
/// The degree starts at `cfg.delta` and is raised until the bound is at most
/// `target`; exceeding `cfg.max_delta` is a configuration error.
pub fn taylor_approx(
    f: &Function,
    sd: &SuperDomain,
    fmt: &FpFormat,
    cfg: &PolyGenConfig,
    width: FracWidth,
    target: &Dyadic,
) -> Result<TaylorApprox> {
    let (e_min, e_max, negative) = exponent_range(f, sd)?;
    if e_max > e_min + 1 {
        return Err(Error::Domain(format!("exponent of f spans {e_min}..={e_max} on one super-domain")));
    }
    let mut best = None;
    for delta in cfg.delta..=cfg.max_delta {
        let t = taylor_at_degree(f, sd, fmt, cfg, width, delta, e_min, negative)?;
        let ok = !t.eps_approx.sub(target).mant.is_positive();
        best = Some(t);
        if ok {
            return Ok(best.unwrap());
        }
    }
    let t = best.expect("at least one degree tried");
    Err(Error::Config(format!(
        "approximation error {:e} exceeds the budget {:e} even at degree {}; use smaller domains",
        t.eps_approx.to_f64(),
        target.to_f64(),
        cfg.max_delta
    )))
}

#[allow(clippy::too_many_arguments)]
fn taylor_at_degree(
    f: &Function,
    sd: &SuperDomain,
    fmt: &FpFormat,
    cfg: &PolyGenConfig,
    width: FracWidth,
    delta: usize,
    e_ref: i64,
    negative: bool,
) -> Result<TaylorApprox> {
    let p = fmt.p as i64;
    let ulp = sd.ulp_exp();
    let xm = sd.len / 2;
    let reach = xm.max(sd.len - 1 - xm);
    let scale = (width.bits() + cfg.guard_bits).max(fmt.eps_bits + 40 + delta as u32 * ceil_log2(reach + 1));
    let fine = scale + 8;

    // c_k = f^(k)(X_m)/k! · ulp^k · 2^(p-E), computed to 2^-fine.
    let shifts: Vec<i64> = (0..=delta as i64).map(|k| k * ulp + p - e_ref).collect();
    let max_shift = *shifts.iter().max().unwrap();
    let prec_f = (fine as i64 + max_shift.max(0)) as u32;
    let raw = f.taylor_coeffs(&sd.arg(xm), delta, prec_f)?;
    let mut rounded = Vec::with_capacity(delta + 1);
    let mut round_err = BigInt::zero();
    let reach_big = BigInt::from(reach);
    for (k, c) in raw.iter().enumerate() {
        let c = if negative { c.neg() } else { c.clone() };
        let c = c.mul_pow2(shifts[k]).with_prec(fine);
        let twice_mid = &c.lo + &c.hi;
        let ck = (twice_mid + (BigInt::one() << 8u32)).div_floor(&(BigInt::one() << 9u32));
        let at = &ck << 8u32;
        let e = (&at - &c.lo).abs().max((&c.hi - &at).abs());
        round_err += e * reach_big.pow(k as u32);
        rounded.push(ck);
    }

    // Exact values at x = 0..=δ, then the binomial basis.
    let values: Vec<BigInt> = (0..=delta as i64)
        .map(|x| {
            let t = BigInt::from(x - xm as i64);
            rounded.iter().rev().fold(BigInt::zero(), |acc, c| acc * &t + c)
        })
        .collect();
    let coeffs = big_newton(&values)
        .iter()
        .map(|c| MpInt::from_bigint(c, cfg.limbs))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| Error::Config(format!("{} limbs are too few for the polynomial coefficients", cfg.limbs)))?;

    // Lagrange remainder: sup|f^(δ+1)|/(δ+1)! · (reach·ulp)^(δ+1) · 2^(p-E).
    let k = delta + 1;
    let lag_shift = k as i64 * ulp + p - e_ref;
    let lag_prec = (fine as i64 + lag_shift.max(0) + 8) as u32;
    let bound = f.taylor_bound(k, &sd.arg(0), &sd.arg(sd.len - 1), lag_prec)?;
    let lag = Interval::new(bound.hi.clone(), bound.hi, lag_prec)
        .mul_int(&reach_big.pow(k as u32))
        .mul_pow2(lag_shift)
        .with_prec(fine);
    let total = round_err + lag.hi.max(BigInt::zero());
    Ok(TaylorApprox {
        poly: BinomialPoly { coeffs, scale },
        eps_approx: Dyadic::new(total, -(fine as i64)),
        ref_exponent: e_ref,
        negative,
        delta,
    })
}

/// Coefficients of `P_{t+i}` for every domain `i < τ`: entry `[i][j] = r_j(i)`.
///
/// Each packet `u` starts from a Toeplitz shift by `uν` and continues with
/// `ν - 1` tabulated steps; packets and coefficient streams run in parallel.
pub fn generate_packets(r_polys: &[BinomialPoly], tau: u64, nu: u64) -> Result<Vec<Vec<MpInt>>> {
    if nu == 0 || !tau.is_multiple_of(nu) {
        return Err(Error::Config(format!("packet size {nu} does not divide tau = {tau}")));
    }
    let mu = tau / nu;
    let streams = r_polys
        .par_iter()
        .map(|r| {
            (0..mu)
                .into_par_iter()
                .map(|u| {
                    let mut column = straightforward_shift(r, u * nu)?.coeffs;
                    let mut out = Vec::with_capacity(nu as usize);
                    out.push(column[0].clone());
                    for _ in 1..nu {
                        tabulated_shift_step(&mut column)?;
                        out.push(column[0].clone());
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()
                .map(|packets| packets.concat())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..tau as usize).map(|i| streams.iter().map(|s| s[i].clone()).collect()).collect())
}
