//! Independent reference computations used to check the fast paths.

use std::ops::Range;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fixedpoint::{FracWidth, UFrac};
use crate::fpmodel::{DomainSplit, FpFormat, FpNumber};
use crate::function::Function;
use crate::interval::Dyadic;
use crate::lowerbound::SearchProblem;

/// Largest `N` accepted by the brute-force minimum.
pub const BRUTE_LIMIT: u64 = 1 << 26;

/// `min {b - a·x mod 1 | x < N}` and its first minimiser, by direct enumeration.
pub fn brute_min(prob: &SearchProblem) -> Result<(u128, u64)> {
    if prob.n > BRUTE_LIMIT {
        return Err(Error::Range(format!("N = {} exceeds the brute-force limit 2^26", prob.n)));
    }
    let unit = prob.unit;
    let (mut best, mut arg) = (prob.b, 0u64);
    let mut point = 0u128;
    for x in 1..prob.n {
        point += prob.a;
        if point >= unit {
            point -= unit;
        }
        let v = if prob.b >= point { prob.b - point } else { prob.b + unit - point };
        if v < best {
            best = v;
            arg = x;
        }
    }
    Ok((best, arg))
}

/// Partial quotients of `num / den` by Euclid's algorithm.
pub fn cf_quotients_ref(num: u128, den: u128) -> Vec<u128> {
    let (mut a, mut b) = (den, num);
    let mut out = Vec::new();
    while b != 0 {
        out.push(a / b);
        (a, b) = (b, a % b);
    }
    out
}


/// An argument whose function value lies within `ε` of a precision-`p` float.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HrCaseRecord {
    pub argument: FpNumber,
    /// Certified lower bound of `dist_p(f(X))`, truncated to the word width.
    pub distance: UFrac,
    pub domain_id: u64,
}

/// Outcome of evaluating one argument at a given guard precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Hr { distance: UFrac },
    NotHr,
    Undecided,
    /// `f(X) = 0` exactly; such arguments have no exponent and are skipped.
    Zero,
}

/// Default guard precision `2(p + p') + 16`.
pub fn default_guard(fmt: &FpFormat) -> u32 {
    2 * (fmt.p + fmt.eps_bits) + 16
}

/// Range of `|y cmod 1|` for `y ∈ [a, b]` when `b - a < 1/2`.
fn dist_range(a: &Dyadic, b: &Dyadic) -> (Dyadic, Dyadic) {
    let half = Dyadic::new(1, -1);
    let dist = |y: &Dyadic| {
        let n = Dyadic::new(y.add(&half).scaled_floor(0), 0);
        let d = y.sub(&n);
        if d.is_negative() {
            d.neg()
        } else {
            d
        }
    };
    let (da, db) = (dist(a), dist(b));
    let fa = a.scaled_floor(0);
    let fb = b.scaled_floor(0);
    let (lo, hi) = if da.sub(&db).is_negative() { (da.clone(), db.clone()) } else { (db.clone(), da.clone()) };
    // An integer inside (a, b] pulls the minimum to 0; a half-integer pushes the maximum to 1/2.
    let integer_inside = fb > fa || a.sub(&Dyadic::new(fa.clone(), 0)).is_zero();
    let half_inside = a.add(&half).scaled_floor(0) != b.add(&half).scaled_floor(0);
    let lo = if integer_inside { Dyadic::zero() } else { lo };
    let hi = if half_inside { half } else { hi };
    (lo, hi)
}

/// Evaluates `f(X)` with `guard` bits beyond the target precision and decides
/// whether `X` is an HR case.
pub fn classify(f: &Function, x: &FpNumber, fmt: &FpFormat, guard: u32, width: FracWidth) -> Result<Classification> {
    let Some(v) = f.eval_rel(&x.to_dyadic(), fmt.p + guard + 2)? else {
        return Ok(Classification::Zero);
    };
    let v = v.abs();
    let (lo, hi) = (v.lo_dyadic(), v.hi_dyadic());
    if lo.is_zero() {
        return Ok(Classification::Undecided);
    }
    let e_lo = lo.exponent().expect("non-zero");
    let e_hi = hi.exponent().expect("non-zero");
    // Split the enclosure at the powers of two it crosses.
    let mut pieces = Vec::new();
    let mut start = lo.clone();
    for e in e_lo..e_hi {
        pieces.push((start.clone(), Dyadic::new(1, e), e));
        start = Dyadic::new(1, e);
    }
    pieces.push((start, hi.clone(), e_hi));

    let eps = fmt.eps_dyadic();
    let (mut all_below, mut all_above) = (true, true);
    let mut min_lo: Option<Dyadic> = None;
    for (a, b, e) in pieces {
        let shift = fmt.p as i64 - e;
        let (dlo, dhi) = dist_range(&a.mul_pow2(shift), &b.mul_pow2(shift));
        all_below &= dhi.sub(&eps).is_negative();
        all_above &= !dlo.sub(&eps).is_negative();
        if min_lo.as_ref().is_none_or(|m| dlo.sub(m).is_negative()) {
            min_lo = Some(dlo);
        }
    }
    Ok(if all_below {
        let d = min_lo.expect("one piece").scaled_floor(width.bits() as i64);
        Classification::Hr { distance: UFrac::wrapping(d.try_into().expect("below 1/2"), width) }
    } else if all_above {
        Classification::NotHr
    } else {
        Classification::Undecided
    })
}

/// Classifies with guard `guard`, doubling it until decided or past `cap` bits.
pub fn classify_decided(f: &Function, x: &FpNumber, fmt: &FpFormat, guard: u32, width: FracWidth, cap: u32) -> Result<Classification> {
    let mut g = guard;
    loop {
        match classify(f, x, fmt, g, width)? {
            Classification::Undecided if g < cap => g = (2 * g).min(cap),
            Classification::Undecided => return Err(Error::Undecided(cap)),
            c => return Ok(c),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleReport {
    /// Decided HR cases in ascending argument order.
    pub records: Vec<HrCaseRecord>,
    /// Arguments the guard precision could not decide.
    pub undecided: Vec<FpNumber>,
}

/// Largest number of arguments the exhaustive search accepts.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 22;

/// Evaluates `f` at every argument of the given domains of `split`.
pub fn exhaustive_hr_search(
    f: &Function,
    split: &DomainSplit,
    domains: Range<u64>,
    fmt: &FpFormat,
    guard: u32,
    width: FracWidth,
) -> Result<OracleReport> {
    if split.p != fmt.p {
        return Err(Error::Config("split precision differs from the format".into()));
    }
    if domains.end > split.count() || domains.start > domains.end {
        return Err(Error::Range(format!("domain range {domains:?} outside 0..{}", split.count())));
    }
    let count = (domains.end - domains.start) << split.log_n;
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::Range(format!("{count} arguments exceed the exhaustive limit 2^22")));
    }
    let first = (1u64 << (split.p - 1)) + (domains.start << split.log_n);
    let results = (0..count)
        .into_par_iter()
        .map(|k| {
            let x = FpNumber::new(first + k, split.exponent, split.p)?;
            let c = classify(f, &x, fmt, guard, width)?;
            Ok((x, c))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = OracleReport::default();
    for (x, c) in results {
        match c {
            Classification::Hr { distance } => {
                let domain_id = (x.significand - (1 << (split.p - 1))) >> split.log_n;
                report.records.push(HrCaseRecord { argument: x, distance, domain_id });
            }
            Classification::Undecided => report.undecided.push(x),
            Classification::NotHr | Classification::Zero => {}
        }
    }
    Ok(report)
}

/// Distance interval `[lo, hi]` of one argument at a guard precision.
fn dist_enclosure(f: &Function, x: &FpNumber, fmt: &FpFormat, guard: u32) -> Result<(Dyadic, Dyadic)> {
    let v = f
        .eval_rel(&x.to_dyadic(), fmt.p + guard + 2)?
        .ok_or_else(|| Error::Domain("f vanishes at a recorded argument".into()))?
        .abs();
    let (lo, hi) = (v.lo_dyadic(), v.hi_dyadic());
    let e_lo = lo.exponent().ok_or(Error::Undecided(guard))?;
    let e_hi = hi.exponent().expect("non-zero");
    if e_lo != e_hi {
        return Ok((Dyadic::zero(), Dyadic::new(1, -1)));
    }
    let shift = fmt.p as i64 - e_lo;
    Ok(dist_range(&lo.mul_pow2(shift), &hi.mul_pow2(shift)))
}

/// Largest guard used by [`ziv_refine`].
pub const ZIV_GUARD_CAP: u32 = 1 << 12;

/// Raises the guard precision until one record is strictly the hardest to
/// round, and returns it.
pub fn ziv_refine(records: &[HrCaseRecord], f: &Function, fmt: &FpFormat) -> Result<Vec<HrCaseRecord>> {
    if records.len() <= 1 {
        return Ok(records.to_vec());
    }
    let mut guard = default_guard(fmt);
    loop {
        let encl = records.iter().map(|r| dist_enclosure(f, &r.argument, fmt, guard)).collect::<Result<Vec<_>>>()?;
        let best = (0..records.len())
            .min_by(|&i, &j| encl[i].1.sub(&encl[j].1).mant.cmp(&BigInt::zero()))
            .expect("non-empty");
        let separated = encl.iter().enumerate().all(|(i, (lo, _))| i == best || encl[best].1.sub(lo).mant.is_negative());
        if separated {
            return Ok(vec![records[best]]);
        }
        if guard >= ZIV_GUARD_CAP {
            return Err(Error::Undecided(guard));
        }
        guard *= 2;
    }
}
