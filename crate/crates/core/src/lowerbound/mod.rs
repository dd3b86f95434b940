//! Lower bounds on `min {b - a·x mod 1 | x < N}` and the associated Boolean test.
//!
//! All four algorithms share the contract of [`SearchProblem`]: they return
//! `Failure` as soon as the bound drops below `eps`, and `Success` once enough
//! points have been placed without that happening.

mod lefevre;
mod regular;

pub use lefevre::{lefevre_lb, lefevre_lb_observed, lefevre_swap_lb, lefevre_swap_lb_observed};
pub use regular::{regular_lb, regular_lb_observed, regular_unrolled_lb, regular_unrolled_lb_observed};

use crate::error::{Error, Result};
use crate::fixedpoint::{DivisionMode, FracWidth, UFrac};

/// Inputs of one Boolean test, with all lengths expressed over `unit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SearchProblem {
    pub unit: u128,
    pub a: u128,
    pub b: u128,
    pub eps: u128,
    pub n: u64,
}

impl SearchProblem {
    pub fn new(a: UFrac, b: UFrac, eps: UFrac, n: u64) -> Result<Self> {
        let width = a.width();
        if b.width() != width || eps.width() != width {
            return Err(Error::Range("mixed fraction widths".into()));
        }
        Self::over_unit(width.unit(), a.raw() as u128, b.raw() as u128, eps.raw() as u128, n)
    }

    /// A problem over an arbitrary modulus, e.g. the denominator of exact rationals.
    pub fn over_unit(unit: u128, a: u128, b: u128, eps: u128, n: u64) -> Result<Self> {
        if unit < 2 {
            return Err(Error::Range(format!("unit {unit} too small")));
        }
        if a >= unit || b >= unit {
            return Err(Error::Range("a and b must lie in [0, 1)".into()));
        }
        if 2 * eps >= unit {
            return Err(Error::Range("eps must be below 1/2".into()));
        }
        if n == 0 {
            return Err(Error::Range("N must be at least 1".into()));
        }
        Ok(SearchProblem { unit, a, b, eps, n })
    }

    /// Handles `N = 1` and the constant sequence `a = 0`, where the minimum is `{b}`.
    fn trivial(&self) -> Option<SearchOutcome> {
        if self.n > 1 && self.a != 0 {
            return None;
        }
        let verdict = if self.b >= self.eps { Verdict::Success } else { Verdict::Failure };
        Some(SearchOutcome {
            verdict,
            d: self.b,
            iterations: 0,
            points_placed: self.n,
            terminated: self.a == 0,
            divisions: 0,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// No point falls within `eps` below `b`.
    Success,
    /// The bound fell below `eps`; the domain needs a finer look.
    Failure,
}

impl Verdict {
    pub fn is_success(self) -> bool {
        self == Verdict::Success
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub verdict: Verdict,
    /// Lower bound in units of the problem modulus.
    pub d: u128,
    pub iterations: u64,
    /// `u + v` when the loop stopped (saturating).
    pub points_placed: u64,
    /// The expansion of `a` ended before `N` points were reached.
    pub terminated: bool,
    /// Number of quotients computed.
    pub divisions: u64,
}

impl SearchOutcome {
    pub fn d_frac(&self, width: FracWidth) -> UFrac {
        UFrac::wrapping(self.d, width)
    }
}

/// Receives the branch outcomes of a run, one `iteration` call per loop body.
pub trait BranchObserver {
    fn iteration(&mut self) {}
    fn branch(&mut self, _site: usize, _taken: bool) {}
}

/// Observer that ignores everything.
pub struct NoTrace;

impl BranchObserver for NoTrace {}

/// A conditional in an algorithm's loop body and the instructions on each side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BranchSite {
    pub name: &'static str,
    pub n_then: u32,
    pub n_else: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Lefevre,
    LefevreSwap,
    Regular,
    RegularUnrolled,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::Lefevre, Algorithm::LefevreSwap, Algorithm::Regular, Algorithm::RegularUnrolled];

    pub fn run(self, prob: &SearchProblem, mode: DivisionMode) -> SearchOutcome {
        self.run_observed(prob, mode, &mut NoTrace)
    }

    pub fn run_observed<O: BranchObserver>(self, prob: &SearchProblem, mode: DivisionMode, obs: &mut O) -> SearchOutcome {
        match self {
            Algorithm::Lefevre => lefevre_lb_observed(prob, mode, obs),
            Algorithm::LefevreSwap => lefevre_swap_lb_observed(prob, mode, obs),
            Algorithm::Regular => regular_lb_observed(prob, mode, obs),
            Algorithm::RegularUnrolled => regular_unrolled_lb_observed(prob, mode, obs),
        }
    }

    /// Conditional sites inside the loop body, indexed as reported to observers.
    pub fn branch_sites(self) -> &'static [BranchSite] {
        match self {
            Algorithm::Lefevre => &[BranchSite { name: "d < p", n_then: 6, n_else: 8 }],
            Algorithm::LefevreSwap => &[
                BranchSite { name: "are_swapped", n_then: 2, n_else: 0 },
                BranchSite { name: "swap", n_then: 3, n_else: 0 },
            ],
            Algorithm::Regular => &[
                BranchSite { name: "p < q", n_then: 4, n_else: 4 },
                BranchSite { name: "d >= p", n_then: 1, n_else: 0 },
            ],
            Algorithm::RegularUnrolled => &[BranchSite { name: "d >= p", n_then: 1, n_else: 0 }],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lefevre => "lefevre",
            Algorithm::LefevreSwap => "lefevre-swap",
            Algorithm::Regular => "regular",
            Algorithm::RegularUnrolled => "regular-unrolled",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

#[inline]
fn sat_mul(k: u128, c: u64) -> u64 {
    k.saturating_mul(c as u128).min(u64::MAX as u128) as u64
}

/// Length of a chain of zero-quotient steps in Lefèvre's second branch that can
/// be applied at once: each step subtracts `p` from both `d` and `q` and adds
/// `v` to `u`, and the chain stops before `d < eps`, before `q <= p` and before
/// `u + v >= n`.
#[inline]
fn chain_len(d: u128, eps: u128, p: u128, q: u128, u: u64, v: u64, n: u64) -> u128 {
    let by_d = (d - eps) / p;
    let by_q = (q - 1) / p;
    let by_n = if u >= n || v == 0 { 0 } else { ((n - 1 - u) / v) as u128 };
    by_d.min(by_q).min(by_n)
}
