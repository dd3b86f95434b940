use super::{sat_mul, BranchObserver, NoTrace, SearchOutcome, SearchProblem, Verdict};
use crate::fixedpoint::DivisionMode;

// Here `u` counts intervals of length `q` and `v` those of length `p`, so that
// `u + v = q_i + q_{i-1}` after every full quotient.

fn outcome(verdict: Verdict, d: u128, iterations: u64, points: u64, terminated: bool, divisions: u64) -> SearchOutcome {
    SearchOutcome { verdict, d, iterations, points_placed: points, terminated, divisions }
}

fn final_verdict(d: u128, eps: u128) -> Verdict {
    if d > eps {
        Verdict::Success
    } else {
        Verdict::Failure
    }
}

pub fn regular_lb(prob: &SearchProblem, mode: DivisionMode) -> SearchOutcome {
    regular_lb_observed(prob, mode, &mut NoTrace)
}

/// Regular test: one complete continued-fraction quotient per iteration.
pub fn regular_lb_observed<O: BranchObserver>(prob: &SearchProblem, mode: DivisionMode, obs: &mut O) -> SearchOutcome {
    if let Some(out) = prob.trivial() {
        return out;
    }
    let (eps, n) = (prob.eps, prob.n);
    let (mut p, mut q, mut d) = (prob.a, prob.unit, prob.b);
    let (mut u, mut v) = (1u64, 0u64);
    let mut iterations = 0u64;
    if d < eps {
        return outcome(Verdict::Failure, d, 0, 1, false, 0);
    }
    loop {
        if p == 0 || q == 0 {
            // d is already reduced modulo the surviving length.
            return outcome(final_verdict(d, eps), d, iterations, u.saturating_add(v), true, iterations);
        }
        iterations += 1;
        obs.iteration();
        if p < q {
            obs.branch(0, true);
            let (k, r) = mode.divide(q, p);
            q = r;
            v = v.saturating_add(sat_mul(k, u));
            d %= p;
        } else {
            obs.branch(0, false);
            let (k, r) = mode.divide(p, q);
            p = r;
            u = u.saturating_add(sat_mul(k, v));
            let reduce = d >= p;
            obs.branch(1, reduce);
            if reduce {
                d = (d - p) % q;
            }
        }
        if u.saturating_add(v) >= n {
            return outcome(final_verdict(d, eps), d, iterations, u.saturating_add(v), false, iterations);
        }
    }
}

pub fn regular_unrolled_lb(prob: &SearchProblem, mode: DivisionMode) -> SearchOutcome {
    regular_unrolled_lb_observed(prob, mode, &mut NoTrace)
}

/// Regular test with two quotients per loop body and no parity branch.
///
/// `p < q` holds on entry of every body, so the first half always takes the
/// first branch of the plain version and the second half the other one.
pub fn regular_unrolled_lb_observed<O: BranchObserver>(
    prob: &SearchProblem,
    mode: DivisionMode,
    obs: &mut O,
) -> SearchOutcome {
    if let Some(out) = prob.trivial() {
        return out;
    }
    let (eps, n) = (prob.eps, prob.n);
    let (mut p, mut q, mut d) = (prob.a, prob.unit, prob.b);
    let (mut u, mut v) = (1u64, 0u64);
    let (mut iterations, mut divisions) = (0u64, 0u64);
    if d < eps {
        return outcome(Verdict::Failure, d, 0, 1, false, 0);
    }
    loop {
        if p == 0 {
            return outcome(final_verdict(d, eps), d, iterations, u.saturating_add(v), true, divisions);
        }
        iterations += 1;
        obs.iteration();
        let (k, r) = mode.divide(q, p);
        divisions += 1;
        q = r;
        v = v.saturating_add(sat_mul(k, u));
        d %= p;
        if u.saturating_add(v) >= n {
            return outcome(final_verdict(d, eps), d, iterations, u.saturating_add(v), false, divisions);
        }
        if q == 0 {
            return outcome(final_verdict(d, eps), d, iterations, u.saturating_add(v), true, divisions);
        }
        let (k, r) = mode.divide(p, q);
        divisions += 1;
        p = r;
        u = u.saturating_add(sat_mul(k, v));
        let reduce = d >= p;
        obs.branch(0, reduce);
        if reduce {
            d = (d - p) % q;
        }
        if u.saturating_add(v) >= n {
            return outcome(final_verdict(d, eps), d, iterations, u.saturating_add(v), false, divisions);
        }
    }
}
