use super::{chain_len, sat_mul, BranchObserver, NoTrace, SearchOutcome, SearchProblem, Verdict};
use crate::fixedpoint::DivisionMode;

struct Run {
    iterations: u64,
    divisions: u64,
}

impl Run {
    fn finish(&self, verdict: Verdict, d: u128, points: u64, terminated: bool) -> SearchOutcome {
        SearchOutcome {
            verdict,
            d,
            iterations: self.iterations,
            points_placed: points,
            terminated,
            divisions: self.divisions,
        }
    }

    /// The whole lattice of spacing `g` is placed: the exact minimum is `d mod g`.
    fn terminate(&self, d: u128, g: u128, eps: u128, points: u64) -> SearchOutcome {
        let d = d % g;
        let verdict = if d >= eps { Verdict::Success } else { Verdict::Failure };
        self.finish(verdict, d, points, true)
    }
}

/// Point count at which a batch of `k` steps of size `step` starting from `base`
/// first reaches `n`. The configurations in between are valid, so the count
/// reported on success stops there instead of at the end of the quotient.
fn first_reach(base: u64, step: u64, n: u64) -> u64 {
    if base >= n || step == 0 {
        return base;
    }
    base.saturating_add((n - base).div_ceil(step).saturating_mul(step))
}

pub fn lefevre_lb(prob: &SearchProblem, mode: DivisionMode) -> SearchOutcome {
    lefevre_lb_observed(prob, mode, &mut NoTrace)
}

/// Lefèvre's test. `u` counts intervals of length `p`, `v` those of length `q`.
pub fn lefevre_lb_observed<O: BranchObserver>(prob: &SearchProblem, mode: DivisionMode, obs: &mut O) -> SearchOutcome {
    if let Some(out) = prob.trivial() {
        return out;
    }
    let (eps, n) = (prob.eps, prob.n);
    let (mut p, mut q, mut d) = (prob.a, prob.unit - prob.a, prob.b);
    let (mut u, mut v) = (1u64, 1u64);
    let mut run = Run { iterations: 0, divisions: 0 };
    if d < eps {
        return run.finish(Verdict::Failure, d, 1, false);
    }
    loop {
        if p == 0 || q == 0 {
            return run.terminate(d, p.max(q), eps, u.saturating_add(v));
        }
        run.iterations += 1;
        obs.iteration();
        if d < p {
            obs.branch(0, true);
            let (k, r) = mode.divide(q, p);
            run.divisions += 1;
            q = r;
            let before = u.saturating_add(v);
            u = u.saturating_add(sat_mul(k, v));
            if u.saturating_add(v) >= n {
                return run.finish(Verdict::Success, d, first_reach(before, v, n), false);
            }
            p -= q;
            v = v.saturating_add(u);
        } else {
            obs.branch(0, false);
            if mode.batches_chains() {
                let m = chain_len(d, eps, p, q, u, v, n);
                if m > 1 {
                    let skip = (m - 1) * p;
                    d -= skip;
                    q -= skip;
                    u = u.saturating_add(sat_mul(m - 1, v));
                }
            }
            d -= p;
            if d < eps {
                return run.finish(Verdict::Failure, d, u.saturating_add(v), false);
            }
            let (k, r) = mode.divide(p, q);
            run.divisions += 1;
            p = r;
            let before = u.saturating_add(v);
            v = v.saturating_add(sat_mul(k, u));
            if u.saturating_add(v) >= n {
                return run.finish(Verdict::Success, d, first_reach(before, u, n), false);
            }
            q -= p;
            u = u.saturating_add(v);
        }
    }
}

pub fn lefevre_swap_lb(prob: &SearchProblem, mode: DivisionMode) -> SearchOutcome {
    lefevre_swap_lb_observed(prob, mode, &mut NoTrace)
}

/// Lefèvre's test with the two branches merged by swapping `(p, q)` and `(u, v)`.
///
/// While swapped, `q` holds the length that the plain version calls `p`, so the
/// distance is reduced by `q` and the next swap compares `d` against `q`.
pub fn lefevre_swap_lb_observed<O: BranchObserver>(
    prob: &SearchProblem,
    mode: DivisionMode,
    obs: &mut O,
) -> SearchOutcome {
    if let Some(out) = prob.trivial() {
        return out;
    }
    let (eps, n) = (prob.eps, prob.n);
    let (mut p, mut q, mut d) = (prob.a, prob.unit - prob.a, prob.b);
    let (mut u, mut v) = (1u64, 1u64);
    let mut run = Run { iterations: 0, divisions: 0 };
    if d < eps {
        return run.finish(Verdict::Failure, d, 1, false);
    }
    let mut swapped = false;
    if d >= p {
        std::mem::swap(&mut p, &mut q);
        std::mem::swap(&mut u, &mut v);
        swapped = true;
    }
    loop {
        if p == 0 || q == 0 {
            return run.terminate(d, p.max(q), eps, u.saturating_add(v));
        }
        run.iterations += 1;
        obs.iteration();
        obs.branch(0, swapped);
        if swapped {
            if mode.batches_chains() {
                let m = chain_len(d, eps, q, p, v, u, n);
                if m > 1 {
                    let skip = (m - 1) * q;
                    d -= skip;
                    p -= skip;
                    v = v.saturating_add(sat_mul(m - 1, u));
                }
            }
            d -= q;
            if d < eps {
                return run.finish(Verdict::Failure, d, u.saturating_add(v), false);
            }
        }
        let (k, r) = mode.divide(q, p);
        run.divisions += 1;
        q = r;
        let before = u.saturating_add(v);
        u = u.saturating_add(sat_mul(k, v));
        if u.saturating_add(v) >= n {
            return run.finish(Verdict::Success, d, first_reach(before, v, n), false);
        }
        p -= q;
        v = v.saturating_add(u);
        let next_p = if swapped { q } else { p };
        let toggle = swapped ^ (d >= next_p);
        obs.branch(1, toggle);
        if toggle {
            std::mem::swap(&mut p, &mut q);
            std::mem::swap(&mut u, &mut v);
            swapped = !swapped;
        }
    }
}
