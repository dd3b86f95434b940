//! Three-phase filtering: Boolean tests on domains, refined tests on
//! subdomains, then an exhaustive walk of what is left.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fixedpoint::{DivisionMode, FracWidth, MpInt};
use crate::fpmodel::{split_binade, DomainSplit, FpFormat, FpNumber};
use crate::function::Function;
use crate::interval::{shift_floor, Dyadic};
use crate::lowerbound::{Algorithm, SearchProblem};
use crate::oracle::{classify_decided, default_guard, Classification, HrCaseRecord};
use crate::polygen::{
    generate_packets, hierarchical_split, straightforward_shift, tabulated_shift_step, taylor_approx, BinomialPoly,
    PolyGenConfig, SuperDomain,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgorithmChoice {
    Lefevre,
    Regular,
    /// Chosen per interval from the filtering ratio of the previous one.
    Auto,
}

impl std::str::FromStr for AlgorithmChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lefevre" => Ok(AlgorithmChoice::Lefevre),
            "regular" => Ok(AlgorithmChoice::Regular),
            "auto" => Ok(AlgorithmChoice::Auto),
            _ => Err(Error::Config(format!("unknown algorithm `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseConfig {
    pub algorithm: AlgorithmChoice,
    pub div_mode: DivisionMode,
    /// Subdomains per failing domain in phase 2.
    pub phase2_split: u64,
    pub width: FracWidth,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    /// Phase-3 over phase-1 interval ratio above which `Auto` picks Lefèvre's test.
    pub select_threshold: f64,
    /// Polynomial generation; `polygen.n` is the phase-1 domain size.
    pub polygen: PolyGenConfig,
    /// Guard bits of the confirmation evaluations; `None` uses the oracle default.
    pub guard: Option<u32>,
    /// The Taylor error is kept below `ε·2^-approx_share_bits`.
    pub approx_share_bits: u32,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            algorithm: AlgorithmChoice::Regular,
            div_mode: DivisionMode::Hardware,
            phase2_split: 8,
            width: FracWidth::W64,
            workers: 0,
            select_threshold: 1e-3,
            polygen: PolyGenConfig::default(),
            guard: None,
            approx_share_bits: 3,
        }
    }
}

impl PhaseConfig {
    pub fn validate(&self, fmt: &FpFormat) -> Result<()> {
        self.polygen.validate()?;
        let s = self.phase2_split;
        if !(2..=64).contains(&s) || !s.is_power_of_two() || s > self.polygen.n {
            return Err(Error::Config(format!(
                "phase-2 split {s} must be a power of two in 2..=64 dividing the domain size {}",
                self.polygen.n
            )));
        }
        if !self.polygen.tau.is_power_of_two() {
            return Err(Error::Config(format!("tau = {} must be a power of two", self.polygen.tau)));
        }
        if fmt.eps_bits + 2 > self.width.bits() {
            return Err(Error::Config(format!("eps = 2^-{} is too fine for {}-bit words", fmt.eps_bits, self.width.bits())));
        }
        Ok(())
    }
}

/// What to search: one function over a list of binades (by exponent `e`,
/// the binade being `[2^(e-1), 2^e)`).
#[derive(Clone, Debug, PartialEq)]
pub struct SearchSpec {
    pub function: Function,
    pub fmt: FpFormat,
    pub binades: Vec<i32>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhaseCount {
    pub domains_in: u64,
    pub domains_out: u64,
    pub arguments_covered: u64,
    pub wall_ms: u64,
}

impl PhaseCount {
    fn merge(&mut self, o: &PhaseCount) {
        self.domains_in += o.domains_in;
        self.domains_out += o.domains_out;
        self.arguments_covered += o.arguments_covered;
        self.wall_ms += o.wall_ms;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntervalChoice {
    pub binade: i32,
    pub interval: u64,
    pub algorithm: Algorithm,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhaseStats {
    pub phase1: PhaseCount,
    pub phase2: PhaseCount,
    pub phase3: PhaseCount,
    /// Candidates checked by direct evaluation and the HR cases confirmed.
    pub confirm: PhaseCount,
    pub choices: Vec<IntervalChoice>,
    /// Intervals where no polynomial could be built and every argument was evaluated.
    pub fallback_intervals: u64,
    pub max_degree: usize,
}

impl PhaseStats {
    pub fn merge(&mut self, o: &PhaseStats) {
        self.phase1.merge(&o.phase1);
        self.phase2.merge(&o.phase2);
        self.phase3.merge(&o.phase3);
        self.confirm.merge(&o.confirm);
        self.choices.extend_from_slice(&o.choices);
        self.fallback_intervals += o.fallback_intervals;
        self.max_degree = self.max_degree.max(o.max_degree);
    }

    /// The same counts with every wall-clock time cleared.
    pub fn without_timing(&self) -> PhaseStats {
        let mut s = self.clone();
        for row in [&mut s.phase1, &mut s.phase2, &mut s.phase3, &mut s.confirm] {
            row.wall_ms = 0;
        }
        s
    }

    /// Rows of the per-phase table: name and counts.
    pub fn rows(&self) -> [(&'static str, PhaseCount); 4] {
        [("phase1", self.phase1), ("phase2", self.phase2), ("phase3", self.phase3), ("confirm", self.confirm)]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PipelineResult {
    pub records: Vec<HrCaseRecord>,
    pub stats: PhaseStats,
}

/// Lefèvre's test when the previous interval sent more than `threshold` of its
/// domains to phase 3, the regular test otherwise or when there is no history.
pub fn select_algorithm(prev: Option<&PhaseStats>, threshold: f64) -> Algorithm {
    match prev {
        Some(s) if s.phase1.domains_in > 0 => {
            let ratio = s.phase3.domains_in as f64 / s.phase1.domains_in as f64;
            if ratio >= threshold {
                Algorithm::Lefevre
            } else {
                Algorithm::Regular
            }
        }
        _ => Algorithm::Regular,
    }
}

/// A degree-1 Boolean test on polynomials `P(x) ≈ |f|·2^(p-E)` in the binomial basis.
#[derive(Clone, Copy, Debug)]
pub struct BooleanTest {
    pub fmt: FpFormat,
    pub width: FracWidth,
    pub algorithm: Algorithm,
    pub div_mode: DivisionMode,
}

fn binomial_big(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut r = BigInt::from(1);
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

fn ceil_shift(x: &BigInt, k: i64) -> BigInt {
    -shift_floor(&-x, k)
}

impl BooleanTest {
    fn eps_units(&self) -> u128 {
        1u128 << (self.width.bits() - self.fmt.eps_bits)
    }

    /// Builds `{b - a·x}` with `b` pre-shifted by `ε''` and threshold `2ε''`, or
    /// `None` when the domain cannot be certified (exponent change or `ε'' ≥ 1/4`).
    ///
    /// `approx` bounds `|P - |f|·2^(p-E)|` in units of `2^-scale`.
    pub fn problem(&self, poly: &BinomialPoly, approx: &BigInt, n: u64) -> Option<SearchProblem> {
        let f = poly.scale as i64;
        let r0 = poly.coeffs[0].to_bigint();
        let zero = MpInt::zero(poly.limbs());
        let r1m = poly.coeffs.get(1).unwrap_or(&zero);
        let r1 = r1m.to_bigint();
        let mut slack = approx.clone();
        for (j, c) in poly.coeffs.iter().enumerate().skip(2) {
            slack += c.to_bigint().abs() * binomial_big(n - 1, j as u64);
        }
        let end = &r0 + &r1 * BigInt::from(n - 1);
        let lo = r0.clone().min(end.clone()) - &slack;
        let hi = r0.max(end) + &slack;
        if !lo.is_positive() || lo.bits() != hi.bits() {
            return None;
        }
        let s = lo.bits() as i64 - f - self.fmt.p as i64;
        let sc = f + s;
        if sc < 0 {
            return None;
        }
        let w = self.width.bits() as i64;
        let a = r1m.neg().frac_floor(sc as u32, self.width).raw() as u128;
        let b = poly.coeffs[0].frac_floor(sc as u32, self.width).raw() as u128;
        let err = u128::try_from(ceil_shift(&slack, w - sc)).ok()?;
        let eps2 = self.eps_units().checked_add(err)?.checked_add(n as u128)?;
        let unit = self.width.unit();
        if eps2.checked_mul(4)? >= unit {
            return None;
        }
        SearchProblem::over_unit(unit, a, (b + eps2) % unit, 2 * eps2, n).ok()
    }

    /// True when the domain is certified free of HR cases.
    pub fn passes(&self, poly: &BinomialPoly, approx: &BigInt, n: u64) -> bool {
        match self.problem(poly, approx, n) {
            Some(prob) => self.algorithm.run(&prob, self.div_mode).verdict.is_success(),
            None => false,
        }
    }

    /// Offsets `x < n` where `P(x)` lies within the `ε'` window of a
    /// precision-`p` float, by tabulated differences (additions only).
    pub fn walk(&self, poly: &BinomialPoly, approx: &BigInt, n: u64) -> Result<Vec<u64>> {
        let f = poly.scale as i64;
        let w = self.width.bits() as i64;
        let unit = self.width.unit();
        let approx_mp = MpInt::from_bigint(approx, poly.limbs())?;
        let threshold = |s: i64| -> Option<u128> {
            let sc = f + s;
            let err = u128::try_from(ceil_shift(approx, w - sc)).ok()?;
            self.eps_units().checked_add(err)?.checked_add(2)
        };
        let near = |v: &MpInt, sc: i64, thr: u128| -> bool {
            if sc < 0 {
                return true;
            }
            let frac = v.frac_floor(sc as u32, self.width).raw() as u128;
            frac.min(unit - frac) < thr
        };
        let mut column = poly.coeffs.clone();
        let mut out = Vec::new();
        for x in 0..n {
            let v = &column[0];
            let bl = v.bit_len() as i64;
            let hit = if v.is_negative() || bl == 0 {
                true
            } else {
                let s = bl - f - self.fmt.p as i64;
                let mut shifts = vec![s];
                if v.checked_sub(&approx_mp)?.bit_len() as i64 != bl {
                    shifts.push(s - 1);
                }
                if v.checked_add(&approx_mp)?.bit_len() as i64 != bl {
                    shifts.push(s + 1);
                }
                shifts.into_iter().any(|s| threshold(s).is_none_or(|thr| near(v, f + s, thr)))
            };
            if hit {
                out.push(x);
            }
            if x + 1 < n {
                tabulated_shift_step(&mut column)?;
            }
        }
        Ok(out)
    }
}

/// A domain with its polynomial and approximation bound.
#[derive(Clone, Debug)]
pub struct DomainPoly {
    pub domain_id: u64,
    pub poly: BinomialPoly,
    /// Bound of the approximation error in units of `2^-poly.scale`.
    pub approx: BigInt,
}

/// Indices (into `domains`) of the domains whose Boolean test fails.
pub fn phase1(domains: &[DomainPoly], n: u64, test: &BooleanTest) -> Vec<usize> {
    domains
        .par_iter()
        .enumerate()
        .filter(|(_, d)| !test.passes(&d.poly, &d.approx, n))
        .map(|(i, _)| i)
        .collect()
}

/// A failing part of a domain: polynomial shifted to its first argument.
#[derive(Clone, Debug)]
pub struct SubDomain {
    pub domain_id: u64,
    /// Offset of the first argument inside the domain.
    pub offset: u64,
    pub len: u64,
    pub poly: BinomialPoly,
    pub approx: BigInt,
}

/// Splits each failing domain into `split` parts and re-runs the test on each.
pub fn phase2(failing: &[&DomainPoly], n: u64, split: u64, test: &BooleanTest) -> Result<Vec<SubDomain>> {
    let len = n / split;
    let parts = failing
        .par_iter()
        .map(|d| {
            let mut out = Vec::new();
            for k in 0..split {
                let poly = straightforward_shift(&d.poly, k * len)?;
                if !test.passes(&poly, &d.approx, len) {
                    out.push(SubDomain { domain_id: d.domain_id, offset: k * len, len, poly, approx: d.approx.clone() });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.concat())
}

/// Walks every failing subdomain; returns `(domain_id, offset in domain)` of each candidate.
pub fn phase3_candidates(subs: &[SubDomain], test: &BooleanTest) -> Result<Vec<(u64, u64)>> {
    let found = subs
        .par_iter()
        .map(|s| Ok(test.walk(&s.poly, &s.approx, s.len)?.into_iter().map(|x| (s.domain_id, s.offset + x)).collect()))
        .collect::<Result<Vec<Vec<_>>>>()?;
    Ok(found.concat())
}

/// Candidate arguments and the run's function, turned into confirmed records.
fn confirm(
    f: &Function,
    fmt: &FpFormat,
    split: &DomainSplit,
    cands: &[(u64, u64)],
    guard: u32,
    width: FracWidth,
) -> Result<Vec<HrCaseRecord>> {
    let cap = (16 * guard).max(1024);
    let out = cands
        .par_iter()
        .map(|&(dom, x)| {
            let arg = FpNumber::new((1u64 << (split.p - 1)) + (dom << split.log_n) + x, split.exponent, split.p)?;
            Ok(match classify_decided(f, &arg, fmt, guard, width, cap)? {
                Classification::Hr { distance } => Some(HrCaseRecord { argument: arg, distance, domain_id: dom }),
                _ => None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(out.into_iter().flatten().collect())
}

fn ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

fn overflow_as_config(e: Error) -> Error {
    match e {
        Error::Overflow(what) => Error::Config(format!("difference registers overflow ({what}); raise the limb count")),
        e => e,
    }
}

/// Polynomials `P_{t+i}` of every domain of one interval, or `None` when `f`
/// changes exponent by more than one (or vanishes) inside it.
fn interval_polys(
    f: &Function,
    fmt: &FpFormat,
    split: &DomainSplit,
    first: u64,
    gen: &PolyGenConfig,
    width: FracWidth,
    share: u32,
) -> Result<Option<(Vec<DomainPoly>, usize)>> {
    let sd = SuperDomain { start: split.domain(first)?.start, len: gen.tau * gen.n };
    let target = Dyadic::new(1, -((fmt.eps_bits + share) as i64));
    let t = match taylor_approx(f, &sd, fmt, gen, width, &target) {
        Ok(t) => t,
        Err(Error::Domain(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let scale = t.poly.scale as i64;
    let approx = t.eps_approx.scaled_ceil(scale);
    let r = hierarchical_split(&t.poly, gen.n).map_err(overflow_as_config)?;
    let coeffs = generate_packets(&r, gen.tau, gen.nu).map_err(overflow_as_config)?;
    let polys = coeffs
        .into_iter()
        .enumerate()
        .map(|(i, c)| DomainPoly { domain_id: first + i as u64, poly: BinomialPoly { coeffs: c, scale: t.poly.scale }, approx: approx.clone() })
        .collect();
    Ok(Some((polys, t.delta)))
}

fn run_interval(
    spec: &SearchSpec,
    cfg: &PhaseConfig,
    split: &DomainSplit,
    gen: &PolyGenConfig,
    interval: u64,
    algorithm: Algorithm,
) -> Result<(Vec<HrCaseRecord>, PhaseStats)> {
    let (f, fmt) = (&spec.function, &spec.fmt);
    let n = gen.n;
    let first = interval * gen.tau;
    let test = BooleanTest { fmt: *fmt, width: cfg.width, algorithm, div_mode: cfg.div_mode };
    let guard = cfg.guard.unwrap_or_else(|| default_guard(fmt));
    let mut stats = PhaseStats {
        choices: vec![IntervalChoice { binade: split.exponent, interval, algorithm }],
        ..Default::default()
    };
    let t = Instant::now();
    let polys = interval_polys(f, fmt, split, first, gen, cfg.width, cfg.approx_share_bits)?;
    let Some((polys, degree)) = polys else {
        // No polynomial: every domain fails and every argument is evaluated directly.
        let tau = gen.tau;
        let subs = tau * cfg.phase2_split;
        stats.fallback_intervals = 1;
        stats.phase1 = PhaseCount { domains_in: tau, domains_out: tau, arguments_covered: tau * n, wall_ms: ms(t) };
        stats.phase2 = PhaseCount { domains_in: subs, domains_out: subs, arguments_covered: tau * n, wall_ms: 0 };
        let cands: Vec<(u64, u64)> = (first..first + tau).flat_map(|d| (0..n).map(move |x| (d, x))).collect();
        stats.phase3 = PhaseCount { domains_in: subs, domains_out: subs, arguments_covered: tau * n, wall_ms: 0 };
        let t = Instant::now();
        let records = confirm(f, fmt, split, &cands, guard, cfg.width)?;
        stats.confirm = PhaseCount { domains_in: cands.len() as u64, domains_out: records.len() as u64, arguments_covered: cands.len() as u64, wall_ms: ms(t) };
        return Ok((records, stats));
    };
    stats.max_degree = degree;

    let failing = phase1(&polys, n, &test);
    stats.phase1 = PhaseCount {
        domains_in: polys.len() as u64,
        domains_out: failing.len() as u64,
        arguments_covered: polys.len() as u64 * n,
        wall_ms: ms(t),
    };

    let t = Instant::now();
    let failing: Vec<&DomainPoly> = failing.iter().map(|&i| &polys[i]).collect();
    let subs = phase2(&failing, n, cfg.phase2_split, &test).map_err(overflow_as_config)?;
    let sub_len = n / cfg.phase2_split;
    stats.phase2 = PhaseCount {
        domains_in: failing.len() as u64 * cfg.phase2_split,
        domains_out: subs.len() as u64,
        arguments_covered: failing.len() as u64 * n,
        wall_ms: ms(t),
    };

    let t = Instant::now();
    let cands = phase3_candidates(&subs, &test).map_err(overflow_as_config)?;
    let mut hit_subs: Vec<(u64, u64)> = cands.iter().map(|&(d, x)| (d, x / sub_len)).collect();
    hit_subs.dedup();
    stats.phase3 = PhaseCount {
        domains_in: subs.len() as u64,
        domains_out: hit_subs.len() as u64,
        arguments_covered: subs.len() as u64 * sub_len,
        wall_ms: ms(t),
    };

    let t = Instant::now();
    let records = confirm(f, fmt, split, &cands, guard, cfg.width)?;
    stats.confirm = PhaseCount {
        domains_in: cands.len() as u64,
        domains_out: records.len() as u64,
        arguments_covered: cands.len() as u64,
        wall_ms: ms(t),
    };
    Ok((records, stats))
}

/// Polygen configuration for one binade: `τ` clamped to the number of domains.
fn binade_polygen(cfg: &PhaseConfig, split: &DomainSplit) -> PolyGenConfig {
    cfg.polygen.with_tau(cfg.polygen.tau.min(split.count()))
}

/// Runs polygen and the three phases over every binade of `spec`.
///
/// HR cases come out in ascending argument order, identical for any worker count.
pub fn run_pipeline(spec: &SearchSpec, cfg: &PhaseConfig) -> Result<PipelineResult> {
    cfg.validate(&spec.fmt)?;
    with_workers(cfg.workers, || {
        let mut result = PipelineResult::default();
        let mut prev: Option<PhaseStats> = None;
        let mut binades = spec.binades.clone();
        binades.sort_unstable();
        binades.dedup();
        for &e in &binades {
            let split = split_binade(e, &spec.fmt, cfg.polygen.n)?;
            let gen = binade_polygen(cfg, &split);
            for interval in 0..split.count() / gen.tau {
                let algorithm = match cfg.algorithm {
                    AlgorithmChoice::Lefevre => Algorithm::Lefevre,
                    AlgorithmChoice::Regular => Algorithm::Regular,
                    AlgorithmChoice::Auto => select_algorithm(prev.as_ref(), cfg.select_threshold),
                };
                let (records, stats) = run_interval(spec, cfg, &split, &gen, interval, algorithm)?;
                result.records.extend(records);
                result.stats.merge(&stats);
                prev = Some(stats);
            }
        }
        result.records.sort_by_key(|r| r.argument);
        Ok(result)
    })
}

/// Runs `job` on a pool of `workers` threads, or on the global pool for 0.
pub fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        return job();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(job)
}

/// The Boolean-test problems of `count` consecutive domains of one binade,
/// starting at domain `start`, in domain order. Domains that cannot be
/// certified are skipped.
pub fn domain_problems(
    f: &Function,
    fmt: &FpFormat,
    binade: i32,
    cfg: &PhaseConfig,
    start: u64,
    count: u64,
) -> Result<Vec<SearchProblem>> {
    cfg.validate(fmt)?;
    let split = split_binade(binade, fmt, cfg.polygen.n)?;
    if start + count > split.count() {
        return Err(Error::Config(format!("{count} domains from {start} exceed the {} of the binade", split.count())));
    }
    let gen = binade_polygen(cfg, &split);
    let test = BooleanTest { fmt: *fmt, width: cfg.width, algorithm: Algorithm::Regular, div_mode: cfg.div_mode };
    let mut out = Vec::new();
    let first_interval = start / gen.tau;
    let last_interval = (start + count - 1) / gen.tau;
    for interval in first_interval..=last_interval {
        let first = interval * gen.tau;
        let Some((polys, _)) = interval_polys(f, fmt, &split, first, &gen, cfg.width, cfg.approx_share_bits)? else {
            continue;
        };
        for d in polys.iter().filter(|d| d.domain_id >= start && d.domain_id < start + count) {
            if let Some(p) = test.problem(&d.poly, &d.approx, gen.n) {
                out.push(p);
            }
        }
    }
    Ok(out)
}
