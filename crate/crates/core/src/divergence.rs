//! Lockstep warp simulation of the lower-bound searches and the loop and
//! branch divergence metrics derived from it.

use std::collections::BTreeMap;

use crate::fixedpoint::DivisionMode;
use crate::lowerbound::{Algorithm, BranchObserver, SearchOutcome, SearchProblem};

pub const WARP_SIZE: usize = 32;

fn mean(l: &[u64]) -> f64 {
    l.iter().map(|&x| x as f64).sum::<f64>() / l.len() as f64
}

/// `max(ℓ) - mean(ℓ)`; 0 for an empty slice.
pub fn mdm(l: &[u64]) -> f64 {
    match l.iter().max() {
        Some(&m) => m as f64 - mean(l),
        None => 0.0,
    }
}

/// `1 - mean(ℓ)/max(ℓ)`; 0 when every count is zero or the slice is empty.
pub fn nmdm(l: &[u64]) -> f64 {
    match l.iter().max() {
        Some(&m) if m > 0 => 1.0 - mean(l) / m as f64,
        _ => 0.0,
    }
}

/// Instructions issued for one conditional: both sides when the lanes disagree.
pub fn branch_serialization_estimate(n_then: u64, n_else: u64, diverged: bool, taken: bool) -> u64 {
    if diverged {
        n_then + n_else
    } else if taken {
        n_then
    } else {
        n_else
    }
}

/// Branch events of one lane keyed by `(iteration, site, occurrence)`.
#[derive(Default)]
struct LaneRecorder {
    iteration: u64,
    seen: BTreeMap<(u64, usize), u32>,
    events: Vec<((u64, usize, u32), bool)>,
    counts: Vec<(u64, u64)>,
}

impl BranchObserver for LaneRecorder {
    fn iteration(&mut self) {
        self.iteration += 1;
    }

    fn branch(&mut self, site: usize, taken: bool) {
        let occ = self.seen.entry((self.iteration, site)).or_insert(0);
        self.events.push(((self.iteration, site, *occ), taken));
        *occ += 1;
        if self.counts.len() <= site {
            self.counts.resize(site + 1, (0, 0));
        }
        if taken {
            self.counts[site].0 += 1;
        } else {
            self.counts[site].1 += 1;
        }
    }
}

/// Per-lane record of one simulated warp.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpTrace {
    pub lane_iterations: Vec<u64>,
    /// Per lane and branch site: `(taken, not taken)`.
    pub lane_branch_counts: Vec<Vec<(u64, u64)>>,
    pub outcomes: Vec<SearchOutcome>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarpStats {
    pub mdm: f64,
    pub nmdm: f64,
    pub min_iter: u64,
    /// Also the number of serialized loop iterations.
    pub max_iter: u64,
    pub mean_iter: f64,
    pub branch_serialized_instructions: u64,
}

impl WarpStats {
    pub fn spread(&self) -> u64 {
        self.max_iter - self.min_iter
    }
}

/// Aggregates over a batch, mirroring the per-algorithm summary columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchSummary {
    pub warps: usize,
    pub problems: usize,
    pub min_iter: u64,
    pub max_iter: u64,
    pub mean_iter: f64,
    pub mean_nmdm: f64,
    pub branch_serialized_instructions: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WarpSimulation {
    pub algorithm: Algorithm,
    pub div_mode: DivisionMode,
    pub traces: Vec<WarpTrace>,
    pub warps: Vec<WarpStats>,
    pub summary: BatchSummary,
}

impl WarpSimulation {
    /// Fraction of warps whose iteration spread is at most `k`.
    pub fn spread_within(&self, k: u64) -> f64 {
        if self.warps.is_empty() {
            return 1.0;
        }
        self.warps.iter().filter(|w| w.spread() <= k).count() as f64 / self.warps.len() as f64
    }

    /// Per-warp rows: `warp_id, max_iter, mean_iter, mdm, nmdm`.
    pub fn csv_rows(&self) -> impl Iterator<Item = (usize, u64, f64, f64, f64)> + '_ {
        self.warps.iter().enumerate().map(|(i, w)| (i, w.max_iter, w.mean_iter, w.mdm, w.nmdm))
    }
}

fn simulate_warp(lanes: &[SearchProblem], algo: Algorithm, mode: DivisionMode) -> (WarpTrace, WarpStats) {
    let sites = algo.branch_sites();
    let mut recs: Vec<LaneRecorder> = Vec::with_capacity(lanes.len());
    let mut outcomes = Vec::with_capacity(lanes.len());
    for p in lanes {
        let mut r = LaneRecorder::default();
        outcomes.push(algo.run_observed(p, mode, &mut r));
        r.counts.resize(sites.len(), (0, 0));
        recs.push(r);
    }
    // Lockstep: lanes reaching the same conditional at the same step vote on it.
    let mut votes: BTreeMap<(u64, usize, u32), (bool, bool)> = BTreeMap::new();
    for r in &recs {
        for &(key, taken) in &r.events {
            let v = votes.entry(key).or_insert((false, false));
            if taken {
                v.0 = true;
            } else {
                v.1 = true;
            }
        }
    }
    let branch: u64 = votes
        .iter()
        .map(|(&(_, site, _), &(t, e))| {
            let s = sites[site];
            branch_serialization_estimate(s.n_then as u64, s.n_else as u64, t && e, t)
        })
        .sum();
    let iters: Vec<u64> = recs.iter().map(|r| r.iteration).collect();
    let stats = WarpStats {
        mdm: mdm(&iters),
        nmdm: nmdm(&iters),
        min_iter: iters.iter().copied().min().unwrap_or(0),
        max_iter: iters.iter().copied().max().unwrap_or(0),
        mean_iter: if iters.is_empty() { 0.0 } else { mean(&iters) },
        branch_serialized_instructions: branch,
    };
    let trace = WarpTrace { lane_iterations: iters, lane_branch_counts: recs.into_iter().map(|r| r.counts).collect(), outcomes };
    (trace, stats)
}

/// Groups `problems` into warps of `warp_size` lanes, in order, and runs each
/// lane's search while recording its loop and branch behaviour.
pub fn simulate_warps(problems: &[SearchProblem], algo: Algorithm, mode: DivisionMode, warp_size: usize) -> WarpSimulation {
    let warp_size = warp_size.max(1);
    let (traces, warps): (Vec<_>, Vec<_>) = problems.chunks(warp_size).map(|w| simulate_warp(w, algo, mode)).unzip();
    let all: Vec<u64> = traces.iter().flat_map(|t| t.lane_iterations.iter().copied()).collect();
    let summary = BatchSummary {
        warps: warps.len(),
        problems: problems.len(),
        min_iter: all.iter().copied().min().unwrap_or(0),
        max_iter: all.iter().copied().max().unwrap_or(0),
        mean_iter: if all.is_empty() { 0.0 } else { mean(&all) },
        mean_nmdm: if warps.is_empty() { 0.0 } else { warps.iter().map(|w| w.nmdm).sum::<f64>() / warps.len() as f64 },
        branch_serialized_instructions: warps.iter().map(|w| w.branch_serialized_instructions).sum(),
    };
    WarpSimulation { algorithm: algo, div_mode: mode, traces, warps, summary }
}
