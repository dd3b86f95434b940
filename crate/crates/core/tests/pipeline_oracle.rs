use hrsearch::fixedpoint::{DivisionMode, FracWidth};
use hrsearch::fpmodel::{split_binade, FpFormat};
use hrsearch::function::{Function, Polynomial};
use hrsearch::oracle::{default_guard, exhaustive_hr_search, HrCaseRecord};
use hrsearch::pipeline::{run_pipeline, AlgorithmChoice, PhaseConfig, SearchSpec};
use hrsearch::polygen::PolyGenConfig;

fn oracle(f: &Function, fmt: &FpFormat, binades: &[i32], n: u64) -> Vec<HrCaseRecord> {
    let mut out = Vec::new();
    for &e in binades {
        let split = split_binade(e, fmt, n).unwrap();
        let rep = exhaustive_hr_search(f, &split, 0..split.count(), fmt, default_guard(fmt), FracWidth::W64).unwrap();
        assert!(rep.undecided.is_empty(), "{f} e={e}: undecided {:?}", rep.undecided);
        out.extend(rep.records);
    }
    out
}

fn config(n: u64, algorithm: AlgorithmChoice, div_mode: DivisionMode, split: u64) -> PhaseConfig {
    PhaseConfig {
        algorithm,
        div_mode,
        phase2_split: split,
        polygen: PolyGenConfig { n, ..PolyGenConfig::default() },
        ..PhaseConfig::default()
    }
}

fn check(f: Function, p: u32, eps_bits: u32, binades: &[i32], n: u64, split: u64) {
    let fmt = FpFormat::new(p, eps_bits).unwrap();
    let want = oracle(&f, &fmt, binades, n);
    assert!(!want.is_empty(), "{f}: no HR cases to compare");
    let spec = SearchSpec { function: f.clone(), fmt, binades: binades.to_vec() };
    for algo in [AlgorithmChoice::Regular, AlgorithmChoice::Lefevre, AlgorithmChoice::Auto] {
        for mode in [DivisionMode::Subtractive, DivisionMode::Hardware, DivisionMode::Hybrid] {
            let got = run_pipeline(&spec, &config(n, algo, mode, split)).unwrap();
            assert_eq!(got.records, want, "{f} {algo:?} {mode:?}");
            let s = &got.stats;
            assert!(s.phase1.domains_out <= s.phase1.domains_in);
            assert!(s.phase2.domains_out <= s.phase2.domains_in);
            assert_eq!(s.phase2.domains_in, s.phase1.domains_out * split);
            assert_eq!(s.phase3.domains_in, s.phase2.domains_out);
        }
    }
}

#[test]
fn exp_p13_matches_exhaustive_search() {
    check(Function::Exp, 13, 8, &[1], 4, 2);
}

#[test]
fn exp_p16_two_binades_matches_exhaustive_search() {
    check(Function::Exp, 16, 10, &[1, 2], 8, 2);
}

#[test]
fn log_across_one_matches_exhaustive_search() {
    check(Function::Log, 13, 8, &[1, 2], 8, 4);
}

#[test]
fn exp2_matches_exhaustive_search() {
    check(Function::Exp2, 14, 9, &[-1, 0, 1], 16, 8);
}

#[test]
fn polynomial_matches_exhaustive_search() {
    let f = Function::Poly(Polynomial::parse("1/3 5/7 -1/11 1/13").unwrap());
    check(f, 14, 9, &[1], 16, 4);
}

#[test]
fn filtering_removes_most_domains() {
    let fmt = FpFormat::new(20, 8).unwrap();
    let spec = SearchSpec { function: Function::Exp, fmt, binades: vec![1] };
    let run = |algo| run_pipeline(&spec, &config(1 << 4, algo, DivisionMode::Hardware, 8)).unwrap();
    let lef = run(AlgorithmChoice::Lefevre);
    let reg = run(AlgorithmChoice::Regular);
    assert_eq!(lef.records, reg.records);
    for s in [&lef.stats, &reg.stats] {
        assert_eq!(s.phase1.domains_in, 1 << 15);
        assert!(s.phase1.domains_out * 2 < s.phase1.domains_in, "{:?}", s.phase1);
        assert!(s.phase3.domains_in < s.phase2.domains_in, "{:?}", s.phase2);
    }
    // The regular test covers more points per domain, so it filters less.
    assert!(lef.stats.phase1.domains_out * 4 < lef.stats.phase1.domains_in, "{:?}", lef.stats.phase1);
    assert!(reg.stats.phase1.domains_out > lef.stats.phase1.domains_out);
}

#[test]
fn worker_count_does_not_change_output() {
    let fmt = FpFormat::new(16, 10).unwrap();
    let spec = SearchSpec { function: Function::Exp, fmt, binades: vec![1] };
    let mut cfg = config(8, AlgorithmChoice::Auto, DivisionMode::Hybrid, 4);
    cfg.workers = 1;
    let a = run_pipeline(&spec, &cfg).unwrap();
    cfg.workers = 4;
    let b = run_pipeline(&spec, &cfg).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.stats.without_timing(), b.stats.without_timing());
}
