use hrsearch::fixedpoint::{DivisionMode, FracWidth, UFrac};
use hrsearch::lowerbound::{Algorithm, SearchProblem, Verdict};
use hrsearch::oracle::brute_min;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [DivisionMode; 3] = [DivisionMode::Subtractive, DivisionMode::Hardware, DivisionMode::Hybrid];

/// For every b, the distance from b down to the nearest of the first n multiples of a.
fn all_b_minima(unit: usize, a: usize, n: usize) -> Vec<u32> {
    let mut hit = vec![false; unit];
    let mut pt = 0;
    for _ in 0..n.min(unit) {
        hit[pt] = true;
        pt = (pt + a) % unit;
    }
    let mut dist = vec![0u32; unit];
    let last = (0..unit).rev().find(|&i| hit[i]).unwrap();
    let mut run = (unit - last) as u32;
    for b in 0..unit {
        run = if hit[b] { 0 } else { run + 1 };
        dist[b] = run;
    }
    dist
}

fn check(algo: Algorithm, mode: DivisionMode, prob: &SearchProblem, brute: u128) {
    let out = algo.run(prob, mode);
    let ctx = || format!("{algo:?} {mode:?} {prob:?} brute={brute} -> {out:?}");
    if out.verdict == Verdict::Success {
        assert!(brute >= prob.eps, "unsound success: {}", ctx());
        assert!(out.points_placed >= prob.n || out.terminated, "{}", ctx());
    }
    if out.points_placed >= prob.n || out.terminated {
        assert!(out.d <= brute, "bound above the true minimum: {}", ctx());
    }
    if out.terminated {
        assert_eq!(out.d, brute.min(out.d), "{}", ctx());
    }
}

#[test]
fn exhaustive_denominator_2_pow_10() {
    const UNIT: usize = 1 << 10;
    let ns = [1usize, 2, 3, 4, 5, 7, 16, 33, 100, 257, 1000, 1024];
    for a in 0..UNIT {
        for &n in &ns {
            let minima = all_b_minima(UNIT, a, n);
            for (b, &brute) in minima.iter().enumerate() {
                let eps = ((a * 7 + b * 13 + n) % 97) as u128;
                let prob = SearchProblem::over_unit(UNIT as u128, a as u128, b as u128, eps, n as u64).unwrap();
                let brute = brute as u128;
                for algo in Algorithm::ALL {
                    check(algo, DivisionMode::Hardware, &prob, brute);
                }
                if (a + b) % 16 == 0 {
                    for algo in Algorithm::ALL {
                        check(algo, DivisionMode::Subtractive, &prob, brute);
                        check(algo, DivisionMode::Hybrid, &prob, brute);
                    }
                }
            }
        }
    }
}

fn random_problem(rng: &mut ChaCha8Rng, max_log_n: u32) -> SearchProblem {
    let w = FracWidth::W64;
    let a = UFrac::new(rng.gen(), w).unwrap();
    let b = UFrac::new(rng.gen(), w).unwrap();
    let shift = rng.gen_range(8..40);
    let eps = UFrac::new(rng.gen::<u64>() >> shift, w).unwrap();
    let log_n = rng.gen_range(0..=max_log_n);
    let n = rng.gen_range(1..=1u64 << log_n);
    SearchProblem::new(a, b, eps, n).unwrap()
}

#[test]
fn random_word_problems_are_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..100_000 {
        let prob = random_problem(&mut rng, 12);
        let (brute, _) = brute_min(&prob).unwrap();
        for algo in Algorithm::ALL {
            check(algo, DivisionMode::Hardware, &prob, brute);
        }
        if i % 8 == 0 {
            for algo in Algorithm::ALL {
                check(algo, DivisionMode::Hybrid, &prob, brute);
            }
        }
    }
}

#[test]
fn paired_variants_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..100_000 {
        let prob = random_problem(&mut rng, 20);
        let modes: &[DivisionMode] = if i % 16 == 0 { &MODES } else { &MODES[1..] };
        let l0 = Algorithm::Lefevre.run(&prob, DivisionMode::Hardware);
        let r0 = Algorithm::Regular.run(&prob, DivisionMode::Hardware);
        for &mode in modes {
            for (algo, base) in [(Algorithm::Lefevre, l0), (Algorithm::LefevreSwap, l0)] {
                let out = algo.run(&prob, mode);
                assert_eq!((out.verdict, out.d, out.points_placed), (base.verdict, base.d, base.points_placed), "{algo:?} {mode:?} {prob:?}");
            }
            for (algo, base) in [(Algorithm::Regular, r0), (Algorithm::RegularUnrolled, r0)] {
                let out = algo.run(&prob, mode);
                assert_eq!((out.verdict, out.d), (base.verdict, base.d), "{algo:?} {mode:?} {prob:?}");
            }
        }
    }
}

#[test]
fn lefevre_places_fewer_than_2n_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50_000 {
        let mut prob = random_problem(&mut rng, 20);
        prob.eps = 0;
        let out = Algorithm::Lefevre.run(&prob, DivisionMode::Hardware);
        if !out.terminated && prob.n > 1 {
            assert_eq!(out.verdict, Verdict::Success);
            assert!(out.points_placed >= prob.n && out.points_placed < 2 * prob.n, "{prob:?} {out:?}");
        }
    }
}

#[test]
fn specific_instructions_cap_iterations() {
    // Collapsing zero-quotient chains never adds iterations.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20_000 {
        let prob = random_problem(&mut rng, 15);
        let sub = Algorithm::Lefevre.run(&prob, DivisionMode::Subtractive);
        let hw = Algorithm::Lefevre.run(&prob, DivisionMode::Hardware);
        assert!(hw.iterations <= sub.iterations);
    }
}
