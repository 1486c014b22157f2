mod common;

use common::*;
use subpressure::{
    bowen_separated, cesaro_average, estimate_pressure, gibbs_atomic, gibbs_identity_check, greedy_separated_set,
    maximize, objective, partition_function, pressure_of_power, separated_pressure_bruteforce, Measure, MetricParams,
    PhiStarOptions, Potential, PowerLift, VariationalOptions, Word,
};

const LN2: f64 = std::f64::consts::LN_2;

/// Number of paths of length `n` in the fiber sequence, from explicit
/// matrix products.
fn path_count(mats: &[[[u64; 2]; 2]]) -> u64 {
    let mut v = [1u64, 1];
    for m in mats.iter().rev() {
        v = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
    }
    v[0] + v[1]
}

#[test]
fn admissibility_follows_the_base_orbit() {
    let sys = s2();
    assert!(sys.is_admissible(0, &[0, 1, 0]).unwrap());
    assert!(!sys.is_admissible(0, &[0, 1, 1]).unwrap());
    assert!(sys.is_admissible(1, &[0, 1, 1]).unwrap());
    assert!(!golden_mean().is_admissible(0, &[1, 1]).unwrap());
}

#[test]
fn word_counts_match_path_products() {
    let f = [[1, 1], [1, 1]];
    let g = [[1, 1], [1, 0]];
    let sys = s2();
    assert_eq!(sys.enumerate_words(0, 4).unwrap().count() as u64, path_count(&[f, g, f]));
    assert_eq!(sys.enumerate_words(1, 5).unwrap().count() as u64, path_count(&[g, f, g, f]));
    assert_eq!(golden_mean().enumerate_words(0, 5).unwrap().count(), 13);
    let words: Vec<Vec<u8>> = full(2).enumerate_words(0, 3).unwrap().map(|w| w.into_symbols()).collect();
    let mut sorted = words.clone();
    sorted.sort();
    assert_eq!(words, sorted);
    assert_eq!(words.len(), 8);
}

#[test]
fn skew_steps_drop_the_first_symbol() {
    let sys = s2();
    let w = Word::parse(&sys, 0, "01").unwrap();
    let s = sys.skew_step(&w).unwrap();
    assert_eq!((s.fiber(), s.symbols()), (1, &[1u8][..]));
    assert!(Word::parse(&sys, 0, "0110").is_err());
    let w = Word::parse(&sys, 1, "0101").unwrap();
    let s = sys.skew_step_n(&w, 3).unwrap();
    assert_eq!((s.fiber(), s.len()), (sys.base().theta_pow(1, 3), 1));
}

#[test]
fn separation_uses_depth() {
    let sys = full(2);
    let w = |s: &str| Word::parse(&sys, 0, s).unwrap();
    let shallow = MetricParams::new(0.5, 0.6).unwrap();
    assert_eq!(shallow.depth(), 0);
    assert!(bowen_separated(&shallow, &w("0100"), &w("0000"), 2).unwrap());
    assert!(!bowen_separated(&shallow, &w("0110"), &w("0100"), 2).unwrap());
    let deep = MetricParams::new(0.5, 0.2).unwrap();
    assert_eq!(deep.depth(), 2);
    assert!(bowen_separated(&deep, &w("00010"), &w("00000"), 2).unwrap());
    assert!(!bowen_separated(&deep, &w("00001"), &w("00000"), 2).unwrap());
}

#[test]
fn additive_partition_function_factorizes() {
    let sys = full(2);
    let pot = bernoulli_log2(&sys);
    for n in 1..=12usize {
        // Explicit sum of 2^{#ones} over all n-words.
        let z: f64 = (0u32..1 << n).map(|w| 2f64.powi(w.count_ones() as i32)).sum();
        let got = partition_function(&sys, &pot, 0, n, 0).unwrap().value();
        assert!((got - z.ln()).abs() < 1e-12);
    }
}

#[test]
fn s2_partition_function_is_a_path_count() {
    let sys = s2();
    let f = [[1, 1], [1, 1]];
    let g = [[1, 1], [1, 0]];
    for n in 1..=10usize {
        let mats: Vec<_> = (0..n - 1).map(|i| if i % 2 == 0 { f } else { g }).collect();
        let z = path_count(&mats) as f64;
        let got = partition_function(&sys, &Potential::zero(), 0, n, 0).unwrap().value();
        assert!((got - z.ln()).abs() < 1e-12, "n = {n}");
    }
}

#[test]
fn brute_force_examples() {
    let sys = full(2);
    let z = Potential::zero();
    let v = separated_pressure_bruteforce(&sys, &z, &MetricParams::new(0.5, 0.6).unwrap(), 0, 2).unwrap();
    assert!((v.value() - 4f64.ln()).abs() < 1e-12);
    let v = separated_pressure_bruteforce(&sys, &z, &MetricParams::new(0.5, 0.2).unwrap(), 0, 2).unwrap();
    assert!((v.value() - 16f64.ln()).abs() < 1e-12);
    let c = Potential::constant(-0.7).unwrap();
    let gm = golden_mean();
    let v = separated_pressure_bruteforce(&gm, &c, &MetricParams::from_depth(0.5, 1).unwrap(), 0, 2).unwrap();
    assert!((v.value() - (5f64.ln() - 1.4)).abs() < 1e-12);
}

#[test]
fn greedy_prefers_heavy_words() {
    let sys = full(2);
    let mp = MetricParams::from_depth(0.5, 0).unwrap();
    let set = greedy_separated_set(&sys, &bernoulli_log2(&sys), &mp, 0, 2).unwrap();
    assert_eq!(&set[0].symbols()[..2], &[1, 1]);
    assert_eq!(set.len(), 4);
    let gm = golden_mean();
    assert_eq!(greedy_separated_set(&gm, &Potential::zero(), &mp, 0, 3).unwrap().len(), 5);
}

#[test]
fn powers_of_the_examples() {
    let sys = full(2);
    let pot = bernoulli_log2(&sys);
    let p2 = pressure_of_power(&sys, &pot, 2, None, &[1, 2, 3]).unwrap();
    assert!((p2.reported.value() - 9f64.ln()).abs() < 1e-12);
    let p1 = pressure_of_power(&sys, &pot, 1, None, &[1, 2, 3]).unwrap();
    let p = estimate_pressure(&sys, &pot, None, &[1, 2, 3]).unwrap();
    assert_eq!(p1.values, p.values);
    // The squared swap fixes both fibers; ρ(A_0 A_1) = ρ(A_1 A_0) = 3.
    let p2 = pressure_of_power(&s2(), &Potential::zero(), 2, None, &[40]).unwrap();
    assert!((p2.reported.value() - 3f64.ln()).abs() < 0.03);
    let lift = PowerLift::new(&sys, 2).unwrap();
    let pk = pot.power(&lift).unwrap();
    let u = lift.encode(&Word::parse(&sys, 0, "01").unwrap()).unwrap();
    assert!((pk.eval(lift.lifted(), 1, &u).unwrap().value() - LN2).abs() < 1e-15);
}

#[test]
fn gibbs_weights_and_averages() {
    let sys = full(2);
    let mp = MetricParams::from_depth(0.5, 0).unwrap();
    let nu = gibbs_atomic(&sys, &bernoulli_log2(&sys), &mp, 1).unwrap();
    let mut w: Vec<f64> = nu.atoms(0).iter().map(|(_, m)| *m).collect();
    w.sort_by(f64::total_cmp);
    assert!((w[0] - 1.0 / 3.0).abs() < 1e-12 && (w[1] - 2.0 / 3.0).abs() < 1e-12);
    let shifted = gibbs_atomic(&sys, &bernoulli_log2(&sys).shifted(5.0).unwrap(), &mp, 1).unwrap();
    for ((_, a), (_, b)) in nu.atoms(0).iter().zip(shifted.atoms(0)) {
        assert!((a - b).abs() < 1e-12);
    }
    let nu = gibbs_atomic(&sys, &Potential::zero(), &mp, 8).unwrap();
    let avg = cesaro_average(&sys, &nu, 8).unwrap();
    // Representatives end in 0, so only the last of the 8 shifts is biased:
    // 2-cylinders "a0" carry 7/32 + 1/16 and "a1" carry 7/32.
    let h = |p: f64| -p * p.ln();
    let expected = 2.0 * h(9.0 / 32.0) + 2.0 * h(7.0 / 32.0);
    assert!((avg.cylinder_entropy(&sys, 2).unwrap() - expected).abs() < 1e-12);
    assert!((avg.cylinder_entropy(&sys, 1).unwrap() - LN2).abs() < 1e-12);
    let same = cesaro_average(&sys, &nu, 1).unwrap();
    assert_eq!(same.atoms(0), nu.atoms(0));
}

#[test]
fn objective_examples() {
    let sys = full(2);
    let opts = PhiStarOptions::default();
    let half = Measure::bernoulli(&sys, &[0.5, 0.5]).unwrap();
    assert!((objective(&half, &Potential::zero(), &[12], &opts).unwrap().value() - LN2).abs() < 1e-12);
    let gibbs = Measure::bernoulli(&sys, &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
    let v = objective(&gibbs, &bernoulli_log2(&sys), &[12], &opts).unwrap();
    assert!((v.value() - 3f64.ln()).abs() < 1e-12);
}

#[test]
fn gibbs_identity_on_four_atoms() {
    let sys = full(2);
    let pot = bernoulli_log2(&sys);
    let mp = MetricParams::from_depth(0.5, 0).unwrap();
    let tests: Vec<Measure> = (1..10).map(|i| Measure::bernoulli(&sys, &[i as f64 / 10.0, 1.0 - i as f64 / 10.0]).unwrap()).collect();
    let r = gibbs_identity_check(&sys, &pot, &mp, 2, &tests, 1e-9).unwrap();
    assert!(r.passed);
    assert!((r.fibers[0].log_z - 9f64.ln()).abs() < 1e-12);
    // Only q = 0.3 is near the Gibbs law (1/3, 2/3); every test measure is strictly below.
    for row in &r.inequalities {
        assert!(row.margin > 0.0);
    }
}

/// `max_q H(q) + max(q log 2, (1-q) log 3)` on a 1e-3 grid.
fn diag_scan() -> f64 {
    (1..1000)
        .map(|i| {
            let q = i as f64 / 1000.0;
            let h = -q * q.ln() - (1.0 - q) * (1.0 - q).ln();
            h + (q * LN2).max((1.0 - q) * 3f64.ln())
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn maximize_examples() {
    let sys = full(2);
    let opts = VariationalOptions { starts: 4, ..Default::default() };
    let r = maximize(&sys, &Potential::zero(), &opts).unwrap();
    assert!((r.objective.value() - LN2).abs() < 1e-6);
    let r = maximize(&sys, &diag_cocycle(&sys), &opts).unwrap();
    let scan = diag_scan();
    // The horizon-12 objective sits between the Bernoulli scan limit and log 4.
    assert!(r.objective.value() >= scan - 1e-3, "{} vs {scan}", r.objective.value());
    assert!(r.objective.value() <= 4f64.ln() + r.tol_upper);
}
