mod common;

use subpressure::{
    estimate_pressure, objective, Measure32, PhiStarOptions, Potential32, RandomMarkovMeasure, RandomSft, System32,
};

#[test]
fn single_precision_pressure_tracks_double() {
    let sys = System32::full_shift(2).unwrap();
    let pot = Potential32::additive_symbolwise(&sys, &[0.0, std::f32::consts::LN_2]).unwrap();
    let est = estimate_pressure(&sys, &pot, None, &[1, 2, 4, 8]).unwrap();
    let p: f32 = est.reported.value();
    assert!((p - 3f32.ln()).abs() < 1e-5);
}

#[test]
fn single_precision_objective_at_the_gibbs_measure() {
    let sys = System32::full_shift(2).unwrap();
    let pot = Potential32::additive_symbolwise(&sys, &[0.0, std::f32::consts::LN_2]).unwrap();
    let mu = Measure32::bernoulli(&sys, &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
    let v = objective(&mu, &pot, &[4], &PhiStarOptions::default()).unwrap();
    assert!((v.value() - 3f32.ln()).abs() < 1e-5);
}

#[test]
fn precisions_agree_on_random_measures() {
    let s64 = common::s2();
    let s32 = RandomSft::<f32>::new(
        subpressure::BaseSystem::new(vec![1, 0], vec![0.5, 0.5]).unwrap(),
        2,
        vec![vec![vec![1, 1], vec![1, 1]], vec![vec![1, 1], vec![1, 0]]],
    )
    .unwrap();
    let mu64 = subpressure::Measure::random(&s64, &mut common::rng(3)).unwrap();
    let kernels: Vec<Vec<Vec<f32>>> = (0..2)
        .map(|w| mu64.kernel(w).iter().map(|r| r.iter().map(|&x| x as f32).collect()).collect())
        .collect();
    let mu32 = RandomMarkovMeasure::<f32>::from_kernels(&s32, kernels).unwrap();
    assert!((mu32.fiber_entropy() as f64 - mu64.fiber_entropy()).abs() < 1e-5);
}
