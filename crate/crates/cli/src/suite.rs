//! The invariant suite behind `verify`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use subpressure::ext::ser_f64;
use subpressure::measures::shift_average_check;
use subpressure::pressure::greedy_weighted;
use subpressure::{
    check_subadditive, chunking_check, estimate_pressure, gibbs_atomic, gibbs_identity_check, partition_function,
    power_consistency, sampled_upper_bound, separated_pressure_bruteforce, AtomicFiberMeasure, Error, MetricParams,
    RandomMarkovMeasure, Result,
};

use crate::config::{Experiment, ExperimentConfig};

/// Agreement required between the brute-force and cylinder-sum pressures.
pub const ORACLE_TOL: f64 = 1e-12;
const GIBBS_TEST_MEASURES: usize = 4;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Number of individual comparisons made.
    pub evaluated: usize,
    #[serde(serialize_with = "ser_f64")]
    pub worst_margin: f64,
    pub note: String,
    pub details: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub tolerance: f64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn check(name: &'static str, passed: bool, evaluated: usize, worst_margin: f64, note: impl Into<String>, details: Value) -> CheckResult {
    CheckResult {
        name,
        passed,
        evaluated,
        worst_margin,
        note: note.into(),
        details,
    }
}

fn finite_everywhere(exp: &Experiment, n: usize, t: usize) -> Result<bool> {
    for w in 0..exp.sys.fibers() {
        if partition_function(&exp.sys, &exp.pot, w, n, t)?.is_neg_inf() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Divisors of `n` in increasing order.
pub fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|&d| n.is_multiple_of(d)).collect()
}

pub fn run_suite(cfg: &ExperimentConfig, exp: &Experiment, seed: u64, tol: f64) -> Result<SuiteReport> {
    let v = &cfg.verify;
    let sys = &exp.sys;
    let pot = &exp.pot;
    let mut checks = Vec::new();

    let sub = check_subadditive(pot, sys, v.subadditivity_n_max, tol)?;
    checks.push(check(
        "subadditivity",
        sub.passed,
        sub.checked,
        sub.worst_margin,
        "f_{n+m} <= f_n + f_m o Theta^n on all words",
        serde_json::to_value(&sub).expect("serializable"),
    ));

    checks.push(oracle_check(exp)?);

    let fekete_schedule: Vec<usize> = (1..=v.fekete_n_max).collect();
    let est = estimate_pressure(sys, pot, exp.depth(), &fekete_schedule)?;
    let fm = est.fekete_margin();
    checks.push(check(
        "fekete",
        fm >= -tol,
        fekete_schedule.len(),
        fm,
        "A_{n+m} <= A_n + A_m",
        json!({ "depth_t": est.depth_t, "log_partition": est.log_partition }),
    ));

    checks.push(gibbs_check(cfg, exp, seed, tol)?);
    checks.push(chunk_check(cfg, exp, tol)?);
    checks.push(shift_check(cfg, exp, tol)?);

    let power = power_consistency(sys, pot, cfg.power.k, &cfg.power.schedule, None, tol)?;
    let worst = -power.entropy_error.max(power.phi_star_error).max(power.pressure_error);
    checks.push(check(
        "power_consistency",
        power.passed,
        3,
        worst,
        "entropy, Phi_* and pressure of T^k equal k times those of T at matched horizons",
        serde_json::to_value(&power).expect("serializable"),
    ));

    let horizon = *cfg.schedules.phi_star.last().expect("validated");
    let ub = sampled_upper_bound(sys, pot, v.samples, seed, horizon, &divisors(horizon), &cfg.phi_options(seed))?;
    checks.push(check(
        "upper_bound",
        ub.passed,
        ub.samples,
        ub.worst_margin,
        "h + Phi_* <= pressure envelope + 1e-6 + 2||f_1||/N for sampled Markov measures",
        serde_json::to_value(&ub).expect("serializable"),
    ));
    let all_dead = ub.neg_inf_objectives == ub.samples;
    let (passed, note) = match (ub.pressure_neg_inf, all_dead) {
        (true, true) => (true, "pressure and every sampled objective are -inf"),
        (false, false) => (true, "pressure and sampled objectives are finite"),
        (true, false) => (false, "pressure is -inf but some measure has a finite objective"),
        (false, true) => (true, "diagnostic: pressure is finite but every sampled objective is -inf"),
    };
    checks.push(check(
        "neg_inf_coherence",
        passed,
        ub.samples,
        if passed { 0.0 } else { f64::NEG_INFINITY },
        note,
        json!({ "pressure_neg_inf": ub.pressure_neg_inf, "neg_inf_objectives": ub.neg_inf_objectives, "samples": ub.samples }),
    ));

    Ok(SuiteReport {
        tolerance: tol,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn oracle_check(exp: &Experiment) -> Result<CheckResult> {
    let sys = &exp.sys;
    let pot = &exp.pot;
    let mut evaluated = 0;
    let mut skipped = 0;
    let mut worst = 0.0f64;
    for omega in 0..sys.fibers() {
        for n in 1..=4 {
            for t in pot.locality_deficit(n)..=(4 - n) {
                let mp = MetricParams::from_depth(0.5, t)?;
                let b = match separated_pressure_bruteforce(sys, pot, &mp, omega, n) {
                    Ok(b) => b,
                    Err(Error::Resource(_)) => {
                        skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let z = partition_function(sys, pot, omega, n, t)?;
                let diff = match (b.as_finite(), z.as_finite()) {
                    (Some(x), Some(y)) => (x - y).abs(),
                    (None, None) => 0.0,
                    _ => f64::INFINITY,
                };
                worst = worst.max(diff);
                evaluated += 1;
            }
        }
    }
    Ok(check(
        "oracle_equivalence",
        worst <= ORACLE_TOL,
        evaluated,
        ORACLE_TOL - worst,
        format!("brute-force separated sets vs cylinder sums for n + t <= 4 ({skipped} cases over the brute-force size bound)"),
        json!({ "max_abs_diff": worst, "skipped": skipped }),
    ))
}

fn test_measures(exp: &Experiment, seed: u64) -> Result<Vec<RandomMarkovMeasure<f64>>> {
    let mut out = vec![RandomMarkovMeasure::uniform(&exp.sys)?];
    for i in 0..GIBBS_TEST_MEASURES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        out.push(RandomMarkovMeasure::random(&exp.sys, &mut rng)?);
    }
    Ok(out)
}

fn gibbs_check(cfg: &ExperimentConfig, exp: &Experiment, seed: u64, tol: f64) -> Result<CheckResult> {
    let t = exp.mp.depth();
    let tests = test_measures(exp, seed)?;
    let mut rows = Vec::new();
    let mut evaluated = 0;
    let mut worst = f64::INFINITY;
    let mut passed = true;
    let mut skipped = Vec::new();
    for n in 1..=cfg.verify.n_max {
        if exp.pot.locality_deficit(n) > t {
            continue;
        }
        if !finite_everywhere(exp, n, t)? {
            skipped.push(n);
            continue;
        }
        let r = gibbs_identity_check(&exp.sys, &exp.pot, &exp.mp, n, &tests, tol)?;
        worst = worst.min(tol - r.max_error).min(r.min_margin);
        passed &= r.passed;
        evaluated += r.fibers.len() + r.inequalities.len();
        rows.push(json!({ "n": n, "max_error": r.max_error, "min_margin": subpressure_f64(r.min_margin) }));
    }
    Ok(check(
        "gibbs_identity",
        passed,
        evaluated,
        worst,
        if skipped.is_empty() {
            "H(nu) + int f_n dnu = log Z_n; H(mu) + int f_n dmu <= log Z_n".to_string()
        } else {
            format!("skipped horizons with -inf partition function: {skipped:?}")
        },
        json!({ "rows": rows }),
    ))
}

fn subpressure_f64(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(crate::output::fmt_f64(v))
    }
}

fn chunk_check(cfg: &ExperimentConfig, exp: &Experiment, tol: f64) -> Result<CheckResult> {
    let t = exp.mp.depth();
    let mut rows = Vec::new();
    let mut worst = f64::INFINITY;
    let mut passed = true;
    let mut skipped = Vec::new();
    for n in 2..=cfg.verify.n_max {
        if exp.pot.locality_deficit(n) > t {
            continue;
        }
        if !finite_everywhere(exp, n, t)? {
            skipped.push(n);
            continue;
        }
        for &q in &cfg.verify.chunk_q {
            if !(1 < q && q < n) {
                continue;
            }
            let r = chunking_check(&exp.sys, &exp.pot, &exp.mp, n, q, tol)?;
            worst = worst.min(r.margin);
            passed &= r.passed;
            rows.push(serde_json::to_value(&r).expect("serializable"));
        }
    }
    Ok(check(
        "chunking",
        passed,
        rows.len(),
        worst,
        if skipped.is_empty() {
            "q H_nu(n-partition) <= n H_mu(q-partition) + 2 q^2 log k".to_string()
        } else {
            format!("skipped horizons with -inf partition function: {skipped:?}")
        },
        json!({ "rows": rows }),
    ))
}

/// The Gibbs-type measure at horizon `n`, or equal weights on the same
/// separated set when `f_n` is `-inf` on a whole fiber.
fn separated_family(exp: &Experiment, n: usize) -> Result<AtomicFiberMeasure<f64>> {
    match gibbs_atomic(&exp.sys, &exp.pot, &exp.mp, n) {
        Err(Error::Degenerate(_)) => {
            let mut atoms = Vec::new();
            for w in 0..exp.sys.fibers() {
                let set = greedy_weighted(&exp.sys, &exp.pot, &exp.mp, w, n)?;
                let m = 1.0 / set.len() as f64;
                atoms.push(set.into_iter().map(|(word, _)| (word, m)).collect());
            }
            AtomicFiberMeasure::new(&exp.sys, atoms)
        }
        other => other,
    }
}

fn shift_check(cfg: &ExperimentConfig, exp: &Experiment, tol: f64) -> Result<CheckResult> {
    let t = exp.mp.depth();
    let family: Vec<(usize, AtomicFiberMeasure<f64>)> = (1..=cfg.verify.shift_n_max)
        .filter(|&n| exp.pot.locality_deficit(n) <= t)
        .map(|n| Ok((n, separated_family(exp, n)?)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut worst = f64::INFINITY;
    let mut passed = true;
    let mut evaluated = 0;
    for &k in &cfg.verify.shift_k {
        let fam: Vec<_> = family.iter().filter(|(n, _)| *n > k).cloned().collect();
        if fam.is_empty() {
            continue;
        }
        let r = shift_average_check(&exp.sys, &exp.pot, &fam, k, tol)?;
        worst = worst.min(r.min_margin);
        passed &= r.passed;
        evaluated += r.rows.len();
        rows.push(serde_json::to_value(&r).expect("serializable"));
    }
    Ok(check(
        "shift_average",
        passed,
        evaluated,
        worst,
        "int f_n dnu_n <= ((n-k+1)/k) int f_k dmu'_n + 2k||f_1||",
        json!({ "reports": rows }),
    ))
}
