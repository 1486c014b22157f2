//! Both directions of the variational principle as computations: the
//! supremum of `h_μ^{(r)}(T) + Φ_*(μ)` over random Markov measures, and the
//! identities that carry the lower-bound construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::ext::{ser_f64, ExtReal};
use crate::measures::{
    cesaro_average, gibbs_atomic, phi_star, AtomicFiberMeasure, PhiStarOptions, RandomMarkovMeasure,
};
use crate::optimize::{nelder_mead, NelderMeadOptions, TraceRow};
use crate::potentials::PotentialSeq;
use crate::pressure::{estimate_pressure, partition_function, PressureEstimate};
use crate::scalar::Scalar;
use crate::sum::deterministic_sum;
use crate::system::{MetricParams, PowerLift, RandomSft, Symbol};
use crate::walk::{check_budget, Walk, WORD_BUDGET};

const LOGIT_CLAMP: f64 = 30.0;
/// Slack on top of the truncation allowance in the upper-bound comparison.
pub const UPPER_SLACK: f64 = 1e-6;

fn ext_f64<T: Scalar>(v: ExtReal<T>) -> f64 {
    v.as_finite().map_or(f64::NEG_INFINITY, |x| x.to_f64_lossy())
}

/// `h_μ^{(r)}(T) + Φ_*(μ)`, with `Φ_*` read off at the last horizon of
/// `schedule`.
pub fn objective<T: Scalar>(
    mu: &RandomMarkovMeasure<T>,
    pot: &PotentialSeq<T>,
    schedule: &[usize],
    opts: &PhiStarOptions,
) -> Result<ExtReal<T>> {
    let phi = phi_star(mu, pot, schedule, opts)?;
    Ok(phi.reported + mu.fiber_entropy())
}

/// Softmax coordinates on the allowed entries of every kernel row. The
/// first allowed entry of each row carries logit 0.
#[derive(Clone, Debug)]
pub struct KernelParams {
    rows: Vec<(usize, usize, Vec<Symbol>)>,
    fibers: usize,
    alphabet: usize,
}

impl KernelParams {
    pub fn new<T: Scalar>(sys: &RandomSft<T>) -> Self {
        let a = sys.alphabet();
        let mut rows = Vec::new();
        for w in 0..sys.fibers() {
            for i in 0..a {
                let cols: Vec<Symbol> = (0..a as u16)
                    .map(|j| j as Symbol)
                    .filter(|&j| sys.allowed(w, i as Symbol, j))
                    .collect();
                rows.push((w, i, cols));
            }
        }
        KernelParams {
            rows,
            fibers: sys.fibers(),
            alphabet: a,
        }
    }

    /// Number of free coordinates.
    pub fn dim(&self) -> usize {
        self.rows.iter().map(|r| r.2.len() - 1).sum()
    }

    pub fn kernels<T: Scalar>(&self, x: &[f64]) -> Vec<Vec<Vec<T>>> {
        let a = self.alphabet;
        let mut out = vec![vec![vec![T::zero(); a]; a]; self.fibers];
        let mut at = 0;
        for (w, i, cols) in &self.rows {
            let free = cols.len() - 1;
            let logits: Vec<f64> = std::iter::once(0.0)
                .chain(x[at..at + free].iter().map(|v| v.clamp(-LOGIT_CLAMP, LOGIT_CLAMP)))
                .collect();
            at += free;
            let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
            let s: f64 = e.iter().sum();
            for (c, v) in cols.iter().zip(e) {
                out[*w][*i][*c as usize] = T::of(v / s);
            }
        }
        out
    }
}

/// Controls for [`maximize`].
#[derive(Clone, Debug)]
pub struct VariationalOptions {
    pub starts: usize,
    pub max_evals: usize,
    pub diameter_tol: f64,
    pub seed: u64,
    /// Horizons for `Φ_*`; the last one enters the objective.
    pub phi_star_schedule: Vec<usize>,
    pub pressure_schedule: Vec<usize>,
    pub depth: Option<usize>,
    pub phi: PhiStarOptions,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        VariationalOptions {
            starts: 16,
            max_evals: 2000,
            diameter_tol: 1e-8,
            seed: 0,
            phi_star_schedule: vec![12],
            pressure_schedule: vec![1, 2, 3, 4, 6, 12],
            depth: None,
            phi: PhiStarOptions::default(),
        }
    }
}

/// Which side of the comparison is `-inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Finite,
    /// Pressure and every objective found are `-inf`.
    NegativeInfinity,
    /// Pressure is finite but the optimizer only found `-inf` measures.
    ObjectiveOnlyNegInf,
    /// Pressure is `-inf` but some measure has a finite objective.
    PressureOnlyNegInf,
}

#[derive(Clone, Debug, Serialize)]
pub struct StartSummary {
    pub start: usize,
    #[serde(serialize_with = "ser_f64")]
    pub objective: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Outcome of [`maximize`].
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct VariationalReport<T: Scalar> {
    pub best_measure: RandomMarkovMeasure<T>,
    pub objective: ExtReal<T>,
    pub entropy: T,
    pub phi_star: ExtReal<T>,
    pub pressure: PressureEstimate<T>,
    /// `pressure.reported − objective`.
    #[serde(serialize_with = "ser_f64")]
    pub gap: f64,
    /// `2‖f_1‖ / N` for the objective horizon `N`.
    #[serde(serialize_with = "ser_f64")]
    pub truncation_allowance: f64,
    #[serde(serialize_with = "ser_f64")]
    pub tol_upper: f64,
    pub upper_bound_ok: bool,
    pub regime: Regime,
    pub best_start: usize,
    pub starts: Vec<StartSummary>,
    /// Iteration log of the winning start, values as objectives.
    pub trace: Vec<TraceRow>,
}

struct StartOutcome<T> {
    measure: Option<RandomMarkovMeasure<T>>,
    objective: ExtReal<T>,
    flat: Vec<f64>,
    summary: StartSummary,
    trace: Vec<TraceRow>,
}

fn truncation_allowance<T: Scalar>(sys: &RandomSft<T>, pot: &PotentialSeq<T>, horizon: usize) -> Result<f64> {
    Ok(2.0 * pot.f1_norm(sys)?.to_f64_lossy() / horizon as f64)
}

fn gap_of<T: Scalar>(pressure: ExtReal<T>, objective: ExtReal<T>) -> f64 {
    match (pressure.as_finite(), objective.as_finite()) {
        (Some(p), Some(o)) => (p - o).to_f64_lossy(),
        (Some(_), None) => f64::INFINITY,
        (None, Some(_)) => f64::NEG_INFINITY,
        (None, None) => 0.0,
    }
}

/// Multi-start Nelder–Mead ascent of `h_μ^{(r)}(T) + Φ_*(μ)` over the
/// random Markov measures compatible with the transition matrices.
pub fn maximize<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    opts: &VariationalOptions,
) -> Result<VariationalReport<T>> {
    if opts.starts == 0 {
        return Err(domain("at least one start is required"));
    }
    let horizon = *opts
        .phi_star_schedule
        .last()
        .ok_or_else(|| domain("empty phi_star schedule"))?;
    let pressure = estimate_pressure(sys, pot, opts.depth, &opts.pressure_schedule)?;
    let params = KernelParams::new(sys);
    let dim = params.dim();
    // surfaces budget errors before the search swallows them
    let probe = RandomMarkovMeasure::from_kernels(sys, params.kernels(&vec![0.0; dim]))?;
    objective(&probe, pot, &opts.phi_star_schedule, &opts.phi)?;

    let nm = NelderMeadOptions {
        max_evals: opts.max_evals,
        diameter_tol: opts.diameter_tol,
        initial_step: 1.0,
    };
    let eval = |x: &[f64]| -> Option<(RandomMarkovMeasure<T>, ExtReal<T>)> {
        let mu = RandomMarkovMeasure::from_kernels(sys, params.kernels(x)).ok()?;
        let v = objective(&mu, pot, &opts.phi_star_schedule, &opts.phi).ok()?;
        Some((mu, v))
    };
    let outcomes: Vec<StartOutcome<T>> = (0..opts.starts)
        .into_par_iter()
        .map(|start| {
            let x0: Vec<f64> = if start == 0 {
                vec![0.0; dim]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(start as u64);
                (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect()
            };
            let res = nelder_mead(
                |x| match eval(x) {
                    Some((_, v)) => v.as_finite().map_or(f64::INFINITY, |v| -v.to_f64_lossy()),
                    None => f64::INFINITY,
                },
                &x0,
                &nm,
            );
            let best = eval(&res.x);
            let (measure, objective) = match best {
                Some((m, v)) => (Some(m), v),
                None => (None, ExtReal::neg_inf()),
            };
            let flat = params
                .kernels::<T>(&res.x)
                .into_iter()
                .flatten()
                .flatten()
                .map(|v| v.to_f64_lossy())
                .collect();
            let trace = res
                .trace
                .into_iter()
                .map(|r| TraceRow {
                    value: -r.value,
                    ..r
                })
                .collect();
            StartOutcome {
                measure,
                objective,
                flat,
                summary: StartSummary {
                    start,
                    objective: ext_f64(objective),
                    evals: res.evals,
                    converged: res.converged,
                },
                trace,
            }
        })
        .collect();

    let mut best_idx = 0;
    for (i, o) in outcomes.iter().enumerate().skip(1) {
        let b = &outcomes[best_idx];
        let better = o.objective > b.objective
            || (o.objective == b.objective
                && o.flat
                    .iter()
                    .zip(&b.flat)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|c| c.is_ne())
                    == Some(std::cmp::Ordering::Less));
        if better && o.measure.is_some() {
            best_idx = i;
        }
    }
    let starts: Vec<StartSummary> = outcomes.iter().map(|o| o.summary.clone()).collect();
    let best = outcomes.into_iter().nth(best_idx).expect("nonempty");
    let best_measure = best.measure.unwrap_or(probe);
    let entropy = best_measure.fiber_entropy();
    let phi = phi_star(&best_measure, pot, &opts.phi_star_schedule, &opts.phi)?.reported;
    let objective = phi + entropy;
    let allowance = truncation_allowance(sys, pot, horizon)?;
    let tol_upper = UPPER_SLACK + allowance;
    let gap = gap_of(pressure.reported, objective);
    let regime = match (pressure.reported.is_neg_inf(), objective.is_neg_inf()) {
        (false, false) => Regime::Finite,
        (true, true) => Regime::NegativeInfinity,
        (false, true) => Regime::ObjectiveOnlyNegInf,
        (true, false) => Regime::PressureOnlyNegInf,
    };
    Ok(VariationalReport {
        best_measure,
        objective,
        entropy,
        phi_star: phi,
        gap,
        truncation_allowance: allowance,
        tol_upper,
        upper_bound_ok: gap >= -tol_upper,
        regime,
        best_start: best_idx,
        starts,
        trace: best.trace,
        pressure,
    })
}

/// Per-fiber terms of the Gibbs identity.
#[derive(Clone, Debug, Serialize)]
pub struct GibbsFiberRow {
    pub fiber: usize,
    /// `H_ν(⋁_{i<n} (T^i)^{-1} P)` for the depth-`(t+1)` cylinder partition.
    pub entropy: f64,
    /// `∫ f_n dν_ω`.
    pub integral: f64,
    /// `log Σ_{x∈G} exp f_n(ω, x)`.
    pub log_z: f64,
    pub error: f64,
}

/// Gibbs inequality for one test measure at one fiber.
#[derive(Clone, Debug, Serialize)]
pub struct GibbsInequalityRow {
    pub measure: usize,
    pub fiber: usize,
    /// `H_{μ_ω} + ∫ f_n dμ_ω`.
    #[serde(serialize_with = "ser_f64")]
    pub lhs: f64,
    pub log_z: f64,
    #[serde(serialize_with = "ser_f64")]
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GibbsIdentityReport {
    pub n: usize,
    pub depth_t: usize,
    pub fibers: Vec<GibbsFiberRow>,
    pub max_error: f64,
    pub inequalities: Vec<GibbsInequalityRow>,
    #[serde(serialize_with = "ser_f64")]
    pub min_margin: f64,
    pub passed: bool,
}

/// `H_{μ_ω}(len-cylinders) + ∫ f_n dμ_ω` in one pass.
fn free_energy<T: Scalar>(
    sys: &RandomSft<T>,
    mu: &RandomMarkovMeasure<T>,
    pot: &PotentialSeq<T>,
    omega: usize,
    n: usize,
    len: usize,
) -> Result<ExtReal<T>> {
    check_budget(sys, omega, len, WORD_BUDGET)?;
    let mut terms = Vec::new();
    let mut dead = false;
    Walk::words(sys, omega, len)
        .with_potential(pot, n)
        .with_measure(mu, true)
        .run(|_, v, m| match v.as_finite() {
            Some(f) => terms.push(m * (f - m.ln())),
            None => dead = true,
        });
    Ok(if dead {
        ExtReal::neg_inf()
    } else {
        ExtReal::finite(deterministic_sum(&terms))
    })
}

/// Checks `H_{ν_ω}(⋁ …) + ∫ f_n dν_ω = log Σ_{x∈G} exp f_n(ω, x)` for the
/// Gibbs-type measure on the greedy separated set `G`, and the inequality
/// `H_{μ_ω} + ∫ f_n dμ_ω ≤ log Z_n(ω)` for each test measure.
pub fn gibbs_identity_check<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    mp: &MetricParams<T>,
    n: usize,
    test_measures: &[RandomMarkovMeasure<T>],
    tol: f64,
) -> Result<GibbsIdentityReport> {
    let t = mp.depth();
    let nu = gibbs_atomic(sys, pot, mp, n)?;
    let len = n + t;
    let mut fibers = Vec::new();
    let mut log_zs = Vec::new();
    for w in 0..sys.fibers() {
        let entropy = nu.fiber_cylinder_entropy(sys, w, len)?.to_f64_lossy();
        let integral = ext_f64(nu.fiber_integral(sys, pot, w, n)?);
        let log_z = ext_f64(partition_function(sys, pot, w, n, t)?);
        log_zs.push(log_z);
        fibers.push(GibbsFiberRow {
            fiber: w,
            entropy,
            integral,
            log_z,
            error: (entropy + integral - log_z).abs(),
        });
    }
    let mut inequalities = Vec::new();
    for (j, mu) in test_measures.iter().enumerate() {
        for w in 0..sys.fibers() {
            let lhs = ext_f64(free_energy(sys, mu, pot, w, n, len)?);
            inequalities.push(GibbsInequalityRow {
                measure: j,
                fiber: w,
                lhs,
                log_z: log_zs[w],
                margin: if lhs == f64::NEG_INFINITY { f64::INFINITY } else { log_zs[w] - lhs },
            });
        }
    }
    let max_error = fibers.iter().map(|r| r.error).fold(0.0, f64::max);
    let min_margin = inequalities.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(GibbsIdentityReport {
        n,
        depth_t: t,
        passed: max_error <= tol && min_margin >= -tol,
        fibers,
        max_error,
        inequalities,
        min_margin,
    })
}

/// Both sides of
/// `q·H_ν(⋁_{i<n} (T^i)^{-1}P) ≤ n·H_μ(⋁_{i<q} (T^i)^{-1}P) + 2q²·log k`
/// with `P` the depth-`(t+1)` cylinder partition and `k = a^{t+1}` its size
/// bound.
#[derive(Clone, Debug, Serialize)]
pub struct ChunkingReport {
    pub n: usize,
    pub q: usize,
    pub depth_t: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub passed: bool,
}

/// The chunking inequality for `ν = gibbs_atomic(n)` and `μ` its Cesàro
/// average.
pub fn chunking_check<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    mp: &MetricParams<T>,
    n: usize,
    q: usize,
    tol: f64,
) -> Result<ChunkingReport> {
    if !(1 < q && q < n) {
        return Err(domain(format!("need 1 < q < n, got q = {q}, n = {n}")));
    }
    let nu = gibbs_atomic(sys, pot, mp, n)?;
    chunking_check_for(sys, &nu, mp.depth(), n, q, tol)
}

/// [`chunking_check`] for an arbitrary atomic family `ν`.
pub fn chunking_check_for<T: Scalar>(
    sys: &RandomSft<T>,
    nu: &AtomicFiberMeasure<T>,
    t: usize,
    n: usize,
    q: usize,
    tol: f64,
) -> Result<ChunkingReport> {
    if q == 0 || n == 0 {
        return Err(domain("n and q must be positive"));
    }
    let nu = nu.extended(sys, n + q + t);
    let mu = cesaro_average(sys, &nu, n)?;
    let lhs = q as f64 * nu.cylinder_entropy(sys, n + t)?.to_f64_lossy();
    let log_k = (t + 1) as f64 * (sys.alphabet() as f64).ln();
    let rhs = n as f64 * mu.cylinder_entropy(sys, q + t)?.to_f64_lossy() + 2.0 * (q * q) as f64 * log_k;
    let margin = rhs - lhs;
    Ok(ChunkingReport {
        n,
        q,
        depth_t: t,
        lhs,
        rhs,
        margin,
        passed: margin >= -tol,
    })
}

/// Power-system consistency: entropy, `Φ_*` and pressure scale by `k`.
#[derive(Clone, Debug, Serialize)]
pub struct PowerReport {
    pub k: usize,
    pub entropy: f64,
    pub entropy_power: f64,
    pub entropy_error: f64,
    /// `Φ_*(μ)` at horizon `kN` and `(Φ^k)_*` of the lifted measure at `N`.
    #[serde(serialize_with = "ser_f64")]
    pub phi_star: f64,
    #[serde(serialize_with = "ser_f64")]
    pub phi_star_power: f64,
    pub phi_star_error: f64,
    /// Base pressure along `k·schedule` at depth `k·t'`.
    #[serde(serialize_with = "ser_f64")]
    pub pressure: f64,
    /// Pressure of `Φ^k` on the power system along `schedule` at depth `t'`.
    #[serde(serialize_with = "ser_f64")]
    pub pressure_power: f64,
    pub pressure_error: f64,
    pub schedule: Vec<usize>,
    pub passed: bool,
}

fn scaled_error(power: f64, base: f64, k: usize) -> f64 {
    if power.is_infinite() && base.is_infinite() && power.signum() == base.signum() {
        0.0
    } else {
        (power - k as f64 * base).abs()
    }
}

/// Compares the power system against `k` times the original at matched
/// horizons: `N` steps of `T^k` against `kN` steps of `T`, with separation
/// depths chosen so that both count the same words.
pub fn power_consistency<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    k: usize,
    schedule: &[usize],
    mu: Option<&RandomMarkovMeasure<T>>,
    tol: f64,
) -> Result<PowerReport> {
    let lift = PowerLift::new(sys, k)?;
    let pk = pot.power(&lift)?;
    let big = lift.lifted();
    let pow = estimate_pressure(big, &pk, None, schedule)?;
    let base_schedule: Vec<usize> = schedule.iter().map(|n| n * k).collect();
    let base = estimate_pressure(sys, pot, Some(k * pow.depth_t), &base_schedule)?;
    let uniform;
    let mu = match mu {
        Some(m) => m,
        None => {
            uniform = RandomMarkovMeasure::uniform(sys)?;
            &uniform
        }
    };
    let mu_k = mu.lift(&lift)?;
    let entropy = mu.fiber_entropy().to_f64_lossy();
    let entropy_power = mu_k.fiber_entropy().to_f64_lossy();
    let horizon = *schedule.last().expect("schedule validated");
    let exact = PhiStarOptions {
        monte_carlo: false,
        ..PhiStarOptions::default()
    };
    let phi = ext_f64(phi_star(mu, pot, &[k * horizon], &exact)?.reported);
    let phi_power = ext_f64(phi_star(&mu_k, &pk, &[horizon], &exact)?.reported);
    let pressure = ext_f64(base.reported);
    let pressure_power = ext_f64(pow.reported);
    let entropy_error = (entropy_power - k as f64 * entropy).abs();
    let phi_star_error = scaled_error(phi_power, phi, k);
    let pressure_error = scaled_error(pressure_power, pressure, k);
    Ok(PowerReport {
        k,
        entropy,
        entropy_power,
        entropy_error,
        phi_star: phi,
        phi_star_power: phi_power,
        phi_star_error,
        pressure,
        pressure_power,
        pressure_error,
        schedule: schedule.to_vec(),
        passed: entropy_error <= tol && phi_star_error <= tol && pressure_error <= tol,
    })
}

/// Sampled check of `h_μ^{(r)}(T) + Φ_*(μ) ≤ π_T(Φ)`.
#[derive(Clone, Debug, Serialize)]
pub struct UpperBoundReport {
    pub samples: usize,
    pub seed: u64,
    pub horizon: usize,
    #[serde(serialize_with = "ser_f64")]
    pub envelope: f64,
    #[serde(serialize_with = "ser_f64")]
    pub allowance: f64,
    #[serde(serialize_with = "ser_f64")]
    pub max_objective: f64,
    /// `min (envelope + slack + allowance − objective)`.
    #[serde(serialize_with = "ser_f64")]
    pub worst_margin: f64,
    pub violations: usize,
    pub neg_inf_objectives: usize,
    pub pressure_neg_inf: bool,
    /// Pressure is `-inf` exactly when every sampled objective is.
    pub neg_inf_coherent: bool,
    pub passed: bool,
}

/// Draws `samples` random Markov measures (stream `i` of a ChaCha8 generator
/// seeded with `seed` for sample `i`) and compares each objective at
/// `horizon` with the upper envelope of the pressure along
/// `pressure_schedule`.
pub fn sampled_upper_bound<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    samples: usize,
    seed: u64,
    horizon: usize,
    pressure_schedule: &[usize],
    phi: &PhiStarOptions,
) -> Result<UpperBoundReport> {
    let pressure = estimate_pressure(sys, pot, None, pressure_schedule)?;
    let envelope = ext_f64(pressure.upper_envelope);
    let allowance = truncation_allowance(sys, pot, horizon)?;
    let objectives: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mu = RandomMarkovMeasure::random(sys, &mut rng)?;
            Ok(ext_f64(objective(&mu, pot, &[horizon], phi)?))
        })
        .collect::<Result<_>>()?;
    let bound = envelope + UPPER_SLACK + allowance;
    let violations = objectives.iter().filter(|&&o| o > bound).count();
    let worst_margin = objectives
        .iter()
        .map(|&o| if o == f64::NEG_INFINITY { f64::INFINITY } else { bound - o })
        .fold(f64::INFINITY, f64::min);
    let max_objective = objectives.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let neg_inf_objectives = objectives.iter().filter(|o| **o == f64::NEG_INFINITY).count();
    let pressure_neg_inf = pressure.reported.is_neg_inf();
    Ok(UpperBoundReport {
        samples,
        seed,
        horizon,
        envelope,
        allowance,
        max_objective,
        worst_margin,
        violations,
        neg_inf_objectives,
        pressure_neg_inf,
        neg_inf_coherent: pressure_neg_inf == (neg_inf_objectives == samples),
        passed: violations == 0,
    })
}
