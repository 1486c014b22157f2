//! Invariant measures on the skew product and the integrals the variational
//! principle is built from.
//!
//! Random Markov measures are the working class: they are Θ-invariant
//! exactly when `p_ω P_ω = p_{θω}`, and their fiber entropy has a closed
//! form. Finite atomic disintegrations carry the Gibbs-type measures of the
//! lower-bound construction.

use std::collections::BTreeMap;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, invalid, Error, Result};
use crate::ext::{ser_f64, ExtReal};
use crate::matrix::mul_into;
use crate::potentials::PotentialSeq;
use crate::pressure::{check_schedule, greedy_weighted, weighted_fiber_sum};
use crate::scalar::Scalar;
use crate::sum::{deterministic_sum, log_sum_exp};
use crate::system::{MetricParams, PowerLift, RandomSft, Symbol, Word};
use crate::walk::{check_budget, Walk, WORD_BUDGET};

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITERS: usize = 100_000;
const INVARIANCE_TOL: f64 = 1e-10;
const ROW_TOL: f64 = 1e-12;

/// A Θ-invariant random Markov measure: initial vectors `p_ω` and
/// row-stochastic kernels `P_ω` supported on the allowed transitions.
#[derive(Clone, Debug)]
pub struct RandomMarkovMeasure<T> {
    sys: RandomSft<T>,
    initial: Vec<Vec<T>>,
    /// Flat `a × a` kernel per fiber.
    kernel: Vec<Vec<T>>,
}

impl<T: Scalar> Serialize for RandomMarkovMeasure<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a, T> {
            initial: &'a [Vec<T>],
            kernels: Vec<Vec<Vec<T>>>,
        }
        Repr {
            initial: &self.initial,
            kernels: (0..self.sys.fibers()).map(|w| self.kernel(w)).collect(),
        }
        .serialize(s)
    }
}

fn nonneg_finite<T: Scalar>(v: T) -> bool {
    v.is_finite() && v >= T::zero()
}

impl<T: Scalar> RandomMarkovMeasure<T> {
    /// Validates support, stochasticity and invariance.
    pub fn new(sys: &RandomSft<T>, initial: Vec<Vec<T>>, kernels: Vec<Vec<Vec<T>>>) -> Result<Self> {
        let mu = Self::unvalidated(sys, initial, kernels)?;
        mu.check_invariant()?;
        Ok(mu)
    }

    fn unvalidated(sys: &RandomSft<T>, initial: Vec<Vec<T>>, kernels: Vec<Vec<Vec<T>>>) -> Result<Self> {
        let (m, a) = (sys.fibers(), sys.alphabet());
        if initial.len() != m || kernels.len() != m {
            return Err(invalid("measure", format!("expected {m} fibers")));
        }
        let tol = T::tol(ROW_TOL);
        let mut kernel = Vec::with_capacity(m);
        for (w, rows) in kernels.iter().enumerate() {
            if rows.len() != a || rows.iter().any(|r| r.len() != a) {
                return Err(invalid("measure", format!("kernel at fiber {w} is not {a}x{a}")));
            }
            let mut flat = Vec::with_capacity(a * a);
            for (i, row) in rows.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    if !nonneg_finite(v) {
                        return Err(invalid("measure", format!("kernel entry ({i},{j}) at fiber {w} is not a probability")));
                    }
                    if v > T::zero() && !sys.allowed(w, i as Symbol, j as Symbol) {
                        return Err(invalid("measure", format!("kernel at fiber {w} charges forbidden transition {i}->{j}")));
                    }
                }
                let s: T = row.iter().copied().sum();
                if (s - T::one()).abs() > tol {
                    return Err(invalid("measure", format!("kernel row {i} at fiber {w} sums to {s}")));
                }
                flat.extend_from_slice(row);
            }
            kernel.push(flat);
        }
        for (w, p) in initial.iter().enumerate() {
            if p.len() != a {
                return Err(invalid("measure", format!("initial vector at fiber {w} has length {}", p.len())));
            }
            for (i, &v) in p.iter().enumerate() {
                if !nonneg_finite(v) {
                    return Err(invalid("measure", format!("initial entry {i} at fiber {w} is not a probability")));
                }
                if v > T::zero() && !sys.allowed_first(w, i as Symbol) {
                    return Err(invalid("measure", format!("initial vector at fiber {w} charges inadmissible symbol {i}")));
                }
            }
            let s: T = p.iter().copied().sum();
            if (s - T::one()).abs() > tol {
                return Err(invalid("measure", format!("initial vector at fiber {w} sums to {s}")));
            }
        }
        Ok(RandomMarkovMeasure {
            sys: sys.clone(),
            initial,
            kernel,
        })
    }

    fn check_invariant(&self) -> Result<()> {
        let tol = T::tol(INVARIANCE_TOL);
        for w in 0..self.sys.fibers() {
            let pushed = self.push_forward(w, &self.initial[w]);
            let target = &self.initial[self.sys.base().theta(w)];
            let err = pushed
                .iter()
                .zip(target)
                .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
            if err > tol {
                return Err(invalid(
                    "measure",
                    format!("p_w P_w != p_(theta w) at fiber {w} (max deviation {err})"),
                ));
            }
        }
        Ok(())
    }

    /// `p P_ω`.
    fn push_forward(&self, omega: usize, p: &[T]) -> Vec<T> {
        let a = self.sys.alphabet();
        let k = &self.kernel[omega];
        (0..a)
            .map(|j| (0..a).fold(T::zero(), |s, i| s + p[i] * k[i * a + j]))
            .collect()
    }

    /// The invariant measure with the given kernels: on each θ-cycle the
    /// initial vector at the cycle head is the stationary vector of the
    /// kernel product around the cycle, propagated forward.
    pub fn from_kernels(sys: &RandomSft<T>, kernels: Vec<Vec<Vec<T>>>) -> Result<Self> {
        let a = sys.alphabet();
        let m = sys.fibers();
        let placeholder = (0..m)
            .map(|w| {
                let mut p = vec![T::zero(); a];
                let s = (0..a).find(|&i| sys.allowed_first(w, i as Symbol)).unwrap_or(0);
                p[s] = T::one();
                p
            })
            .collect();
        let mut mu = Self::unvalidated(sys, placeholder, kernels)?;
        for cycle in sys.base().cycles() {
            let head = cycle[0];
            let mut q = vec![T::zero(); a * a];
            for i in 0..a {
                q[i * a + i] = T::one();
            }
            let mut tmp = vec![T::zero(); a * a];
            for &w in &cycle {
                mul_into(a, &q, &mu.kernel[w], &mut tmp);
                std::mem::swap(&mut q, &mut tmp);
            }
            let support: Vec<bool> = (0..a).map(|i| sys.allowed_first(head, i as Symbol)).collect();
            let mut p = stationary(a, &q, &support)?;
            for &w in &cycle {
                mu.initial[w] = p.clone();
                p = mu.push_forward(w, &p);
            }
        }
        mu.check_invariant()?;
        Ok(mu)
    }

    /// Every row uniform over its allowed successors.
    pub fn uniform(sys: &RandomSft<T>) -> Result<Self> {
        let a = sys.alphabet();
        let kernels = (0..sys.fibers())
            .map(|w| {
                (0..a)
                    .map(|i| {
                        let allowed: Vec<bool> = (0..a).map(|j| sys.allowed(w, i as Symbol, j as Symbol)).collect();
                        let c = T::of_usize(allowed.iter().filter(|&&b| b).count());
                        allowed.iter().map(|&b| if b { T::one() / c } else { T::zero() }).collect()
                    })
                    .collect()
            })
            .collect();
        Self::from_kernels(sys, kernels)
    }

    /// The Bernoulli measure with symbol law `probs` on a full shift.
    pub fn bernoulli(sys: &RandomSft<T>, probs: &[T]) -> Result<Self> {
        let m = sys.fibers();
        let rows = vec![probs.to_vec(); sys.alphabet()];
        Self::new(sys, vec![probs.to_vec(); m], vec![rows; m])
    }

    /// Kernels with Dirichlet(1) rows on the allowed entries.
    pub fn random<R: Rng + ?Sized>(sys: &RandomSft<T>, rng: &mut R) -> Result<Self> {
        let a = sys.alphabet();
        let kernels = (0..sys.fibers())
            .map(|w| {
                (0..a)
                    .map(|i| {
                        let mut row: Vec<f64> = (0..a)
                            .map(|j| {
                                if sys.allowed(w, i as Symbol, j as Symbol) {
                                    -(1.0 - rng.gen::<f64>()).ln()
                                } else {
                                    0.0
                                }
                            })
                            .collect();
                        let s: f64 = row.iter().sum();
                        row.iter_mut().for_each(|x| *x /= s);
                        row.into_iter().map(T::of).collect()
                    })
                    .collect()
            })
            .collect();
        Self::from_kernels(sys, kernels)
    }

    pub fn system(&self) -> &RandomSft<T> {
        &self.sys
    }

    /// `p_ω`.
    pub fn initial(&self, omega: usize) -> &[T] {
        &self.initial[omega]
    }

    /// `P_ω(i, j)`.
    #[inline]
    pub fn transition(&self, omega: usize, i: Symbol, j: Symbol) -> T {
        let a = self.sys.alphabet();
        self.kernel[omega][i as usize * a + j as usize]
    }

    /// `P_ω` as rows.
    pub fn kernel(&self, omega: usize) -> Vec<Vec<T>> {
        self.kernel[omega].chunks(self.sys.alphabet()).map(|r| r.to_vec()).collect()
    }

    /// `μ_ω([w])`.
    pub fn cylinder_mass(&self, w: &Word) -> Result<T> {
        self.sys.base().check_fiber(w.fiber())?;
        if w.symbols().iter().any(|&s| s as usize >= self.sys.alphabet()) {
            return Err(domain("symbol outside the alphabet"));
        }
        Ok(self.mass_unchecked(w.fiber(), w.symbols()))
    }

    pub(crate) fn mass_unchecked(&self, omega: usize, s: &[Symbol]) -> T {
        let Some(&first) = s.first() else {
            return T::one();
        };
        let mut m = self.initial[omega][first as usize];
        let mut w = omega;
        for p in s.windows(2) {
            m *= self.transition(w, p[0], p[1]);
            w = self.sys.base().theta(w);
        }
        m
    }

    /// `h_μ^{(r)}(F) = −Σ_ω P(ω) Σ_{i,j} p_ω(i) P_ω(i,j) log P_ω(i,j)`.
    pub fn fiber_entropy(&self) -> T {
        let a = self.sys.alphabet();
        let mut terms = Vec::with_capacity(self.sys.fibers());
        for w in 0..self.sys.fibers() {
            let pw = self.sys.base().weight(w);
            if pw == T::zero() {
                continue;
            }
            let mut h = T::zero();
            for i in 0..a {
                let pi = self.initial[w][i];
                if pi == T::zero() {
                    continue;
                }
                for j in 0..a {
                    let q = self.kernel[w][i * a + j];
                    if q > T::zero() {
                        h -= pi * q * q.ln();
                    }
                }
            }
            terms.push(pw * h);
        }
        terms.into_iter().fold(T::zero(), |s, x| s + x)
    }

    /// `H_{μ_ω}` of the partition into `len`-cylinders at ω.
    pub fn cylinder_entropy(&self, omega: usize, len: usize) -> Result<T> {
        self.sys.base().check_fiber(omega)?;
        if len == 0 {
            return Ok(T::zero());
        }
        check_budget(&self.sys, omega, len, WORD_BUDGET)?;
        let mut terms = Vec::new();
        Walk::words(&self.sys, omega, len)
            .with_measure(self, true)
            .run(|_, _, m| terms.push(-m * m.ln()));
        Ok(deterministic_sum(&terms))
    }

    /// `(1/n) Σ_ω P(ω) H_{μ_ω}(n-cylinders)`, which decreases to the fiber
    /// entropy.
    pub fn entropy_partition_limit(&self, n: usize) -> Result<T> {
        if n == 0 {
            return Err(domain("n must be at least 1"));
        }
        let per: Vec<T> = (0..self.sys.fibers())
            .into_par_iter()
            .map(|w| {
                if self.sys.base().weight(w) == T::zero() {
                    Ok(T::zero())
                } else {
                    self.cylinder_entropy(w, n)
                }
            })
            .collect::<Result<_>>()?;
        let total = per
            .iter()
            .enumerate()
            .fold(T::zero(), |s, (w, &h)| s + self.sys.base().weight(w) * h);
        Ok(total / T::of_usize(n))
    }

    /// The measure on the power system: `p̃_ω(U) = μ_ω([U])` and
    /// `P̃_ω(U, V) = P_{θ^{k−1}ω}(u_{k−1}, v_0) Π P_{θ^{k+i}ω}(v_i, v_{i+1})`.
    pub fn lift(&self, lift: &PowerLift<T>) -> Result<RandomMarkovMeasure<T>> {
        let k = lift.k();
        let big = lift.lifted();
        let a = big.alphabet();
        let base = self.sys.base();
        let blocks: Vec<Vec<Symbol>> = (0..a).map(|u| lift.block(u as Symbol)).collect();
        let mut initial = Vec::with_capacity(big.fibers());
        let mut kernels = Vec::with_capacity(big.fibers());
        for w in 0..big.fibers() {
            initial.push(blocks.iter().map(|b| self.mass_unchecked(w, b)).collect());
            let join = base.theta_pow(w, k - 1);
            let next = base.theta_pow(w, k);
            kernels.push(
                blocks
                    .iter()
                    .map(|u| {
                        blocks
                            .iter()
                            .map(|v| self.transition(join, u[k - 1], v[0]) * self.chain_mass(next, v))
                            .collect()
                    })
                    .collect(),
            );
        }
        RandomMarkovMeasure::new(big, initial, kernels)
    }

    /// `Π P_{θ^iω}(s_i, s_{i+1})`.
    fn chain_mass(&self, omega: usize, s: &[Symbol]) -> T {
        let mut m = T::one();
        let mut w = omega;
        for p in s.windows(2) {
            m *= self.transition(w, p[0], p[1]);
            w = self.sys.base().theta(w);
        }
        m
    }
}

/// Stationary vector of the row-stochastic `q`, supported on `support`.
fn stationary<T: Scalar>(a: usize, q: &[T], support: &[bool]) -> Result<Vec<T>> {
    let apply = |x: &[T]| -> Vec<T> {
        (0..a)
            .map(|j| (0..a).fold(T::zero(), |s, i| s + x[i] * q[i * a + j]))
            .collect()
    };
    let cnt = T::of_usize(support.iter().filter(|&&b| b).count().max(1));
    let mut x: Vec<T> = support.iter().map(|&b| if b { T::one() / cnt } else { T::zero() }).collect();
    let tol = T::tol(POWER_TOL);
    let mut converged = false;
    for _ in 0..POWER_MAX_ITERS {
        let y = apply(&x);
        let res = x.iter().zip(&y).fold(T::zero(), |s, (u, v)| s + (*u - *v).abs());
        if res < tol {
            converged = true;
            break;
        }
        // lazy step: aperiodic for any irreducible class
        let half = T::of(0.5);
        x = x.iter().zip(&y).map(|(u, v)| half * (*u + *v)).collect();
    }
    if !converged {
        x = solve_stationary(a, q)?;
    }
    let mut y = apply(&x);
    let s: T = y.iter().copied().sum();
    y.iter_mut().for_each(|v| *v /= s);
    Ok(y)
}

/// Solves `x (Q − I) = 0`, `Σ x = 1` by Gaussian elimination.
fn solve_stationary<T: Scalar>(a: usize, q: &[T]) -> Result<Vec<T>> {
    // rows: equations; m[r][c] with augmented column a
    let mut m = vec![T::zero(); a * (a + 1)];
    let w = a + 1;
    for r in 0..a {
        for c in 0..a {
            let id = if r == c { T::one() } else { T::zero() };
            m[r * w + c] = q[c * a + r] - id;
        }
    }
    for c in 0..a {
        m[(a - 1) * w + c] = T::one();
    }
    m[(a - 1) * w + a] = T::one();
    for col in 0..a {
        let piv = (col..a)
            .max_by(|&i, &j| m[i * w + col].abs().partial_cmp(&m[j * w + col].abs()).unwrap())
            .unwrap();
        if m[piv * w + col].abs() < T::tol(1e-14) {
            return Err(Error::NotConverged(
                "stationary vector of a cycle kernel is not unique".into(),
            ));
        }
        for c in 0..w {
            m.swap(col * w + c, piv * w + c);
        }
        for r in 0..a {
            if r != col {
                let f = m[r * w + col] / m[col * w + col];
                for c in col..w {
                    let v = m[col * w + c];
                    m[r * w + c] -= f * v;
                }
            }
        }
    }
    Ok((0..a)
        .map(|i| (m[i * w + a] / m[i * w + i]).max(T::zero()))
        .collect())
}

/// How an integral was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralMethod {
    Exact,
    MonteCarlo,
}

/// Controls for [`phi_star`].
#[derive(Clone, Debug)]
pub struct PhiStarOptions {
    /// Largest number of words summed exactly per horizon.
    pub exact_budget: u128,
    /// Fall back to Monte Carlo above the exact budget.
    pub monte_carlo: bool,
    pub samples: usize,
    pub seed: u64,
}

impl Default for PhiStarOptions {
    fn default() -> Self {
        PhiStarOptions {
            exact_budget: 10_000_000,
            monte_carlo: true,
            samples: 100_000,
            seed: 0,
        }
    }
}

/// `Φ_*(μ) = lim (1/n) ∫ f_n dμ` along a schedule.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct PhiStarEstimate<T: Scalar> {
    pub schedule: Vec<usize>,
    /// `(1/n) ∫ f_n dμ`.
    pub values: Vec<ExtReal<T>>,
    /// Standard error of each value; absent for exact values.
    pub stderr: Vec<Option<T>>,
    pub methods: Vec<IntegralMethod>,
    /// Minimum over the schedule; the sequence is subadditive.
    pub envelope: ExtReal<T>,
    pub reported: ExtReal<T>,
}

/// `∫ f_n dμ` with its evaluation method and standard error. For additive
/// potentials invariance gives `∫ f_n dμ = n ∫ f_1 dμ`.
pub fn integral<T: Scalar>(
    mu: &RandomMarkovMeasure<T>,
    pot: &PotentialSeq<T>,
    n: usize,
    opts: &PhiStarOptions,
) -> Result<(ExtReal<T>, Option<T>, IntegralMethod)> {
    pot.check_shape(&mu.sys)?;
    if n == 0 {
        return Err(domain("horizon n must be at least 1"));
    }
    if pot.is_additive() {
        let (v, _, how) = integral_enumerated(mu, pot, 1, opts)?;
        return Ok((v.weighted(T::of_usize(n)), None, how));
    }
    integral_enumerated(mu, pot, n, opts)
}

/// `∫ f_n dμ` summed over all `locality(n)`-words, or sampled when that
/// exceeds the budget.
pub fn integral_enumerated<T: Scalar>(
    mu: &RandomMarkovMeasure<T>,
    pot: &PotentialSeq<T>,
    n: usize,
    opts: &PhiStarOptions,
) -> Result<(ExtReal<T>, Option<T>, IntegralMethod)> {
    let sys = &mu.sys;
    pot.check_shape(sys)?;
    if n == 0 {
        return Err(domain("horizon n must be at least 1"));
    }
    let len = pot.locality(n).max(1);
    let total: u128 = (0..sys.fibers())
        .map(|w| sys.word_count(w, len))
        .fold(0u128, |s, c| s.saturating_add(c));
    if total <= opts.exact_budget {
        let per: Vec<ExtReal<T>> = (0..sys.fibers())
            .into_par_iter()
            .map(|w| exact_fiber_integral(mu, pot, w, n, len))
            .collect();
        return Ok((weighted_fiber_sum(sys, &per)?, None, IntegralMethod::Exact));
    }
    if !opts.monte_carlo {
        return Err(Error::Resource(format!(
            "{total} words of length {len} exceed the exact budget of {} and sampling is disabled",
            opts.exact_budget
        )));
    }
    if opts.samples < 2 {
        return Err(domain("Monte Carlo needs at least 2 samples"));
    }
    let draws: Vec<ExtReal<T>> = (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            let (w, s) = sample_path(mu, len, &mut rng);
            pot.eval_unchecked(sys, n, w, &s)
        })
        .collect();
    if draws.iter().any(|d| d.is_neg_inf()) {
        return Ok((ExtReal::neg_inf(), None, IntegralMethod::MonteCarlo));
    }
    let vals: Vec<T> = draws.iter().map(|d| d.value()).collect();
    let cnt = T::of_usize(vals.len());
    let mean = deterministic_sum(&vals) / cnt;
    let sq: Vec<T> = vals.iter().map(|v| (*v - mean) * (*v - mean)).collect();
    let var = deterministic_sum(&sq) / (cnt - T::one());
    Ok((ExtReal::finite(mean), Some((var / cnt).sqrt()), IntegralMethod::MonteCarlo))
}

fn exact_fiber_integral<T: Scalar>(
    mu: &RandomMarkovMeasure<T>,
    pot: &PotentialSeq<T>,
    omega: usize,
    n: usize,
    len: usize,
) -> ExtReal<T> {
    let mut terms = Vec::new();
    let mut dead = false;
    Walk::words(&mu.sys, omega, len)
        .with_potential(pot, n)
        .with_measure(mu, true)
        .run(|_, v, m| match v.as_finite() {
            Some(x) => terms.push(m * x),
            None => dead = true,
        });
    if dead {
        ExtReal::neg_inf()
    } else {
        ExtReal::finite(deterministic_sum(&terms))
    }
}

fn pick<T: Scalar, R: Rng>(probs: impl Iterator<Item = T>, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.enumerate() {
        let p = p.to_f64_lossy();
        if p > 0.0 {
            last = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last
}

fn sample_path<T: Scalar, R: Rng>(mu: &RandomMarkovMeasure<T>, len: usize, rng: &mut R) -> (usize, Vec<Symbol>) {
    let base = mu.sys.base();
    let a = mu.sys.alphabet();
    let omega = pick(base.weights().iter().copied(), rng);
    let mut s = Vec::with_capacity(len);
    s.push(pick(mu.initial[omega].iter().copied(), rng) as Symbol);
    let mut w = omega;
    while s.len() < len {
        let i = *s.last().unwrap() as usize;
        s.push(pick(mu.kernel[w][i * a..(i + 1) * a].iter().copied(), rng) as Symbol);
        w = base.theta(w);
    }
    (omega, s)
}

/// Estimates `Φ_*(μ)` along `schedule`, exactly when the word count allows
/// and by Monte Carlo otherwise.
pub fn phi_star<T: Scalar>(
    mu: &RandomMarkovMeasure<T>,
    pot: &PotentialSeq<T>,
    schedule: &[usize],
    opts: &PhiStarOptions,
) -> Result<PhiStarEstimate<T>> {
    check_schedule(schedule)?;
    let mut values = Vec::new();
    let mut stderr = Vec::new();
    let mut methods = Vec::new();
    for &n in schedule {
        let (v, se, how) = integral(mu, pot, n, opts)?;
        let nn = T::of_usize(n);
        values.push(v.div(nn));
        stderr.push(se.map(|e| e / nn));
        methods.push(how);
    }
    Ok(PhiStarEstimate {
        schedule: schedule.to_vec(),
        envelope: values.iter().copied().min().expect("nonempty schedule"),
        reported: *values.last().expect("nonempty schedule"),
        values,
        stderr,
        methods,
    })
}

/// A measure whose fiber measures are finite sums of weighted points, each
/// point represented by a finite admissible word.
#[derive(Clone, Debug, Serialize)]
pub struct AtomicFiberMeasure<T> {
    atoms: Vec<Vec<(Vec<Symbol>, T)>>,
}

impl<T: Scalar> AtomicFiberMeasure<T> {
    pub fn new(sys: &RandomSft<T>, atoms: Vec<Vec<(Word, T)>>) -> Result<Self> {
        if atoms.len() != sys.fibers() {
            return Err(invalid("atomic measure", format!("expected {} fibers", sys.fibers())));
        }
        let tol = T::tol(INVARIANCE_TOL);
        let mut out = Vec::with_capacity(atoms.len());
        for (w, list) in atoms.into_iter().enumerate() {
            let mut total = T::zero();
            let mut fiber = Vec::with_capacity(list.len());
            for (word, m) in list {
                if word.fiber() != w || word.is_empty() {
                    return Err(invalid("atomic measure", format!("atom {word} misplaced at fiber {w}")));
                }
                if !sys.admissible_unchecked(w, word.symbols()) {
                    return Err(invalid("atomic measure", format!("atom {word} is not admissible")));
                }
                if !nonneg_finite(m) {
                    return Err(invalid("atomic measure", "weights must be nonnegative"));
                }
                total += m;
                fiber.push((word.into_symbols(), m));
            }
            if (total - T::one()).abs() > tol {
                return Err(invalid("atomic measure", format!("fiber {w} has total mass {total}")));
            }
            out.push(fiber);
        }
        Ok(AtomicFiberMeasure { atoms: out })
    }

    /// A point mass at one word per fiber.
    pub fn dirac(sys: &RandomSft<T>, words: Vec<Word>) -> Result<Self> {
        Self::new(sys, words.into_iter().map(|w| vec![(w, T::one())]).collect())
    }

    pub fn atoms(&self, omega: usize) -> &[(Vec<Symbol>, T)] {
        &self.atoms[omega]
    }

    pub fn fibers(&self) -> usize {
        self.atoms.len()
    }

    /// Shortest atom length.
    pub fn min_len(&self) -> usize {
        self.atoms
            .iter()
            .flatten()
            .map(|(s, _)| s.len())
            .min()
            .unwrap_or(0)
    }

    /// Atoms lengthened to at least `len` with their smallest admissible
    /// continuations.
    pub fn extended(&self, sys: &RandomSft<T>, len: usize) -> Self {
        let atoms = self
            .atoms
            .iter()
            .enumerate()
            .map(|(w, list)| {
                list.iter()
                    .map(|(s, m)| {
                        let mut s = s.clone();
                        sys.extend_min(w, &mut s, len);
                        (s, *m)
                    })
                    .collect()
            })
            .collect();
        AtomicFiberMeasure { atoms }
    }

    /// `∫ f_n dν`; atoms shorter than `locality(n)` are extended first.
    pub fn integral(&self, sys: &RandomSft<T>, pot: &PotentialSeq<T>, n: usize) -> Result<ExtReal<T>> {
        let per = (0..self.fibers())
            .map(|w| self.fiber_integral(sys, pot, w, n))
            .collect::<Result<Vec<_>>>()?;
        weighted_fiber_sum(sys, &per)
    }

    /// `∫ f_n(ω, ·) dν_ω`.
    pub fn fiber_integral(&self, sys: &RandomSft<T>, pot: &PotentialSeq<T>, omega: usize, n: usize) -> Result<ExtReal<T>> {
        pot.check_shape(sys)?;
        self.check_fibers(sys)?;
        sys.base().check_fiber(omega)?;
        if n == 0 {
            return Err(domain("horizon n must be at least 1"));
        }
        let need = pot.locality(n).max(1);
        let mut terms = Vec::with_capacity(self.atoms[omega].len());
        for (s, m) in &self.atoms[omega] {
            if *m == T::zero() {
                continue;
            }
            let v = if s.len() < need {
                let mut s = s.clone();
                sys.extend_min(omega, &mut s, need);
                pot.eval_unchecked(sys, n, omega, &s)
            } else {
                pot.eval_unchecked(sys, n, omega, s)
            };
            match v.as_finite() {
                Some(v) => terms.push(*m * v),
                None => return Ok(ExtReal::neg_inf()),
            }
        }
        Ok(ExtReal::finite(deterministic_sum(&terms)))
    }

    /// `Σ_ω P(ω) H_{ν_ω}(len-cylinders)`; atoms shorter than `len` are
    /// extended first.
    pub fn cylinder_entropy(&self, sys: &RandomSft<T>, len: usize) -> Result<T> {
        let mut total = T::zero();
        for w in 0..self.fibers() {
            let p = sys.base().weight(w);
            if p > T::zero() {
                total += p * self.fiber_cylinder_entropy(sys, w, len)?;
            }
        }
        Ok(total)
    }

    /// `H_{ν_ω}` of the partition of `E_ω` into `len`-cylinders.
    pub fn fiber_cylinder_entropy(&self, sys: &RandomSft<T>, omega: usize, len: usize) -> Result<T> {
        self.check_fibers(sys)?;
        sys.base().check_fiber(omega)?;
        let mut cells: BTreeMap<Vec<Symbol>, T> = BTreeMap::new();
        for (s, m) in &self.atoms[omega] {
            let mut s = s.clone();
            if s.len() < len {
                sys.extend_min(omega, &mut s, len);
            }
            s.truncate(len);
            *cells.entry(s).or_insert(T::zero()) += *m;
        }
        let terms: Vec<T> = cells
            .values()
            .filter(|&&m| m > T::zero())
            .map(|&m| -m * m.ln())
            .collect();
        Ok(deterministic_sum(&terms))
    }

    /// `μ_{ω'} = (1/|S|) Σ_{s∈S} T^s ν_{θ^{−s}ω'}`. Atoms are extended so
    /// that every shift keeps at least one symbol.
    pub fn shift_average(&self, sys: &RandomSft<T>, shifts: Range<usize>) -> Result<Self> {
        self.check_fibers(sys)?;
        if shifts.is_empty() {
            return Err(domain("empty shift range"));
        }
        let need = shifts.end;
        let src = if self.min_len() < need {
            self.extended(sys, need)
        } else {
            self.clone()
        };
        let scale = T::one() / T::of_usize(shifts.len());
        let base = sys.base();
        let atoms = (0..sys.fibers())
            .map(|target| {
                let mut cells: BTreeMap<Vec<Symbol>, T> = BTreeMap::new();
                for s in shifts.clone() {
                    let from = base.theta_pow_inv(target, s);
                    for (word, m) in &src.atoms[from] {
                        *cells.entry(word[s..].to_vec()).or_insert(T::zero()) += *m * scale;
                    }
                }
                cells.into_iter().collect()
            })
            .collect();
        Ok(AtomicFiberMeasure { atoms })
    }

    fn check_fibers(&self, sys: &RandomSft<T>) -> Result<()> {
        if self.atoms.len() != sys.fibers() {
            return Err(domain("atomic measure built for a different system"));
        }
        Ok(())
    }
}

/// The Gibbs-type measure `ν_{ω,n} = Σ_{x∈E} exp f_n(ω,x) δ_x / Σ exp f_n`
/// on the greedy maximal separated set `E` at each fiber.
pub fn gibbs_atomic<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    mp: &MetricParams<T>,
    n: usize,
) -> Result<AtomicFiberMeasure<T>> {
    let per: Vec<Vec<(Word, ExtReal<T>)>> = (0..sys.fibers())
        .into_par_iter()
        .map(|w| greedy_weighted(sys, pot, mp, w, n))
        .collect::<Result<_>>()?;
    let mut atoms = Vec::with_capacity(per.len());
    for (w, set) in per.into_iter().enumerate() {
        let vals: Vec<ExtReal<T>> = set.iter().map(|x| x.1).collect();
        let lz = log_sum_exp(&vals);
        let Some(z) = lz.as_finite() else {
            return Err(Error::Degenerate(format!(
                "f_{n} is -inf on the whole separated set at fiber {w}"
            )));
        };
        atoms.push(
            set.into_iter()
                .map(|(word, v)| (word, (v + (-z)).exp()))
                .collect::<Vec<_>>(),
        );
    }
    let mut mu = AtomicFiberMeasure::new(sys, atoms.iter().map(|l| l.iter().map(|(w, m)| (w.clone(), *m)).collect()).collect());
    if mu.is_err() {
        // renormalize rounding drift before validation
        for l in atoms.iter_mut() {
            let s: T = l.iter().map(|x| x.1).sum();
            l.iter_mut().for_each(|x| x.1 /= s);
        }
        mu = AtomicFiberMeasure::new(sys, atoms);
    }
    mu
}

/// `μ_n = (1/n) Σ_{i<n} T^i ν_n` for an atomic fiber family `ν_n`.
pub fn cesaro_average<T: Scalar>(
    sys: &RandomSft<T>,
    nu: &AtomicFiberMeasure<T>,
    n: usize,
) -> Result<AtomicFiberMeasure<T>> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    nu.shift_average(sys, 0..n)
}

/// One horizon of the shift-averaging comparison.
#[derive(Clone, Debug, Serialize)]
pub struct ShiftAverageRow {
    pub n: usize,
    /// `∫ f_n dν_n`.
    #[serde(serialize_with = "ser_f64")]
    pub lhs: f64,
    /// `((n−k+1)/k) ∫ f_k dμ'_n + 2k‖f_1‖` with
    /// `μ'_n = (1/(n−k+1)) Σ_{s≤n−k} T^s ν_n`.
    #[serde(serialize_with = "ser_f64")]
    pub rhs: f64,
    #[serde(serialize_with = "ser_f64")]
    pub margin: f64,
}

/// Result of [`shift_average_check`].
#[derive(Clone, Debug, Serialize)]
pub struct ShiftAverageReport {
    pub k: usize,
    pub rows: Vec<ShiftAverageRow>,
    #[serde(serialize_with = "ser_f64")]
    pub min_margin: f64,
    pub passed: bool,
}

fn ext_f64<T: Scalar>(v: ExtReal<T>) -> f64 {
    v.as_finite().map_or(f64::NEG_INFINITY, |x| x.to_f64_lossy())
}

/// Checks `∫ f_n dν_n ≤ ((n−k+1)/k) ∫ f_k dμ'_n + 2k‖f_1‖` for each
/// `(n, ν_n)` with `n ≥ k`: the averaged form of the chunking bound
/// `f_n ≤ (1/k) Σ_{s≤n−k} f_k∘Θ^s + 2k‖f_1‖`.
pub fn shift_average_check<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    family: &[(usize, AtomicFiberMeasure<T>)],
    k: usize,
    tol: f64,
) -> Result<ShiftAverageReport> {
    if k == 0 {
        return Err(domain("k must be at least 1"));
    }
    let norm = pot.f1_norm(sys)?.to_f64_lossy();
    let mut rows = Vec::new();
    for (n, nu) in family {
        let n = *n;
        if n < k {
            return Err(domain(format!("horizon {n} is below k = {k}")));
        }
        let lhs = ext_f64(nu.integral(sys, pot, n)?);
        let avg = nu
            .extended(sys, n - k + pot.locality(k).max(1))
            .shift_average(sys, 0..n - k + 1)?;
        let ik = ext_f64(avg.integral(sys, pot, k)?);
        let rhs = (n - k + 1) as f64 / k as f64 * ik + 2.0 * k as f64 * norm;
        let margin = if lhs == f64::NEG_INFINITY || rhs == f64::INFINITY {
            f64::INFINITY
        } else {
            rhs - lhs
        };
        rows.push(ShiftAverageRow { n, lhs, rhs, margin });
    }
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(ShiftAverageReport {
        k,
        passed: min_margin >= -tol,
        min_margin,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::BaseSystem;

    fn s2() -> RandomSft<f64> {
        let base = BaseSystem::new(vec![1, 0], vec![0.5, 0.5]).unwrap();
        RandomSft::new(base, 2, vec![vec![vec![1, 1], vec![1, 1]], vec![vec![1, 1], vec![1, 0]]]).unwrap()
    }

    fn three_cycle() -> RandomSft<f64> {
        let base = BaseSystem::new(vec![1, 2, 0, 3], vec![0.2, 0.2, 0.2, 0.4]).unwrap();
        RandomSft::new(
            base,
            3,
            vec![
                vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]],
                vec![vec![1, 1, 1], vec![1, 0, 0], vec![0, 1, 0]],
                vec![vec![0, 1, 0], vec![1, 1, 1], vec![0, 0, 1]],
                vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]],
            ],
        )
        .unwrap()
    }

    #[test]
    fn bernoulli_entropy() {
        let sys = RandomSft::full_shift(2).unwrap();
        let mu = RandomMarkovMeasure::bernoulli(&sys, &[0.5, 0.5]).unwrap();
        assert!((mu.fiber_entropy() - 2f64.ln()).abs() < 1e-15);
        let mu = RandomMarkovMeasure::bernoulli(&sys, &[0.25, 0.75]).unwrap();
        let h = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        assert!((mu.fiber_entropy() - h).abs() < 1e-15);
        for n in 1..8 {
            assert!((mu.entropy_partition_limit(n).unwrap() - h).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_measures() {
        let sys = RandomSft::full_shift(2).unwrap();
        assert!(RandomMarkovMeasure::bernoulli(&sys, &[0.5, 0.6]).is_err());
        assert!(RandomMarkovMeasure::bernoulli(&sys, &[-0.5, 1.5]).is_err());
        let g = RandomSft::new(BaseSystem::trivial(), 2, vec![vec![vec![1, 1], vec![1, 0]]]).unwrap();
        assert!(RandomMarkovMeasure::bernoulli(&g, &[0.5, 0.5]).is_err());
        // not invariant
        let r = RandomMarkovMeasure::new(&sys, vec![vec![0.5, 0.5]], vec![vec![vec![0.9, 0.1], vec![0.9, 0.1]]]);
        assert!(matches!(r, Err(Error::Invalid { .. })));
    }

    #[test]
    fn from_kernels_is_invariant() {
        let sys = three_cycle();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mu = RandomMarkovMeasure::random(&sys, &mut rng).unwrap();
            for w in 0..4 {
                let p = mu.push_forward(w, mu.initial(w));
                let q = mu.initial(sys.base().theta(w));
                for (x, y) in p.iter().zip(q) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
        // periodic cycle kernel: the lazy iteration handles it
        let sys = RandomSft::<f64>::full_shift(2).unwrap();
        let mu = RandomMarkovMeasure::from_kernels(&sys, vec![vec![vec![0.0, 1.0], vec![1.0, 0.0]]]).unwrap();
        assert!((mu.initial(0)[0] - 0.5).abs() < 1e-12);
        assert!(mu.fiber_entropy().abs() < 1e-15);
    }

    #[test]
    fn reducible_kernel_falls_back_or_fails() {
        // two closed classes: the stationary vector is not unique
        let sys = RandomSft::full_shift(2).unwrap();
        let r = RandomMarkovMeasure::from_kernels(&sys, vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]]);
        // the lazy iteration from the uniform start is already stationary
        assert!(r.is_ok());
        let q = [1.0, 0.0, 0.0, 1.0];
        assert!(matches!(solve_stationary(2, &q), Err(Error::NotConverged(_))));
        let q = [0.2f64, 0.8, 0.6, 0.4];
        let x = solve_stationary(2, &q).unwrap();
        assert!((x[0] - 0.6 / 1.4).abs() < 1e-14);
    }

    #[test]
    fn masses_sum_to_one() {
        let sys = three_cycle();
        let mu = RandomMarkovMeasure::uniform(&sys).unwrap();
        for w in 0..4 {
            for len in 1..6 {
                let s: f64 = sys
                    .enumerate_words(w, len)
                    .unwrap()
                    .map(|x| mu.cylinder_mass(&x).unwrap())
                    .sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn partition_entropy_decreases_to_fiber_entropy() {
        let sys = s2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mu = RandomMarkovMeasure::random(&sys, &mut rng).unwrap();
        let h = mu.fiber_entropy();
        let mut prev = f64::INFINITY;
        for n in 1..12 {
            let v = mu.entropy_partition_limit(n).unwrap();
            assert!(v <= prev + 1e-12 && v >= h - 1e-12);
            prev = v;
        }
        assert!(prev - h < 0.1);
    }

    #[test]
    fn phi_star_exact_and_monte_carlo() {
        let sys = RandomSft::full_shift(2).unwrap();
        let pot = PotentialSeq::additive_symbolwise(&sys, &[0.0, 2f64.ln()]).unwrap();
        let mu = RandomMarkovMeasure::bernoulli(&sys, &[0.25, 0.75]).unwrap();
        let est = phi_star(&mu, &pot, &[1, 4, 8], &PhiStarOptions::default()).unwrap();
        for v in &est.values {
            assert!((v.value() - 0.75 * 2f64.ln()).abs() < 1e-14);
        }
        // additive route agrees with explicit enumeration
        for n in [1, 3, 7] {
            let (e, _, _) = integral_enumerated(&mu, &pot, n, &PhiStarOptions::default()).unwrap();
            let (f, _, _) = integral(&mu, &pot, n, &PhiStarOptions::default()).unwrap();
            assert!((e.value() - f.value()).abs() < 1e-12);
        }
        use crate::matrix::{MatrixNorm, SquareMatrix};
        let diag = PotentialSeq::matrix_cocycle_uniform(
            &sys,
            MatrixNorm::Inf,
            vec![SquareMatrix::diag(&[2.0, 1.0]), SquareMatrix::diag(&[1.0, 3.0])],
        )
        .unwrap();
        let exact = phi_star(&mu, &diag, &[8], &PhiStarOptions::default()).unwrap();
        let opts = PhiStarOptions {
            exact_budget: 0,
            monte_carlo: true,
            samples: 4096,
            seed: 11,
        };
        let mc = phi_star(&mu, &diag, &[8], &opts).unwrap();
        assert_eq!(mc.methods, vec![IntegralMethod::MonteCarlo]);
        let se = mc.stderr[0].unwrap();
        assert!((mc.reported.value() - exact.reported.value()).abs() < 5.0 * se);
        let again = phi_star(&mu, &diag, &[8], &opts).unwrap();
        assert_eq!(mc.reported, again.reported);
        let off = PhiStarOptions {
            monte_carlo: false,
            ..opts
        };
        assert!(matches!(phi_star(&mu, &diag, &[8], &off), Err(Error::Resource(_))));
    }

    #[test]
    fn lift_matches_block_masses() {
        let sys = s2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mu = RandomMarkovMeasure::random(&sys, &mut rng).unwrap();
        for k in 1..=3 {
            let lift = PowerLift::new(&sys, k).unwrap();
            let big = mu.lift(&lift).unwrap();
            for w in 0..2 {
                for word in lift.lifted().enumerate_words(w, 3).unwrap() {
                    let orig = lift.decode(&word);
                    let a = big.cylinder_mass(&word).unwrap();
                    let b = mu.cylinder_mass(&orig).unwrap();
                    assert!((a - b).abs() < 1e-14);
                }
            }
            assert!((big.fiber_entropy() - k as f64 * mu.fiber_entropy()).abs() < 1e-12);
        }
    }

    #[test]
    fn atomic_measures() {
        let sys = s2();
        let mp = MetricParams::from_depth(0.5, 0).unwrap();
        let nu = gibbs_atomic(&sys, &PotentialSeq::zero(), &mp, 4).unwrap();
        // uniform over all 4-cylinders
        for w in 0..2 {
            let h = nu.cylinder_entropy(&sys, 4).unwrap();
            let want = 0.5 * ((sys.word_count(0, 4) as f64).ln() + (sys.word_count(1, 4) as f64).ln());
            assert!((h - want).abs() < 1e-12, "fiber {w}");
        }
        let mu = cesaro_average(&sys, &nu, 4).unwrap();
        for w in 0..2 {
            let s: f64 = mu.atoms(w).iter().map(|x| x.1).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        let bad = AtomicFiberMeasure::new(&sys, vec![vec![], vec![]]);
        assert!(bad.is_err());
    }

    #[test]
    fn gibbs_degenerate_when_all_neg_inf() {
        use crate::matrix::{MatrixNorm, SquareMatrix};
        let sys = RandomSft::full_shift(2).unwrap();
        let z = SquareMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let pot = PotentialSeq::matrix_cocycle_uniform(&sys, MatrixNorm::Inf, vec![z.clone(), z]).unwrap();
        let mp = MetricParams::from_depth(0.5, 0).unwrap();
        assert!(matches!(gibbs_atomic(&sys, &pot, &mp, 3), Err(Error::Degenerate(_))));
    }

    #[test]
    fn shift_average_bound_holds() {
        let sys = s2();
        let pot = PotentialSeq::additive(&sys, 2, vec![vec![0.3, -0.1, 0.7, 0.2], vec![-0.5, 0.4, 0.0, 1.1]]).unwrap();
        let mp = MetricParams::from_depth(0.5, 1).unwrap();
        let family: Vec<_> = (3..9).map(|n| (n, gibbs_atomic(&sys, &pot, &mp, n).unwrap())).collect();
        for k in 1..=3 {
            let r = shift_average_check(&sys, &pot, &family, k, 1e-9).unwrap();
            assert!(r.passed, "k={k}: {r:?}");
        }
    }
}
