//! Topological pressure of a subadditive potential sequence.
//!
//! For locally constant potentials and ε of depth `t`, the supremum over
//! `(ω, ε, n)`-separated sets is attained by one point per admissible
//! `(n + t)`-cylinder, so `π_T(Φ)(ω, ε, n)` is the partition function
//! `Z_n(ω) = Σ_{|w| = n+t} exp f_n(ω, w)`. The brute-force routine below
//! recomputes the same supremum from the Bowen metric alone.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::ext::ExtReal;
use crate::potentials::{word_index, PotentialKind, PotentialSeq};
use crate::scalar::Scalar;
use crate::sum::{compensated_sum, log_sum_exp};
use crate::system::{separated_unchecked, MetricParams, PowerLift, RandomSft, Symbol, Word};
use crate::walk::{check_budget, Walk, WORD_BUDGET};

/// Largest number of `(n+t)`-cylinders the brute-force oracle accepts.
pub const BRUTE_FORCE_CYLINDERS: u128 = 20;

fn check_depth<T: Scalar>(pot: &PotentialSeq<T>, n: usize, t: usize) -> Result<()> {
    if n == 0 {
        return Err(domain("horizon n must be at least 1"));
    }
    let need = pot.locality_deficit(n);
    if t < need {
        return Err(domain(format!(
            "depth t = {t} too small for f_{n}: the potential needs t >= {need}"
        )));
    }
    Ok(())
}

/// `f_n` values of all admissible `(n + t)`-words at ω, in lexicographic order.
pub(crate) fn cylinder_values<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    omega: usize,
    n: usize,
    t: usize,
) -> Result<Vec<ExtReal<T>>> {
    pot.check_shape(sys)?;
    sys.base().check_fiber(omega)?;
    check_depth(pot, n, t)?;
    let len = n + t;
    let count = check_budget(sys, omega, len, WORD_BUDGET)?;
    let mut out = Vec::with_capacity(count as usize);
    Walk::words(sys, omega, len)
        .with_potential(pot, n)
        .run(|_, v, _| out.push(v));
    Ok(out)
}

/// `log π_T(Φ)(ω, ε, n)` for ε of depth `t`. Additive potentials go
/// through a transfer operator; everything else is enumerated.
pub fn partition_function<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    omega: usize,
    n: usize,
    t: usize,
) -> Result<ExtReal<T>> {
    if pot.is_additive() {
        pot.check_shape(sys)?;
        sys.base().check_fiber(omega)?;
        check_depth(pot, n, t)?;
        if let Some(v) = transfer_log_partition(sys, pot, omega, n, t) {
            return Ok(v);
        }
    }
    partition_function_enumerated(sys, pot, omega, n, t)
}

/// [`partition_function`] by explicit enumeration of `(n + t)`-words.
pub fn partition_function_enumerated<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    omega: usize,
    n: usize,
    t: usize,
) -> Result<ExtReal<T>> {
    Ok(log_sum_exp(&cylinder_values(sys, pot, omega, n, t)?))
}

/// Largest transfer-operator state space.
const TRANSFER_STATES: usize = 1 << 22;

/// `log Z_n(ω)` for an additive potential of depth `d`, with states the last
/// `max(d−1, 1)` symbols. Weights are stored as `exp(φ − max φ)` and
/// renormalized each step. `None` if the state space is too large.
fn transfer_log_partition<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    omega: usize,
    n: usize,
    t: usize,
) -> Option<ExtReal<T>> {
    let a = sys.alphabet();
    let (d, table, shift) = match pot.kind() {
        PotentialKind::Zero => (1, None, T::zero()),
        PotentialKind::Constant { c } => (1, None, *c * T::of_usize(n)),
        PotentialKind::Additive { depth, table } => (*depth, Some(table), T::zero()),
        PotentialKind::MatrixCocycle { .. } => return None,
    };
    let k = d.saturating_sub(1).max(1);
    let states = a.checked_pow(k as u32).filter(|&s| s <= TRANSFER_STATES)?;
    let top = table.map_or(T::zero(), |tb| {
        tb.iter()
            .flatten()
            .fold(T::neg_infinity(), |m, &v| m.max(v))
    });
    let base = sys.base();
    let orbit = base.orbit(omega, n + t);
    // weight of the window of length d ending at position p, if it counts
    let window = |p: usize, idx: usize| -> T {
        match table {
            Some(tb) if p + 1 >= d && p + 1 - d < n => (tb[orbit[p + 1 - d]][idx] - top).exp(),
            _ => T::one(),
        }
    };
    let mut v = vec![T::zero(); states];
    // first k symbols
    let mut prefix = vec![0 as Symbol; k];
    Walk::words(sys, omega, k).run(|s, _, _| {
        prefix.copy_from_slice(s);
        let idx = word_index(&prefix, a);
        let w = if d == 1 { window(0, idx) } else { T::one() };
        v[idx] = w;
    });
    let mut log_scale = T::zero();
    let mut next = vec![T::zero(); states];
    let keep = states / a;
    for p in k..n + t {
        next.iter_mut().for_each(|x| *x = T::zero());
        let fiber = orbit[p - 1];
        for (st, &x) in v.iter().enumerate() {
            if x == T::zero() {
                continue;
            }
            let last = (st % a) as Symbol;
            for s in 0..a {
                if !sys.allowed(fiber, last, s as Symbol) {
                    continue;
                }
                let win = if d == 1 { s } else { st * a + s };
                let ns = (st % keep) * a + s;
                next[ns] += x * window(p, win);
            }
        }
        let m = next.iter().fold(T::zero(), |m, &x| m.max(x));
        if m == T::zero() {
            return Some(ExtReal::neg_inf());
        }
        next.iter_mut().for_each(|x| *x /= m);
        log_scale += m.ln();
        std::mem::swap(&mut v, &mut next);
    }
    let total = crate::sum::compensated_sum(&v);
    let windows = if table.is_some() { top * T::of_usize(n) } else { T::zero() };
    Some(ExtReal::ln_of(total) + (log_scale + windows + shift))
}

/// Candidate points for separated sets: one representative per admissible
/// `(n + t + 1)`-word, so that pairs inside an `(n + t)`-cylinder are
/// present and must be excluded by the metric.
fn candidates<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    omega: usize,
    n: usize,
    t: usize,
) -> Vec<(Vec<Symbol>, ExtReal<T>)> {
    let mut out = Vec::new();
    Walk::words(sys, omega, n + t + 1)
        .with_potential(pot, n)
        .run(|s, v, _| out.push((s.to_vec(), v)));
    out
}

/// Literal supremum of `Σ_{x∈F} exp f_n(ω, x)` over `(ω, ε, n)`-separated
/// families of cylinder representatives, by exhaustive branch and bound.
pub fn separated_pressure_bruteforce<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    mp: &MetricParams<T>,
    omega: usize,
    n: usize,
) -> Result<ExtReal<T>> {
    pot.check_shape(sys)?;
    sys.base().check_fiber(omega)?;
    let t = mp.depth();
    check_depth(pot, n, t)?;
    let cylinders = sys.word_count(omega, n + t);
    if cylinders > BRUTE_FORCE_CYLINDERS {
        return Err(Error::Resource(format!(
            "{cylinders} cylinders of length {} exceed the brute-force bound of {BRUTE_FORCE_CYLINDERS}",
            n + t
        )));
    }
    let mut cands = candidates(sys, pot, omega, n, t);
    let Some(top) = cands.iter().map(|c| c.1).max().and_then(|m| m.as_finite()) else {
        return Ok(ExtReal::neg_inf());
    };
    cands.sort_by_key(|c| std::cmp::Reverse(c.1));
    let weights: Vec<T> = cands.iter().map(|c| (c.1 + (-top)).exp()).collect();
    let k = cands.len();
    // conflict[i] has bit j set when i and j are NOT separated
    let conflict: Vec<u64> = (0..k)
        .map(|i| {
            (0..k).fold(0u64, |acc, j| {
                if i != j && !separated_unchecked(mp, &cands[i].0, &cands[j].0, n) {
                    acc | (1 << j)
                } else {
                    acc
                }
            })
        })
        .collect();
    let mut suffix = vec![T::zero(); k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1] + weights[i];
    }
    let mut best = T::zero();
    branch(0, 0, T::zero(), &weights, &conflict, &suffix, &mut best);
    Ok(ExtReal::ln_of(best) + top)
}

fn branch<T: Scalar>(i: usize, chosen: u64, acc: T, w: &[T], conflict: &[u64], suffix: &[T], best: &mut T) {
    if acc > *best {
        *best = acc;
    }
    if i == w.len() || acc + suffix[i] <= *best {
        return;
    }
    if conflict[i] & chosen == 0 {
        branch(i + 1, chosen | (1 << i), acc + w[i], w, conflict, suffix, best);
    }
    branch(i + 1, chosen, acc, w, conflict, suffix, best);
}

/// Max-first greedy construction of a maximal `(ω, ε, n)`-separated set:
/// repeatedly take the heaviest candidate separated from everything taken
/// so far. Ties go to the lexicographically smaller word.
pub fn greedy_separated_set<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    mp: &MetricParams<T>,
    omega: usize,
    n: usize,
) -> Result<Vec<Word>> {
    Ok(greedy_weighted(sys, pot, mp, omega, n)?
        .into_iter()
        .map(|(w, _)| w)
        .collect())
}

/// [`greedy_separated_set`] together with the `f_n` value of each point.
pub fn greedy_weighted<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    mp: &MetricParams<T>,
    omega: usize,
    n: usize,
) -> Result<Vec<(Word, ExtReal<T>)>> {
    pot.check_shape(sys)?;
    sys.base().check_fiber(omega)?;
    let t = mp.depth();
    check_depth(pot, n, t)?;
    check_budget(sys, omega, n + t + 1, WORD_BUDGET / 8)?;
    let mut cands = candidates(sys, pot, omega, n, t);
    // stable: equal weights keep lexicographic order
    cands.sort_by_key(|c| std::cmp::Reverse(c.1));
    // points agreeing on the first n + t symbols are exactly the
    // non-separated pairs
    let key_len = n + t;
    let mut taken: HashSet<Vec<Symbol>> = HashSet::new();
    let mut out = Vec::new();
    for (s, v) in cands {
        if taken.insert(s[..key_len].to_vec()) {
            out.push((sys.word_unchecked(omega, s), v));
        }
    }
    Ok(out)
}

/// Convergence record for `π_T(Φ)`.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct PressureEstimate<T: Scalar> {
    pub schedule: Vec<usize>,
    /// `A_n = Σ_ω P(ω) log Z_n(ω)`.
    pub log_partition: Vec<ExtReal<T>>,
    /// `A_n / n`.
    pub values: Vec<ExtReal<T>>,
    /// `min_n A_n / n` over the schedule.
    pub upper_envelope: ExtReal<T>,
    /// `A_{n_max} / n_max`, or `-inf` if any `A_n` is `-inf`.
    pub reported: ExtReal<T>,
    pub depth_t: usize,
}

impl<T: Scalar> PressureEstimate<T> {
    /// Running minimum of `A_n / n` along the schedule.
    pub fn running_envelope(&self) -> Vec<ExtReal<T>> {
        let mut cur: Option<ExtReal<T>> = None;
        self.values
            .iter()
            .map(|&v| {
                let next = match cur {
                    None => v,
                    Some(c) => c.min(v),
                };
                cur = Some(next);
                next
            })
            .collect()
    }

    /// `min (A_n + A_m − A_{n+m})` over schedule pairs with `n + m` also
    /// scheduled; `+inf` if there is no such pair or all are infinite.
    pub fn fekete_margin(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for (i, &n) in self.schedule.iter().enumerate() {
            for (j, &m) in self.schedule.iter().enumerate().skip(i) {
                let Some(k) = self.schedule.iter().position(|&x| x == n + m) else {
                    continue;
                };
                let lhs = self.log_partition[k];
                if lhs.is_neg_inf() {
                    continue;
                }
                let rhs = self.log_partition[i] + self.log_partition[j];
                let margin = match rhs.as_finite() {
                    Some(r) => (r - lhs.value()).to_f64_lossy(),
                    None => f64::NEG_INFINITY,
                };
                worst = worst.min(margin);
            }
        }
        worst
    }
}

pub(crate) fn check_schedule(schedule: &[usize]) -> Result<()> {
    if schedule.is_empty() {
        return Err(domain("empty horizon schedule"));
    }
    if schedule[0] == 0 {
        return Err(domain("horizons must be positive"));
    }
    if schedule.windows(2).any(|p| p[0] >= p[1]) {
        return Err(domain("horizon schedule must be strictly increasing"));
    }
    Ok(())
}

/// `A_n = Σ_ω P(ω) log Z_n(ω)` at depth `t`.
pub fn averaged_log_partition<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    n: usize,
    t: usize,
) -> Result<ExtReal<T>> {
    let per_fiber: Vec<ExtReal<T>> = (0..sys.fibers())
        .into_par_iter()
        .map(|w| partition_function(sys, pot, w, n, t))
        .collect::<Result<_>>()?;
    weighted_fiber_sum(sys, &per_fiber)
}

/// `Σ_ω P(ω) v_ω` with `0 · (-inf) = 0`.
pub(crate) fn weighted_fiber_sum<T: Scalar>(sys: &RandomSft<T>, v: &[ExtReal<T>]) -> Result<ExtReal<T>> {
    let mut terms = Vec::with_capacity(v.len());
    for (w, &x) in v.iter().enumerate() {
        let p = sys.base().weight(w);
        if p == T::zero() {
            continue;
        }
        match x.as_finite() {
            Some(f) => terms.push(p * f),
            None => return Ok(ExtReal::neg_inf()),
        }
    }
    Ok(ExtReal::finite(compensated_sum(&terms)))
}

/// Estimates `π_T(Φ)` from `A_n / n` along `schedule`. `depth` defaults to
/// the smallest legal value, the potential's locality deficit.
pub fn estimate_pressure<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    depth: Option<usize>,
    schedule: &[usize],
) -> Result<PressureEstimate<T>> {
    pot.check_shape(sys)?;
    check_schedule(schedule)?;
    let need = schedule
        .iter()
        .map(|&n| pot.locality_deficit(n))
        .max()
        .unwrap_or(0);
    let t = depth.unwrap_or(need);
    if t < need {
        return Err(domain(format!(
            "depth t = {t} too small: the potential needs t >= {need}"
        )));
    }
    let mut log_partition = Vec::with_capacity(schedule.len());
    for &n in schedule {
        log_partition.push(averaged_log_partition(sys, pot, n, t)?);
    }
    let values: Vec<ExtReal<T>> = log_partition
        .iter()
        .zip(schedule)
        .map(|(a, &n)| a.div(T::of_usize(n)))
        .collect();
    let upper_envelope = values.iter().copied().min().expect("nonempty schedule");
    let reported = if log_partition.iter().any(|a| a.is_neg_inf()) {
        ExtReal::neg_inf()
    } else {
        *values.last().expect("nonempty schedule")
    };
    Ok(PressureEstimate {
        schedule: schedule.to_vec(),
        log_partition,
        values,
        upper_envelope,
        reported,
        depth_t: t,
    })
}

/// Pressure of `Φ^k` for the power system `T^k` (base map θ^k, length-k
/// blocks as symbols).
pub fn pressure_of_power<T: Scalar>(
    sys: &RandomSft<T>,
    pot: &PotentialSeq<T>,
    k: usize,
    depth: Option<usize>,
    schedule: &[usize],
) -> Result<PressureEstimate<T>> {
    let lift = PowerLift::new(sys, k)?;
    let pk = pot.power(&lift)?;
    estimate_pressure(lift.lifted(), &pk, depth, schedule)
}
