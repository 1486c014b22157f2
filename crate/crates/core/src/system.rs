//! Finite base systems, random subshifts of finite type, words and the Bowen
//! metric on cylinder representatives.

use serde::Serialize;

use crate::error::{domain, invalid, Result};
use crate::scalar::Scalar;

/// Symbol of the fiber alphabet.
pub type Symbol = u8;

/// Largest alphabet representable by [`Symbol`].
pub const MAX_ALPHABET: usize = 256;

/// A finite probability space with an invertible measure-preserving map θ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaseSystem<T> {
    perm: Vec<usize>,
    weights: Vec<T>,
    #[serde(skip)]
    inverse: Vec<usize>,
}

impl<T: Scalar> BaseSystem<T> {
    pub fn new(perm: Vec<usize>, weights: Vec<T>) -> Result<Self> {
        let m = perm.len();
        if m == 0 {
            return Err(invalid("base system", "no base points"));
        }
        if weights.len() != m {
            return Err(invalid(
                "base system",
                format!("{} weights for {m} base points", weights.len()),
            ));
        }
        let mut inverse = vec![usize::MAX; m];
        for (w, &p) in perm.iter().enumerate() {
            if p >= m || inverse[p] != usize::MAX {
                return Err(invalid("base system", "perm is not a bijection"));
            }
            inverse[p] = w;
        }
        if weights.iter().any(|&w| !(w >= T::zero()) || !w.is_finite()) {
            return Err(invalid("base system", "weights must be finite and nonnegative"));
        }
        let total: T = crate::sum::compensated_sum(&weights);
        if (total - T::one()).abs() > T::tol(1e-12) {
            return Err(invalid("base system", format!("weights sum to {total}, not 1")));
        }
        for w in 0..m {
            if (weights[perm[w]] - weights[w]).abs() > T::tol(1e-12) {
                return Err(invalid(
                    "base system",
                    format!("weights are not θ-invariant at ω={w}"),
                ));
            }
        }
        Ok(BaseSystem {
            perm,
            weights,
            inverse,
        })
    }

    /// Uniform weights `1/m`, which are invariant under any permutation.
    pub fn uniform(perm: Vec<usize>) -> Result<Self> {
        let m = perm.len().max(1);
        let w = T::one() / T::of_usize(m);
        Self::new(perm, vec![w; m])
    }

    /// One fixed base point: the deterministic case.
    pub fn trivial() -> Self {
        Self::new(vec![0], vec![T::one()]).expect("trivial base")
    }

    pub fn size(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, omega: usize) -> T {
        self.weights[omega]
    }

    pub fn theta(&self, omega: usize) -> usize {
        self.perm[omega]
    }

    pub fn theta_inv(&self, omega: usize) -> usize {
        self.inverse[omega]
    }

    pub fn theta_pow(&self, mut omega: usize, k: usize) -> usize {
        for _ in 0..k {
            omega = self.perm[omega];
        }
        omega
    }

    /// `θ^{-k} ω`.
    pub fn theta_pow_inv(&self, mut omega: usize, k: usize) -> usize {
        for _ in 0..k {
            omega = self.inverse[omega];
        }
        omega
    }

    /// Orbit `ω, θω, …, θ^{len-1}ω`.
    pub fn orbit(&self, omega: usize, len: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(len);
        let mut w = omega;
        for _ in 0..len {
            out.push(w);
            w = self.perm[w];
        }
        out
    }

    /// Cycles of θ, each listed from its smallest element along the orbit.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let m = self.size();
        let mut seen = vec![false; m];
        let mut out = Vec::new();
        for start in 0..m {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut w = start;
            while !seen[w] {
                seen[w] = true;
                cycle.push(w);
                w = self.perm[w];
            }
            out.push(cycle);
        }
        out
    }

    /// Base system with map θ^k and the same weights.
    pub fn power(&self, k: usize) -> Self {
        let perm = (0..self.size()).map(|w| self.theta_pow(w, k)).collect();
        Self::new(perm, self.weights.clone()).expect("θ^k preserves P")
    }

    pub(crate) fn check_fiber(&self, omega: usize) -> Result<()> {
        if omega >= self.size() {
            Err(domain(format!("fiber {omega} out of range (m = {})", self.size())))
        } else {
            Ok(())
        }
    }
}

/// Bundle random subshift of finite type: fiber ω carries a 0/1 transition
/// matrix `A_ω`, and a point of `E_ω` is a one-sided sequence with
/// `A_{θ^i ω}(x_i, x_{i+1}) = 1` for all `i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomSft<T> {
    base: BaseSystem<T>,
    alphabet: usize,
    transitions: Vec<Vec<bool>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    first: Option<Vec<Vec<bool>>>,
}

impl<T: Scalar> RandomSft<T> {
    /// `transitions[ω][i][j]` is `A_ω(i, j)` and must be 0 or 1.
    pub fn new(base: BaseSystem<T>, alphabet: usize, transitions: Vec<Vec<Vec<u8>>>) -> Result<Self> {
        if alphabet == 0 || alphabet > MAX_ALPHABET {
            return Err(invalid("subshift", format!("alphabet size {alphabet} not in 1..=256")));
        }
        if transitions.len() != base.size() {
            return Err(invalid(
                "subshift",
                format!("{} transition matrices for {} fibers", transitions.len(), base.size()),
            ));
        }
        let mut flat = Vec::with_capacity(base.size());
        for (w, a) in transitions.iter().enumerate() {
            if a.len() != alphabet || a.iter().any(|r| r.len() != alphabet) {
                return Err(invalid("subshift", format!("A_{w} is not {alphabet}x{alphabet}")));
            }
            let mut m = vec![false; alphabet * alphabet];
            for (i, row) in a.iter().enumerate() {
                for (j, &e) in row.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => m[i * alphabet + j] = true,
                        _ => return Err(invalid("subshift", format!("A_{w}({i},{j}) = {e} is not 0/1"))),
                    }
                }
            }
            for i in 0..alphabet {
                if !(0..alphabet).any(|j| m[i * alphabet + j]) {
                    return Err(invalid("subshift", format!("row {i} of A_{w} is zero")));
                }
                if !(0..alphabet).any(|j| m[j * alphabet + i]) {
                    return Err(invalid("subshift", format!("column {i} of A_{w} is zero")));
                }
            }
            flat.push(m);
        }
        Ok(RandomSft {
            base,
            alphabet,
            transitions: flat,
            first: None,
        })
    }

    /// Full `a`-shift over the trivial base.
    pub fn full_shift(alphabet: usize) -> Result<Self> {
        Self::new(
            BaseSystem::trivial(),
            alphabet,
            vec![vec![vec![1; alphabet]; alphabet]],
        )
    }

    pub fn base(&self) -> &BaseSystem<T> {
        &self.base
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn fibers(&self) -> usize {
        self.base.size()
    }

    /// `A_ω(i, j) = 1`.
    #[inline]
    pub fn allowed(&self, omega: usize, i: Symbol, j: Symbol) -> bool {
        self.transitions[omega][i as usize * self.alphabet + j as usize]
    }

    /// Whether `s` may begin a word of `E_ω`. Always true for systems built
    /// with [`RandomSft::new`]; power lifts restrict it.
    #[inline]
    pub fn allowed_first(&self, omega: usize, s: Symbol) -> bool {
        match &self.first {
            None => true,
            Some(f) => f[omega][s as usize],
        }
    }

    /// Transition matrix of fiber ω as 0/1 rows.
    pub fn transition_matrix(&self, omega: usize) -> Vec<Vec<u8>> {
        (0..self.alphabet)
            .map(|i| {
                (0..self.alphabet)
                    .map(|j| self.transitions[omega][i * self.alphabet + j] as u8)
                    .collect()
            })
            .collect()
    }

    fn check_symbols(&self, symbols: &[Symbol]) -> Result<()> {
        if let Some(&s) = symbols.iter().find(|&&s| s as usize >= self.alphabet) {
            return Err(domain(format!("symbol {s} outside alphabet of size {}", self.alphabet)));
        }
        Ok(())
    }

    /// Admissibility of a finite word at fiber ω; the step `s_i → s_{i+1}`
    /// is governed by `A_{θ^i ω}`.
    pub fn is_admissible(&self, omega: usize, symbols: &[Symbol]) -> Result<bool> {
        self.base.check_fiber(omega)?;
        if symbols.is_empty() {
            return Err(domain("empty word"));
        }
        self.check_symbols(symbols)?;
        Ok(self.admissible_unchecked(omega, symbols))
    }

    pub(crate) fn admissible_unchecked(&self, omega: usize, symbols: &[Symbol]) -> bool {
        if !self.allowed_first(omega, symbols[0]) {
            return false;
        }
        let mut w = omega;
        for pair in symbols.windows(2) {
            if !self.allowed(w, pair[0], pair[1]) {
                return false;
            }
            w = self.base.theta(w);
        }
        true
    }

    /// Admissible words of length `n` at fiber ω, in lexicographic order.
    pub fn enumerate_words(&self, omega: usize, n: usize) -> Result<WordIter<'_, T>> {
        self.base.check_fiber(omega)?;
        if n == 0 {
            return Err(domain("word length must be at least 1"));
        }
        Ok(WordIter::new(self, omega, n))
    }

    /// Number of admissible `n`-words at ω by path counting (saturating).
    pub fn word_count(&self, omega: usize, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let a = self.alphabet;
        let mut v: Vec<u128> = (0..a)
            .map(|s| self.allowed_first(omega, s as Symbol) as u128)
            .collect();
        let mut w = omega;
        for _ in 1..n {
            let mut next = vec![0u128; a];
            for i in 0..a {
                if v[i] == 0 {
                    continue;
                }
                for (j, nj) in next.iter_mut().enumerate() {
                    if self.allowed(w, i as Symbol, j as Symbol) {
                        *nj = nj.saturating_add(v[i]);
                    }
                }
            }
            v = next;
            w = self.base.theta(w);
        }
        v.into_iter().fold(0u128, |acc, x| acc.saturating_add(x))
    }

    /// Largest word count over fibers.
    pub fn max_word_count(&self, n: usize) -> u128 {
        (0..self.fibers()).map(|w| self.word_count(w, n)).max().unwrap_or(0)
    }

    /// Θ(ω, x) = (θω, T_ω x) on a cylinder representative.
    pub fn skew_step(&self, w: &Word) -> Result<Word> {
        self.base.check_fiber(w.fiber)?;
        if w.len() < 2 {
            return Err(domain("skew step needs a word of length at least 2"));
        }
        Ok(Word {
            fiber: self.base.theta(w.fiber),
            symbols: w.symbols[1..].to_vec(),
        })
    }

    /// `Θ^k` on a representative: drops `k` symbols and advances the fiber.
    pub fn skew_step_n(&self, w: &Word, k: usize) -> Result<Word> {
        self.base.check_fiber(w.fiber)?;
        if w.len() <= k {
            return Err(domain(format!("cannot shift a word of length {} by {k}", w.len())));
        }
        Ok(Word {
            fiber: self.base.theta_pow(w.fiber, k),
            symbols: w.symbols[k..].to_vec(),
        })
    }

    /// Extends `symbols` (admissible at ω) to length `len` with the
    /// lexicographically smallest admissible continuation.
    pub(crate) fn extend_min(&self, omega: usize, symbols: &mut Vec<Symbol>, len: usize) {
        debug_assert!(!symbols.is_empty());
        while symbols.len() < len {
            let i = symbols.len() - 1;
            let w = self.base.theta_pow(omega, i);
            let last = symbols[i];
            let next = (0..self.alphabet as Symbol)
                .find(|&j| self.allowed(w, last, j))
                .expect("no dead ends");
            symbols.push(next);
        }
    }

    /// Word at fiber ω without validation; callers guarantee admissibility.
    pub(crate) fn word_unchecked(&self, omega: usize, symbols: Vec<Symbol>) -> Word {
        debug_assert!(self.admissible_unchecked(omega, &symbols));
        Word { fiber: omega, symbols }
    }
}

/// A finite admissible word at a fiber: the representative of a cylinder of `E_ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Word {
    fiber: usize,
    symbols: Vec<Symbol>,
}

impl Word {
    pub fn new<T: Scalar>(sys: &RandomSft<T>, fiber: usize, symbols: Vec<Symbol>) -> Result<Self> {
        if !sys.is_admissible(fiber, &symbols)? {
            return Err(domain(format!("word {symbols:?} is not admissible at fiber {fiber}")));
        }
        Ok(Word { fiber, symbols })
    }

    /// Parses a digit string such as `"0110"`.
    pub fn parse<T: Scalar>(sys: &RandomSft<T>, fiber: usize, digits: &str) -> Result<Self> {
        let symbols = digits
            .chars()
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as Symbol)
                    .ok_or_else(|| domain(format!("bad symbol {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sys, fiber, symbols)
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:", self.fiber)?;
        for s in &self.symbols {
            if *s < 36 {
                write!(f, "{}", std::char::from_digit(*s as u32, 36).unwrap())?;
            } else {
                write!(f, "[{s}]")?;
            }
        }
        Ok(())
    }
}

/// Lexicographic stream of admissible words of a fixed length.
pub struct WordIter<'a, T> {
    sys: &'a RandomSft<T>,
    fibers: Vec<usize>,
    cur: Vec<Symbol>,
    started: bool,
    done: bool,
}

impl<'a, T: Scalar> WordIter<'a, T> {
    fn new(sys: &'a RandomSft<T>, omega: usize, n: usize) -> Self {
        WordIter {
            sys,
            fibers: sys.base.orbit(omega, n),
            cur: Vec::with_capacity(n),
            started: false,
            done: false,
        }
    }

    fn candidate_ok(&self, pos: usize, s: Symbol) -> bool {
        if pos == 0 {
            self.sys.allowed_first(self.fibers[0], s)
        } else {
            self.sys.allowed(self.fibers[pos - 1], self.cur[pos - 1], s)
        }
    }

    /// Fills `cur` up to full length with smallest admissible symbols.
    fn fill(&mut self) -> bool {
        let n = self.fibers.len();
        while self.cur.len() < n {
            let pos = self.cur.len();
            match (0..self.sys.alphabet as u16).map(|s| s as Symbol).find(|&s| self.candidate_ok(pos, s)) {
                Some(s) => self.cur.push(s),
                None => return false,
            }
        }
        true
    }
}

impl<'a, T: Scalar> Iterator for WordIter<'a, T> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if !self.fill() {
                self.done = true;
                return None;
            }
        } else {
            loop {
                let Some(last) = self.cur.pop() else {
                    self.done = true;
                    return None;
                };
                let pos = self.cur.len();
                let next = (last as u16 + 1..self.sys.alphabet as u16)
                    .map(|s| s as Symbol)
                    .find(|&s| self.candidate_ok(pos, s));
                if let Some(s) = next {
                    self.cur.push(s);
                    if self.fill() {
                        break;
                    }
                    self.done = true;
                    return None;
                }
            }
        }
        Some(Word {
            fiber: self.fibers[0],
            symbols: self.cur.clone(),
        })
    }
}

/// Symbol metric `d(x, y) = λ^{min{i : x_i ≠ y_i}}` with a separation scale ε.
///
/// The depth `t` is the integer with `λ^{t+1} ≤ ε < λ^t`; two points are
/// then `(ω, ε, n)`-separated exactly when they disagree before index `n + t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricParams<T> {
    lambda: T,
    epsilon: T,
    depth: usize,
}

const MAX_DEPTH: usize = 4096;

impl<T: Scalar> MetricParams<T> {
    pub fn new(lambda: T, epsilon: T) -> Result<Self> {
        if !(lambda > T::zero() && lambda < T::one()) {
            return Err(domain(format!("lambda = {lambda} not in (0, 1)")));
        }
        if !(epsilon > T::zero() && epsilon < T::one()) {
            return Err(domain(format!(
                "epsilon = {epsilon} not in (0, 1); at epsilon >= 1 no pair of points is separated"
            )));
        }
        let mut t = 0usize;
        while lambda.powi(t as i32 + 1) > epsilon {
            t += 1;
            if t > MAX_DEPTH {
                return Err(domain("epsilon too small: separation depth exceeds 4096"));
            }
        }
        Ok(MetricParams {
            lambda,
            epsilon,
            depth: t,
        })
    }

    /// Metric parameters for a given depth, with ε at the geometric midpoint
    /// of its depth class.
    pub fn from_depth(lambda: T, depth: usize) -> Result<Self> {
        if !(lambda > T::zero() && lambda < T::one()) {
            return Err(domain(format!("lambda = {lambda} not in (0, 1)")));
        }
        if depth > MAX_DEPTH {
            return Err(domain("separation depth exceeds 4096"));
        }
        let epsilon = lambda.powi(depth as i32) * lambda.sqrt();
        let mp = Self::new(lambda, epsilon)?;
        debug_assert_eq!(mp.depth, depth);
        Ok(mp)
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// Separation depth t(ε).
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `d_n^ω(x, y)` for points with first disagreement at `j`
    /// (`None` for identical points).
    pub fn bowen_distance_at(&self, first_disagreement: Option<usize>, n: usize) -> T {
        match first_disagreement {
            None => T::zero(),
            Some(j) => {
                let e = (j + 1).saturating_sub(n);
                self.lambda.powi(e as i32)
            }
        }
    }
}

/// Index of the first position where `u` and `v` differ, within their common length.
pub fn first_disagreement(u: &[Symbol], v: &[Symbol]) -> Option<usize> {
    u.iter().zip(v).position(|(a, b)| a != b)
}

/// Decides `d_n^ω(x, y) > ε` for any points `x ∈ [u]`, `y ∈ [v]`.
pub fn bowen_separated<T: Scalar>(mp: &MetricParams<T>, u: &Word, v: &Word, n: usize) -> Result<bool> {
    if u.fiber != v.fiber {
        return Err(domain(format!(
            "words live on different fibers ({} and {})",
            u.fiber, v.fiber
        )));
    }
    let need = n + mp.depth;
    if u.len() < need || v.len() < need {
        return Err(domain(format!(
            "representatives need length >= n + t = {need}, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(separated_unchecked(mp, &u.symbols, &v.symbols, n))
}

#[inline]
pub(crate) fn separated_unchecked<T: Scalar>(mp: &MetricParams<T>, u: &[Symbol], v: &[Symbol], n: usize) -> bool {
    // agreement on the whole common prefix (of length >= n + t) means
    // distance at most λ^{t+1} ≤ ε
    let j = first_disagreement(u, v);
    j.is_some() && mp.bowen_distance_at(j, n) > mp.epsilon
}

/// The k-th power of a random subshift: super-symbols are length-`k` blocks.
///
/// A block `U = (u_0 … u_{k-1})` is encoded as `Σ u_j a^{k-1-j}`, so the
/// lexicographic order of super-words agrees with that of the underlying
/// words. The lifted system runs over the base map θ^k; block `U` may start
/// a word at ω iff it is admissible there, and `U → V` is allowed at ω iff
/// `u_{k-1} → v_0` is allowed at `θ^{k-1} ω` and `V` is admissible at `θ^k ω`.
#[derive(Clone, Debug)]
pub struct PowerLift<T> {
    k: usize,
    original: RandomSft<T>,
    lifted: RandomSft<T>,
}

impl<T: Scalar> PowerLift<T> {
    pub fn new(sys: &RandomSft<T>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(domain("power k must be at least 1"));
        }
        let a = sys.alphabet;
        let big = (a as u128)
            .checked_pow(k as u32)
            .filter(|&b| b <= MAX_ALPHABET as u128)
            .ok_or_else(|| {
                crate::error::Error::Resource(format!("super-alphabet {a}^{k} exceeds {MAX_ALPHABET}"))
            })? as usize;
        let base = sys.base.power(k);
        let m = sys.fibers();
        let blocks: Vec<Vec<Symbol>> = (0..big).map(|u| decode_block(u, a, k)).collect();
        let mut first = vec![vec![false; big]; m];
        let mut transitions = vec![vec![false; big * big]; m];
        for w in 0..m {
            for (u, block) in blocks.iter().enumerate() {
                first[w][u] = sys.admissible_unchecked(w, block);
            }
            let w_last = sys.base.theta_pow(w, k - 1);
            let w_next = sys.base.theta_pow(w, k);
            for (u, bu) in blocks.iter().enumerate() {
                for (v, bv) in blocks.iter().enumerate() {
                    transitions[w][u * big + v] = sys.allowed(w_last, bu[k - 1], bv[0])
                        && sys.admissible_unchecked(w_next, bv);
                }
            }
            if !first[w].iter().any(|&f| f) {
                return Err(invalid("power lift", format!("no admissible block at fiber {w}")));
            }
        }
        let lifted = RandomSft {
            base,
            alphabet: big,
            transitions,
            first: if k == 1 { None } else { Some(first) },
        };
        Ok(PowerLift {
            k,
            original: sys.clone(),
            lifted,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn original(&self) -> &RandomSft<T> {
        &self.original
    }

    pub fn lifted(&self) -> &RandomSft<T> {
        &self.lifted
    }

    /// Block with super-symbol index `u`.
    pub fn block(&self, u: Symbol) -> Vec<Symbol> {
        decode_block(u as usize, self.original.alphabet, self.k)
    }

    /// Groups an original word (length a multiple of k) into super-symbols.
    pub fn encode(&self, w: &Word) -> Result<Word> {
        if !w.len().is_multiple_of(self.k) {
            return Err(domain(format!("length {} is not a multiple of k = {}", w.len(), self.k)));
        }
        let a = self.original.alphabet;
        let symbols = w
            .symbols
            .chunks(self.k)
            .map(|c| c.iter().fold(0usize, |acc, &s| acc * a + s as usize) as Symbol)
            .collect();
        Ok(Word {
            fiber: w.fiber,
            symbols,
        })
    }

    pub fn decode(&self, w: &Word) -> Word {
        let symbols = w.symbols.iter().flat_map(|&u| self.block(u)).collect();
        Word {
            fiber: w.fiber,
            symbols,
        }
    }
}

fn decode_block(mut u: usize, a: usize, k: usize) -> Vec<Symbol> {
    let mut out = vec![0 as Symbol; k];
    for j in (0..k).rev() {
        out[j] = (u % a) as Symbol;
        u /= a;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> Vec<Vec<u8>> {
        vec![vec![1, 1], vec![1, 0]]
    }

    pub(crate) fn s2() -> RandomSft<f64> {
        let base = BaseSystem::new(vec![1, 0], vec![0.5, 0.5]).unwrap();
        RandomSft::new(base, 2, vec![vec![vec![1, 1], vec![1, 1]], golden()]).unwrap()
    }

    fn golden_mean() -> RandomSft<f64> {
        RandomSft::new(BaseSystem::trivial(), 2, vec![golden()]).unwrap()
    }

    #[test]
    fn base_validation() {
        assert!(BaseSystem::<f64>::new(vec![1, 1], vec![0.5, 0.5]).is_err());
        assert!(BaseSystem::<f64>::new(vec![1, 0], vec![0.6, 0.4]).is_err());
        assert!(BaseSystem::<f64>::new(vec![0, 1], vec![0.6, 0.3]).is_err());
        assert!(BaseSystem::<f64>::new(vec![0, 1], vec![0.6, 0.4]).is_ok());
        let b = BaseSystem::<f64>::uniform(vec![1, 2, 0, 3]).unwrap();
        assert_eq!(b.cycles(), vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(b.theta_pow_inv(b.theta_pow(2, 5), 5), 2);
    }

    #[test]
    fn subshift_rejects_dead_ends() {
        let base = BaseSystem::<f64>::trivial();
        assert!(RandomSft::new(base.clone(), 2, vec![vec![vec![1, 1], vec![0, 0]]]).is_err());
        assert!(RandomSft::new(base.clone(), 2, vec![vec![vec![1, 0], vec![1, 0]]]).is_err());
        assert!(RandomSft::new(base, 2, vec![vec![vec![1, 2], vec![1, 0]]]).is_err());
    }

    #[test]
    fn admissibility_examples() {
        let full = RandomSft::<f64>::full_shift(2).unwrap();
        assert!(full.is_admissible(0, &[0, 1, 1, 0, 1]).unwrap());
        assert!(!golden_mean().is_admissible(0, &[1, 1]).unwrap());
        // the second step is governed by A_{θ0} = A_1
        let s2 = s2();
        assert!(!s2.is_admissible(0, &[0, 1, 1]).unwrap());
        assert!(s2.is_admissible(1, &[0, 1, 1]).unwrap());
        assert!(s2.is_admissible(0, &[2]).is_err());
        assert!(s2.is_admissible(2, &[0]).is_err());
        assert!(s2.is_admissible(0, &[]).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let full = RandomSft::<f64>::full_shift(2).unwrap();
        let words: Vec<_> = full.enumerate_words(0, 3).unwrap().collect();
        assert_eq!(words.len(), 8);
        assert!(words.windows(2).all(|p| p[0] < p[1]));
        assert_eq!(golden_mean().enumerate_words(0, 5).unwrap().count(), 13);
        // A_0 A_1 A_0 = [[3,3],[3,3]] has entry sum 12
        assert_eq!(s2().enumerate_words(0, 4).unwrap().count(), 12);
        assert!(full.enumerate_words(0, 0).is_err());
    }

    #[test]
    fn skew_step_examples() {
        let full = RandomSft::<f64>::full_shift(2).unwrap();
        let w = Word::parse(&full, 0, "0110").unwrap();
        let s = full.skew_step(&w).unwrap();
        assert_eq!(s.symbols(), &[1, 1, 0]);
        let s2 = s2();
        let w = Word::parse(&s2, 0, "01").unwrap();
        let s = s2.skew_step(&w).unwrap();
        assert_eq!((s.fiber(), s.symbols()), (1, &[1][..]));
        assert!(s2.is_admissible(s.fiber(), s.symbols()).unwrap());
        assert!(s2.skew_step(&s).is_err());
    }

    #[test]
    fn depth_classes() {
        let mp = MetricParams::new(0.5f64, 0.6).unwrap();
        assert_eq!(mp.depth(), 0);
        let mp = MetricParams::new(0.5f64, 0.2).unwrap();
        assert_eq!(mp.depth(), 2);
        // boundary: ε = λ^2 is not exceeded by λ^2, so depth 1
        assert_eq!(MetricParams::new(0.5f64, 0.25).unwrap().depth(), 1);
        assert!(MetricParams::new(0.5f64, 1.0).is_err());
        assert!(MetricParams::new(1.5f64, 0.5).is_err());
        for t in 0..10 {
            assert_eq!(MetricParams::from_depth(0.5f64, t).unwrap().depth(), t);
            assert_eq!(MetricParams::from_depth(0.3f64, t).unwrap().depth(), t);
        }
    }

    #[test]
    fn bowen_separation_examples() {
        let full = RandomSft::<f64>::full_shift(2).unwrap();
        let mp = MetricParams::new(0.5, 0.6).unwrap();
        let u = Word::parse(&full, 0, "01").unwrap();
        let v = Word::parse(&full, 0, "00").unwrap();
        assert!(bowen_separated(&mp, &u, &v, 2).unwrap());
        let u = Word::parse(&full, 0, "011").unwrap();
        let v = Word::parse(&full, 0, "010").unwrap();
        assert!(!bowen_separated(&mp, &u, &v, 2).unwrap());
        let mp = MetricParams::new(0.5, 0.2).unwrap();
        let u = Word::parse(&full, 0, "0100").unwrap();
        let v = Word::parse(&full, 0, "0101").unwrap();
        // d_2 = λ^{3-2+1} = 0.25 > 0.2
        assert!(bowen_separated(&mp, &u, &v, 2).unwrap());
        let short = Word::parse(&full, 0, "010").unwrap();
        assert!(bowen_separated(&mp, &u, &short, 2).is_err());
        let s2 = s2();
        let a = Word::parse(&s2, 0, "0000").unwrap();
        let b = Word::parse(&s2, 1, "0000").unwrap();
        assert!(bowen_separated(&mp, &a, &b, 2).is_err());
    }

    #[test]
    fn power_lift_structure() {
        let s2 = s2();
        let lift = PowerLift::new(&s2, 2).unwrap();
        let l = lift.lifted();
        assert_eq!(l.alphabet(), 4);
        assert_eq!(l.base().perm(), &[0, 1]);
        // block "11" starts at fiber 0 via A_0(1,1) but not at fiber 1
        assert!(l.allowed_first(0, 3));
        assert!(!l.allowed_first(1, 3));
        for w in 0..2 {
            for n in 1..6 {
                assert_eq!(l.word_count(w, n), s2.word_count(w, 2 * n), "fiber {w} n {n}");
            }
        }
        let w = Word::parse(&s2, 0, "0100").unwrap();
        let e = lift.encode(&w).unwrap();
        assert_eq!(e.symbols(), &[1, 0]);
        assert_eq!(lift.decode(&e), w);
        assert!(l.is_admissible(0, e.symbols()).unwrap());
    }
}
