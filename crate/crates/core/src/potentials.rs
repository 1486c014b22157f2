//! Subadditive potential sequences `Φ = {f_n}` on a random subshift.

use serde::Serialize;

use crate::error::{domain, invalid, Error, Result};
use crate::ext::ExtReal;
use crate::matrix::{mul_into, norm_of, MatrixNorm, SquareMatrix};
use crate::scalar::Scalar;
use crate::system::{PowerLift, RandomSft, Symbol, Word};

/// Largest additive table (entries per fiber) built by [`PotentialSeq::power`].
const MAX_TABLE: usize = 1 << 22;

/// The shape of a potential sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind<T> {
    /// `f_n = 0`.
    Zero,
    /// `f_n = n·c`.
    Constant { c: T },
    /// Birkhoff sums `f_n = Σ_{i<n} f_1 ∘ Θ^i` of a depth-`d` locally
    /// constant `f_1`. `table[ω]` lists `f_1(ω, s_0 … s_{d-1})` with the
    /// `d`-word read as a base-`a` number.
    Additive { depth: usize, table: Vec<Vec<T>> },
    /// `f_n(ω, x) = log ‖M_{θ^{n-1}ω}(x_{n-1}) ⋯ M_ω(x_0)‖`; `matrices[ω][s]`.
    MatrixCocycle {
        norm: MatrixNorm,
        matrices: Vec<Vec<SquareMatrix<T>>>,
    },
}

/// A subadditive potential sequence bound to a system shape (fibers, alphabet).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialSeq<T> {
    #[serde(flatten)]
    kind: PotentialKind<T>,
    #[serde(skip)]
    shape: Option<(usize, usize)>,
}

impl<T: Scalar> PotentialSeq<T> {
    pub fn zero() -> Self {
        PotentialSeq {
            kind: PotentialKind::Zero,
            shape: None,
        }
    }

    pub fn constant(c: T) -> Result<Self> {
        if !c.is_finite() {
            return Err(invalid("potential", "constant must be finite"));
        }
        Ok(PotentialSeq {
            kind: PotentialKind::Constant { c },
            shape: None,
        })
    }

    pub fn additive(sys: &RandomSft<T>, depth: usize, table: Vec<Vec<T>>) -> Result<Self> {
        if depth == 0 {
            return Err(invalid("potential", "additive depth must be at least 1"));
        }
        let entries = sys
            .alphabet()
            .checked_pow(depth as u32)
            .filter(|&e| e <= MAX_TABLE)
            .ok_or_else(|| invalid("potential", "additive table too large"))?;
        if table.len() != sys.fibers() {
            return Err(invalid(
                "potential",
                format!("{} table rows for {} fibers", table.len(), sys.fibers()),
            ));
        }
        for (w, row) in table.iter().enumerate() {
            if row.len() != entries {
                return Err(invalid(
                    "potential",
                    format!("table for fiber {w} has {} entries, expected {entries}", row.len()),
                ));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(invalid("potential", format!("non-finite table entry at fiber {w}")));
            }
        }
        Ok(PotentialSeq {
            kind: PotentialKind::Additive { depth, table },
            shape: Some((sys.fibers(), sys.alphabet())),
        })
    }

    /// One-coordinate additive potential with the same values on every fiber.
    pub fn additive_symbolwise(sys: &RandomSft<T>, values: &[T]) -> Result<Self> {
        Self::additive(sys, 1, vec![values.to_vec(); sys.fibers()])
    }

    pub fn matrix_cocycle(
        sys: &RandomSft<T>,
        norm: MatrixNorm,
        matrices: Vec<Vec<SquareMatrix<T>>>,
    ) -> Result<Self> {
        if matrices.len() != sys.fibers() {
            return Err(invalid(
                "potential",
                format!("{} matrix families for {} fibers", matrices.len(), sys.fibers()),
            ));
        }
        let dim = matrices
            .first()
            .and_then(|f| f.first())
            .map(|m| m.dim())
            .ok_or_else(|| invalid("potential", "empty matrix family"))?;
        for (w, fam) in matrices.iter().enumerate() {
            if fam.len() != sys.alphabet() {
                return Err(invalid(
                    "potential",
                    format!("fiber {w} has {} matrices, expected {}", fam.len(), sys.alphabet()),
                ));
            }
            for (s, m) in fam.iter().enumerate() {
                if m.dim() != dim {
                    return Err(invalid("potential", format!("M_{w}({s}) is not {dim}x{dim}")));
                }
                if !m.is_nonnegative() {
                    return Err(invalid("potential", format!("M_{w}({s}) has a negative entry")));
                }
            }
        }
        Ok(PotentialSeq {
            kind: PotentialKind::MatrixCocycle { norm, matrices },
            shape: Some((sys.fibers(), sys.alphabet())),
        })
    }

    /// Same matrices on every fiber.
    pub fn matrix_cocycle_uniform(
        sys: &RandomSft<T>,
        norm: MatrixNorm,
        per_symbol: Vec<SquareMatrix<T>>,
    ) -> Result<Self> {
        Self::matrix_cocycle(sys, norm, vec![per_symbol; sys.fibers()])
    }

    pub fn kind(&self) -> &PotentialKind<T> {
        &self.kind
    }

    /// Whether `f_n` is a Birkhoff sum (Zero, Constant and Additive).
    pub fn is_additive(&self) -> bool {
        !matches!(self.kind, PotentialKind::MatrixCocycle { .. })
    }

    /// Cylinder depth on which `f_n` is constant.
    pub fn locality(&self, n: usize) -> usize {
        match &self.kind {
            PotentialKind::Zero | PotentialKind::Constant { .. } => 0,
            PotentialKind::Additive { depth, .. } => n + depth - 1,
            PotentialKind::MatrixCocycle { .. } => n,
        }
    }

    /// `locality(n) - n`, floored at zero: the smallest legal separation depth.
    pub fn locality_deficit(&self, n: usize) -> usize {
        self.locality(n).saturating_sub(n)
    }

    /// Largest deficit over all horizons.
    pub fn max_deficit(&self) -> usize {
        match &self.kind {
            PotentialKind::Additive { depth, .. } => depth - 1,
            _ => 0,
        }
    }

    pub(crate) fn check_shape(&self, sys: &RandomSft<T>) -> Result<()> {
        match self.shape {
            Some((m, a)) if m != sys.fibers() || a != sys.alphabet() => Err(domain(format!(
                "potential built for {m} fibers / alphabet {a}, system has {} / {}",
                sys.fibers(),
                sys.alphabet()
            ))),
            _ => Ok(()),
        }
    }

    /// `f_n(ω, x)` for any `x` in the cylinder `w`.
    pub fn eval(&self, sys: &RandomSft<T>, n: usize, w: &Word) -> Result<ExtReal<T>> {
        self.check_shape(sys)?;
        if n == 0 {
            return Err(domain("horizon n must be at least 1"));
        }
        if w.fiber() >= sys.fibers() {
            return Err(domain(format!("fiber {} out of range", w.fiber())));
        }
        let need = self.locality(n);
        if w.len() < need {
            return Err(domain(format!(
                "f_{n} needs a word of length {need}, got {}",
                w.len()
            )));
        }
        Ok(self.eval_unchecked(sys, n, w.fiber(), w.symbols()))
    }

    pub(crate) fn eval_unchecked(&self, sys: &RandomSft<T>, n: usize, omega: usize, symbols: &[Symbol]) -> ExtReal<T> {
        let a = sys.alphabet();
        match &self.kind {
            PotentialKind::Zero => ExtReal::zero(),
            PotentialKind::Constant { c } => ExtReal::finite(*c * T::of_usize(n)),
            PotentialKind::Additive { depth, table } => {
                let mut w = omega;
                let mut acc = T::zero();
                for i in 0..n {
                    acc += table[w][word_index(&symbols[i..i + depth], a)];
                    w = sys.base().theta(w);
                }
                ExtReal::finite(acc)
            }
            PotentialKind::MatrixCocycle { norm, matrices } => {
                let dim = matrices[0][0].dim();
                let mut prod = SquareMatrix::<T>::identity(dim).data().to_vec();
                let mut tmp = vec![T::zero(); dim * dim];
                let mut w = omega;
                for &s in &symbols[..n] {
                    mul_into(dim, matrices[w][s as usize].data(), &prod, &mut tmp);
                    std::mem::swap(&mut prod, &mut tmp);
                    w = sys.base().theta(w);
                }
                ExtReal::ln_of(norm_of(dim, &prod, *norm))
            }
        }
    }

    /// `∫ ‖f_1(ω)‖_∞ dP(ω)`; `+inf` when `f_1` takes the value `-inf`.
    pub fn f1_norm(&self, sys: &RandomSft<T>) -> Result<T> {
        self.check_shape(sys)?;
        let len = self.locality(1).max(1);
        let mut total = T::zero();
        for omega in 0..sys.fibers() {
            let p = sys.base().weight(omega);
            let mut sup = T::zero();
            for w in sys.enumerate_words(omega, len)? {
                let v = self.eval_unchecked(sys, 1, omega, w.symbols());
                let abs = match v.as_finite() {
                    Some(x) => x.abs(),
                    None => T::infinity(),
                };
                sup = sup.max(abs);
            }
            if p > T::zero() {
                total += p * sup;
            }
        }
        Ok(total)
    }

    /// `f_n + n·c`.
    pub fn shifted(&self, c: T) -> Result<Self> {
        if !c.is_finite() {
            return Err(invalid("potential", "shift must be finite"));
        }
        let kind = match &self.kind {
            PotentialKind::Zero => PotentialKind::Constant { c },
            PotentialKind::Constant { c: c0 } => PotentialKind::Constant { c: *c0 + c },
            PotentialKind::Additive { depth, table } => PotentialKind::Additive {
                depth: *depth,
                table: table
                    .iter()
                    .map(|r| r.iter().map(|&v| v + c).collect())
                    .collect(),
            },
            PotentialKind::MatrixCocycle { norm, matrices } => {
                let f = c.exp();
                PotentialKind::MatrixCocycle {
                    norm: *norm,
                    matrices: matrices
                        .iter()
                        .map(|fam| fam.iter().map(|m| m.scaled(f)).collect())
                        .collect(),
                }
            }
        };
        Ok(PotentialSeq {
            kind,
            shape: self.shape,
        })
    }

    /// `Φ^k = {f_{kn}}` as a potential on the k-th power system.
    pub fn power(&self, lift: &PowerLift<T>) -> Result<Self> {
        let sys = lift.original();
        self.check_shape(sys)?;
        let k = lift.k();
        if k == 1 {
            return Ok(self.clone());
        }
        let lifted = lift.lifted();
        let big = lifted.alphabet();
        let kind = match &self.kind {
            PotentialKind::Zero => PotentialKind::Zero,
            PotentialKind::Constant { c } => PotentialKind::Constant {
                c: *c * T::of_usize(k),
            },
            PotentialKind::Additive { depth, table } => {
                let a = sys.alphabet();
                let d = *depth;
                let d_lift = (k + d - 1).div_ceil(k);
                let entries = big
                    .checked_pow(d_lift as u32)
                    .filter(|&e| e <= MAX_TABLE)
                    .ok_or_else(|| Error::Resource("lifted additive table too large".into()))?;
                let mut out = Vec::with_capacity(sys.fibers());
                for omega in 0..sys.fibers() {
                    let orbit = sys.base().orbit(omega, k);
                    let mut row = Vec::with_capacity(entries);
                    for idx in 0..entries {
                        let supers = index_word(idx, big, d_lift);
                        let orig: Vec<Symbol> = supers.iter().flat_map(|&u| lift.block(u)).collect();
                        let mut acc = T::zero();
                        for (j, &wj) in orbit.iter().enumerate() {
                            acc += table[wj][word_index(&orig[j..j + d], a)];
                        }
                        row.push(acc);
                    }
                    out.push(row);
                }
                PotentialKind::Additive {
                    depth: d_lift,
                    table: out,
                }
            }
            PotentialKind::MatrixCocycle { norm, matrices } => {
                let dim = matrices[0][0].dim();
                let mut out = Vec::with_capacity(sys.fibers());
                for omega in 0..sys.fibers() {
                    let orbit = sys.base().orbit(omega, k);
                    let fam = (0..big)
                        .map(|u| {
                            let block = lift.block(u as Symbol);
                            block.iter().zip(&orbit).fold(
                                SquareMatrix::identity(dim),
                                |acc, (&s, &wj)| matrices[wj][s as usize].mul(&acc),
                            )
                        })
                        .collect();
                    out.push(fam);
                }
                PotentialKind::MatrixCocycle {
                    norm: *norm,
                    matrices: out,
                }
            }
        };
        Ok(PotentialSeq {
            kind,
            shape: self.shape.map(|_| (lifted.fibers(), big)),
        })
    }
}

#[inline]
pub(crate) fn word_index(symbols: &[Symbol], a: usize) -> usize {
    symbols.iter().fold(0usize, |acc, &s| acc * a + s as usize)
}

fn index_word(mut idx: usize, a: usize, len: usize) -> Vec<Symbol> {
    let mut out = vec![0 as Symbol; len];
    for j in (0..len).rev() {
        out[j] = (idx % a) as Symbol;
        idx /= a;
    }
    out
}

/// Incremental evaluation of `f_n` along a depth-first walk of words.
pub(crate) struct PrefixEval<'a, T> {
    pot: &'a PotentialSeq<T>,
    n: usize,
    alphabet: usize,
    dim: usize,
    /// Additive partial sums by prefix length.
    sums: Vec<T>,
    /// Matrix prefix products by prefix length, flattened.
    prods: Vec<T>,
}

impl<'a, T: Scalar> PrefixEval<'a, T> {
    pub(crate) fn new(pot: &'a PotentialSeq<T>, n: usize, alphabet: usize, max_len: usize) -> Self {
        let dim = match &pot.kind {
            PotentialKind::MatrixCocycle { matrices, .. } => matrices[0][0].dim(),
            _ => 0,
        };
        let mut prods = Vec::new();
        if dim > 0 {
            prods = vec![T::zero(); (n + 1) * dim * dim];
            prods[..dim * dim].copy_from_slice(SquareMatrix::<T>::identity(dim).data());
        }
        PrefixEval {
            pot,
            n,
            alphabet,
            dim,
            sums: vec![T::zero(); max_len + 1],
            prods,
        }
    }

    /// Updates the state for prefix length `symbols.len()`, given the state
    /// for the prefix one shorter. `fibers[i] = θ^i ω`.
    #[inline]
    pub(crate) fn push(&mut self, fibers: &[usize], symbols: &[Symbol]) {
        let len = symbols.len();
        match &self.pot.kind {
            PotentialKind::Additive { depth, table } => {
                let d = *depth;
                let mut v = self.sums[len - 1];
                if len >= d && len - d < self.n {
                    let i = len - d;
                    v += table[fibers[i]][word_index(&symbols[i..len], self.alphabet)];
                }
                self.sums[len] = v;
            }
            PotentialKind::MatrixCocycle { matrices, .. } => {
                if len <= self.n {
                    let dd = self.dim * self.dim;
                    let (prev, rest) = self.prods.split_at_mut(len * dd);
                    let m = &matrices[fibers[len - 1]][symbols[len - 1] as usize];
                    mul_into(self.dim, m.data(), &prev[(len - 1) * dd..], &mut rest[..dd]);
                }
            }
            _ => {}
        }
    }

    /// `f_n` once the prefix covers `locality(n)` symbols.
    #[inline]
    pub(crate) fn value(&self, len: usize) -> ExtReal<T> {
        match &self.pot.kind {
            PotentialKind::Zero => ExtReal::zero(),
            PotentialKind::Constant { c } => ExtReal::finite(*c * T::of_usize(self.n)),
            PotentialKind::Additive { .. } => ExtReal::finite(self.sums[len]),
            PotentialKind::MatrixCocycle { norm, .. } => {
                let dd = self.dim * self.dim;
                let p = &self.prods[self.n * dd..(self.n + 1) * dd];
                ExtReal::ln_of(norm_of(self.dim, p, *norm))
            }
        }
    }
}

/// Outcome of an exhaustive subadditivity check.
#[derive(Clone, Debug, Serialize)]
pub struct SubadditivityReport<T> {
    pub n_max: usize,
    pub checked: usize,
    /// `min (f_n + f_m∘Θ^n − f_{n+m})`; `+inf` when nothing finite was compared.
    #[serde(serialize_with = "crate::ext::ser_f64")]
    pub worst_margin: f64,
    pub witness: Option<SubadditivityWitness>,
    pub passed: bool,
    #[serde(skip)]
    _scalar: std::marker::PhantomData<T>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubadditivityWitness {
    pub word: String,
    pub n: usize,
    pub m: usize,
}

/// Checks `f_{n+m}(ω, w) ≤ f_n(ω, w) + f_m(Θ^n(ω, w)) + tol` for every
/// admissible word of length `locality(n_max)` and all `n + m ≤ n_max`.
pub fn check_subadditive<T: Scalar>(
    pot: &PotentialSeq<T>,
    sys: &RandomSft<T>,
    n_max: usize,
    tol: f64,
) -> Result<SubadditivityReport<T>> {
    pot.check_shape(sys)?;
    if n_max < 2 {
        return Err(domain("n_max must be at least 2"));
    }
    let len = pot.locality(n_max).max(n_max);
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut checked = 0usize;
    for omega in 0..sys.fibers() {
        for w in sys.enumerate_words(omega, len)? {
            let s = w.symbols();
            let vals: Vec<ExtReal<T>> = (1..=n_max)
                .map(|n| pot.eval_unchecked(sys, n, omega, s))
                .collect();
            for n in 1..n_max {
                let shifted = sys.base().theta_pow(omega, n);
                for m in 1..=n_max - n {
                    checked += 1;
                    let lhs = vals[n + m - 1];
                    if lhs.is_neg_inf() {
                        continue;
                    }
                    let rhs = vals[n - 1] + pot.eval_unchecked(sys, m, shifted, &s[n..]);
                    let margin = match rhs.as_finite() {
                        Some(r) => (r - lhs.value()).to_f64_lossy(),
                        None => f64::NEG_INFINITY,
                    };
                    if margin < worst {
                        worst = margin;
                        witness = Some(SubadditivityWitness {
                            word: w.to_string(),
                            n,
                            m,
                        });
                    }
                }
            }
        }
    }
    Ok(SubadditivityReport {
        n_max,
        checked,
        worst_margin: worst,
        witness,
        passed: worst >= -tol,
        _scalar: std::marker::PhantomData,
    })
}
