//! Depth-first traversal of admissible words with incremental evaluation of
//! `f_n` and of Markov cylinder masses.

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::measures::RandomMarkovMeasure;
use crate::potentials::{PotentialSeq, PrefixEval};
use crate::scalar::Scalar;
use crate::system::{RandomSft, Symbol};

/// Default ceiling on the number of words a single enumeration may visit.
pub const WORD_BUDGET: u128 = 50_000_000;

pub(crate) fn check_budget<T: Scalar>(sys: &RandomSft<T>, omega: usize, len: usize, budget: u128) -> Result<u128> {
    let count = sys.word_count(omega, len);
    if count > budget {
        return Err(Error::Resource(format!(
            "{count} words of length {len} at fiber {omega} exceed the budget of {budget}"
        )));
    }
    Ok(count)
}

pub(crate) struct Walk<'a, T> {
    pub sys: &'a RandomSft<T>,
    pub omega: usize,
    pub len: usize,
    pub potential: Option<(&'a PotentialSeq<T>, usize)>,
    pub measure: Option<&'a RandomMarkovMeasure<T>>,
    /// Skip subtrees of zero mass (only meaningful with a measure).
    pub prune_zero_mass: bool,
}

impl<'a, T: Scalar> Walk<'a, T> {
    pub(crate) fn words(sys: &'a RandomSft<T>, omega: usize, len: usize) -> Self {
        Walk {
            sys,
            omega,
            len,
            potential: None,
            measure: None,
            prune_zero_mass: false,
        }
    }

    pub(crate) fn with_potential(mut self, pot: &'a PotentialSeq<T>, n: usize) -> Self {
        debug_assert!(pot.locality(n) <= self.len);
        self.potential = Some((pot, n));
        self
    }

    pub(crate) fn with_measure(mut self, mu: &'a RandomMarkovMeasure<T>, prune: bool) -> Self {
        self.measure = Some(mu);
        self.prune_zero_mass = prune;
        self
    }

    /// Visits `(word, f_n(word), mass(word))` in lexicographic order. Without a
    /// potential the value is 0; without a measure the mass is 1.
    pub(crate) fn run<F: FnMut(&[Symbol], ExtReal<T>, T)>(&self, mut visit: F) {
        if self.len == 0 {
            let v = match self.potential {
                Some((p, n)) => PrefixEval::new(p, n, self.sys.alphabet(), 0).value(0),
                None => ExtReal::zero(),
            };
            visit(&[], v, T::one());
            return;
        }
        let fibers = self.sys.base().orbit(self.omega, self.len);
        let a = self.sys.alphabet();
        let mut eval = self
            .potential
            .map(|(p, n)| PrefixEval::new(p, n, a, self.len));
        let mut masses = vec![T::one(); self.len + 1];
        let mut symbols: Vec<Symbol> = Vec::with_capacity(self.len);
        // next candidate symbol for each depth
        let mut next: Vec<u16> = vec![0; self.len + 1];
        let mut depth = 0usize;
        loop {
            if depth == self.len {
                let v = match &eval {
                    Some(e) => e.value(self.len),
                    None => ExtReal::zero(),
                };
                visit(&symbols, v, masses[self.len]);
                depth -= 1;
                symbols.pop();
                continue;
            }
            let start = next[depth];
            let mut chosen = None;
            for s in start..a as u16 {
                let s8 = s as Symbol;
                let ok = if depth == 0 {
                    self.sys.allowed_first(fibers[0], s8)
                } else {
                    self.sys.allowed(fibers[depth - 1], symbols[depth - 1], s8)
                };
                if !ok {
                    continue;
                }
                let mass = match self.measure {
                    None => T::one(),
                    Some(mu) if depth == 0 => mu.initial(fibers[0])[s as usize],
                    Some(mu) => masses[depth] * mu.transition(fibers[depth - 1], symbols[depth - 1], s8),
                };
                if self.prune_zero_mass && mass == T::zero() {
                    continue;
                }
                chosen = Some((s, mass));
                break;
            }
            match chosen {
                Some((s, mass)) => {
                    next[depth] = s + 1;
                    symbols.push(s as Symbol);
                    masses[depth + 1] = mass;
                    if let Some(e) = eval.as_mut() {
                        e.push(&fibers, &symbols);
                    }
                    depth += 1;
                    next[depth] = 0;
                }
                None => {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                    symbols.pop();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::BaseSystem;

    #[test]
    fn walk_agrees_with_word_iterator() {
        let base = BaseSystem::new(vec![1, 2, 0], vec![1.0 / 3.0; 3]).unwrap();
        let sys = RandomSft::<f64>::new(
            base,
            3,
            vec![
                vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]],
                vec![vec![1, 1, 1], vec![1, 0, 0], vec![0, 1, 0]],
                vec![vec![0, 1, 0], vec![1, 1, 1], vec![0, 0, 1]],
            ],
        )
        .unwrap();
        for omega in 0..3 {
            for len in 1..7 {
                let mut seen = Vec::new();
                Walk::words(&sys, omega, len).run(|s, _, _| seen.push(s.to_vec()));
                let want: Vec<Vec<Symbol>> = sys
                    .enumerate_words(omega, len)
                    .unwrap()
                    .map(|w| w.into_symbols())
                    .collect();
                assert_eq!(seen, want);
                assert_eq!(seen.len() as u128, sys.word_count(omega, len));
            }
        }
    }
}
