#![allow(dead_code)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subpressure::{BaseSystem, MatrixNorm, Potential, SquareMatrix, System};

pub fn full(a: usize) -> System {
    System::full_shift(a).unwrap()
}

pub fn golden_mean() -> System {
    System::new(BaseSystem::trivial(), 2, vec![vec![vec![1, 1], vec![1, 0]]]).unwrap()
}

/// Swap base, full shift on fiber 0 and golden mean on fiber 1.
pub fn s2() -> System {
    let base = BaseSystem::new(vec![1, 0], vec![0.5, 0.5]).unwrap();
    System::new(base, 2, vec![vec![vec![1, 1], vec![1, 1]], vec![vec![1, 1], vec![1, 0]]]).unwrap()
}

pub fn bernoulli_log2(sys: &System) -> Potential {
    Potential::additive_symbolwise(sys, &[0.0, std::f64::consts::LN_2]).unwrap()
}

pub fn diag_cocycle(sys: &System) -> Potential {
    Potential::matrix_cocycle_uniform(
        sys,
        MatrixNorm::Inf,
        vec![SquareMatrix::diag(&[2.0, 1.0]), SquareMatrix::diag(&[1.0, 3.0])],
    )
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random SFTs on a cyclic base: each transition matrix contains a
/// permutation matrix, so no row or column is empty.
pub fn arb_system() -> impl Strategy<Value = System> {
    (2usize..=3, 1usize..=3).prop_flat_map(|(a, m)| {
        (
            Just(a),
            Just(m),
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), a * a), m),
            proptest::collection::vec(0usize..a, m),
        )
            .prop_map(|(a, m, bits, shifts)| {
                let perm: Vec<usize> = (0..m).map(|w| (w + 1) % m).collect();
                let base = BaseSystem::uniform(perm).unwrap();
                let mats = (0..m)
                    .map(|w| {
                        (0..a)
                            .map(|i| {
                                (0..a)
                                    .map(|j| u8::from(bits[w][i * a + j] || j == (i + shifts[w]) % a))
                                    .collect()
                            })
                            .collect()
                    })
                    .collect();
                System::new(base, a, mats).unwrap()
            })
    })
}

/// A system together with a potential of one of the four kinds.
pub fn arb_system_and_potential() -> impl Strategy<Value = (System, Potential)> {
    (arb_system(), 0usize..4, any::<u64>()).prop_map(|(sys, kind, seed)| {
        use rand::Rng;
        let mut r = rng(seed);
        let a = sys.alphabet();
        let pot = match kind {
            0 => Potential::zero(),
            1 => Potential::constant(r.gen_range(-2.0..2.0)).unwrap(),
            2 => {
                let d = r.gen_range(1..=2usize);
                let table = (0..sys.fibers())
                    .map(|_| (0..a.pow(d as u32)).map(|_| r.gen_range(-1.0..1.0)).collect())
                    .collect();
                Potential::additive(&sys, d, table).unwrap()
            }
            _ => {
                let dim = r.gen_range(1..=2usize);
                let fams = (0..sys.fibers())
                    .map(|_| {
                        (0..a)
                            .map(|_| {
                                let rows: Vec<Vec<f64>> = (0..dim)
                                    .map(|_| (0..dim).map(|_| r.gen_range(0.0..3.0)).collect())
                                    .collect();
                                SquareMatrix::from_rows(&rows).unwrap()
                            })
                            .collect()
                    })
                    .collect();
                Potential::matrix_cocycle(&sys, MatrixNorm::Inf, fams).unwrap()
            }
        };
        (sys, pot)
    })
}
