//! Pressure and the variational principle for subadditive potential
//! sequences on random subshifts of finite type.
//!
//! A random SFT is a finite measure-preserving permutation `θ` of fibers
//! together with one 0/1 transition matrix per fiber; the word `s_0 s_1 …`
//! is admissible at ω when `A_{θ^i ω}(s_i, s_{i+1}) = 1` for every `i`.
//! Potentials are locally constant, so pressure reduces to cylinder sums and
//! the variational supremum can be searched over random Markov measures.
//!
//! Everything is generic over the scalar type ([`Scalar`], implemented for
//! `f32` and `f64`); the aliases below fix `f64`.

pub mod error;
pub mod ext;
pub mod matrix;
pub mod measures;
pub mod optimize;
pub mod potentials;
pub mod pressure;
pub mod scalar;
pub mod sum;
pub mod system;
pub mod variational;
mod walk;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use matrix::{MatrixNorm, SquareMatrix};
pub use measures::{
    cesaro_average, gibbs_atomic, integral, phi_star, shift_average_check, AtomicFiberMeasure, IntegralMethod,
    PhiStarEstimate, PhiStarOptions, RandomMarkovMeasure,
};
pub use potentials::{check_subadditive, PotentialKind, PotentialSeq, SubadditivityReport};
pub use pressure::{
    estimate_pressure, greedy_separated_set, partition_function, pressure_of_power, separated_pressure_bruteforce,
    PressureEstimate,
};
pub use scalar::Scalar;
pub use system::{bowen_separated, BaseSystem, MetricParams, PowerLift, RandomSft, Symbol, Word};
pub use variational::{
    chunking_check, gibbs_identity_check, maximize, objective, power_consistency, sampled_upper_bound,
    VariationalOptions, VariationalReport,
};
pub use walk::WORD_BUDGET;

pub type Real = f64;
pub type System = RandomSft<f64>;
pub type Base = BaseSystem<f64>;
pub type Potential = PotentialSeq<f64>;
pub type Measure = RandomMarkovMeasure<f64>;
pub type Metric = MetricParams<f64>;
pub type Pressure = PressureEstimate<f64>;
pub type Ext = ExtReal<f64>;

pub type System32 = RandomSft<f32>;
pub type Potential32 = PotentialSeq<f32>;
pub type Measure32 = RandomMarkovMeasure<f32>;
