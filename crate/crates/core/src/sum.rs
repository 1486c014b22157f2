//! Reproducible summation.
//!
//! Sums are split into fixed-size blocks in input order, each block is
//! Neumaier-compensated, and the block partials are combined by a fixed
//! pairwise tree. The block shape depends only on the input length, so the
//! result is bit-identical for any rayon worker count.

use rayon::prelude::*;

use crate::ext::ExtReal;
use crate::scalar::Scalar;

const BLOCK: usize = 1024;

#[inline]
fn neumaier_add<T: Scalar>(sum: &mut T, c: &mut T, v: T) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *c += (*sum - t) + v;
    } else {
        *c += (v - t) + *sum;
    }
    *sum = t;
}

/// Sequential Neumaier sum.
pub fn compensated_sum<T: Scalar>(values: &[T]) -> T {
    let mut sum = T::zero();
    let mut c = T::zero();
    for &v in values {
        neumaier_add(&mut sum, &mut c, v);
    }
    sum + c
}

fn tree_combine<T: Scalar>(mut partials: Vec<T>) -> T {
    if partials.is_empty() {
        return T::zero();
    }
    while partials.len() > 1 {
        partials = partials
            .chunks(2)
            .map(|p| if p.len() == 2 { p[0] + p[1] } else { p[0] })
            .collect();
    }
    partials[0]
}

/// Block-compensated sum with a deterministic reduction tree.
pub fn deterministic_sum<T: Scalar>(values: &[T]) -> T {
    if values.len() <= BLOCK {
        return compensated_sum(values);
    }
    let partials: Vec<T> = values.par_chunks(BLOCK).map(compensated_sum).collect();
    tree_combine(partials)
}

/// `log Σ exp(v_i)` with `-inf` entries contributing zero.
pub fn log_sum_exp<T: Scalar>(values: &[ExtReal<T>]) -> ExtReal<T> {
    let Some(max) = values.iter().copied().max() else {
        return ExtReal::neg_inf();
    };
    let Some(m) = max.as_finite() else {
        return ExtReal::neg_inf();
    };
    let shifted: Vec<T> = values
        .par_iter()
        .map(|v| match v.as_finite() {
            Some(x) => (x - m).exp(),
            None => T::zero(),
        })
        .collect();
    ExtReal::finite(m + deterministic_sum(&shifted).ln())
}
