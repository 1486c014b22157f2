//! Small dense square matrices for cocycle products.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Operator norm used for `log ‖product‖`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixNorm {
    /// Maximum absolute row sum.
    #[default]
    #[serde(rename = "inf")]
    Inf,
    /// Largest singular value.
    #[serde(rename = "2")]
    Two,
}

/// Row-major `dim × dim` matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Option<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return None;
        }
        Some(SquareMatrix {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![T::zero(); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = T::one();
        }
        SquareMatrix { dim, data }
    }

    pub fn diag(d: &[T]) -> Self {
        let mut m = Self::identity(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = vec![T::zero(); self.dim * self.dim];
        mul_into(self.dim, &self.data, &rhs.data, &mut out);
        SquareMatrix { dim: self.dim, data: out }
    }

    pub fn scaled(&self, c: T) -> Self {
        SquareMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= T::zero() && v.is_finite())
    }

    pub fn norm(&self, norm: MatrixNorm) -> T {
        norm_of(self.dim, &self.data, norm)
    }
}

/// `out = a · b` for row-major `dim × dim` slices.
pub(crate) fn mul_into<T: Scalar>(dim: usize, a: &[T], b: &[T], out: &mut [T]) {
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = T::zero();
            for l in 0..dim {
                acc += a[i * dim + l] * b[l * dim + j];
            }
            out[i * dim + j] = acc;
        }
    }
}

pub(crate) fn norm_of<T: Scalar>(dim: usize, a: &[T], norm: MatrixNorm) -> T {
    match norm {
        MatrixNorm::Inf => a
            .chunks(dim)
            .map(|r| r.iter().fold(T::zero(), |s, v| s + v.abs()))
            .fold(T::zero(), T::max),
        MatrixNorm::Two => spectral_norm(dim, a),
    }
}

/// Largest singular value via cyclic Jacobi on `AᵀA`.
fn spectral_norm<T: Scalar>(dim: usize, a: &[T]) -> T {
    if dim == 1 {
        return a[0].abs();
    }
    let mut s = vec![T::zero(); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = T::zero();
            for l in 0..dim {
                acc += a[l * dim + i] * a[l * dim + j];
            }
            s[i * dim + j] = acc;
        }
    }
    let scale = s.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let two = T::of(2.0);
    for _sweep in 0..64 {
        let off: T = (0..dim)
            .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[i * dim + j] * s[i * dim + j])
            .sum();
        if off.sqrt() <= T::epsilon() * scale {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let apq = s[p * dim + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (s[q * dim + q] - s[p * dim + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;
                for k in 0..dim {
                    let skp = s[k * dim + p];
                    let skq = s[k * dim + q];
                    s[k * dim + p] = c * skp - sn * skq;
                    s[k * dim + q] = sn * skp + c * skq;
                }
                for k in 0..dim {
                    let spk = s[p * dim + k];
                    let sqk = s[q * dim + k];
                    s[p * dim + k] = c * spk - sn * sqk;
                    s[q * dim + k] = sn * spk + c * sqk;
                }
            }
        }
    }
    (0..dim)
        .map(|i| s[i * dim + i])
        .fold(T::zero(), T::max)
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_of_small_matrices() {
        let m = SquareMatrix::from_rows(&[vec![1.0f64, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.norm(MatrixNorm::Inf), 7.0);
        // singular values of [[1,2],[3,4]]: sqrt(15 + sqrt(221))
        let expect = (15.0 + 221f64.sqrt()).sqrt();
        assert!((m.norm(MatrixNorm::Two) - expect).abs() < 1e-12);
        let d = SquareMatrix::diag(&[2.0f64, 3.0]);
        assert_eq!(d.norm(MatrixNorm::Two), 3.0);
        let z = SquareMatrix::from_rows(&[vec![0.0f64, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(z.norm(MatrixNorm::Two), 0.0);
    }

    #[test]
    fn product_order() {
        let a = SquareMatrix::from_rows(&[vec![1.0f64, 1.0], vec![0.0, 1.0]]).unwrap();
        let b = SquareMatrix::from_rows(&[vec![1.0f64, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(a.mul(&b).rows(), vec![vec![2.0, 1.0], vec![1.0, 1.0]]);
    }
}
