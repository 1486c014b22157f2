//! Extended reals: a finite value or negative infinity.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Scalar;

/// A real number or `-inf`. NaN and `+inf` are not representable.
#[derive(Clone, Copy, PartialEq)]
pub struct ExtReal<T>(T);

impl<T: Scalar> ExtReal<T> {
    pub fn neg_inf() -> Self {
        ExtReal(T::neg_infinity())
    }

    pub fn zero() -> Self {
        ExtReal(T::zero())
    }

    /// Wraps `v`; returns `None` for NaN or `+inf`.
    pub fn new(v: T) -> Option<Self> {
        if v.is_nan() || v == T::infinity() {
            None
        } else {
            Some(ExtReal(v))
        }
    }

    /// Wraps `v`, panicking on NaN or `+inf`.
    pub fn finite(v: T) -> Self {
        Self::new(v).unwrap_or_else(|| panic!("not an extended real: {v}"))
    }

    /// `log v` for `v >= 0`; `log 0 = -inf`.
    pub fn ln_of(v: T) -> Self {
        debug_assert!(v >= T::zero());
        if v <= T::zero() {
            Self::neg_inf()
        } else {
            Self::finite(v.ln())
        }
    }

    pub fn is_neg_inf(self) -> bool {
        self.0 == T::neg_infinity()
    }

    pub fn is_finite(self) -> bool {
        !self.is_neg_inf()
    }

    pub fn value(self) -> T {
        self.0
    }

    /// `Some(v)` when finite.
    pub fn as_finite(self) -> Option<T> {
        if self.is_finite() {
            Some(self.0)
        } else {
            None
        }
    }

    pub fn exp(self) -> T {
        if self.is_neg_inf() {
            T::zero()
        } else {
            self.0.exp()
        }
    }

    /// Multiplication by a nonnegative weight with `0 * (-inf) = 0`.
    pub fn weighted(self, w: T) -> Self {
        debug_assert!(w >= T::zero());
        if w == T::zero() {
            Self::zero()
        } else {
            ExtReal(self.0 * w)
        }
    }

    /// Division by a positive count.
    pub fn div(self, n: T) -> Self {
        ExtReal(self.0 / n)
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl<T: Scalar> Add for ExtReal<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.is_neg_inf() || rhs.is_neg_inf() {
            Self::neg_inf()
        } else {
            ExtReal(self.0 + rhs.0)
        }
    }
}

impl<T: Scalar> Add<T> for ExtReal<T> {
    type Output = Self;
    fn add(self, rhs: T) -> Self {
        self + ExtReal::finite(rhs)
    }
}

impl<T: Scalar> Eq for ExtReal<T> {}

impl<T: Scalar> PartialOrd for ExtReal<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for ExtReal<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).expect("ExtReal never holds NaN")
    }
}

impl<T: Scalar> fmt::Debug for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<T: Scalar> fmt::Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_neg_inf() {
            f.write_str("-inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}

impl<T: Scalar> Serialize for ExtReal<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.as_finite() {
            Some(v) => s.serialize_f64(v.to_f64_lossy()),
            None => s.serialize_str("-inf"),
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for ExtReal<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => ExtReal::new(T::of(v))
                .ok_or_else(|| serde::de::Error::custom("not an extended real")),
            Repr::Str(s) if s == "-inf" => Ok(ExtReal::neg_inf()),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected number or \"-inf\", got {s:?}"
            ))),
        }
    }
}

/// Serializes an `f64` that may be infinite or NaN as `"inf"`, `"-inf"` or
/// `"nan"`; JSON has no literal for these.
pub fn ser_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// [`ser_f64`] for a vector.
pub fn ser_f64_vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct W(f64);
    impl Serialize for W {
        fn serialize<S2: Serializer>(&self, s: S2) -> Result<S2::Ok, S2::Error> {
            ser_f64(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&W(*x))?;
    }
    seq.end()
}

#[cfg(test)]
mod tests {
    use super::*;

    type E = ExtReal<f64>;

    #[test]
    fn arithmetic_of_negative_infinity() {
        assert_eq!(E::neg_inf().exp(), 0.0);
        assert!((E::neg_inf() + 3.0).is_neg_inf());
        assert!(E::neg_inf() < E::finite(-1e300));
        assert_eq!(E::neg_inf().weighted(0.0), E::zero());
        assert!(E::ln_of(0.0).is_neg_inf());
        assert!(E::new(f64::NAN).is_none());
        assert!(E::new(f64::INFINITY).is_none());
    }

    #[test]
    fn json_representation() {
        let v = vec![E::finite(1.5), E::neg_inf()];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[1.5,"-inf"]"#);
        let back: Vec<E> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
