//! Scalar abstraction shared by the information-theoretic and statistical code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type usable for scores, probabilities and test statistics.
///
/// Implemented for `f32` and `f64`. Counts are always integral; only the
/// quantities derived from them (entropies, probabilities, statistics) use `T`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossless-enough conversion from a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as float")
    }

    /// Conversion from an `f64` constant.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable as float")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<T: Scalar>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let mut acc = T::zero();
    for &x in xs {
        acc = acc + x;
    }
    Some(acc / T::from_count(xs.len()))
}

/// Sample standard deviation (n - 1 denominator). Zero for fewer than two values.
pub fn sample_std<T: Scalar>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::zero();
    }
    let m = mean(xs).unwrap_or_else(T::zero);
    let mut ss = T::zero();
    for &x in xs {
        let d = x - m;
        ss = ss + d * d;
    }
    (ss / T::from_count(xs.len() - 1)).sqrt()
}
