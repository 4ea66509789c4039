//! Paired t-test with p-values from the regularized incomplete beta function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0 (Lanczos approximation, reflection below 1/2).
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    let pi = T::lit(std::f64::consts::PI);
    if x < half {
        // Γ(x)Γ(1-x) = π / sin(πx)
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut a = T::lit(LANCZOS[0]);
    let t = x + T::lit(LANCZOS_G) + half;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a = a + T::lit(c) / (x + T::from_count(i));
    }
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf<T: Scalar>(a: T, b: T, x: T) -> T {
    let eps = T::epsilon();
    let tiny = T::min_positive_value() / eps;
    let one = T::one();
    let two = T::lit(2.0);
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = d.recip();
    let mut h = d;
    for m in 1..=10_000usize {
        let m = T::from_count(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let del = d * c;
        h = h * del;
        if (del - one).abs() <= eps {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
pub fn regularized_incomplete_beta<T: Scalar>(a: T, b: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x >= T::one() {
        return T::one();
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (T::one() - x).ln();
    let front = ln_front.exp();
    if x < (a + T::one()) / (a + b + T::lit(2.0)) {
        front * beta_cf(a, b, x) / a
    } else {
        T::one() - front * beta_cf(b, a, T::one() - x) / b
    }
}

/// Two-sided p-value of Student's t with `df` degrees of freedom.
pub fn student_t_two_sided<T: Scalar>(t: T, df: usize) -> T {
    if t.is_infinite() {
        return T::zero();
    }
    let nu = T::from_count(df);
    let x = nu / (nu + t * t);
    regularized_incomplete_beta(nu / T::lit(2.0), T::lit(0.5), x)
        .max(T::zero())
        .min(T::one())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult<T> {
    pub t: T,
    pub p: T,
    pub df: usize,
    pub mean_difference: T,
    /// Differences had zero variance; `t`/`p` follow the fixed convention.
    pub degenerate: bool,
}

/// Two-sided paired t-test on `a - b`.
///
/// Zero-variance differences: all zero gives `t = 0, p = 1`; a nonzero
/// constant gives `t = ±inf, p = 0`. Both set `degenerate`.
pub fn paired_t_test<T: Scalar>(a: &[T], b: &[T]) -> Result<TTestResult<T>> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "paired samples of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "paired t-test needs at least two pairs".into(),
        ));
    }
    let diffs: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
    let mean = crate::num::mean(&diffs).unwrap_or_else(T::zero);
    let sd = crate::num::sample_std(&diffs);
    let df = n - 1;
    if sd == T::zero() {
        let (t, p) = if mean == T::zero() {
            (T::zero(), T::one())
        } else {
            (mean.signum() * T::infinity(), T::zero())
        };
        return Ok(TTestResult {
            t,
            p,
            df,
            mean_difference: mean,
            degenerate: true,
        });
    }
    let t = mean / (sd / T::from_count(n).sqrt());
    Ok(TTestResult {
        t,
        p: student_t_two_sided(t, df),
        df,
        mean_difference: mean,
        degenerate: false,
    })
}
