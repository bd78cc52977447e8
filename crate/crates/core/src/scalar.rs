//! Numeric scalar abstraction shared by the closed forms and the oracle.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

/// A number type closed forms can be evaluated in.
///
/// Implemented for `f32`, `f64` and [`BigRational`]. Only the rational
/// implementation is exact; the float ones exist for quick sweeps and plots.
pub trait Scalar: Clone + Debug + PartialOrd + Num + FromPrimitive + Send + Sync {
    /// `num / den`, rounded for inexact types.
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self;

    fn to_f64_lossy(&self) -> f64;

    fn from_usize_exact(v: usize) -> Self {
        Self::from_usize(v).expect("usize is representable")
    }

    /// Integer power with `0^0 = 1`.
    fn powu(&self, exp: usize) -> Self {
        num_traits::pow::pow(self.clone(), exp)
    }

    fn is_integral(&self) -> bool;
}

impl Scalar for BigRational {
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        BigRational::new(num.clone(), den.clone())
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn is_integral(&self) -> bool {
        self.is_integer()
    }
}

macro_rules! impl_float_scalar {
    ($f:ty) => {
        impl Scalar for $f {
            fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
                let q = BigRational::new(num.clone(), den.clone());
                q.to_f64().unwrap_or(f64::NAN) as $f
            }

            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }

            fn is_integral(&self) -> bool {
                self.fract() == 0.0
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

/// Binomial coefficient `C(n, k)`, zero when `k < 0`, `n < 0` or `k > n`.
pub fn binomial<S: Scalar>(n: i64, k: i64) -> S {
    if n < 0 || k < 0 || k > n {
        return S::zero();
    }
    let k = k.min(n - k);
    let mut acc = S::one();
    for i in 0..k {
        acc = acc * S::from_i64(n - i).unwrap() / S::from_i64(i + 1).unwrap();
    }
    acc
}

/// Exact integer binomial, used where the result must stay an integer.
pub fn binomial_int(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Decimal rendering of an exact rational to `digits` significant digits.
pub fn format_sig(q: &BigRational, digits: usize) -> String {
    let v = q.to_f64().unwrap_or(f64::NAN);
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `a/b` or `a` for integral values.
pub fn format_exact(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
