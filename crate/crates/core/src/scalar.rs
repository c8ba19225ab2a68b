//! Scalar rings used by the matrix and polynomial code.
//!
//! The Pfaffian, determinant and polynomial routines are written once over
//! these traits and instantiated for `f32`/`f64`, their complex versions,
//! exact big rationals, and polynomials over any of those.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, Zero};

/// Commutative ring with unit. Enough for expansion-by-minors style
/// algorithms (the combinatorial Pfaffian oracle, polynomial products).
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Embeds a small integer.
    fn from_i64(n: i64) -> Self;
}

/// Field with a pivoting score, for elimination algorithms.
pub trait Field: Ring + Div<Output = Self> {
    /// Non-negative size used to choose pivots. Exact fields only need
    /// `0` for zero and something positive otherwise.
    fn pivot_score(&self) -> f64;

    /// `true` for exact arithmetic; elimination then skips tolerance logic.
    const EXACT: bool;
}

/// Scalars with an absolute value in `f64`, used for tolerance checks on
/// floating point matrices.
pub trait Magnitude {
    fn magnitude(&self) -> f64;
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Ring for $t {
            fn from_i64(n: i64) -> Self {
                n as $t
            }
        }
        impl Field for $t {
            fn pivot_score(&self) -> f64 {
                self.abs() as f64
            }
            const EXACT: bool = false;
        }
        impl Magnitude for $t {
            fn magnitude(&self) -> f64 {
                self.abs() as f64
            }
        }
        impl Ring for Complex<$t> {
            fn from_i64(n: i64) -> Self {
                Complex::new(n as $t, 0.0)
            }
        }
        impl Field for Complex<$t> {
            fn pivot_score(&self) -> f64 {
                self.norm() as f64
            }
            const EXACT: bool = false;
        }
        impl Magnitude for Complex<$t> {
            fn magnitude(&self) -> f64 {
                self.norm() as f64
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Ring for BigRational {
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

impl Field for BigRational {
    fn pivot_score(&self) -> f64 {
        // Any nonzero pivot is exact; prefer short numerators to slow
        // coefficient growth.
        if self.is_zero() {
            0.0
        } else {
            1.0 / (1.0 + (self.numer().bits() + self.denom().bits()) as f64)
        }
    }
    const EXACT: bool = true;
}

impl Magnitude for BigRational {
    fn magnitude(&self) -> f64 {
        rational_to_f64(&self.abs())
    }
}

impl Ring for BigInt {
    fn from_i64(n: i64) -> Self {
        BigInt::from(n)
    }
}

/// Lossy conversion used only for reporting.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Shift both sides down to a representable range.
            let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
            let n = (q.numer() >> shift as usize).to_f64().unwrap_or(f64::NAN);
            let d = (q.denom() >> shift as usize).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Formats an exact rational as `"p/q"` (or `"p"` for integers).
pub fn rational_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Relative closeness for floats: `|a-b| <= tol * max(1, |a|, |b|)`.
pub fn close<F: Float>(a: F, b: F, tol: F) -> bool {
    (a - b).abs() <= tol * F::one().max(a.abs()).max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings_round_trip() {
        let q = BigRational::new(BigInt::from(-6), BigInt::from(4));
        assert_eq!(rational_string(&q), "-3/2");
        assert_eq!(parse_rational("-3/2"), Some(q));
        assert_eq!(parse_rational("7"), Some(BigRational::from_i64(7)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn huge_rationals_convert() {
        let big = BigInt::from(3) << 2000usize;
        let q = BigRational::new(big.clone(), big << 1usize);
        assert!((rational_to_f64(&q) - 0.5).abs() < 1e-15);
    }
}
