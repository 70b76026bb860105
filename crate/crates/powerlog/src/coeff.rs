//! Coefficient fields: exact rationals or machine floats.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::grid::Q;

pub type Rational = BigRational;

/// Scalar type of a series.
///
/// Exact coefficients refuse every operation whose result would be
/// transcendental and return [`Error::NeedsFloatMode`] instead.
pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;
    /// Tolerance used where a decision depends on a value being zero or one.
    const DEFAULT_TOL: f64;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(n: i64) -> Self;
    fn from_q(q: &Q) -> Self;
    fn from_rational(q: &Rational) -> Self;
    /// Exact conversion for rationals (binary expansion), identity for floats.
    fn from_f64(x: f64) -> Result<Self>;
    fn to_f64(&self) -> f64;
    fn is_positive(&self) -> bool;
    fn abs(&self) -> Self;
    fn ln(&self) -> Result<Self>;
    fn exp(&self) -> Result<Self>;
    /// `self^p` for rational `p`; `self` must be positive unless `p` is an integer.
    fn pow_q(&self, p: &Q) -> Result<Self>;
    fn name() -> &'static str;

    fn near(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            (self.to_f64() - other.to_f64()).abs() <= tol
        }
    }

    fn negligible(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.to_f64().abs() <= tol
        }
    }

    fn powi(&self, n: i64) -> Self {
        let mut base = if n < 0 { Self::one() / self.clone() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

/// Generalized binomial coefficient `binom(a, j)`.
pub fn binom_q<C: Coefficient>(a: &Q, j: usize) -> C {
    let mut acc = C::one();
    for i in 0..j {
        let num = C::from_q(&(*a - Q::from_integer(i as i64)));
        acc = acc * num / C::from_i64(i as i64 + 1);
    }
    acc
}

fn exact_root(n: &BigInt, r: u32) -> Option<BigInt> {
    if n.is_negative() {
        if r % 2 == 0 {
            return None;
        }
        return exact_root(&-n, r).map(|x| -x);
    }
    let c = n.nth_root(r);
    (c.pow(r) == *n).then_some(c)
}

impl Coefficient for Rational {
    const EXACT: bool = true;
    const DEFAULT_TOL: f64 = 0.0;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
    fn from_q(q: &Q) -> Self {
        Rational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn from_f64(x: f64) -> Result<Self> {
        Rational::from_float(x).ok_or_else(|| Error::NeedsFloatMode(format!("non-finite value {x}")))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn ln(&self) -> Result<Self> {
        if One::is_one(self) {
            Ok(Zero::zero())
        } else {
            Err(Error::NeedsFloatMode(format!("log({self})")))
        }
    }
    fn exp(&self) -> Result<Self> {
        if Zero::is_zero(self) {
            Ok(One::one())
        } else {
            Err(Error::NeedsFloatMode(format!("exp({self})")))
        }
    }
    fn pow_q(&self, p: &Q) -> Result<Self> {
        let base = Coefficient::powi(self, *p.numer());
        let r = *p.denom() as u32;
        if r == 1 {
            return Ok(base);
        }
        let fail = || Error::NeedsFloatMode(format!("({self})^({p})"));
        if Signed::is_negative(self) {
            return Err(fail());
        }
        let n = exact_root(base.numer(), r).ok_or_else(fail)?;
        let d = exact_root(base.denom(), r).ok_or_else(fail)?;
        Ok(Rational::new(n, d))
    }
    fn name() -> &'static str {
        "exact"
    }
}

impl Coefficient for f64 {
    const EXACT: bool = false;
    const DEFAULT_TOL: f64 = 1e-12;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_q(q: &Q) -> Self {
        *q.numer() as f64 / *q.denom() as f64
    }
    fn from_rational(q: &Rational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }
    fn from_f64(x: f64) -> Result<Self> {
        Ok(x)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_positive(&self) -> bool {
        *self > 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn ln(&self) -> Result<Self> {
        Ok(f64::ln(*self))
    }
    fn exp(&self) -> Result<Self> {
        Ok(f64::exp(*self))
    }
    fn pow_q(&self, p: &Q) -> Result<Self> {
        if p.is_integer() {
            Ok(f64::powi(*self, p.to_integer() as i32))
        } else {
            Ok(f64::powf(*self, <f64 as Coefficient>::from_q(p)))
        }
    }
    fn name() -> &'static str {
        "float"
    }
}
