//! Coefficient fields: exact Gaussian rationals and complex float64.
//!
//! Exact mode decides equalities without tolerance; float mode is only ever
//! compared against a tolerance. Rank and kernel computations dispatch on the
//! mode: exact elimination for [`GaussRat`], SVD for [`Complex64`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;

/// A JSON number or a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonNum {
    Rational(String),
    Float(f64),
}

/// JSON encoding of a scalar: `{"re": …, "im": …}`; a missing `im` is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarJson {
    pub re: JsonNum,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<JsonNum>,
}

impl ScalarJson {
    pub fn mode(&self) -> Result<ScalarMode> {
        let mode_of = |n: &JsonNum| match n {
            JsonNum::Rational(_) => ScalarMode::Exact,
            JsonNum::Float(_) => ScalarMode::Float,
        };
        let m = mode_of(&self.re);
        match &self.im {
            Some(im) if mode_of(im) != m => Err(Error::ModeMismatch(
                "re and im must both be rational strings or both be numbers".into(),
            )),
            _ => Ok(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    Exact,
    Float,
}

impl fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarMode::Exact => f.write_str("exact"),
            ScalarMode::Float => f.write_str("float"),
        }
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: ScalarMode;

    fn zero() -> Self;
    fn one() -> Self;
    fn imag_unit() -> Self;
    fn from_i64(v: i64) -> Self;
    /// Exact mode converts the binary float exactly (every f64 is dyadic).
    fn from_f64(re: f64, im: f64) -> Self;

    /// Structural zero test: exact in exact mode, bitwise `== 0` in float
    /// mode (used only to keep sparse storage free of zeros).
    fn is_zero(&self) -> bool;
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> Complex64;
    fn conj(&self) -> Self;

    /// Rank of a dense row-major matrix. `tol` is relative to the largest
    /// singular value and ignored in exact mode.
    fn matrix_rank(rows: &[Vec<Self>], ncols: usize, tol: f64) -> usize;

    /// Basis of the right kernel `{x : M x = 0}`.
    fn nullspace(rows: &[Vec<Self>], ncols: usize, tol: f64) -> Vec<Vec<Self>>;

    fn to_json(&self) -> ScalarJson;
    /// Rejects numbers of the other mode.
    fn from_json(j: &ScalarJson) -> Result<Self>;

    fn is_exact() -> bool {
        Self::MODE == ScalarMode::Exact
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }
}

/// Complex number with rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        GaussRat::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({} + {}i)", self.re, self.im)
        }
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"-0.25"`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Ok(r) = BigRational::from_str(s) {
        return Some(r);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.')?;
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back on a scaled quotient for huge numerators/denominators
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: GaussRat) -> GaussRat {
        GaussRat::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: GaussRat) -> GaussRat {
        GaussRat::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: GaussRat) -> GaussRat {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussRat::real(self.re * rhs.re);
        }
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        GaussRat::new(re, im)
    }
}

impl Div for GaussRat {
    type Output = GaussRat;
    fn div(self, rhs: GaussRat) -> GaussRat {
        assert!(!Scalar::is_zero(&rhs), "division by zero Gaussian rational");
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussRat::real(self.re / rhs.re);
        }
        let den = rhs.norm_sqr();
        let re = (&self.re * &rhs.re + &self.im * &rhs.im) / &den;
        let im = (&self.im * &rhs.re - &self.re * &rhs.im) / &den;
        GaussRat::new(re, im)
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re, -self.im)
    }
}

impl Scalar for GaussRat {
    const MODE: ScalarMode = ScalarMode::Exact;

    fn zero() -> Self {
        GaussRat::real(BigRational::zero())
    }
    fn one() -> Self {
        GaussRat::real(BigRational::one())
    }
    fn imag_unit() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }
    fn from_i64(v: i64) -> Self {
        GaussRat::real(BigRational::from_integer(BigInt::from(v)))
    }
    fn from_f64(re: f64, im: f64) -> Self {
        let conv = |x: f64| BigRational::from_f64(x).expect("finite float");
        GaussRat::new(conv(re), conv(im))
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
    fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }
    fn matrix_rank(rows: &[Vec<Self>], ncols: usize, _tol: f64) -> usize {
        linalg::exact_rank(rows, ncols)
    }
    fn nullspace(rows: &[Vec<Self>], ncols: usize, _tol: f64) -> Vec<Vec<Self>> {
        linalg::exact_nullspace(rows, ncols)
    }
    fn to_json(&self) -> ScalarJson {
        ScalarJson {
            re: JsonNum::Rational(self.re.to_string()),
            im: Some(JsonNum::Rational(self.im.to_string())),
        }
    }
    fn from_json(j: &ScalarJson) -> Result<Self> {
        let part = |n: &JsonNum| match n {
            JsonNum::Rational(s) => parse_rational(s)
                .ok_or_else(|| Error::Schema(format!("invalid rational {s:?}"))),
            JsonNum::Float(_) => Err(Error::ModeMismatch(
                "float coefficient in exact-mode input".into(),
            )),
        };
        j.mode()?;
        let re = part(&j.re)?;
        let im = match &j.im {
            Some(n) => part(n)?,
            None => BigRational::zero(),
        };
        Ok(GaussRat::new(re, im))
    }
}

impl Scalar for Complex64 {
    const MODE: ScalarMode = ScalarMode::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_f64(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn matrix_rank(rows: &[Vec<Self>], ncols: usize, tol: f64) -> usize {
        linalg::complex_rank(rows, ncols, tol)
    }
    fn nullspace(rows: &[Vec<Self>], ncols: usize, tol: f64) -> Vec<Vec<Self>> {
        linalg::complex_nullspace(rows, ncols, tol)
    }
    fn to_json(&self) -> ScalarJson {
        ScalarJson {
            re: JsonNum::Float(self.re),
            im: Some(JsonNum::Float(self.im)),
        }
    }
    fn from_json(j: &ScalarJson) -> Result<Self> {
        let part = |n: &JsonNum| match n {
            JsonNum::Float(x) if x.is_finite() => Ok(*x),
            JsonNum::Float(_) => Err(Error::Schema("non-finite coefficient".into())),
            JsonNum::Rational(_) => Err(Error::ModeMismatch(
                "rational string in float-mode input".into(),
            )),
        };
        j.mode()?;
        let re = part(&j.re)?;
        let im = match &j.im {
            Some(n) => part(n)?,
            None => 0.0,
        };
        Ok(Complex64::new(re, im))
    }
}

/// Absolute value of a rational, as a float.
pub fn rational_abs_f64(r: &BigRational) -> f64 {
    rational_to_f64(&r.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_arithmetic() {
        let a = GaussRat::from_ratio(1, 2) + GaussRat::imag_unit();
        let b = GaussRat::from_ratio(3, 1) - GaussRat::imag_unit();
        let q = a.clone() / b.clone();
        assert_eq!(q * b, a);
        assert_eq!(GaussRat::imag_unit() * GaussRat::imag_unit(), -GaussRat::one());
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3/6"), Some(BigRational::new(1.into(), 2.into())));
        assert_eq!(parse_rational("-7"), Some(BigRational::from_integer((-7).into())));
        assert_eq!(parse_rational("-0.25"), Some(BigRational::new((-1).into(), 4.into())));
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn exact_from_f64_is_dyadic() {
        let x = GaussRat::from_f64(0.375, -2.0);
        assert_eq!(x.re, BigRational::new(3.into(), 8.into()));
        assert_eq!(x.im, BigRational::from_integer((-2).into()));
    }
}
