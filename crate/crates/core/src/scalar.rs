//! Scalar fields for series and moment arithmetic: exact rationals and
//! high-precision binary floats with a cancellation flag.

use std::fmt;
use std::str::FromStr;

use dashu_float::ops::SquareRoot;
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Smallest mantissa width accepted for [`BigFloat`].
pub const MIN_FLOAT_BITS: usize = 128;

/// Arithmetic needed by jets and the moment transforms.
///
/// Constructors take `&self` so that a float scalar can hand its precision to
/// the values it creates.
pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    /// True when arithmetic never rounds.
    const EXACT: bool;

    fn from_i64_like(&self, v: i64) -> Self;
    fn from_f64_like(&self, v: f64) -> Result<Self>;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn sqrt(&self) -> Result<Self>;

    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Human-readable value; exact scalars print a reduced fraction.
    fn render(&self) -> String;
    /// Set once a cancellation has eaten more than half the mantissa.
    fn lossy(&self) -> bool {
        false
    }

    fn zero_like(&self) -> Self {
        self.from_i64_like(0)
    }

    fn one_like(&self) -> Self {
        self.from_i64_like(1)
    }

    fn mul_i64(&self, k: i64) -> Self {
        self.mul(&self.from_i64_like(k))
    }

    fn div_i64(&self, k: i64) -> Result<Self> {
        self.div(&self.from_i64_like(k))
    }
}

/// Exact rational number.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero("rational with zero denominator"));
        }
        Ok(Rational(BigRational::new(num.into(), den.into())))
    }

    pub fn integer(v: i64) -> Self {
        Rational(BigRational::from_integer(v.into()))
    }

    /// The exact binary value of a finite double.
    pub fn from_f64(v: f64) -> Result<Self> {
        BigRational::from_float(v)
            .map(Rational)
            .ok_or_else(|| Error::InvalidParameter(format!("non-finite value {v}")))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BigRational::from_str(s.trim())
            .map(Rational)
            .map_err(|_| Error::InvalidParameter(format!("not a rational number: {s:?}")))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    let root = n.sqrt();
    (&root * &root == *n).then_some(root)
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64_like(&self, v: i64) -> Self {
        Rational::integer(v)
    }

    fn from_f64_like(&self, v: f64) -> Result<Self> {
        Rational::from_f64(v)
    }

    fn add(&self, rhs: &Self) -> Self {
        Rational(&self.0 + &rhs.0)
    }

    fn sub(&self, rhs: &Self) -> Self {
        Rational(&self.0 - &rhs.0)
    }

    fn mul(&self, rhs: &Self) -> Self {
        Rational(&self.0 * &rhs.0)
    }

    fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.0.is_zero() {
            return Err(Error::DivisionByZero("rational division by zero"));
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    fn neg(&self) -> Self {
        Rational(-&self.0)
    }

    fn sqrt(&self) -> Result<Self> {
        if self.0.is_negative() {
            return Err(Error::InvalidParameter(format!(
                "square root of negative value {self}"
            )));
        }
        match (exact_isqrt(self.0.numer()), exact_isqrt(self.0.denom())) {
            (Some(n), Some(d)) => Ok(Rational(BigRational::new(n, d))),
            _ => Err(Error::Inexact(format!("square root of {self} is irrational"))),
        }
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    fn render(&self) -> String {
        if self.0.denom().is_one() {
            self.0.numer().to_string()
        } else {
            format!("{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

type Fb = FBig<HalfEven, 2>;

/// Binary floating point with a configurable mantissa width.
///
/// Each value carries an estimate of the mantissa bits already lost to
/// cancellation: additions and subtractions add the bits they cancel to
/// the larger count of their operands. A value is `lossy` once more than
/// half of the mantissa is gone.
#[derive(Clone, Debug)]
pub struct BigFloat {
    value: Fb,
    precision: usize,
    lost_bits: usize,
}

impl BigFloat {
    pub fn from_f64(v: f64, precision: usize) -> Result<Self> {
        Self::check_precision(precision)?;
        let value = Fb::try_from(v)
            .map_err(|_| Error::InvalidParameter(format!("non-finite value {v}")))?;
        Ok(Self::wrap(value, precision, 0))
    }

    pub fn from_i64(v: i64, precision: usize) -> Result<Self> {
        Self::check_precision(precision)?;
        Ok(Self::wrap(Fb::from(IBig::from(v)), precision, 0))
    }

    fn check_precision(precision: usize) -> Result<()> {
        if precision < MIN_FLOAT_BITS {
            return Err(Error::InvalidParameter(format!(
                "float precision must be at least {MIN_FLOAT_BITS} bits (got {precision})"
            )));
        }
        Ok(())
    }

    fn wrap(value: Fb, precision: usize, lost_bits: usize) -> Self {
        BigFloat {
            value: value.with_precision(precision).value(),
            precision,
            lost_bits,
        }
    }

    /// Estimated number of mantissa bits lost to cancellation.
    pub fn lost_bits(&self) -> usize {
        self.lost_bits
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    /// `log₂` of the magnitude, to within one.
    fn magnitude(&self) -> Option<isize> {
        let repr = self.value.repr();
        (!repr.is_zero()).then(|| repr.exponent() + repr.digits() as isize)
    }

    fn combine(&self, rhs: &Self, value: Fb, cancelling: bool) -> Self {
        let precision = self.precision.max(rhs.precision);
        let mut out = Self::wrap(value, precision, self.lost_bits.max(rhs.lost_bits));
        if cancelling {
            if let (Some(ma), Some(mb)) = (self.magnitude(), rhs.magnitude()) {
                let cancelled = match out.magnitude() {
                    None => precision,
                    Some(mr) => (ma.max(mb) - mr).max(0) as usize,
                };
                out.lost_bits = (out.lost_bits + cancelled).min(precision);
            }
        }
        out
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Scalar for BigFloat {
    const EXACT: bool = false;

    fn from_i64_like(&self, v: i64) -> Self {
        Self::wrap(Fb::from(IBig::from(v)), self.precision, 0)
    }

    fn from_f64_like(&self, v: f64) -> Result<Self> {
        Self::from_f64(v, self.precision)
    }

    fn add(&self, rhs: &Self) -> Self {
        self.combine(rhs, &self.value + &rhs.value, true)
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.combine(rhs, &self.value - &rhs.value, true)
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.combine(rhs, &self.value * &rhs.value, false)
    }

    fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.value.repr().is_zero() {
            return Err(Error::DivisionByZero("float division by zero"));
        }
        Ok(self.combine(rhs, &self.value / &rhs.value, false))
    }

    fn neg(&self) -> Self {
        BigFloat {
            value: -self.value.clone(),
            precision: self.precision,
            lost_bits: self.lost_bits,
        }
    }

    fn sqrt(&self) -> Result<Self> {
        if self.value.repr().is_zero() {
            return Ok(self.clone());
        }
        if *self.value.repr().significand() < dashu_int::IBig::ZERO {
            return Err(Error::InvalidParameter(format!(
                "square root of negative value {}",
                self.to_f64()
            )));
        }
        Ok(Self::wrap(self.value.sqrt(), self.precision, self.lost_bits))
    }

    fn is_zero(&self) -> bool {
        self.value.repr().is_zero()
    }

    fn is_positive(&self) -> bool {
        !self.is_zero() && !(*self.value.repr().significand() < dashu_int::IBig::ZERO)
    }

    fn to_f64(&self) -> f64 {
        self.value.to_f64().value()
    }

    fn render(&self) -> String {
        format!("{:.16e}", self.to_f64())
    }

    fn lossy(&self) -> bool {
        self.lost_bits > self.precision / 2
    }
}

/// Complex number over a [`Scalar`] field.
#[derive(Clone, Debug, PartialEq)]
pub struct CScalar<S> {
    pub re: S,
    pub im: S,
}

impl<S: Scalar> CScalar<S> {
    pub fn real(re: S) -> Self {
        let im = re.zero_like();
        CScalar { re, im }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        CScalar {
            re: self.re.add(&rhs.re),
            im: self.im.add(&rhs.im),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        CScalar {
            re: self.re.mul(&rhs.re).sub(&self.im.mul(&rhs.im)),
            im: self.re.mul(&rhs.im).add(&self.im.mul(&rhs.re)),
        }
    }

    /// Multiplies by `iᵏ`.
    pub fn mul_i_pow(&self, k: usize) -> Self {
        match k % 4 {
            0 => self.clone(),
            1 => CScalar {
                re: self.im.neg(),
                im: self.re.clone(),
            },
            2 => CScalar {
                re: self.re.neg(),
                im: self.im.neg(),
            },
            _ => CScalar {
                re: self.im.clone(),
                im: self.re.neg(),
            },
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn render(&self) -> String {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => self.re.render(),
            (true, false) => format!("{}i", self.im.render()),
            (false, false) => format!("{}+{}i", self.re.render(), self.im.render()),
        }
    }
}
