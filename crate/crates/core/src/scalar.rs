//! Scalar abstraction shared by every algorithm in the crate.
//!
//! The mechanisms only need ordered field arithmetic plus floor/ceil, exact
//! decimal parsing and a way to draw an index proportionally to a weight
//! vector. Rational instantiations are exact; float instantiations compare
//! with a small absolute tolerance and exist for fast exploratory sweeps.

use std::fmt::{Debug, Display};

use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {input:?} as a number: {reason}")]
pub struct ScalarParseError {
    pub input: String,
    pub reason: &'static str,
}

impl ScalarParseError {
    fn new(input: &str, reason: &'static str) -> Self {
        ScalarParseError {
            input: input.to_string(),
            reason,
        }
    }
}

pub trait Scalar: Clone + Debug + Display + PartialOrd + Num + Send + Sync + 'static {
    /// True when arithmetic on this type is exact.
    const EXACT: bool;

    fn from_usize(value: usize) -> Self;

    fn floor(&self) -> Self;

    fn ceil(&self) -> Self;

    fn fract(&self) -> Self {
        self.clone() - self.floor()
    }

    fn to_f64(&self) -> f64;

    /// Returns the integer value when `self` is integral. Floats accept values
    /// within the comparison tolerance of an integer.
    fn to_integer(&self) -> Option<i64>;

    /// Zero test: exact for rationals, tolerance-based for floats.
    fn is_negligible(&self) -> bool;

    /// Parses plain decimals (`12`, `-0.25`, `1.5e-3`) and fractions (`3/8`).
    fn parse_decimal(input: &str) -> Result<Self, ScalarParseError>;

    /// Lossless textual form; rationals print as `p/q` in lowest terms.
    fn to_exact_string(&self) -> String;

    /// Draws an index with probability proportional to `weights[i]`.
    /// Returns `None` when the weights are empty or sum to zero.
    fn sample_index<R: Rng + ?Sized>(weights: &[Self], rng: &mut R) -> Option<usize>;

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_negligible()
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero() && !self.is_negligible()
    }
}

/// Sum of a slice of scalars.
pub fn sum<S: Scalar>(values: &[S]) -> S {
    values.iter().fold(S::zero(), |acc, v| acc + v.clone())
}

/// Parses a decimal or `p/q` string into an exact big rational.
pub fn parse_big_rational(input: &str) -> Result<BigRational, ScalarParseError> {
    let text = input.trim();
    if text.is_empty() {
        return Err(ScalarParseError::new(input, "empty string"));
    }
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_big_rational(num)?;
        let den = parse_big_rational(den)?;
        if den.is_zero() {
            return Err(ScalarParseError::new(input, "zero denominator"));
        }
        return Ok(num / den);
    }

    let (negative, body) = match text.as_bytes()[0] {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = body[pos + 1..]
                .parse()
                .map_err(|_| ScalarParseError::new(input, "bad exponent"))?;
            (&body[..pos], exp)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ScalarParseError::new(input, "no digits"));
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(ScalarParseError::new(input, "unexpected character"));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::parse_bytes(digits.as_bytes(), 10)
        .ok_or_else(|| ScalarParseError::new(input, "no digits"))?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

fn sample_big_weights<R: Rng + ?Sized>(weights: &[BigRational], rng: &mut R) -> Option<usize> {
    let lcm = weights
        .iter()
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let scaled: Vec<BigInt> = weights
        .iter()
        .map(|w| {
            if Scalar::is_negative(w) {
                BigInt::zero()
            } else {
                w.numer() * (&lcm / w.denom())
            }
        })
        .collect();
    let total: BigInt = scaled.iter().sum();
    if total.is_zero() {
        return None;
    }
    let mut draw = rng.gen_bigint_range(&BigInt::zero(), &total);
    for (i, w) in scaled.iter().enumerate() {
        if draw < *w {
            return Some(i);
        }
        draw -= w;
    }
    unreachable!("draw below total weight")
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_usize(value: usize) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn floor(&self) -> Self {
        Ratio::floor(self)
    }

    fn ceil(&self) -> Self {
        Ratio::ceil(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_integer(&self) -> Option<i64> {
        if self.is_integer() {
            self.numer().to_i64()
        } else {
            None
        }
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn parse_decimal(input: &str) -> Result<Self, ScalarParseError> {
        parse_big_rational(input)
    }

    fn to_exact_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn sample_index<R: Rng + ?Sized>(weights: &[Self], rng: &mut R) -> Option<usize> {
        sample_big_weights(weights, rng)
    }
}

impl Scalar for Ratio<i64> {
    const EXACT: bool = true;

    fn from_usize(value: usize) -> Self {
        Ratio::from_integer(value as i64)
    }

    fn floor(&self) -> Self {
        Ratio::floor(self)
    }

    fn ceil(&self) -> Self {
        Ratio::ceil(self)
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn to_integer(&self) -> Option<i64> {
        self.is_integer().then(|| *self.numer())
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn parse_decimal(input: &str) -> Result<Self, ScalarParseError> {
        let big = parse_big_rational(input)?;
        match (big.numer().to_i64(), big.denom().to_i64()) {
            (Some(n), Some(d)) => Ok(Ratio::new(n, d)),
            _ => Err(ScalarParseError::new(input, "does not fit in a 64-bit ratio")),
        }
    }

    fn to_exact_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn sample_index<R: Rng + ?Sized>(weights: &[Self], rng: &mut R) -> Option<usize> {
        let big: Vec<BigRational> = weights
            .iter()
            .map(|w| BigRational::new(BigInt::from(*w.numer()), BigInt::from(*w.denom())))
            .collect();
        sample_big_weights(&big, rng)
    }
}

macro_rules! float_scalar {
    ($t:ty, $eps:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_usize(value: usize) -> Self {
                value as $t
            }

            fn floor(&self) -> Self {
                // snap values sitting within tolerance of an integer
                let r = <$t>::round(*self);
                if (*self - r).abs() <= $eps {
                    r
                } else {
                    <$t>::floor(*self)
                }
            }

            fn ceil(&self) -> Self {
                let r = <$t>::round(*self);
                if (*self - r).abs() <= $eps {
                    r
                } else {
                    <$t>::ceil(*self)
                }
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn to_integer(&self) -> Option<i64> {
                let r = <$t>::round(*self);
                ((*self - r).abs() <= $eps && r.is_finite()).then(|| r as i64)
            }

            fn is_negligible(&self) -> bool {
                self.abs() <= $eps
            }

            fn parse_decimal(input: &str) -> Result<Self, ScalarParseError> {
                let exact = parse_big_rational(input)?;
                Ok(ToPrimitive::to_f64(&exact).unwrap_or(f64::NAN) as $t)
            }

            fn to_exact_string(&self) -> String {
                format!("{}", self)
            }

            fn sample_index<R: Rng + ?Sized>(weights: &[Self], rng: &mut R) -> Option<usize> {
                let total: $t = weights.iter().map(|w| w.max(0.0)).sum();
                if total.is_nan() || total <= $eps {
                    return None;
                }
                let mut draw = rng.gen::<$t>() * total;
                let mut last = None;
                for (i, w) in weights.iter().enumerate() {
                    if *w <= 0.0 {
                        continue;
                    }
                    if draw < *w {
                        return Some(i);
                    }
                    draw -= *w;
                    last = Some(i);
                }
                last
            }
        }
    };
}

float_scalar!(f64, 1e-9);
float_scalar!(f32, 1e-4);
