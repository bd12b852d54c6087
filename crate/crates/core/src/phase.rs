//! Fixed-point arithmetic on the circle `R/Z`.
//!
//! A [`Phase`] stores `x mod 1` as an integer numerator over `2^bits`. Addition,
//! negation and multiplication by integers are exact modulo 1, so torus maps
//! built from them satisfy the group law bit-for-bit. The only rounding
//! happens when a real number (an irrational frequency, a decimal string) is
//! first brought onto the grid.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest supported working precision in bits.
pub const MIN_PRECISION_BITS: u32 = 256;

/// Number of fractional bits carried by every [`Phase`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(MIN_PRECISION_BITS);

    pub fn new(bits: u32) -> Result<Self> {
        if bits < MIN_PRECISION_BITS {
            return Err(Error::Domain(format!(
                "precision must be at least {MIN_PRECISION_BITS} bits, got {bits}"
            )));
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn modulus(self) -> BigUint {
        BigUint::one() << self.0
    }

    /// The grid spacing `2^-bits` as an `f64` (may underflow to a tiny value).
    pub fn ulp(self) -> f64 {
        (-(self.0 as f64)).exp2()
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

/// A point of `R/Z`, stored as `raw / 2^bits` with `0 <= raw < 2^bits`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Phase {
    raw: BigUint,
    precision: Precision,
}

impl Phase {
    pub fn zero(precision: Precision) -> Self {
        Phase {
            raw: BigUint::zero(),
            precision,
        }
    }

    /// Reduces `raw` modulo `2^bits`.
    pub fn from_raw(raw: BigUint, precision: Precision) -> Self {
        let raw = truncate(raw, precision.bits());
        Phase { raw, precision }
    }

    /// `floor(frac(num/den) * 2^bits) / 2^bits`.
    pub fn from_ratio(num: &BigInt, den: &BigUint, precision: Precision) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        let den_i = BigInt::from(den.clone());
        let r = num.mod_floor(&den_i);
        let scaled: BigInt = r << precision.bits();
        let q = scaled.div_floor(&den_i);
        let raw = q.to_biguint().expect("non-negative by construction");
        Ok(Phase::from_raw(raw, precision))
    }

    pub fn from_rational(value: &BigRational, precision: Precision) -> Self {
        let den = value
            .denom()
            .to_biguint()
            .expect("normalized rationals have positive denominators");
        Phase::from_ratio(value.numer(), &den, precision).expect("denominator is non-zero")
    }

    /// Exact for every finite `f64` whose binary exponent fits in the grid.
    pub fn from_f64(x: f64, precision: Precision) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("non-finite coordinate {x}")));
        }
        let r = BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("cannot convert {x}")))?;
        Ok(Phase::from_rational(&r, precision))
    }

    /// `(sqrt(5) - 1) / 2`, rounded down onto the grid.
    pub fn golden_mean(precision: Precision) -> Self {
        // sqrt(5) * 2^b = isqrt(5 * 2^(2b)); subtract 2^b and halve.
        let b = precision.bits();
        let s = (BigUint::from(5u32) << (2 * b as usize)).sqrt();
        let raw = (s - (BigUint::one() << b)) >> 1u32;
        Phase::from_raw(raw, precision)
    }

    /// Fractional part of `sqrt(n)`, rounded down onto the grid.
    pub fn frac_sqrt(n: u64, precision: Precision) -> Self {
        let b = precision.bits();
        let s = (BigUint::from(n) << (2 * b as usize)).sqrt();
        Phase::from_raw(s, precision)
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn raw(&self) -> &BigUint {
        &self.raw
    }

    pub fn is_zero(&self) -> bool {
        self.raw.is_zero()
    }

    /// The exact dyadic rational this phase represents, in `[0, 1)`.
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.raw.clone()), BigInt::from(self.precision.modulus()))
    }

    /// Representative in `[0, 1)`.
    pub fn to_f64(&self) -> f64 {
        let v = top_bits_to_f64(&self.raw, self.precision.bits());
        if v >= 1.0 {
            0.0
        } else {
            v
        }
    }

    /// Representative in `[-1/2, 1/2)`.
    pub fn to_signed_f64(&self) -> f64 {
        let half = BigUint::one() << (self.precision.bits() - 1);
        if self.raw >= half {
            -top_bits_to_f64(&(self.precision.modulus() - &self.raw), self.precision.bits())
        } else {
            top_bits_to_f64(&self.raw, self.precision.bits())
        }
    }

    /// Numerator of the distance to the nearest integer, over `2^bits`.
    pub fn dist_to_int_raw(&self) -> BigUint {
        let other = self.precision.modulus() - &self.raw;
        if other < self.raw {
            other
        } else {
            self.raw.clone()
        }
    }

    /// Distance to the nearest integer, in `[0, 1/2]`.
    pub fn dist_to_int(&self) -> f64 {
        top_bits_to_f64(&self.dist_to_int_raw(), self.precision.bits())
    }

    pub fn mul_int(&self, k: &BigInt) -> Phase {
        let (sign, mag) = k.clone().into_parts();
        let prod = Phase::from_raw(&self.raw * mag, self.precision);
        if sign == Sign::Minus {
            -prod
        } else {
            prod
        }
    }

    pub fn mul_i64(&self, k: i64) -> Phase {
        self.mul_int(&BigInt::from(k))
    }

    pub fn mul_u64(&self, k: u64) -> Phase {
        Phase::from_raw(&self.raw * k, self.precision)
    }

    fn check_same(&self, other: &Phase) {
        assert_eq!(
            self.precision, other.precision,
            "phases with different precisions cannot be combined"
        );
    }
}

/// `top_bits(raw) / 2^bits` with correct rounding to the nearest `f64`.
fn top_bits_to_f64(raw: &BigUint, bits: u32) -> f64 {
    if raw.is_zero() {
        return 0.0;
    }
    let len = raw.bits();
    // keep 64 significant bits, the remainder only affects sub-ulp rounding
    let shift = len.saturating_sub(64);
    let top = (raw >> shift).to_u64().expect("at most 64 bits");
    let exp = shift as i64 - bits as i64;
    (top as f64) * (exp as f64).exp2()
}

fn truncate(x: BigUint, bits: u32) -> BigUint {
    if x.bits() <= bits as u64 {
        x
    } else {
        let mask = (BigUint::one() << bits) - BigUint::one();
        x & mask
    }
}

impl Add for &Phase {
    type Output = Phase;
    fn add(self, rhs: &Phase) -> Phase {
        self.check_same(rhs);
        let mut raw = &self.raw + &rhs.raw;
        let m = self.precision.modulus();
        if raw >= m {
            raw -= m;
        }
        Phase {
            raw,
            precision: self.precision,
        }
    }
}

impl Add for Phase {
    type Output = Phase;
    fn add(self, rhs: Phase) -> Phase {
        &self + &rhs
    }
}

impl Sub for &Phase {
    type Output = Phase;
    fn sub(self, rhs: &Phase) -> Phase {
        self.check_same(rhs);
        let raw = if self.raw >= rhs.raw {
            &self.raw - &rhs.raw
        } else {
            self.precision.modulus() - &rhs.raw + &self.raw
        };
        Phase {
            raw,
            precision: self.precision,
        }
    }
}

impl Sub for Phase {
    type Output = Phase;
    fn sub(self, rhs: Phase) -> Phase {
        &self - &rhs
    }
}

impl Neg for &Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        if self.raw.is_zero() {
            self.clone()
        } else {
            Phase {
                raw: self.precision.modulus() - &self.raw,
                precision: self.precision,
            }
        }
    }
}

impl Neg for Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        -&self
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phase({:.17} @{}b)", self.to_f64(), self.precision.bits())
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// Distance from `x` to the nearest integer.
pub fn distance_to_integers(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Parses an exact decimal (`0.110001`, `-3.5`, `1e-3`) or a fraction (`7/9`).
pub fn parse_exact(text: &str) -> Result<BigRational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {t:?}")))?;
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {t:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {t:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = t[i + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {t:?}")))?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("empty number {t:?}")));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("not a decimal number: {t:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().expect("digits only")
    };
    if neg {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn p() -> Precision {
        Precision::DEFAULT
    }

    #[test]
    fn precision_floor_enforced() {
        assert!(Precision::new(128).is_err());
        assert_eq!(Precision::new(300).unwrap().bits(), 300);
    }

    #[test]
    fn distance_to_integers_examples() {
        assert_eq!(distance_to_integers(0.75), 0.25);
        assert_eq!(distance_to_integers(3.0), 0.0);
        assert!((distance_to_integers(-0.4) - 0.4).abs() < 1e-16);
    }

    #[test]
    fn exact_arithmetic_mod_one() {
        let a = Phase::from_rational(&parse_exact("3/4").unwrap(), p());
        let b = Phase::from_rational(&parse_exact("0.5").unwrap(), p());
        assert_eq!((&a + &b).to_f64(), 0.25);
        assert_eq!((&b - &a).to_f64(), 0.75);
        assert_eq!(a.mul_i64(-3).to_f64(), 0.75);
        assert_eq!(a.mul_i64(4), Phase::zero(p()));
        assert_eq!(a.dist_to_int(), 0.25);
        assert_eq!(a.to_signed_f64(), -0.25);
    }

    #[test]
    fn golden_mean_matches_f64() {
        let g = Phase::golden_mean(p());
        let expect = (5f64.sqrt() - 1.0) / 2.0;
        assert!((g.to_f64() - expect).abs() < 1e-16);
        // g^2 + g - 1 = 0 to grid accuracy
        let r = g.to_rational();
        let resid = &r * &r + &r - BigRational::one();
        assert!(resid.abs() < BigRational::new(BigInt::one(), BigInt::one() << 250));
    }

    #[test]
    fn parse_decimal_and_fraction() {
        assert_eq!(
            parse_exact("0.110001").unwrap(),
            BigRational::new(110001.into(), 1000000.into())
        );
        assert_eq!(parse_exact("-1.5e1").unwrap(), BigRational::from_integer((-15).into()));
        assert_eq!(parse_exact("6/8").unwrap(), BigRational::new(3.into(), 4.into()));
        assert!(parse_exact("abc").is_err());
        assert!(parse_exact("1/0").is_err());
    }

    #[test]
    fn from_f64_negative_wraps() {
        let x = Phase::from_f64(-0.25, p()).unwrap();
        assert_eq!(x.to_f64(), 0.75);
    }
}
