//! Measure weights that stay exact (rational) as long as every input is rational.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// A complex weight. Exact variants use arbitrary precision rationals; any
/// operation touching a `Float` degrades the result to `Float`.
#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    /// Exact real rational.
    Rational(BigRational),
    /// Exact complex rational `re + i·im`, with `im != 0`.
    Complex(BigRational, BigRational),
    Float(Complex64),
}

impl Weight {
    pub fn zero() -> Self {
        Weight::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Weight::Rational(BigRational::one())
    }

    pub fn integer(n: i64) -> Self {
        Weight::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Weight::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn exact_complex(re: BigRational, im: BigRational) -> Self {
        if im.is_zero() {
            Weight::Rational(re)
        } else {
            Weight::Complex(re, im)
        }
    }

    pub fn float(re: f64, im: f64) -> Self {
        Weight::Float(Complex64::new(re, im))
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Weight::Float(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Weight::Rational(r) => r.is_zero(),
            Weight::Complex(..) => false,
            Weight::Float(c) => c.re == 0.0 && c.im == 0.0,
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            Weight::Rational(r) => Weight::Rational(r.clone()),
            Weight::Complex(re, im) => Weight::Complex(re.clone(), -im.clone()),
            Weight::Float(c) => Weight::Float(c.conj()),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Weight::Rational(r) => Complex64::new(rat_to_f64(r), 0.0),
            Weight::Complex(re, im) => Complex64::new(rat_to_f64(re), rat_to_f64(im)),
            Weight::Float(c) => *c,
        }
    }

    /// Real part as a float.
    pub fn re(&self) -> f64 {
        self.to_complex().re
    }

    pub fn abs(&self) -> f64 {
        match self {
            Weight::Rational(r) => rat_to_f64(&r.abs()),
            _ => self.to_complex().norm(),
        }
    }

    /// The exact real value, if this weight is an exact real rational.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Weight::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Equality that tolerates float rounding when either side is a float.
    pub fn approx_eq(&self, other: &Weight, tol: f64) -> bool {
        if self.is_exact() && other.is_exact() {
            return self == other;
        }
        (self.to_complex() - other.to_complex()).norm() <= tol
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Weight::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    fn parts(&self) -> (BigRational, BigRational) {
        match self {
            Weight::Rational(r) => (r.clone(), BigRational::zero()),
            Weight::Complex(re, im) => (re.clone(), im.clone()),
            Weight::Float(_) => unreachable!("float weights have no exact parts"),
        }
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl Default for Weight {
    fn default() -> Self {
        Weight::zero()
    }
}

impl<'a> Add<&'a Weight> for &'a Weight {
    type Output = Weight;

    fn add(self, rhs: &'a Weight) -> Weight {
        match (self, rhs) {
            (Weight::Rational(a), Weight::Rational(b)) => Weight::Rational(a + b),
            (Weight::Float(a), b) | (b, Weight::Float(a)) => Weight::Float(a + b.to_complex()),
            (a, b) => {
                let (ar, ai) = a.parts();
                let (br, bi) = b.parts();
                Weight::exact_complex(ar + br, ai + bi)
            }
        }
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        &self + &rhs
    }
}

impl AddAssign<&Weight> for Weight {
    fn add_assign(&mut self, rhs: &Weight) {
        match (&mut *self, rhs) {
            (Weight::Rational(a), Weight::Rational(b)) => *a += b,
            _ => *self = &*self + rhs,
        }
    }
}

impl<'a> Mul<&'a Weight> for &'a Weight {
    type Output = Weight;

    fn mul(self, rhs: &'a Weight) -> Weight {
        match (self, rhs) {
            (Weight::Rational(a), Weight::Rational(b)) => Weight::Rational(a * b),
            (Weight::Float(a), b) | (b, Weight::Float(a)) => Weight::Float(a * b.to_complex()),
            (a, b) => {
                let (ar, ai) = a.parts();
                let (br, bi) = b.parts();
                Weight::exact_complex(&ar * &br - &ai * &bi, &ar * &bi + &ai * &br)
            }
        }
    }
}

impl Mul for Weight {
    type Output = Weight;
    fn mul(self, rhs: Weight) -> Weight {
        &self * &rhs
    }
}

impl Neg for Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        match self {
            Weight::Rational(r) => Weight::Rational(-r),
            Weight::Complex(re, im) => Weight::Complex(-re, -im),
            Weight::Float(c) => Weight::Float(-c),
        }
    }
}

impl Sub for Weight {
    type Output = Weight;
    fn sub(self, rhs: Weight) -> Weight {
        self + (-rhs)
    }
}

impl fmt::Display for Weight {
    /// Exact rationals print as `p/q` (or `p` for integers); complex values
    /// as `a+bi`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Rational(r) => write!(f, "{r}"),
            Weight::Complex(re, im) => {
                if im.is_negative() {
                    write!(f, "{re}-{}i", -im)
                } else {
                    write!(f, "{re}+{im}i")
                }
            }
            Weight::Float(c) => {
                if c.im == 0.0 {
                    write!(f, "{:?}", c.re)
                } else if c.im < 0.0 {
                    write!(f, "{:?}-{:?}i", c.re, -c.im)
                } else {
                    write!(f, "{:?}+{:?}i", c.re, c.im)
                }
            }
        }
    }
}

enum Part {
    Exact(BigRational),
    Float(f64),
}

fn parse_real(s: &str) -> Option<Part> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if s.contains(['.', 'e', 'E']) || s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("nan") {
        return s.parse::<f64>().ok().filter(|x| x.is_finite()).map(Part::Float);
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Part::Exact(BigRational::new(n, d)));
    }
    BigInt::from_str(s).ok().map(|n| Part::Exact(BigRational::from_integer(n)))
}

/// Parses the imaginary coefficient in front of `i` (empty means 1).
fn parse_imag(s: &str) -> Option<Part> {
    match s.trim() {
        "" | "+" => Some(Part::Exact(BigRational::one())),
        "-" => Some(Part::Exact(-BigRational::one())),
        t => parse_real(t.strip_prefix('+').unwrap_or(t)),
    }
}

impl FromStr for Weight {
    type Err = Error;

    /// Accepts `3`, `-1/2`, `0.25`, `i`, `-2i`, `1+i`, `1/2-1/3i`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let err = || Error::WeightLiteral(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(err());
        }
        let (re, im) = if let Some(body) = t.strip_suffix('i') {
            // split at the last sign that is not at position 0 and not part of an exponent
            let bytes = body.as_bytes();
            let split = (1..bytes.len())
                .rev()
                .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
            match split {
                Some(k) => (parse_real(&body[..k]).ok_or_else(err)?, parse_imag(&body[k..]).ok_or_else(err)?),
                None => (Part::Exact(BigRational::zero()), parse_imag(body).ok_or_else(err)?),
            }
        } else {
            (parse_real(&t).ok_or_else(err)?, Part::Exact(BigRational::zero()))
        };
        Ok(match (re, im) {
            (Part::Exact(a), Part::Exact(b)) => Weight::exact_complex(a, b),
            (a, b) => {
                let f = |p: Part| match p {
                    Part::Exact(r) => rat_to_f64(&r),
                    Part::Float(x) => x,
                };
                Weight::float(f(a), f(b))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!("3".parse::<Weight>().unwrap(), Weight::integer(3));
        assert_eq!("-1/2".parse::<Weight>().unwrap(), Weight::ratio(-1, 2));
        assert_eq!("i".parse::<Weight>().unwrap(), Weight::exact_complex(BigRational::zero(), BigRational::one()));
        assert_eq!(
            "1/2-1/3i".parse::<Weight>().unwrap(),
            Weight::exact_complex(BigRational::new(1.into(), 2.into()), BigRational::new((-1).into(), 3.into()))
        );
        assert_eq!("0.25".parse::<Weight>().unwrap(), Weight::float(0.25, 0.0));
        assert_eq!("1e-3-2i".parse::<Weight>().unwrap(), Weight::float(1e-3, -2.0));
        assert!("".parse::<Weight>().is_err());
        assert!("1/0".parse::<Weight>().is_err());
        assert!("abc".parse::<Weight>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["13", "-1/2", "1+i", "1/2-1/3i", "0.5", "-2i"] {
            let w: Weight = s.parse().unwrap();
            let back: Weight = w.to_string().parse().unwrap();
            assert_eq!(w, back, "{s}");
        }
    }

    #[test]
    fn exact_complex_collapses_to_rational() {
        let i: Weight = "i".parse().unwrap();
        assert_eq!(&i * &i, Weight::integer(-1));
        assert!((&i * &i).as_rational().is_some());
    }

    #[test]
    fn float_contaminates() {
        let a = Weight::integer(2);
        let b = Weight::float(0.5, 0.0);
        assert!(!(&a + &b).is_exact());
        assert_eq!((&a * &b).re(), 1.0);
    }
}
