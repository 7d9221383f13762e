//! Exact rational scalars used as algorithm coefficients.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// An exact rational number in canonical form (positive denominator, reduced).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coefficient(Ratio<i64>);

impl Coefficient {
    pub const ZERO: Coefficient = Coefficient(Ratio::new_raw(0, 1));
    pub const ONE: Coefficient = Coefficient(Ratio::new_raw(1, 1));
    pub const MINUS_ONE: Coefficient = Coefficient(Ratio::new_raw(-1, 1));

    /// Builds `numerator / denominator`, reducing to canonical form.
    pub fn new(numerator: i64, denominator: i64) -> Result<Self, Error> {
        if denominator == 0 {
            return Err(Error::parse("coefficient", "zero denominator"));
        }
        Ok(Coefficient(Ratio::new(numerator, denominator)))
    }

    pub const fn integer(value: i64) -> Self {
        Coefficient(Ratio::new_raw(value, 1))
    }

    pub fn numerator(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// True for +1 and -1, the coefficients that fold into add/subtract.
    pub fn is_unit(&self) -> bool {
        self.0.abs().is_one()
    }

    pub fn abs(&self) -> Self {
        Coefficient(self.0.abs())
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }
}

impl From<i64> for Coefficient {
    fn from(value: i64) -> Self {
        Coefficient::integer(value)
    }
}

impl Add for Coefficient {
    type Output = Coefficient;
    fn add(self, rhs: Self) -> Self {
        Coefficient(self.0 + rhs.0)
    }
}

impl AddAssign for Coefficient {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for Coefficient {
    type Output = Coefficient;
    fn sub(self, rhs: Self) -> Self {
        Coefficient(self.0 - rhs.0)
    }
}

impl Mul for Coefficient {
    type Output = Coefficient;
    fn mul(self, rhs: Self) -> Self {
        Coefficient(self.0 * rhs.0)
    }
}

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Self {
        Coefficient(-self.0)
    }
}

impl std::iter::Sum for Coefficient {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Coefficient::ZERO, |acc, x| acc + x)
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numerator())
        } else {
            write!(f, "{}/{}", self.numerator(), self.denominator())
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `n` or `n/d`.
impl FromStr for Coefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = |msg: &str| Error::parse(format!("coefficient `{s}`"), msg);
        match s.split_once('/') {
            None => s
                .parse::<i64>()
                .map(Coefficient::integer)
                .map_err(|_| bad("not an integer")),
            Some((n, d)) => {
                let n = n.trim().parse::<i64>().map_err(|_| bad("bad numerator"))?;
                let d = d.trim().parse::<i64>().map_err(|_| bad("bad denominator"))?;
                if d == 0 {
                    return Err(bad("zero denominator"));
                }
                Ok(Coefficient(Ratio::new(n, d)))
            }
        }
    }
}
