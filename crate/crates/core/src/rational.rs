//! Exact rational arithmetic.
//!
//! All tradeoff weights in the crate are [`Rational`]s backed by
//! arbitrary-precision integers. Values are always kept in lowest terms
//! with a positive denominator, addition and comparison are exact, and no
//! rounding ever occurs. Parsing and printing use the `p/q` notation of
//! the instance text formats (`1/2`, `2/3`, plain `1`).

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use thiserror::Error;

/// An exact fraction in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalError {
    #[error("denominator must be nonzero")]
    ZeroDenominator,
    #[error("malformed rational `{0}`")]
    Malformed(String),
}

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Result<Self, RationalError> {
        if denom == 0 {
            return Err(RationalError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(
            BigInt::from(numer),
            BigInt::from(denom),
        )))
    }

    /// `numer/denom` for small constants; panics on a zero denominator.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("nonzero denominator")
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// True when the value is a whole integer (denominator 1).
    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn checked_sub(&self, other: &Rational) -> Rational {
        Rational(&self.0 - &other.0)
    }

    /// 1 - self.
    pub fn complement(&self) -> Rational {
        Rational(BigRational::one() - &self.0)
    }

    /// 1/n for positive n.
    pub fn unit_fraction(n: u64) -> Self {
        assert!(n > 0, "unit fraction needs a positive denominator");
        Rational(BigRational::new(BigInt::one(), BigInt::from(n)))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rational {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || RationalError::Malformed(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let numer: i128 = n.trim().parse().map_err(|_| malformed())?;
                let denom: i128 = d.trim().parse().map_err(|_| malformed())?;
                if denom == 0 {
                    return Err(RationalError::ZeroDenominator);
                }
                Ok(Rational(BigRational::new(
                    BigInt::from(numer),
                    BigInt::from(denom),
                )))
            }
            None => {
                let numer: i128 = s.trim().parse().map_err(|_| malformed())?;
                Ok(Rational(BigRational::from_integer(BigInt::from(numer))))
            }
        }
    }
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        Rational(&self.0 - &rhs.0)
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lowest_terms_and_display() {
        let r = Rational::ratio(2, 4);
        assert_eq!(r, Rational::ratio(1, 2));
        assert_eq!(r.to_string(), "1/2");
        assert_eq!(Rational::ratio(-2, -4).to_string(), "1/2");
        assert_eq!(Rational::ratio(3, 3).to_string(), "1");
        assert_eq!(Rational::ratio(-1, 2).to_string(), "-1/2");
    }

    #[test]
    fn parse_round_trip() {
        for s in ["1/2", "2/3", "7", "-1/3", "0"] {
            let r: Rational = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
        }
        assert_eq!(
            "2/0".parse::<Rational>(),
            Err(RationalError::ZeroDenominator)
        );
        assert!("x/2".parse::<Rational>().is_err());
    }

    #[test]
    fn exact_arithmetic() {
        let half = Rational::ratio(1, 2);
        let two_thirds = Rational::ratio(2, 3);
        assert_eq!(&half + &two_thirds, Rational::ratio(7, 6));
        assert!(&half + &two_thirds > Rational::one());
        assert_eq!(half.complement(), Rational::ratio(1, 2));
        assert_eq!(two_thirds.complement(), Rational::ratio(1, 3));
    }

    proptest! {
        #[test]
        fn addition_is_associative(a in -50i64..50, b in 1i64..20,
                                   c in -50i64..50, d in 1i64..20,
                                   e in -50i64..50, f in 1i64..20) {
            let (x, y, z) = (Rational::ratio(a, b), Rational::ratio(c, d), Rational::ratio(e, f));
            prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        }

        #[test]
        fn comparison_is_total_order(a in -50i64..50, b in 1i64..20,
                                     c in -50i64..50, d in 1i64..20) {
            let x = Rational::ratio(a, b);
            let y = Rational::ratio(c, d);
            // antisymmetric and consistent with subtraction sign
            let diff = &x - &y;
            prop_assert_eq!(x < y, diff.numer().sign() == num::bigint::Sign::Minus);
            prop_assert_eq!(x == y, diff.is_zero());
        }
    }
}
