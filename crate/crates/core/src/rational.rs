//! Exact rational shift vectors.

use std::fmt;

use crate::error::{Result, WalkError};

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// A rational number in lowest terms with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(WalkError::Invalid("zero denominator".into()));
        }
        let g = gcd(num, den).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Ok(Rational {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    pub fn integer(n: i64) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// A shift vector with rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalVec(Vec<Rational>);

impl RationalVec {
    pub fn new(coords: Vec<Rational>) -> Self {
        RationalVec(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        RationalVec(coords.iter().map(|&c| Rational::integer(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Rational::to_f64).collect()
    }

    /// Least common denominator of the coordinates.
    pub fn common_denominator(&self) -> i64 {
        self.0.iter().fold(1, |acc, r| lcm(acc, r.den))
    }

    /// Coordinates multiplied by `scale`; `scale` must be a multiple of every denominator.
    pub fn scaled(&self, scale: i64) -> Vec<i64> {
        self.0.iter().map(|r| r.num * (scale / r.den)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms() {
        let r = Rational::new(6, -4).unwrap();
        assert_eq!((r.num(), r.den()), (-3, 2));
        assert_eq!(Rational::new(0, 5).unwrap(), Rational::integer(0));
        assert!(Rational::new(1, 0).is_err());
    }

    #[test]
    fn scaling() {
        let v = RationalVec::new(vec![Rational::new(3, 2).unwrap(), Rational::new(-1, 3).unwrap()]);
        assert_eq!(v.common_denominator(), 6);
        assert_eq!(v.scaled(6), vec![9, -2]);
        assert_eq!(Rational::new(3, 2).unwrap().to_string(), "3/2");
    }
}
