use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};

/// Half-integer angular momentum label stored as twice its value,
/// so that j = 3/2 is the exact integer 3 and selection rules never
/// touch floating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt {
    twice: i64,
}

impl HalfInt {
    /// Build from twice the value (`HalfInt::from_twice(3)` is 3/2).
    pub const fn from_twice(twice: i64) -> Self {
        Self { twice }
    }

    /// Build from an integer value.
    pub const fn from_int(value: i64) -> Self {
        Self { twice: 2 * value }
    }

    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    pub const fn twice(self) -> i64 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub fn as_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// True when `self` is a nonnegative integer, so `self!` makes sense.
    pub const fn is_factorial_arg(self) -> bool {
        self.twice >= 0 && self.twice % 2 == 0
    }

    /// The integer n with self = n, panics if not an integer.
    pub fn as_int(self) -> i64 {
        debug_assert!(self.is_integer());
        self.twice / 2
    }
}

/// Check that (j, m) is a valid projection pair: j >= 0, |m| <= j and
/// j + m integer (same parity of the doubled values).
pub fn check_jm(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.twice < 0 || m.twice.abs() > j.twice || (j.twice - m.twice) % 2 != 0 {
        return Err(Error::InvalidAngularMomentum {
            twice_j: j.twice,
            twice_m: m.twice,
        });
    }
    Ok(())
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice + rhs.twice)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice - rhs.twice)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_twice(-self.twice)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}
