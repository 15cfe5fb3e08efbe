use std::fmt;

use dashu_float::round::mode::HalfAway;
use dashu_float::FBig;
use dashu_int::IBig;
use num_bigint::BigInt;

use super::rational::Rational;

/// Working precision in bits (about 77 decimal digits).
pub const PRECISION_BITS: usize = 256;

type F = FBig<HalfAway, 2>;

/// High-precision binary floating point value used by the numeric routines.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(F);

fn to_ibig(n: &BigInt) -> IBig {
    IBig::from_le_bytes(&n.to_signed_bytes_le())
}

fn to_bigint(n: &IBig) -> BigInt {
    BigInt::from_signed_bytes_le(&n.to_le_bytes())
}

impl Real {
    fn wrap(f: F) -> Real {
        Real(f.with_precision(PRECISION_BITS).value())
    }

    pub fn zero() -> Real {
        Real::wrap(F::ZERO)
    }

    pub fn one() -> Real {
        Real::wrap(F::ONE)
    }

    pub fn from_rational(r: &Rational) -> Real {
        let n = Real::wrap(F::from(to_ibig(r.numer())));
        let d = Real::wrap(F::from(to_ibig(r.denom())));
        Real(n.0 / d.0)
    }

    pub fn from_i64(v: i64) -> Real {
        Real::wrap(F::from(v))
    }

    pub fn from_f64(v: f64) -> Real {
        Real::wrap(F::try_from(v).expect("finite float"))
    }

    /// Exact rational value of this binary float.
    pub fn to_rational(&self) -> Rational {
        let repr = self.0.repr();
        let sig = to_bigint(repr.significand());
        let e = repr.exponent();
        if e >= 0 {
            Rational::from(sig * num_traits::pow(BigInt::from(2), e as usize))
        } else {
            Rational::from_bigs(sig, num_traits::pow(BigInt::from(2), (-e) as usize)).unwrap()
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    pub fn exp(&self) -> Real {
        Real(self.0.exp())
    }

    pub fn abs(&self) -> Real {
        if self.0 < F::ZERO {
            Real(-self.0.clone())
        } else {
            self.clone()
        }
    }

    pub fn is_negative(&self) -> bool {
        self.0 < F::ZERO
    }

    pub fn is_zero(&self) -> bool {
        self.0 == F::ZERO
    }

    pub fn add(&self, o: &Real) -> Real {
        Real(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Real) -> Real {
        Real(&self.0 - &o.0)
    }

    pub fn mul(&self, o: &Real) -> Real {
        Real(&self.0 * &o.0)
    }

    pub fn div(&self, o: &Real) -> Real {
        Real(&self.0 / &o.0)
    }

    pub fn neg(&self) -> Real {
        Real(-self.0.clone())
    }

    pub fn powi(&self, k: u32) -> Real {
        let mut acc = Real::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn max(self, o: Real) -> Real {
        if self >= o {
            self
        } else {
            o
        }
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let d = self.0.to_decimal().value();
        let d = d.with_precision(digits).value();
        d.to_string()
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string(40))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
