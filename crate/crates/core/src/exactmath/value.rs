use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::domain::DomainBox;
use super::funcexpr::{check_nonnegative, FuncExpr};
use super::quadrature::{quad_numeric, QuadResult};
use super::rational::Rational;
use super::real::Real;
use crate::error::Result;

/// Exact rational, or a numeric value with an absolute error bound.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureValue {
    Exact(Rational),
    Approx { value: Real, error: Real },
}

impl MeasureValue {
    pub fn exact(r: Rational) -> Self {
        MeasureValue::Exact(r)
    }

    pub fn from_quad(q: &QuadResult) -> Self {
        MeasureValue::Approx { value: q.value.clone(), error: q.error_bound.clone() }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            MeasureValue::Exact(r) => Some(r),
            MeasureValue::Approx { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, MeasureValue::Exact(_))
    }

    /// Enclosing interval `[lo, hi]` as exact rationals.
    pub fn bounds(&self) -> (Rational, Rational) {
        match self {
            MeasureValue::Exact(r) => (r.clone(), r.clone()),
            MeasureValue::Approx { value, error } => {
                (value.sub(error).to_rational(), value.add(error).to_rational())
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            MeasureValue::Exact(r) => r.to_f64(),
            MeasureValue::Approx { value, .. } => value.to_f64(),
        }
    }

    pub fn add(&self, other: &MeasureValue) -> MeasureValue {
        match (self, other) {
            (MeasureValue::Exact(a), MeasureValue::Exact(b)) => MeasureValue::Exact(a + b),
            _ => {
                let (v1, e1) = self.parts();
                let (v2, e2) = other.parts();
                MeasureValue::Approx { value: v1.add(&v2), error: e1.add(&e2) }
            }
        }
    }

    fn parts(&self) -> (Real, Real) {
        match self {
            MeasureValue::Exact(r) => (Real::from_rational(r), Real::zero()),
            MeasureValue::Approx { value, error } => (value.clone(), error.clone()),
        }
    }

    /// Equal values for exact pairs; overlapping enclosures otherwise.
    pub fn agrees(&self, other: &MeasureValue) -> bool {
        match (self, other) {
            (MeasureValue::Exact(a), MeasureValue::Exact(b)) => a == b,
            _ => {
                let (l1, h1) = self.bounds();
                let (l2, h2) = other.bounds();
                l1 <= h2 && l2 <= h1
            }
        }
    }

    /// Certainly below `bound`: exact comparison, or the upper end of the enclosure.
    pub fn certainly_below(&self, bound: &Rational) -> bool {
        &self.bounds().1 < bound
    }

    /// Certainly above `bound`.
    pub fn certainly_above(&self, bound: &Rational) -> bool {
        &self.bounds().0 > bound
    }

    /// Sort key; exact values sort before approximate ones with the same midpoint.
    pub fn sort_key(&self) -> Rational {
        match self {
            MeasureValue::Exact(r) => r.clone(),
            MeasureValue::Approx { value, .. } => value.to_rational(),
        }
    }
}

impl fmt::Display for MeasureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureValue::Exact(r) => write!(f, "{r}"),
            MeasureValue::Approx { value, error } => {
                write!(f, "{} ± {}", value.to_decimal_string(30), error.to_decimal_string(3))
            }
        }
    }
}

impl Serialize for MeasureValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MeasureValue::Exact(r) => r.serialize(s),
            MeasureValue::Approx { value, error } => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("approx", &value.to_decimal_string(40))?;
                m.serialize_entry("err", &error.to_decimal_string(6))?;
                m.end()
            }
        }
    }
}

/// Default absolute tolerance of numeric measures.
pub fn default_tolerance() -> Rational {
    Rational::new(1, 10).pow(20)
}

/// `∫_d f` for a function declared nonnegative on `d`; exact when `f` is polynomial.
pub fn l1_norm(f: &FuncExpr, d: &DomainBox) -> Result<MeasureValue> {
    f.validate(d.dim())?;
    check_nonnegative(f, d)?;
    if f.is_polynomial() {
        return Ok(MeasureValue::Exact(f.to_poly(d.dim())?.integrate_box(d)?));
    }
    Ok(MeasureValue::from_quad(&quad_numeric(f, d, &default_tolerance())?))
}
