//! Exact rationals, polynomials over clock variables, boxes, transition-function
//! expressions and numeric quadrature.

pub mod domain;
pub mod funcexpr;
pub mod poly;
pub mod quadrature;
pub mod rational;
pub mod real;
pub mod value;

pub use domain::DomainBox;
pub use funcexpr::{check_nonnegative, taylor, FuncExpr, RealExpr};
pub use poly::{integrate_box, poly_mul, MultiPoly, TermJson};
pub use quadrature::{certify_not_small_rational, quad_fn, quad_numeric, IrrationalityCertificate, QuadResult};
pub use rational::{q, Rational};
pub use real::Real;
pub use quadrature::DEFAULT_EVAL_BUDGET;
pub use value::{default_tolerance, l1_norm, MeasureValue};
