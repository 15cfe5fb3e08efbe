use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::domain::DomainBox;
use super::poly::MultiPoly;
use super::rational::Rational;
use super::real::Real;
use crate::error::{Error, Result};

/// Transition-function expression over clock variables `x1..xm`.
///
/// Polynomial iff it contains no `Exp` node. `Exp` takes an affine argument.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum FuncExpr {
    Const(Rational),
    /// 0-based variable index.
    Var(usize),
    Add(Vec<FuncExpr>),
    Mul(Vec<FuncExpr>),
    Exp(Box<FuncExpr>),
}

/// Number of pseudo-random interior samples used by the nonnegativity check.
pub const NONNEG_INTERIOR_SAMPLES: usize = 101;

impl FuncExpr {
    pub fn constant(c: Rational) -> Self {
        FuncExpr::Const(c)
    }

    pub fn var(i: usize) -> Self {
        FuncExpr::Var(i)
    }

    pub fn add(a: FuncExpr, b: FuncExpr) -> Self {
        FuncExpr::Add(vec![a, b])
    }

    pub fn mul(a: FuncExpr, b: FuncExpr) -> Self {
        FuncExpr::Mul(vec![a, b])
    }

    pub fn exp(arg: FuncExpr) -> Self {
        FuncExpr::Exp(Box::new(arg))
    }

    /// Builds the expression of a polynomial, one monomial per summand.
    pub fn from_poly(p: &MultiPoly) -> Self {
        let mut summands = Vec::new();
        for (e, c) in p.terms() {
            let mut factors = vec![FuncExpr::Const(c.clone())];
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    factors.push(FuncExpr::Var(i));
                }
            }
            summands.push(if factors.len() == 1 {
                factors.pop().unwrap()
            } else {
                FuncExpr::Mul(factors)
            });
        }
        match summands.len() {
            0 => FuncExpr::Const(Rational::zero()),
            1 => summands.pop().unwrap(),
            _ => FuncExpr::Add(summands),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        match self {
            FuncExpr::Const(_) | FuncExpr::Var(_) => true,
            FuncExpr::Add(xs) | FuncExpr::Mul(xs) => xs.iter().all(FuncExpr::is_polynomial),
            FuncExpr::Exp(_) => false,
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            FuncExpr::Const(_) => None,
            FuncExpr::Var(i) => Some(*i),
            FuncExpr::Add(xs) | FuncExpr::Mul(xs) => xs.iter().filter_map(|x| x.max_var()).max(),
            FuncExpr::Exp(a) => a.max_var(),
        }
    }

    /// Checks variable indices against `nvars` and that every exponential has
    /// an affine polynomial argument.
    pub fn validate(&self, nvars: usize) -> Result<()> {
        if let Some(i) = self.max_var() {
            if i >= nvars {
                return Err(Error::Structural(format!(
                    "variable x{} used with only {} clock(s)",
                    i + 1,
                    nvars
                )));
            }
        }
        self.check_exp_args(nvars)
    }

    fn check_exp_args(&self, nvars: usize) -> Result<()> {
        match self {
            FuncExpr::Const(_) | FuncExpr::Var(_) => Ok(()),
            FuncExpr::Add(xs) | FuncExpr::Mul(xs) => {
                xs.iter().try_for_each(|x| x.check_exp_args(nvars))
            }
            FuncExpr::Exp(a) => {
                if !a.is_polynomial() || a.to_poly(nvars)?.total_degree() > 1 {
                    return Err(Error::Structural(
                        "exponential applied to a non-affine argument".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Exact polynomial form; fails on exponential nodes.
    pub fn to_poly(&self, nvars: usize) -> Result<MultiPoly> {
        match self {
            FuncExpr::Const(c) => Ok(MultiPoly::constant(nvars, c.clone())),
            FuncExpr::Var(i) => {
                if *i >= nvars {
                    return Err(Error::Structural(format!("variable x{} out of range", i + 1)));
                }
                Ok(MultiPoly::var(nvars, *i))
            }
            FuncExpr::Add(xs) => xs
                .iter()
                .try_fold(MultiPoly::zero(nvars), |acc, x| acc.add(&x.to_poly(nvars)?)),
            FuncExpr::Mul(xs) => xs
                .iter()
                .try_fold(MultiPoly::one(nvars), |acc, x| acc.mul(&x.to_poly(nvars)?)),
            FuncExpr::Exp(_) => Err(Error::Unsupported(
                "exponential node has no exact polynomial form".into(),
            )),
        }
    }

    /// Maclaurin truncation to total degree `degree`.
    ///
    /// `exp(L)` needs `L(0) = 0`: otherwise the constant factor `e^L(0)` is
    /// irrational and has no exact coefficient.
    pub fn taylor(&self, degree: u32, nvars: usize) -> Result<MultiPoly> {
        self.validate(nvars)?;
        self.taylor_inner(degree, nvars)
    }

    fn taylor_inner(&self, degree: u32, nvars: usize) -> Result<MultiPoly> {
        match self {
            FuncExpr::Const(_) | FuncExpr::Var(_) => Ok(self.to_poly(nvars)?.truncate(degree)),
            FuncExpr::Add(xs) => xs.iter().try_fold(MultiPoly::zero(nvars), |acc, x| {
                acc.add(&x.taylor_inner(degree, nvars)?)
            }),
            FuncExpr::Mul(xs) => xs.iter().try_fold(MultiPoly::one(nvars), |acc, x| {
                acc.mul_truncated(&x.taylor_inner(degree, nvars)?, degree)
            }),
            FuncExpr::Exp(a) => {
                let l = a.to_poly(nvars)?;
                let l0 = l.eval(&vec![Rational::zero(); nvars])?;
                if !l0.is_zero() {
                    return Err(Error::Unsupported(format!(
                        "Maclaurin expansion of exp with constant term {l0} has an irrational factor"
                    )));
                }
                let mut out = MultiPoly::one(nvars);
                let mut power = MultiPoly::one(nvars);
                let mut fact = Rational::one();
                for k in 1..=degree {
                    power = power.mul_truncated(&l, degree)?;
                    fact *= Rational::integer(k as i64);
                    out = out.add(&power.scale(&fact.recip()))?;
                }
                Ok(out)
            }
        }
    }

    /// Exact value at a rational point; `None` if the expression contains `exp`.
    pub fn eval_exact(&self, point: &[Rational]) -> Option<Rational> {
        match self {
            FuncExpr::Const(c) => Some(c.clone()),
            FuncExpr::Var(i) => point.get(*i).cloned(),
            FuncExpr::Add(xs) => xs.iter().map(|x| x.eval_exact(point)).sum(),
            FuncExpr::Mul(xs) => xs.iter().map(|x| x.eval_exact(point)).product(),
            FuncExpr::Exp(_) => None,
        }
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        match self {
            FuncExpr::Const(c) => c.to_f64(),
            FuncExpr::Var(i) => point[*i],
            FuncExpr::Add(xs) => xs.iter().map(|x| x.eval_f64(point)).sum(),
            FuncExpr::Mul(xs) => xs.iter().map(|x| x.eval_f64(point)).product(),
            FuncExpr::Exp(a) => a.eval_f64(point).exp(),
        }
    }

    pub fn compile(&self) -> RealExpr {
        match self {
            FuncExpr::Const(c) => RealExpr::Const(Real::from_rational(c)),
            FuncExpr::Var(i) => RealExpr::Var(*i),
            FuncExpr::Add(xs) => RealExpr::Add(xs.iter().map(FuncExpr::compile).collect()),
            FuncExpr::Mul(xs) => RealExpr::Mul(xs.iter().map(FuncExpr::compile).collect()),
            FuncExpr::Exp(a) => RealExpr::Exp(Box::new(a.compile())),
        }
    }

    /// Sign at a rational point: exact for polynomials, high precision otherwise.
    pub fn is_negative_at(&self, point: &[Rational]) -> bool {
        match self.eval_exact(point) {
            Some(v) => v.is_negative(),
            None => {
                let p: Vec<Real> = point.iter().map(Real::from_rational).collect();
                self.compile().eval(&p).is_negative()
            }
        }
    }

    pub fn is_positive_at(&self, point: &[Rational]) -> bool {
        match self.eval_exact(point) {
            Some(v) => v.is_positive(),
            None => {
                let p: Vec<Real> = point.iter().map(Real::from_rational).collect();
                let v = self.compile().eval(&p);
                !v.is_negative() && !v.is_zero()
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<FuncExpr> {
        match v {
            Value::Number(n) => n
                .as_i64()
                .map(|i| FuncExpr::Const(Rational::integer(i)))
                .ok_or_else(|| Error::Parse(format!("non-integer number {n} in expression"))),
            Value::String(s) => parse_atom(s),
            Value::Array(items) => {
                let (head, rest) = items
                    .split_first()
                    .ok_or_else(|| Error::Parse("empty expression list".into()))?;
                let op = head
                    .as_str()
                    .ok_or_else(|| Error::Parse("expression operator must be a string".into()))?;
                let args = rest.iter().map(FuncExpr::from_json).collect::<Result<Vec<_>>>()?;
                match op {
                    "add" | "mul" if args.is_empty() => {
                        Err(Error::Parse(format!("'{op}' needs at least one argument")))
                    }
                    "add" => Ok(FuncExpr::Add(args)),
                    "mul" => Ok(FuncExpr::Mul(args)),
                    "exp" => {
                        let [a]: [FuncExpr; 1] = args
                            .try_into()
                            .map_err(|_| Error::Parse("'exp' takes one argument".into()))?;
                        Ok(FuncExpr::Exp(Box::new(a)))
                    }
                    other => Err(Error::Parse(format!("unknown expression operator '{other}'"))),
                }
            }
            other => Err(Error::Parse(format!("unexpected expression value {other}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            FuncExpr::Const(c) => Value::String(c.to_string()),
            FuncExpr::Var(i) => Value::String(format!("x{}", i + 1)),
            FuncExpr::Add(xs) => list("add", xs),
            FuncExpr::Mul(xs) => list("mul", xs),
            FuncExpr::Exp(a) => Value::Array(vec![Value::String("exp".into()), a.to_json()]),
        }
    }
}

fn list(op: &str, xs: &[FuncExpr]) -> Value {
    let mut v = vec![Value::String(op.into())];
    v.extend(xs.iter().map(FuncExpr::to_json));
    Value::Array(v)
}

fn parse_atom(s: &str) -> Result<FuncExpr> {
    if let Some(rest) = s.strip_prefix('x') {
        let k: usize = rest
            .parse()
            .map_err(|_| Error::Parse(format!("bad variable name '{s}'")))?;
        if k == 0 {
            return Err(Error::Parse("variables are numbered from x1".into()));
        }
        return Ok(FuncExpr::Var(k - 1));
    }
    Ok(FuncExpr::Const(s.parse()?))
}

impl fmt::Debug for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl fmt::Display for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

/// Expression with constants pre-converted to high precision.
#[derive(Clone, Debug)]
pub enum RealExpr {
    Const(Real),
    Var(usize),
    Add(Vec<RealExpr>),
    Mul(Vec<RealExpr>),
    Exp(Box<RealExpr>),
}

impl RealExpr {
    pub fn eval(&self, point: &[Real]) -> Real {
        match self {
            RealExpr::Const(c) => c.clone(),
            RealExpr::Var(i) => point[*i].clone(),
            RealExpr::Add(xs) => xs
                .iter()
                .fold(Real::zero(), |acc, x| acc.add(&x.eval(point))),
            RealExpr::Mul(xs) => xs
                .iter()
                .fold(Real::one(), |acc, x| acc.mul(&x.eval(point))),
            RealExpr::Exp(a) => a.eval(point).exp(),
        }
    }
}

/// The deterministic sample set of the nonnegativity check: box corners plus
/// pseudo-random interior points with dyadic coordinates, seed 0.
pub fn nonneg_sample_points(d: &DomainBox) -> Vec<Vec<Rational>> {
    let mut pts = d.corners();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let scale = 1i64 << 20;
    for _ in 0..NONNEG_INTERIOR_SAMPLES {
        let p = d
            .bounds()
            .iter()
            .map(|(a, b)| {
                let t = Rational::new(rng.gen_range(1..scale), scale);
                a + &((b - a) * t)
            })
            .collect();
        pts.push(p);
    }
    pts
}

/// Sampling-based nonnegativity check; names the first failing point.
pub fn check_nonnegative(f: &FuncExpr, d: &DomainBox) -> Result<()> {
    for p in nonneg_sample_points(d) {
        if f.is_negative_at(&p) {
            let shown: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            return Err(Error::Validation(format!(
                "function {f} is negative at ({})",
                shown.join(", ")
            )));
        }
    }
    Ok(())
}

pub fn taylor(f: &FuncExpr, degree: u32, nvars: usize) -> Result<MultiPoly> {
    f.taylor(degree, nvars)
}
