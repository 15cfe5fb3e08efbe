use super::domain::DomainBox;
use super::funcexpr::FuncExpr;
use super::rational::Rational;
use super::real::Real;
use crate::error::{Error, Result};

/// Default evaluation budget for one quadrature call.
pub const DEFAULT_EVAL_BUDGET: u64 = 10_000_000;

const MIN_DEPTH: u32 = 3;
const MAX_DEPTH: u32 = 60;

#[derive(Clone, Debug)]
pub struct QuadResult {
    pub value: Real,
    pub error_bound: Real,
    pub evaluations: u64,
}

struct Counter {
    evals: u64,
    budget: u64,
    exhausted: bool,
}

impl Counter {
    fn tick(&mut self) {
        self.evals += 1;
        if self.evals >= self.budget {
            self.exhausted = true;
        }
    }
}

/// Result of integrating one axis: extrapolated value, own error estimate and
/// the largest error reported by the inner evaluations.
struct AxisResult {
    value: Real,
    own_err: Real,
    inner_err: Real,
}

/// Adaptive Simpson on `[a, b]` with Richardson extrapolation; `g` returns a
/// value together with its own error (0 for direct evaluations).
fn adaptive_simpson<G>(g: &mut G, a: &Real, b: &Real, tol: &Real, counter: &mut Counter) -> AxisResult
where
    G: FnMut(&Real, &mut Counter) -> (Real, Real),
{
    let two = Real::from_i64(2);
    let m = a.add(b).div(&two);
    let (fa, ea) = g(a, counter);
    let (fm, em) = g(&m, counter);
    let (fb, eb) = g(b, counter);
    let whole = simpson(a, b, &fa, &fm, &fb);
    let mut inner = ea.max(em).max(eb);
    let (value, own_err) = recurse(g, a, b, &fa, &fm, &fb, whole, tol, 0, counter, &mut inner);
    AxisResult { value, own_err, inner_err: inner }
}

fn simpson(a: &Real, b: &Real, fa: &Real, fm: &Real, fb: &Real) -> Real {
    let h = b.sub(a).div(&Real::from_i64(6));
    h.mul(&fa.add(&fm.mul(&Real::from_i64(4))).add(fb))
}

#[allow(clippy::too_many_arguments)]
fn recurse<G>(
    g: &mut G,
    a: &Real,
    b: &Real,
    fa: &Real,
    fm: &Real,
    fb: &Real,
    whole: Real,
    tol: &Real,
    depth: u32,
    counter: &mut Counter,
    inner: &mut Real,
) -> (Real, Real)
where
    G: FnMut(&Real, &mut Counter) -> (Real, Real),
{
    let two = Real::from_i64(2);
    let m = a.add(b).div(&two);
    let lm = a.add(&m).div(&two);
    let rm = m.add(b).div(&two);
    let (flm, e1) = g(&lm, counter);
    let (frm, e2) = g(&rm, counter);
    *inner = inner.clone().max(e1).max(e2);
    let left = simpson(a, &m, fa, &flm, fm);
    let right = simpson(&m, b, fm, &frm, fb);
    let delta = left.add(&right).sub(&whole);
    let fifteen = Real::from_i64(15);
    let err = delta.abs().div(&fifteen);
    let converged = depth >= MIN_DEPTH && err <= *tol;
    if converged || depth >= MAX_DEPTH || counter.exhausted {
        return (left.add(&right).add(&delta.div(&fifteen)), err);
    }
    let half = tol.div(&two);
    let (lv, le) = recurse(g, a, &m, fa, &flm, fm, left, &half, depth + 1, counter, inner);
    let (rv, re) = recurse(g, &m, b, fm, &frm, fb, right, &half, depth + 1, counter, inner);
    (lv.add(&rv), le.add(&re))
}

fn integrate_axis<F>(
    f: &F,
    d: &DomainBox,
    axis: usize,
    point: &mut Vec<Real>,
    tol: &Real,
    counter: &mut Counter,
) -> (Real, Real)
where
    F: Fn(&[Real]) -> Real,
{
    let (a, b) = d.interval(axis);
    let a = Real::from_rational(a);
    let b = Real::from_rational(b);
    let last = axis + 1 == d.dim();
    let width = b.sub(&a);
    let (outer_tol, inner_tol) = if last {
        (tol.clone(), Real::zero())
    } else {
        let two = Real::from_i64(2);
        (tol.div(&two), tol.div(&two).div(&width))
    };
    let mut g = |x: &Real, c: &mut Counter| {
        point[axis] = x.clone();
        if last {
            c.tick();
            (f(point), Real::zero())
        } else {
            integrate_axis(f, d, axis + 1, point, &inner_tol, c)
        }
    };
    let r = adaptive_simpson(&mut g, &a, &b, &outer_tol, counter);
    (r.value, r.own_err.add(&width.mul(&r.inner_err)))
}

/// Numeric integral of `f` over `d` to absolute tolerance `tol`.
///
/// Iterated adaptive Simpson: each axis gets half the tolerance, the rest is
/// shared by the inner integrals scaled by the axis width.
pub fn quad_fn<F>(f: F, d: &DomainBox, tol: &Rational, budget: u64) -> Result<QuadResult>
where
    F: Fn(&[Real]) -> Real,
{
    if !tol.is_positive() {
        return Err(Error::Validation("quadrature tolerance must be positive".into()));
    }
    let tol_r = Real::from_rational(tol);
    let mut counter = Counter { evals: 0, budget, exhausted: false };
    if d.dim() == 0 {
        counter.tick();
        return Ok(QuadResult { value: f(&[]), error_bound: Real::zero(), evaluations: 1 });
    }
    let mut point = vec![Real::zero(); d.dim()];
    let (value, err) = integrate_axis(&f, d, 0, &mut point, &tol_r, &mut counter);
    if err > tol_r {
        return Err(Error::Accuracy {
            requested: tol.to_string(),
            best_bound: err.to_decimal_string(6),
        });
    }
    Ok(QuadResult { value, error_bound: err, evaluations: counter.evals })
}

pub fn quad_numeric(f: &FuncExpr, d: &DomainBox, tol: &Rational) -> Result<QuadResult> {
    quad_numeric_with_budget(f, d, tol, DEFAULT_EVAL_BUDGET)
}

pub fn quad_numeric_with_budget(
    f: &FuncExpr,
    d: &DomainBox,
    tol: &Rational,
    budget: u64,
) -> Result<QuadResult> {
    f.validate(d.dim())?;
    let c = f.compile();
    quad_fn(|p| c.eval(p), d, tol, budget)
}

/// Certificate that the integral is not a "small" rational: the closest
/// rational with denominator at most `max_den` lies farther from the estimate
/// than the error bound.
#[derive(Clone, Debug)]
pub struct IrrationalityCertificate {
    pub estimate: Real,
    pub error_bound: Real,
    pub max_denominator: u64,
    pub nearest: Rational,
    pub distance: Real,
    pub holds: bool,
}

pub fn certify_not_small_rational(q: &QuadResult, max_den: u64) -> IrrationalityCertificate {
    let est = q.value.to_rational();
    let nearest = est.limit_denominator(&num_bigint::BigInt::from(max_den));
    let distance = Real::from_rational(&(&nearest - &est).abs());
    IrrationalityCertificate {
        estimate: q.value.clone(),
        error_bound: q.error_bound.clone(),
        max_denominator: max_den,
        nearest,
        holds: distance > q.error_bound,
        distance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rational::q;
    use serde_json::json;

    fn unit1() -> DomainBox {
        DomainBox::unit(1)
    }

    #[test]
    fn exp_on_unit_interval() {
        let f = FuncExpr::from_json(&json!(["exp", "x1"])).unwrap();
        let r = quad_numeric(&f, &unit1(), &q(1, 10).pow(20)).unwrap();
        let e_minus_1 = Real::one().exp().sub(&Real::one());
        let diff = r.value.sub(&e_minus_1).abs();
        assert!(diff <= r.error_bound.add(&Real::from_rational(&q(1, 10).pow(30))), "{diff}");
        assert!(r.error_bound <= Real::from_rational(&q(1, 10).pow(20)));
    }

    #[test]
    fn zero_integrand_has_zero_error() {
        let f = FuncExpr::Const(Rational::zero());
        let r = quad_numeric(&f, &unit1(), &q(1, 1000)).unwrap();
        assert!(r.value.is_zero());
        assert!(r.error_bound.is_zero());
    }

    #[test]
    fn two_dimensional_polynomial() {
        let f = FuncExpr::from_json(&json!(["mul", "x1", "x1", "x2", "x2", "x2"])).unwrap();
        let d = DomainBox::new(vec![(q(0, 1), q(1, 2)), (q(1, 4), q(1, 1))]).unwrap();
        let exact = f.to_poly(2).unwrap().integrate_box(&d).unwrap();
        let r = quad_numeric(&f, &d, &q(1, 10).pow(15)).unwrap();
        let diff = r.value.sub(&Real::from_rational(&exact)).abs();
        assert!(diff <= r.error_bound.add(&Real::from_rational(&q(1, 10).pow(40))));
    }

    #[test]
    fn budget_exhaustion_is_an_accuracy_error() {
        let f = FuncExpr::from_json(&json!(["exp", ["mul", "7", "x1"]])).unwrap();
        let err = quad_numeric_with_budget(&f, &unit1(), &q(1, 10).pow(40), 50).unwrap_err();
        assert!(matches!(err, Error::Accuracy { .. }));
    }

    #[test]
    fn certificate_separates_e_minus_one_from_small_rationals() {
        let f = FuncExpr::from_json(&json!(["exp", "x1"])).unwrap();
        let r = quad_numeric(&f, &unit1(), &q(1, 10).pow(20)).unwrap();
        let c = certify_not_small_rational(&r, 1_000_000);
        assert!(c.holds);
        let coarse = certify_not_small_rational(&r, 100);
        assert_ne!(coarse.nearest, q(171, 100));
        assert!(Real::from_rational(&q(171, 100)).sub(&r.value).abs() > r.error_bound);
    }
}
