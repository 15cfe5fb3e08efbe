//! Run measures of the six models, the collection measure over prefix-free
//! run sets, TAPD normalization and a Monte-Carlo cross-check.

mod montecarlo;
mod normalize;

use serde::Serialize;

pub use montecarlo::{mc_estimate, McEstimate, MC_MIN_SAMPLES};
pub use normalize::{normalized_transition, CompiledNormalized, Normalized};

use crate::automata::{Machine, Transitions, WeightAssignment};
use crate::error::{Error, Result};
use crate::exactmath::{
    default_tolerance, quad_fn, quad_numeric, DomainBox, FuncExpr, MeasureValue, MultiPoly, Rational,
};
use crate::runs::{prefix_violation, Run};

#[derive(Clone, Debug)]
pub struct MeasureOptions {
    /// Integrate each step over its own domain and multiply, instead of one
    /// integral over the shared clock vector.
    pub per_step_product: bool,
    /// Absolute tolerance of numeric integrals.
    pub tolerance: Rational,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions { per_step_product: false, tolerance: default_tolerance() }
    }
}

/// `{value, model, run_length}`.
#[derive(Clone, Debug, Serialize)]
pub struct MeasureReport {
    pub value: MeasureValue,
    pub model: String,
    pub run_length: usize,
}

pub fn measure_run(m: &Machine, w: Option<&WeightAssignment>, run: &Run) -> Result<MeasureValue> {
    measure_run_with(m, w, run, &MeasureOptions::default())
}

pub fn measure_run_with(
    m: &Machine,
    w: Option<&WeightAssignment>,
    run: &Run,
    opts: &MeasureOptions,
) -> Result<MeasureValue> {
    if run.model != m.kind() {
        return Err(Error::Usage(format!("run of a {} measured on a {}", run.model, m.kind())));
    }
    match (m.kind().needs_weights(), w) {
        (true, None) => return Err(Error::Usage(format!("{} measures need a weighting", m.kind()))),
        (false, Some(_)) => {
            return Err(Error::Usage(format!("{} machines carry their own probabilities", m.kind())))
        }
        _ => {}
    }
    if run.edges.iter().any(|&e| e >= m.num_edges()) {
        return Err(Error::Structural("run names an edge the machine does not have".into()));
    }
    if run.is_empty() {
        return Ok(MeasureValue::Exact(Rational::one()));
    }
    match &m.transitions {
        Transitions::Nfa(_) | Transitions::Ta(_) => {
            let w = w.expect("checked above");
            Ok(MeasureValue::Exact(run.edges.iter().map(|&e| w.weight(e)).product()))
        }
        Transitions::Pa(_) | Transitions::Pta(_) => Ok(MeasureValue::Exact(
            run.edges.iter().map(|&e| m.prob(e).expect("probabilistic")).product(),
        )),
        Transitions::Tapd(_) => tapd_measure(m, run, opts),
        Transitions::Sta(edges) => {
            let parts: Vec<(&FuncExpr, &DomainBox)> =
                run.edges.iter().map(|&e| (&edges[e].func, &edges[e].domain)).collect();
            sta_measure(m.num_clocks(), &parts, opts)
        }
    }
}

/// Intersection of the step domains; `None` when empty.
pub fn domain_intersection(m: &Machine, run: &Run) -> Result<Option<DomainBox>> {
    let mut d = DomainBox::unit(m.num_clocks());
    for &e in &run.edges {
        let de = m.domain(e).ok_or_else(|| Error::Usage(format!("{} edges have no domain", m.kind())))?;
        match d.intersect(de)? {
            Some(x) => d = x,
            None => return Ok(None),
        }
    }
    Ok(Some(d))
}

fn tapd_measure(m: &Machine, run: &Run, opts: &MeasureOptions) -> Result<MeasureValue> {
    let n = m.num_clocks();
    let norms = run.edges.iter().map(|&e| normalized_transition(m, e)).collect::<Result<Vec<_>>>()?;
    if opts.per_step_product {
        let mut acc = MeasureValue::Exact(Rational::one());
        for (&e, p) in run.edges.iter().zip(&norms) {
            let d = m.domain(e).expect("tapd edge");
            let v = integrate_normalized(n, std::slice::from_ref(p), d, &opts.tolerance)?;
            acc = mul_values(&acc, &v);
        }
        return Ok(acc);
    }
    let Some(d) = domain_intersection(m, run)? else {
        return Ok(MeasureValue::Exact(Rational::zero()));
    };
    integrate_normalized(n, &norms, &d, &opts.tolerance)
}

fn integrate_normalized(n: usize, norms: &[Normalized], d: &DomainBox, tol: &Rational) -> Result<MeasureValue> {
    if norms.iter().all(|p| p.as_poly().is_some()) {
        let mut prod = MultiPoly::one(n);
        for p in norms {
            prod = prod.mul(p.as_poly().expect("checked"))?;
        }
        return Ok(MeasureValue::Exact(prod.integrate_box(d)?));
    }
    let compiled: Vec<CompiledNormalized> = norms.iter().map(Normalized::compile).collect();
    let q = quad_fn(
        |p| compiled.iter().fold(crate::exactmath::Real::one(), |acc, c| acc.mul(&c.eval(p))),
        d,
        tol,
        crate::exactmath::DEFAULT_EVAL_BUDGET,
    )?;
    Ok(MeasureValue::from_quad(&q))
}

fn sta_measure(n: usize, parts: &[(&FuncExpr, &DomainBox)], opts: &MeasureOptions) -> Result<MeasureValue> {
    if opts.per_step_product {
        let mut acc = MeasureValue::Exact(Rational::one());
        for (f, d) in parts {
            acc = mul_values(&acc, &integrate_product(n, &[f], d, &opts.tolerance)?);
        }
        return Ok(acc);
    }
    let mut d = DomainBox::unit(n);
    for (_, de) in parts {
        match d.intersect(de)? {
            Some(x) => d = x,
            None => return Ok(MeasureValue::Exact(Rational::zero())),
        }
    }
    let fs: Vec<&FuncExpr> = parts.iter().map(|(f, _)| *f).collect();
    integrate_product(n, &fs, &d, &opts.tolerance)
}

fn integrate_product(n: usize, fs: &[&FuncExpr], d: &DomainBox, tol: &Rational) -> Result<MeasureValue> {
    if fs.iter().all(|f| f.is_polynomial()) {
        let mut prod = MultiPoly::one(n);
        for f in fs {
            prod = prod.mul(&f.to_poly(n)?)?;
        }
        return Ok(MeasureValue::Exact(prod.integrate_box(d)?));
    }
    let prod = FuncExpr::Mul(fs.iter().map(|f| (*f).clone()).collect());
    Ok(MeasureValue::from_quad(&quad_numeric(&prod, d, tol)?))
}

/// Product of two measure values with first-order error propagation.
fn mul_values(a: &MeasureValue, b: &MeasureValue) -> MeasureValue {
    use crate::exactmath::Real;
    match (a, b) {
        (MeasureValue::Exact(x), MeasureValue::Exact(y)) => MeasureValue::Exact(x * y),
        _ => {
            let split = |v: &MeasureValue| match v {
                MeasureValue::Exact(r) => (Real::from_rational(r), Real::zero()),
                MeasureValue::Approx { value, error } => (value.clone(), error.clone()),
            };
            let (x, ex) = split(a);
            let (y, ey) = split(b);
            // |xy - XY| <= |x| ey + |y| ex + ex ey
            let err = x.abs().mul(&ey).add(&y.abs().mul(&ex)).add(&ex.mul(&ey));
            MeasureValue::Approx { value: x.mul(&y), error: err }
        }
    }
}

/// Collection measure with any warnings raised while computing it.
#[derive(Clone, Debug, Serialize)]
pub struct RunSetMeasure {
    pub value: MeasureValue,
    pub warnings: Vec<String>,
}

/// Sum of run measures over a prefix-free run set.
pub fn measure_runset(m: &Machine, w: Option<&WeightAssignment>, runs: &[Run]) -> Result<RunSetMeasure> {
    measure_runset_with(m, w, runs, &MeasureOptions::default())
}

pub fn measure_runset_with(
    m: &Machine,
    w: Option<&WeightAssignment>,
    runs: &[Run],
    opts: &MeasureOptions,
) -> Result<RunSetMeasure> {
    if let Some((i, j)) = prefix_violation(m, runs) {
        return Err(Error::Usage(format!("run set is not prefix-free: run {i} is a prefix of run {j}")));
    }
    let mut total = MeasureValue::Exact(Rational::zero());
    for r in runs {
        total = total.add(&measure_run_with(m, w, r, opts)?);
    }
    let mut warnings = Vec::new();
    if !total.certainly_below(&Rational::one()) {
        warnings.push(format!("collection measure {total} is not below 1"));
    }
    Ok(RunSetMeasure { value: total, warnings })
}
