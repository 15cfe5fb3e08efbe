use crate::automata::{Machine, Transitions};
use crate::error::{Error, Result};
use crate::exactmath::{check_nonnegative, FuncExpr, MultiPoly, Rational, Real, RealExpr};

/// Normalized TAPD transition `|T_j| / sum_k |T_k|` over the sibling edges
/// (same source) of edge `j`.
#[derive(Clone, Debug)]
pub enum Normalized {
    /// The normalization is a polynomial almost everywhere.
    Poly(MultiPoly),
    /// Genuine rational function, evaluated pointwise.
    Ratio { num: MultiPoly, siblings: Vec<MultiPoly> },
}

impl Normalized {
    pub fn as_poly(&self) -> Option<&MultiPoly> {
        match self {
            Normalized::Poly(p) => Some(p),
            Normalized::Ratio { .. } => None,
        }
    }

    pub fn eval_f64(&self, p: &[f64]) -> f64 {
        match self {
            Normalized::Poly(q) => q.eval_f64(p),
            Normalized::Ratio { num, siblings } => {
                let den: f64 = siblings.iter().map(|s| s.eval_f64(p).abs()).sum();
                if den == 0.0 {
                    0.0
                } else {
                    num.eval_f64(p).abs() / den
                }
            }
        }
    }

    pub fn compile(&self) -> CompiledNormalized {
        let c = |p: &MultiPoly| FuncExpr::from_poly(p).compile();
        match self {
            Normalized::Poly(p) => CompiledNormalized::Poly(c(p)),
            Normalized::Ratio { num, siblings } => {
                CompiledNormalized::Ratio { num: c(num), siblings: siblings.iter().map(c).collect() }
            }
        }
    }
}

/// High-precision evaluator for [`Normalized`].
pub enum CompiledNormalized {
    Poly(RealExpr),
    Ratio { num: RealExpr, siblings: Vec<RealExpr> },
}

impl CompiledNormalized {
    pub fn eval(&self, p: &[Real]) -> Real {
        match self {
            CompiledNormalized::Poly(e) => e.eval(p),
            CompiledNormalized::Ratio { num, siblings } => {
                let den = siblings.iter().fold(Real::zero(), |acc, s| acc.add(&s.eval(p).abs()));
                if den.is_zero() {
                    Real::zero()
                } else {
                    num.eval(p).abs().div(&den)
                }
            }
        }
    }
}

/// Normalized transition of TAPD edge `edge`.
///
/// Fast paths: when the sibling truncations are nonnegative on their domains
/// and sum to 1, the truncation itself; when all siblings are multiples of one
/// polynomial, the constant ratio of the multipliers.
pub fn normalized_transition(m: &Machine, edge: usize) -> Result<Normalized> {
    let Transitions::Tapd(edges) = &m.transitions else {
        return Err(Error::Usage(format!("normalized transitions are defined for tapd, not {}", m.kind())));
    };
    if edge >= edges.len() {
        return Err(Error::Structural(format!("edge {edge} out of range")));
    }
    let n = m.num_clocks();
    let src = edges[edge].from;
    let sib_idx: Vec<usize> = (0..edges.len()).filter(|&k| edges[k].from == src).collect();
    let trunc = sib_idx.iter().map(|&k| edges[k].truncation(n)).collect::<Result<Vec<_>>>()?;
    let pos = sib_idx.iter().position(|&k| k == edge).expect("edge is its own sibling");
    if trunc.iter().all(MultiPoly::is_zero) {
        return Err(Error::Degenerate(format!(
            "every transition leaving {} truncates to zero",
            m.state_name(src)
        )));
    }

    let mut total = MultiPoly::zero(n);
    for t in &trunc {
        total = total.add(t)?;
    }
    if total == MultiPoly::one(n) {
        let nonneg = sib_idx
            .iter()
            .zip(&trunc)
            .all(|(&k, t)| check_nonnegative(&FuncExpr::from_poly(t), &edges[k].domain).is_ok());
        if nonneg {
            return Ok(Normalized::Poly(trunc[pos].clone()));
        }
    }

    if let Some(ratios) = proportional(&trunc) {
        let sum: Rational = ratios.iter().map(Rational::abs).sum();
        return Ok(Normalized::Poly(MultiPoly::constant(n, ratios[pos].abs() / sum)));
    }

    Ok(Normalized::Ratio { num: trunc[pos].clone(), siblings: trunc })
}

/// Multipliers `c_k` with `T_k = c_k * T` for a common nonzero `T`, if any.
fn proportional(ts: &[MultiPoly]) -> Option<Vec<Rational>> {
    let base = ts.iter().find(|t| !t.is_zero())?;
    let (lead_exp, lead) = base.terms().last().map(|(e, c)| (e.clone(), c.clone()))?;
    let mut out = Vec::with_capacity(ts.len());
    for t in ts {
        let c = t.terms().find(|(e, _)| **e == lead_exp).map(|(_, c)| c / &lead).unwrap_or_else(Rational::zero);
        if &base.scale(&c) != t {
            return None;
        }
        out.push(c);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{StateActionTriple, TapdEdge};
    use crate::exactmath::{q, DomainBox};
    use crate::fixtures;

    fn tapd(funcs: Vec<FuncExpr>) -> Machine {
        let t = StateActionTriple::new(vec!["s".into()], 0, vec!["a".into(), "b".into()]).unwrap();
        let edges = funcs
            .into_iter()
            .enumerate()
            .map(|(i, f)| TapdEdge {
                from: 0,
                action: i % 2,
                to: 0,
                domain: DomainBox::new(vec![(q(0, 1), q(1, 2))]).unwrap(),
                func: f,
                degree: 3,
                resets: vec![],
            })
            .collect();
        Machine::new(t, vec!["x".into()], Transitions::Tapd(edges))
    }

    #[test]
    fn stochastic_family_is_kept() {
        let m = fixtures::load("linear_tapd");
        let n = normalized_transition(&m, 1).unwrap();
        let want = FuncExpr::add(FuncExpr::var(0), FuncExpr::constant(q(1, 2))).to_poly(1).unwrap();
        assert_eq!(n.as_poly(), Some(&want));
    }

    #[test]
    fn single_and_symmetric_edges() {
        let single = tapd(vec![FuncExpr::add(FuncExpr::var(0), FuncExpr::constant(q(1, 1)))]);
        assert_eq!(normalized_transition(&single, 0).unwrap().as_poly(), Some(&MultiPoly::one(1)));
        let pair = tapd(vec![FuncExpr::var(0), FuncExpr::var(0)]);
        assert_eq!(normalized_transition(&pair, 1).unwrap().as_poly(), Some(&MultiPoly::constant(1, q(1, 2))));
    }

    #[test]
    fn general_ratio_and_degenerate() {
        let m = tapd(vec![FuncExpr::var(0), FuncExpr::constant(q(1, 1))]);
        let n = normalized_transition(&m, 0).unwrap();
        assert!(n.as_poly().is_none());
        // x / (x + 1) at x = 1/4
        assert!((n.eval_f64(&[0.25]) - 0.2).abs() < 1e-15);
        let z = tapd(vec![FuncExpr::constant(q(0, 1)), FuncExpr::constant(q(0, 1))]);
        assert!(matches!(normalized_transition(&z, 0), Err(Error::Degenerate(_))));
    }
}
