use crate::automata::{
    clock_ceiling, normalize_domains, Machine, NfaEdge, PaEdge, PtaEdge, StaEdge, TaEdge, TapdEdge, Transitions,
};
use crate::error::{Error, Result};
use crate::exactmath::{FuncExpr, Rational};
use crate::measures::normalized_transition;

use super::{Translation, Witness};

fn uniform_probs(m: &Machine) -> Vec<Rational> {
    let mut outdeg = vec![0i64; m.num_states()];
    for e in m.all_ends() {
        outdeg[e.from] += 1;
    }
    m.all_ends().iter().map(|e| Rational::new(1, outdeg[e.from])).collect()
}

fn expect(m: &Machine, want: &str) -> Error {
    Error::Usage(format!("expected a {want} machine, found {}", m.kind()))
}

/// Same edges with no guard and no resets, over no clocks.
pub fn nfa_to_timed(n: &Machine) -> Result<Translation> {
    let Transitions::Nfa(es) = &n.transitions else { return Err(expect(n, "nfa")) };
    let edges = es
        .iter()
        .map(|e| TaEdge { from: e.from, action: e.action, to: e.to, guard: Default::default(), resets: vec![] })
        .collect();
    let m = Machine::new(n.triple.clone(), vec![], Transitions::Ta(edges));
    Ok(Translation { witness: Witness::identity(n), machine: m, weights: None })
}

/// Uniform distribution over each state's outgoing edges.
pub fn nfa_to_prob(n: &Machine) -> Result<Translation> {
    let Transitions::Nfa(es) = &n.transitions else { return Err(expect(n, "nfa")) };
    let probs = uniform_probs(n);
    let edges = es
        .iter()
        .zip(probs)
        .map(|(e, p)| PaEdge { from: e.from, action: e.action, to: e.to, prob: p })
        .collect();
    let m = Machine::new(n.triple.clone(), vec![], Transitions::Pa(edges));
    Ok(Translation { witness: Witness::identity(n), machine: m, weights: None })
}

/// Guards and resets kept, uniform probabilities added.
pub fn timed_to_probtimed(t: &Machine) -> Result<Translation> {
    let Transitions::Ta(es) = &t.transitions else { return Err(expect(t, "ta")) };
    let probs = uniform_probs(t);
    let edges = es
        .iter()
        .zip(probs)
        .map(|(e, p)| PtaEdge {
            from: e.from,
            action: e.action,
            to: e.to,
            prob: p,
            guard: e.guard.clone(),
            resets: e.resets.clone(),
        })
        .collect();
    let m = Machine::new(t.triple.clone(), t.clocks.clone(), Transitions::Pta(edges));
    Ok(Translation { witness: Witness::identity(t), machine: m, weights: None })
}

/// Probabilities kept, no guards, no resets, no clocks.
pub fn prob_to_probtimed(p: &Machine) -> Result<Translation> {
    let Transitions::Pa(es) = &p.transitions else { return Err(expect(p, "pa")) };
    let edges = es
        .iter()
        .map(|e| PtaEdge {
            from: e.from,
            action: e.action,
            to: e.to,
            prob: e.prob.clone(),
            guard: Default::default(),
            resets: vec![],
        })
        .collect();
    let m = Machine::new(p.triple.clone(), vec![], Transitions::Pta(edges));
    Ok(Translation { witness: Witness::identity(p), machine: m, weights: None })
}

/// Each edge becomes the constant polynomial of its probability over the
/// normalized guard box. Times scale by `1 / C_T`.
pub fn probtimed_to_delay(a: &Machine, degree: u32) -> Result<Translation> {
    let Transitions::Pta(es) = &a.transitions else { return Err(expect(a, "pta")) };
    let boxes = normalize_domains(a)?;
    let edges = es
        .iter()
        .zip(boxes)
        .map(|(e, d)| TapdEdge {
            from: e.from,
            action: e.action,
            to: e.to,
            domain: d,
            func: FuncExpr::Const(e.prob.clone()),
            degree,
            resets: e.resets.clone(),
        })
        .collect();
    let m = Machine::new(a.triple.clone(), a.clocks.clone(), Transitions::Tapd(edges));
    let mut w = Witness::identity(a);
    w.time_scale = clock_ceiling(a).recip();
    Ok(Translation { witness: w, machine: m, weights: None })
}

/// Same structure; each edge density is the TAPD's normalized transition.
/// When that is a genuine rational function there is no STA expression for
/// it and the lift is unsupported.
pub fn delay_to_stochastic(d: &Machine) -> Result<Translation> {
    let Transitions::Tapd(es) = &d.transitions else { return Err(expect(d, "tapd")) };
    let edges = es
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let norm = normalized_transition(d, i)?;
            let poly = norm.as_poly().ok_or_else(|| {
                Error::Unsupported(format!(
                    "edge {i}: normalized transition is a rational function, not a polynomial"
                ))
            })?;
            Ok(StaEdge {
                from: e.from,
                action: e.action,
                to: e.to,
                domain: e.domain.clone(),
                func: FuncExpr::from_poly(poly),
                resets: e.resets.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = Machine::new(d.triple.clone(), d.clocks.clone(), Transitions::Sta(edges));
    Ok(Translation { witness: Witness::identity(d), machine: m, weights: None })
}

/// Drops probabilities; used when a PA must be compared as an NFA shape.
pub fn prob_shape(p: &Machine) -> Result<Machine> {
    let Transitions::Pa(es) = &p.transitions else { return Err(expect(p, "pa")) };
    let edges = es.iter().map(|e| NfaEdge { from: e.from, action: e.action, to: e.to }).collect();
    Ok(Machine::new(p.triple.clone(), vec![], Transitions::Nfa(edges)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{validate_machine, ClockConstraint, StateActionTriple};
    use crate::exactmath::{q, DomainBox};
    use crate::fixtures;

    #[test]
    fn untimed_lifts() {
        let nfa = fixtures::two_state_nfa();
        let t = nfa_to_timed(&nfa).unwrap();
        assert!(validate_machine(&t.machine).valid);
        assert_eq!(t.machine.num_edges(), 4);
        assert!((0..4).all(|i| t.machine.guard(i).unwrap().is_true() && t.machine.resets(i).is_empty()));
        let p = nfa_to_prob(&nfa).unwrap();
        assert!(validate_machine(&p.machine).valid);
        assert_eq!(p.machine.prob(0), Some(&q(1, 2)));
        let shape = prob_shape(&fixtures::load("three_state_pa")).unwrap();
        assert_eq!(nfa_to_timed(&shape).unwrap().machine.num_edges(), 7);
    }

    #[test]
    fn probtimed_lifts() {
        let t = timed_to_probtimed(&fixtures::load("punctual_ta")).unwrap().machine;
        assert_eq!(t.prob(0), Some(&q(1, 2)));
        assert_eq!(t.prob(1), Some(&q(1, 2)));
        assert!(t.guard(1).unwrap().constants().contains(&q(2, 1)));
        let p = prob_to_probtimed(&fixtures::load("two_state_pa")).unwrap().machine;
        assert_eq!(p.prob(0), Some(&q(3, 4)));
        assert!(validate_machine(&p).valid);
    }

    #[test]
    fn delay_lift_boxes() {
        let triple = StateActionTriple::new(vec!["s".into()], 0, vec!["a".into(), "b".into()]).unwrap();
        // c <= 2 and c <= 4 give C_T = 5
        let g = ClockConstraint::upper(0, q(2, 1), false).and(ClockConstraint::upper(0, q(4, 1), false));
        let pta = Machine::new(
            triple,
            vec!["c".into()],
            Transitions::Pta(vec![
                PtaEdge { from: 0, action: 0, to: 0, prob: q(1, 2), guard: g, resets: vec![] },
                PtaEdge { from: 0, action: 1, to: 0, prob: q(1, 2), guard: ClockConstraint::True, resets: vec![0] },
            ]),
        );
        let d = probtimed_to_delay(&pta, 2).unwrap();
        assert_eq!(d.witness.time_scale, q(1, 5));
        assert_eq!(d.machine.domain(0).unwrap(), &DomainBox::new(vec![(q(0, 1), q(2, 5))]).unwrap());
        assert_eq!(d.machine.domain(1).unwrap(), &DomainBox::unit(1));
        let s = delay_to_stochastic(&fixtures::load("linear_tapd")).unwrap().machine;
        assert!(validate_machine(&s).valid);
    }

    #[test]
    fn stochastic_lift_normalizes() {
        let triple = StateActionTriple::new(vec!["s".into()], 0, vec!["a".into(), "b".into()]).unwrap();
        let mk = |fa: FuncExpr, fb: FuncExpr| {
            let e = |action, func| TapdEdge {
                from: 0,
                action,
                to: 0,
                domain: DomainBox::unit(1),
                func,
                degree: 2,
                resets: vec![],
            };
            Machine::new(triple.clone(), vec!["x".into()], Transitions::Tapd(vec![e(0, fa), e(1, fb)]))
        };
        // 2x and 6x normalize to 1/4 and 3/4
        let two_x = FuncExpr::mul(FuncExpr::Const(q(2, 1)), FuncExpr::var(0));
        let six_x = FuncExpr::mul(FuncExpr::Const(q(6, 1)), FuncExpr::var(0));
        let s = delay_to_stochastic(&mk(two_x, six_x)).unwrap().machine;
        let Transitions::Sta(es) = &s.transitions else { unreachable!() };
        assert_eq!(es[0].func.to_poly(1).unwrap(), crate::exactmath::MultiPoly::constant(1, q(1, 4)));
        // x against 1 has no polynomial normalization
        let r = delay_to_stochastic(&mk(FuncExpr::var(0), FuncExpr::Const(q(1, 1))));
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }
}
