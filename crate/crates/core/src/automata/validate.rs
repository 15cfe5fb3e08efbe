use std::collections::BTreeSet;

use serde::Serialize;

use super::machine::{Machine, Transitions};
use crate::exactmath::{check_nonnegative, Rational};

/// Outcome of [`validate_machine`]: empty `violations` means pass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub model: String,
    pub valid: bool,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.valid
    }
}

pub fn validate_machine(m: &Machine) -> ValidationReport {
    let mut v = m.triple.problems();
    let n = m.num_states();
    let nact = m.triple.actions.len();
    let nclk = m.num_clocks();

    for (i, c) in m.clocks.iter().enumerate() {
        if c.is_empty() {
            v.push("empty clock name".into());
        }
        if m.clocks[..i].contains(c) {
            v.push(format!("duplicate clock '{c}'"));
        }
    }
    if !m.kind().is_timed() && nclk > 0 {
        v.push(format!("{} machines have no clocks", m.kind()));
    }

    let mut seen = BTreeSet::new();
    for i in 0..m.num_edges() {
        let e = m.ends(i);
        if e.from >= n || e.to >= n {
            v.push(format!("edge {i}: state index out of range"));
            continue;
        }
        if e.action >= nact {
            v.push(format!("edge {i}: action index out of range"));
            continue;
        }
        if m.resets(i).iter().any(|&r| r >= nclk) {
            v.push(format!("edge {i}: reset clock index out of range"));
        }
        if let Some(g) = m.guard(i) {
            if g.max_clock().is_some_and(|c| c >= nclk) {
                v.push(format!("edge {i}: guard clock index out of range"));
            }
        }
        if matches!(m.transitions, Transitions::Nfa(_) | Transitions::Pa(_)) && !seen.insert(e) {
            v.push(format!(
                "edge {i}: duplicate transition {} -{}-> {}",
                m.state_name(e.from),
                m.action_name(e.action),
                m.state_name(e.to)
            ));
        }
    }

    match &m.transitions {
        Transitions::Pa(_) | Transitions::Pta(_) => check_distributions(m, &mut v),
        Transitions::Tapd(edges) => {
            for (i, e) in edges.iter().enumerate() {
                if e.domain.dim() != nclk {
                    v.push(format!("edge {i}: domain has {} axes for {nclk} clocks", e.domain.dim()));
                    continue;
                }
                if let Err(err) = e.truncation(nclk) {
                    v.push(format!("edge {i}: {err}"));
                }
            }
        }
        Transitions::Sta(edges) => {
            for (i, e) in edges.iter().enumerate() {
                if e.domain.dim() != nclk {
                    v.push(format!("edge {i}: domain has {} axes for {nclk} clocks", e.domain.dim()));
                    continue;
                }
                if let Err(err) = e.func.validate(nclk) {
                    v.push(format!("edge {i}: {err}"));
                    continue;
                }
                if let Err(err) = check_nonnegative(&e.func, &e.domain) {
                    v.push(format!("edge {i}: {err}"));
                }
            }
        }
        _ => {}
    }
    ValidationReport { model: m.kind().to_string(), valid: v.is_empty(), violations: v }
}

fn check_distributions(m: &Machine, v: &mut Vec<String>) {
    let n = m.num_states();
    let mut sums = vec![Rational::zero(); n];
    let mut has_out = vec![false; n];
    for i in 0..m.num_edges() {
        let e = m.ends(i);
        if e.from >= n {
            continue;
        }
        let p = m.prob(i).expect("probabilistic model");
        if !p.is_positive() || p > &Rational::one() {
            v.push(format!("edge {i}: probability {p} not in (0,1]"));
        }
        sums[e.from] += p;
        has_out[e.from] = true;
    }
    for s in 0..n {
        if has_out[s] && !sums[s].is_one() {
            let deficit = Rational::one() - &sums[s];
            v.push(format!(
                "state {}: outgoing probabilities sum to {} (deficit {})",
                m.state_name(s),
                sums[s],
                deficit
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::machine::{PaEdge, StateActionTriple, TapdEdge};
    use crate::exactmath::{q, DomainBox, FuncExpr};

    fn pa(rows: &[(usize, usize, Rational)]) -> Machine {
        let t = StateActionTriple::new(vec!["s1".into(), "s2".into()], 0, vec!["a".into(), "b".into()]).unwrap();
        let edges = rows
            .iter()
            .enumerate()
            .map(|(k, (f, to, p))| PaEdge { from: *f, action: k % 2, to: *to, prob: p.clone() })
            .collect();
        Machine::new(t, vec![], Transitions::Pa(edges))
    }

    #[test]
    fn deficit_row_is_reported() {
        let m = pa(&[(0, 0, q(1, 2)), (0, 1, q(2, 5))]);
        let r = validate_machine(&m);
        assert!(!r.valid);
        assert!(r.violations[0].contains("deficit 1/10"), "{:?}", r.violations);
        let ok = pa(&[(0, 0, q(1, 2)), (0, 1, q(1, 2))]);
        assert!(validate_machine(&ok).valid);
        assert_eq!(validate_machine(&ok), validate_machine(&ok));
    }

    #[test]
    fn tapd_domain_axes_checked() {
        let t = StateActionTriple::new(vec!["s".into()], 0, vec!["a".into()]).unwrap();
        let e = TapdEdge {
            from: 0,
            action: 0,
            to: 0,
            domain: DomainBox::unit(2),
            func: FuncExpr::Const(q(1, 1)),
            degree: 0,
            resets: vec![],
        };
        let m = Machine::new(t, vec!["x".into()], Transitions::Tapd(vec![e]));
        assert!(!validate_machine(&m).valid);
    }
}
