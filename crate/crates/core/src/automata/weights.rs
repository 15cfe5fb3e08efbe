use std::collections::BTreeMap;

use serde::Serialize;

use super::machine::{Machine, ModelKind};
use crate::error::{Error, Result};
use crate::exactmath::Rational;

/// Per-state bound enforced on outgoing weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightBound {
    /// Weights in (0,1); outgoing sums strictly below 1.
    SubStochastic,
    /// Weights in (0,1]; outgoing sums at most 1. Used for uniform NFA weightings
    /// and for split machines that mirror a probability distribution.
    Stochastic,
}

/// Edge weights of an NFA or TA, indexed like the machine's edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightAssignment {
    weights: Vec<Rational>,
    bound: WeightBound,
}

impl WeightAssignment {
    pub fn new(m: &Machine, weights: Vec<Rational>, bound: WeightBound) -> Result<Self> {
        if !m.kind().needs_weights() {
            return Err(Error::Usage(format!("{} machines carry their own probabilities", m.kind())));
        }
        if weights.len() != m.num_edges() {
            return Err(Error::Structural(format!(
                "{} weights for {} edges",
                weights.len(),
                m.num_edges()
            )));
        }
        let one = Rational::one();
        for (i, w) in weights.iter().enumerate() {
            let ok = match bound {
                WeightBound::SubStochastic => w.is_positive() && w < &one,
                WeightBound::Stochastic => w.is_positive() && w <= &one,
            };
            if !ok {
                return Err(Error::Validation(format!("edge {i}: weight {w} out of range")));
            }
        }
        let mut by_label: BTreeMap<(usize, usize), &Rational> = BTreeMap::new();
        let mut sums = vec![Rational::zero(); m.num_states()];
        for (i, w) in weights.iter().enumerate() {
            let e = m.ends(i);
            if let Some(prev) = by_label.insert((e.from, e.action), w) {
                if prev != w {
                    return Err(Error::Validation(format!(
                        "edges leaving {} labelled {} have different weights {} and {}",
                        m.state_name(e.from),
                        m.action_name(e.action),
                        prev,
                        w
                    )));
                }
            }
            sums[e.from] += w;
        }
        for (s, total) in sums.iter().enumerate() {
            let bad = match bound {
                WeightBound::SubStochastic => total >= &one,
                WeightBound::Stochastic => total > &one,
            };
            if bad {
                return Err(Error::Validation(format!(
                    "outgoing weights of {} sum to {}",
                    m.state_name(s),
                    total
                )));
            }
        }
        Ok(WeightAssignment { weights, bound })
    }

    pub fn weight(&self, edge: usize) -> &Rational {
        &self.weights[edge]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn bound(&self) -> WeightBound {
        self.bound
    }
}

/// Every edge of a state with `n` outgoing edges gets `(1 - slack) / n`.
pub fn assign_weights(m: &Machine, slack: &Rational) -> Result<WeightAssignment> {
    if !slack.is_positive() || slack >= &Rational::one() {
        return Err(Error::Usage(format!("slack {slack} not in (0,1)")));
    }
    let mass = Rational::one() - slack;
    let w = per_edge_share(m, &mass);
    WeightAssignment::new(m, w, WeightBound::SubStochastic)
}

/// Every edge of a state with `n` outgoing edges gets `1 / n`.
pub fn uniform_weights(m: &Machine) -> Result<WeightAssignment> {
    let w = per_edge_share(m, &Rational::one());
    WeightAssignment::new(m, w, WeightBound::Stochastic)
}

fn per_edge_share(m: &Machine, mass: &Rational) -> Vec<Rational> {
    let mut outdeg = vec![0i64; m.num_states()];
    for e in m.all_ends() {
        outdeg[e.from] += 1;
    }
    m.all_ends()
        .iter()
        .map(|e| mass / &Rational::integer(outdeg[e.from]))
        .collect()
}

/// Convenience for machines whose class needs an external weighting.
pub fn needs_weights(kind: ModelKind) -> bool {
    kind.needs_weights()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::machine::{NfaEdge, StateActionTriple, Transitions};
    use crate::exactmath::q;

    fn two_loop() -> Machine {
        let t = StateActionTriple::new(vec!["s1".into(), "s2".into()], 0, vec!["a".into(), "b".into()]).unwrap();
        Machine::new(
            t,
            vec![],
            Transitions::Nfa(vec![
                NfaEdge { from: 0, action: 0, to: 0 },
                NfaEdge { from: 0, action: 1, to: 1 },
            ]),
        )
    }

    #[test]
    fn slack_split() {
        let w = assign_weights(&two_loop(), &q(1, 2)).unwrap();
        assert_eq!(w.weights(), &[q(1, 4), q(1, 4)]);
        let u = uniform_weights(&two_loop()).unwrap();
        assert_eq!(u.weights(), &[q(1, 2), q(1, 2)]);
    }

    #[test]
    fn invariants_enforced() {
        let m = two_loop();
        assert!(WeightAssignment::new(&m, vec![q(1, 2), q(1, 2)], WeightBound::SubStochastic).is_err());
        assert!(WeightAssignment::new(&m, vec![q(1, 2), q(1, 2)], WeightBound::Stochastic).is_ok());
        assert!(WeightAssignment::new(&m, vec![q(0, 1), q(1, 2)], WeightBound::SubStochastic).is_err());
        assert!(WeightAssignment::new(&m, vec![q(1, 2)], WeightBound::SubStochastic).is_err());
        let t = StateActionTriple::new(vec!["s1".into(), "s2".into()], 0, vec!["a".into()]).unwrap();
        let co = Machine::new(
            t,
            vec![],
            Transitions::Nfa(vec![
                NfaEdge { from: 0, action: 0, to: 0 },
                NfaEdge { from: 0, action: 0, to: 1 },
            ]),
        );
        assert!(WeightAssignment::new(&co, vec![q(1, 4), q(1, 3)], WeightBound::SubStochastic).is_err());
        assert!(WeightAssignment::new(&co, vec![q(1, 4), q(1, 4)], WeightBound::SubStochastic).is_ok());
    }
}
