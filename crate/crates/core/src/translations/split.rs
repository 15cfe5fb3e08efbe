use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::automata::{Machine, NfaEdge, StateActionTriple, TaEdge, Transitions, WeightAssignment, WeightBound};
use crate::error::{Error, Result};
use crate::exactmath::Rational;

use super::{Translation, Witness};

pub const DEFAULT_SPLIT_BUDGET: usize = 1_000_000;

/// Largest `k` with every probability an integer multiple of `k`.
pub fn probability_gcd(probs: &[&Rational]) -> Rational {
    let l = Rational::lcm_of_denominators(probs.iter().copied());
    let mut g = num_bigint::BigInt::from(0);
    for p in probs {
        let n = p.numer() * (&l / p.denom());
        g = g.gcd(&n);
    }
    Rational::from_bigs(g, l).expect("non-zero lcm")
}

struct Split {
    triple: StateActionTriple,
    /// (source edge, from copy, to copy) per output edge.
    edges: Vec<(usize, usize, usize)>,
    projection: Vec<usize>,
    k: Rational,
}

/// Splits every edge of probability `p` into `p / k` parallel edges towards
/// distinct copies of its target; every copy of a state has the outgoing
/// edges of the original.
fn split(m: &Machine, budget: usize) -> Result<Split> {
    let probs: Vec<&Rational> = (0..m.num_edges()).map(|i| m.prob(i).expect("probabilistic")).collect();
    if probs.is_empty() {
        return Err(Error::Degenerate("machine has no edges".into()));
    }
    let k = probability_gcd(&probs);
    let mult: Vec<usize> = probs
        .iter()
        .map(|p| {
            (*p / &k)
                .numer()
                .to_usize()
                .ok_or_else(|| Error::Budget { what: "edge multiplicity".into(), limit: usize::MAX as u64 })
        })
        .collect::<Result<_>>()?;
    let n = m.num_states();
    let mut copies = vec![0usize; n];
    copies[m.start()] = 1;
    for (i, e) in m.all_ends().iter().enumerate() {
        copies[e.to] = copies[e.to].max(mult[i]);
    }
    for c in copies.iter_mut() {
        *c = (*c).max(1);
    }
    let mut first = vec![0usize; n];
    let mut total = 0usize;
    for s in 0..n {
        first[s] = total;
        total += copies[s];
    }
    let mut out_edges = 0usize;
    for (i, e) in m.all_ends().iter().enumerate() {
        out_edges = out_edges.saturating_add(copies[e.from].saturating_mul(mult[i]));
    }
    if total.saturating_add(out_edges) > budget {
        return Err(Error::Budget { what: "split machine states plus edges".into(), limit: budget as u64 });
    }
    let mut names = Vec::with_capacity(total);
    let mut projection = Vec::with_capacity(total);
    for s in 0..n {
        for c in 0..copies[s] {
            names.push(if c == 0 { m.state_name(s).to_string() } else { format!("{}#{c}", m.state_name(s)) });
            projection.push(s);
        }
    }
    // the start state is the first copy of the original start
    let triple = StateActionTriple::new(names, first[m.start()], m.triple.actions.clone())?;
    let mut edges = Vec::with_capacity(out_edges);
    for (i, e) in m.all_ends().iter().enumerate() {
        for a in 0..copies[e.from] {
            for b in 0..mult[i] {
                edges.push((i, first[e.from] + a, first[e.to] + b));
            }
        }
    }
    Ok(Split { triple, edges, projection, k })
}

/// PA to an NFA whose weights are all `k`, the gcd of the probabilities.
pub fn prob_to_nfa_gcd(p: &Machine, budget: usize) -> Result<Translation> {
    if !matches!(p.transitions, Transitions::Pa(_)) {
        return Err(Error::Usage(format!("expected a pa machine, found {}", p.kind())));
    }
    let s = split(p, budget)?;
    let edges = s
        .edges
        .iter()
        .map(|&(i, a, b)| NfaEdge { from: a, action: p.ends(i).action, to: b })
        .collect();
    let m = Machine::new(s.triple, vec![], Transitions::Nfa(edges));
    let w = WeightAssignment::new(&m, vec![s.k.clone(); m.num_edges()], WeightBound::Stochastic)?;
    let witness = Witness {
        state_map: s.projection,
        action_map: (0..p.triple.actions.len()).collect(),
        time_scale: Rational::one(),
    };
    Ok(Translation { machine: m, weights: Some(w), witness })
}

/// PTA to a TA with the same splitting; guards and resets are copied.
pub fn probtimed_to_timed(p: &Machine, budget: usize) -> Result<Translation> {
    let Transitions::Pta(src) = &p.transitions else {
        return Err(Error::Usage(format!("expected a pta machine, found {}", p.kind())));
    };
    let s = split(p, budget)?;
    let edges = s
        .edges
        .iter()
        .map(|&(i, a, b)| TaEdge {
            from: a,
            action: src[i].action,
            to: b,
            guard: src[i].guard.clone(),
            resets: src[i].resets.clone(),
        })
        .collect();
    let m = Machine::new(s.triple, p.clocks.clone(), Transitions::Ta(edges));
    let w = WeightAssignment::new(&m, vec![s.k.clone(); m.num_edges()], WeightBound::Stochastic)?;
    let witness = Witness {
        state_map: s.projection,
        action_map: (0..p.triple.actions.len()).collect(),
        time_scale: Rational::one(),
    };
    Ok(Translation { machine: m, weights: Some(w), witness })
}
