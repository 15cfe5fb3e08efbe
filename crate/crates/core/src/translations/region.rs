use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::automata::{
    clock_ceiling, ClockConstraint, Machine, NfaEdge, StateActionTriple, Transitions, WeightAssignment,
};
use crate::error::{Error, Result};
use crate::exactmath::Rational;

use super::{Translation, Witness};

pub const DEFAULT_REGION_BUDGET: usize = 100_000;

/// Clock region relative to an integer ceiling `k`: integer parts (`k + 1`
/// stands for "beyond k"), which bounded clocks have zero fractional part,
/// and the ascending order of the non-zero fractional parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    ints: Vec<u32>,
    zero: Vec<bool>,
    order: Vec<Vec<usize>>,
}

impl Region {
    pub fn origin(nclocks: usize) -> Region {
        Region { ints: vec![0; nclocks], zero: vec![true; nclocks], order: vec![] }
    }

    fn beyond(&self, c: usize, k: u32) -> bool {
        self.ints[c] > k
    }

    fn is_point(&self, k: u32) -> bool {
        (0..self.ints.len()).any(|c| !self.beyond(c, k) && self.zero[c])
    }

    /// Immediate time successor, `None` once every clock is beyond the ceiling.
    fn successor(&self, k: u32) -> Option<Region> {
        let mut r = self.clone();
        if self.is_point(k) {
            let mut moved = Vec::new();
            for c in 0..r.ints.len() {
                if r.beyond(c, k) || !r.zero[c] {
                    continue;
                }
                r.zero[c] = false;
                if r.ints[c] == k {
                    r.ints[c] = k + 1;
                } else {
                    moved.push(c);
                }
            }
            if !moved.is_empty() {
                r.order.insert(0, moved);
            }
            Some(r)
        } else {
            let last = r.order.pop()?;
            for c in last {
                r.ints[c] += 1;
                r.zero[c] = true;
            }
            Some(r)
        }
    }

    /// Regions reachable by a strictly positive delay.
    fn positive_delays(&self, k: u32) -> Vec<Region> {
        let mut out = Vec::new();
        if !self.is_point(k) {
            out.push(self.clone());
        }
        let mut cur = self.clone();
        while let Some(next) = cur.successor(k) {
            out.push(next.clone());
            cur = next;
        }
        out
    }

    /// A valuation inside the region.
    pub fn representative(&self, k: u32) -> Vec<Rational> {
        let groups = self.order.len() as i64;
        (0..self.ints.len())
            .map(|c| {
                if self.beyond(c, k) {
                    return Rational::integer(k as i64 + 1);
                }
                let base = Rational::integer(self.ints[c] as i64);
                if self.zero[c] {
                    return base;
                }
                let g = self.order.iter().position(|grp| grp.contains(&c)).expect("fractional clock in order") as i64;
                base + Rational::new(g + 1, groups + 1)
            })
            .collect()
    }

    fn reset(&self, clocks: &[usize]) -> Region {
        let mut r = self.clone();
        for &c in clocks {
            r.ints[c] = 0;
            r.zero[c] = true;
        }
        for g in r.order.iter_mut() {
            g.retain(|c| !clocks.contains(c));
        }
        r.order.retain(|g| !g.is_empty());
        r
    }

    pub fn describe(&self, clocks: &[String], k: u32) -> String {
        let mut parts = Vec::new();
        for (c, name) in clocks.iter().enumerate() {
            let n = self.ints[c];
            parts.push(if self.beyond(c, k) {
                format!("{name}>{k}")
            } else if self.zero[c] {
                format!("{name}={n}")
            } else {
                format!("{n}<{name}<{}", n + 1)
            });
        }
        for g in &self.order {
            if g.len() > 1 {
                let names: Vec<&str> = g.iter().map(|&c| clocks[c].as_str()).collect();
                parts.push(format!("frac({})", names.join("=")));
            }
        }
        if self.order.len() > 1 {
            let names: Vec<String> = self
                .order
                .iter()
                .map(|g| clocks[g[0]].clone())
                .collect();
            parts.push(format!("frac order {}", names.join("<")));
        }
        parts.join(",")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Node {
    state: usize,
    region: Region,
    initial: bool,
}

/// Region graph of a TA: NFA states are (state, region) pairs plus an
/// initial copy of the start configuration that also allows a zero delay.
pub struct RegionGraph {
    pub nfa: Machine,
    /// NFA state to TA state.
    pub projection: Vec<usize>,
    /// Factor applied to guard constants so that they become integers.
    pub scale: Rational,
    pub ceiling: u32,
    /// For each NFA edge, the TA edges that produce it.
    pub origins: Vec<Vec<usize>>,
}

fn integer_guards(t: &Machine) -> Result<(Vec<ClockConstraint>, Rational)> {
    let mut consts = Vec::new();
    for i in 0..t.num_edges() {
        let g = t.guard(i).expect("timed automaton");
        if g.has_diagonal() {
            return Err(Error::Unsupported(format!("edge {i}: diagonal guards have no region construction")));
        }
        consts.extend(g.constants());
    }
    let l = Rational::from_bigs(Rational::lcm_of_denominators(consts.iter()), 1.into())?;
    let guards = (0..t.num_edges()).map(|i| t.guard(i).unwrap().scaled(&l)).collect();
    Ok((guards, l))
}

pub fn region_graph(t: &Machine, budget: usize) -> Result<RegionGraph> {
    let Transitions::Ta(edges) = &t.transitions else {
        return Err(Error::Usage(format!("expected a ta machine, found {}", t.kind())));
    };
    let (guards, scale) = integer_guards(t)?;
    let scaled = Machine::new(
        t.triple.clone(),
        t.clocks.clone(),
        Transitions::Ta(
            edges
                .iter()
                .zip(&guards)
                .map(|(e, g)| crate::automata::TaEdge { guard: g.clone(), ..e.clone() })
                .collect(),
        ),
    );
    let k = clock_ceiling(&scaled)
        .floor_i64()
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| Error::Unsupported("clock ceiling too large".into()))?;

    let start = Node { state: t.start(), region: Region::origin(t.num_clocks()), initial: true };
    let mut index: HashMap<Node, usize> = HashMap::new();
    let mut nodes = vec![start.clone()];
    index.insert(start, 0);
    let mut queue = VecDeque::from([0usize]);
    let mut out: BTreeMap<(usize, usize, usize), BTreeSet<usize>> = BTreeMap::new();

    while let Some(i) = queue.pop_front() {
        let node = nodes[i].clone();
        let mut delays = node.region.positive_delays(k);
        if node.initial && node.region.is_point(k) {
            delays.insert(0, node.region.clone());
        }
        for z in &delays {
            let v = z.representative(k);
            for e in t.out_edges(node.state) {
                if !guards[e].eval(&v)? {
                    continue;
                }
                let target = Node { state: edges[e].to, region: z.reset(&edges[e].resets), initial: false };
                let j = match index.get(&target) {
                    Some(&j) => j,
                    None => {
                        if nodes.len() >= budget {
                            return Err(Error::Budget { what: "region graph states".into(), limit: budget as u64 });
                        }
                        nodes.push(target.clone());
                        index.insert(target, nodes.len() - 1);
                        queue.push_back(nodes.len() - 1);
                        nodes.len() - 1
                    }
                };
                out.entry((i, edges[e].action, j)).or_default().insert(e);
            }
        }
    }

    let names: Vec<String> = nodes
        .iter()
        .map(|n| {
            let mark = if n.initial { "*" } else { "" };
            format!("{}[{}]{mark}", t.state_name(n.state), n.region.describe(&t.clocks, k))
        })
        .collect();
    let triple = StateActionTriple::new(names, 0, t.triple.actions.clone())?;
    let mut nfa_edges = Vec::with_capacity(out.len());
    let mut origins = Vec::with_capacity(out.len());
    for ((from, action, to), es) in out {
        nfa_edges.push(NfaEdge { from, action, to });
        origins.push(es.into_iter().collect());
    }
    Ok(RegionGraph {
        nfa: Machine::new(triple, vec![], Transitions::Nfa(nfa_edges)),
        projection: nodes.iter().map(|n| n.state).collect(),
        scale,
        ceiling: k,
        origins,
    })
}

/// Region NFA with weights `w / m`, where `m` counts the distinct target
/// regions that the same TA step `(s, action, s')` reaches from a region.
pub fn region_automaton(t: &Machine, w: &WeightAssignment, budget: usize) -> Result<Translation> {
    let g = region_graph(t, budget)?;
    let ends = g.nfa.all_ends();
    let mut mult: HashMap<(usize, usize, usize), i64> = HashMap::new();
    for e in &ends {
        *mult.entry((e.from, e.action, g.projection[e.to])).or_default() += 1;
    }
    let weights: Vec<Rational> = ends
        .iter()
        .zip(&g.origins)
        .map(|(e, orig)| w.weight(orig[0]) / &Rational::integer(mult[&(e.from, e.action, g.projection[e.to])]))
        .collect();
    let wa = WeightAssignment::new(&g.nfa, weights, w.bound()).map_err(|err| {
        Error::Unsupported(format!("region weights break the weighting rules: {err}"))
    })?;
    let witness = Witness {
        state_map: g.projection.clone(),
        action_map: (0..t.triple.actions.len()).collect(),
        time_scale: g.scale.clone(),
    };
    Ok(Translation { machine: g.nfa, weights: Some(wa), witness })
}

/// TA states reachable in the region graph.
pub fn region_reachable(t: &Machine, budget: usize) -> Result<BTreeSet<usize>> {
    let g = region_graph(t, budget)?;
    Ok(g.projection.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{assign_weights, validate_machine};
    use crate::exactmath::q;
    use crate::fixtures;

    #[test]
    fn one_clock_region_count() {
        // ceiling 5: points 0..5, open intervals (0,1)..(4,5), and beyond
        let k = 5;
        let mut all = BTreeSet::new();
        let mut cur = Region::origin(1);
        all.insert(cur.clone());
        while let Some(n) = cur.successor(k) {
            all.insert(n.clone());
            cur = n;
        }
        assert_eq!(all.len(), 2 * k as usize + 2);
    }

    #[test]
    fn two_clock_successors_follow_fraction_order() {
        let k = 2;
        let r = Region::origin(2).successor(k).unwrap(); // 0<x=y<1
        let r = r.reset(&[0]); // x=0, 0<y<1
        let r = r.successor(k).unwrap(); // 0<x<y<1
        assert_eq!(r.order, vec![vec![0], vec![1]]);
        let r = r.successor(k).unwrap(); // y=1, 0<x<1
        assert_eq!(r.ints, vec![0, 1]);
        assert!(r.zero[1] && !r.zero[0]);
        let v = r.representative(k);
        assert!(v[0] > q(0, 1) && v[0] < q(1, 1) && v[1] == q(1, 1));
    }

    #[test]
    fn punctual_region_automaton() {
        let t = fixtures::load("punctual_ta");
        let w = assign_weights(&t, &q(1, 5)).unwrap();
        let r = region_automaton(&t, &w, DEFAULT_REGION_BUDGET).unwrap();
        assert!(validate_machine(&r.machine).valid);
        let wa = r.weights.unwrap();
        // every state's outgoing mass is the TA's mass of the enabled steps
        let ends = r.machine.all_ends();
        for s in 0..r.machine.num_states() {
            let tot: Rational = ends
                .iter()
                .enumerate()
                .filter(|(_, e)| e.from == s)
                .map(|(i, _)| wa.weight(i).clone())
                .fold(Rational::zero(), |a, b| a + b);
            assert!(tot <= q(4, 5));
        }
        assert_eq!(region_reachable(&t, 1000).unwrap(), BTreeSet::from([0, 1]));
        // one clock, ceiling 5: at most 12 regions per state plus the start copy
        assert!(r.machine.num_states() <= 2 * 12 + 1);
    }

    #[test]
    fn rational_constants_rescale() {
        let mut t = fixtures::load("punctual_ta");
        if let Transitions::Ta(es) = &mut t.transitions {
            for e in es.iter_mut() {
                e.guard = e.guard.scaled(&q(1, 3));
            }
        }
        let g = region_graph(&t, 1000).unwrap();
        assert_eq!(g.scale, q(3, 1));
        assert_eq!(g.ceiling, 5);
    }
}
