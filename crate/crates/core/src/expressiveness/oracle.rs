use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet, VecDeque};

use super::runset::{RunSet, RunView};
use crate::automata::{Atom, ClockConstraint, Machine, Transitions, WeightAssignment};
use crate::error::{Error, Result};
use crate::exactmath::{MeasureValue, Rational};

/// Upper bound `x_i - x_j < c` (strict) or `<= c`; `None` is unbounded.
type Bound = Option<(Rational, bool)>;

fn add(a: &Bound, b: &Bound) -> Bound {
    match (a, b) {
        (Some((x, s)), Some((y, t))) => Some((x + y, *s || *t)),
        _ => None,
    }
}

fn tighter(a: &Bound, b: &Bound) -> bool {
    match (a, b) {
        (_, None) => a.is_some(),
        (None, Some(_)) => false,
        (Some((x, s)), Some((y, t))) => match x.cmp(y) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => *s && !*t,
        },
    }
}

/// Difference constraints over the step times `t_0 = 0, t_1, ..., t_n`.
#[derive(Clone)]
struct Zone {
    d: Vec<Vec<Bound>>,
}

impl Zone {
    fn new() -> Zone {
        Zone { d: vec![vec![Some((Rational::zero(), false))]] }
    }

    /// Adds `t_n` with `t_n > t_{n-1}`, or `t_1 >= t_0` for the first step.
    fn push_time(&mut self) {
        let n = self.d.len();
        for row in self.d.iter_mut() {
            row.push(None);
        }
        let mut row = vec![None; n + 1];
        row[n] = Some((Rational::zero(), false));
        self.d.push(row);
        // t_{n-1} - t_n <= 0, strict after the first step
        self.constrain(n - 1, n, Rational::zero(), n > 1);
    }

    fn constrain(&mut self, i: usize, j: usize, c: Rational, strict: bool) {
        let b = Some((c, strict));
        if tighter(&b, &self.d[i][j]) {
            self.d[i][j] = b;
        }
    }

    fn feasible(&self) -> bool {
        let n = self.d.len();
        let mut d = self.d.clone();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = add(&d[i][k], &d[k][j]);
                    if tighter(&via, &d[i][j]) {
                        d[i][j] = via;
                    }
                }
            }
        }
        (0..n).all(|i| !tighter(&d[i][i], &Some((Rational::zero(), false))))
    }
}

/// Disjunctive normal form as lists of atoms.
fn dnf(c: &ClockConstraint, positive: bool) -> Vec<Vec<Atom>> {
    match (c, positive) {
        (ClockConstraint::True, true) => vec![vec![]],
        (ClockConstraint::True, false) => vec![],
        (ClockConstraint::Atom(a), true) => vec![vec![a.clone()]],
        (ClockConstraint::Atom(a), false) => vec![vec![a.negate()]],
        (ClockConstraint::Not(x), p) => dnf(x, !p),
        (ClockConstraint::Or(x, y), true) | (ClockConstraint::And(x, y), false) => {
            let mut v = dnf(x, positive);
            v.extend(dnf(y, positive));
            v
        }
        (ClockConstraint::And(x, y), true) | (ClockConstraint::Or(x, y), false) => {
            let (l, r) = (dnf(x, positive), dnf(y, positive));
            let mut v = Vec::new();
            for a in &l {
                for b in &r {
                    v.push(a.iter().chain(b).cloned().collect());
                }
            }
            v
        }
    }
}

/// Step `i` (time index `i`) constrained by a conjunction of atoms, with
/// `last[c]` the time index of clock `c`'s latest reset.
fn apply(z: &mut Zone, i: usize, last: &[usize], atoms: &[Atom]) {
    for a in atoms {
        match a {
            Atom::Upper { clock, bound, strict } => z.constrain(i, last[*clock], bound.clone(), *strict),
            Atom::Lower { clock, bound, strict } => z.constrain(last[*clock], i, -bound.clone(), *strict),
            Atom::Diagonal { left, left_offset, right, right_offset, strict } => {
                z.constrain(last[*right], last[*left], right_offset - left_offset, *strict)
            }
        }
    }
}

/// Time-abstract runs of a TA up to `depth`: every `(state, action)`
/// sequence that some dense timing realizes, with measure `∏ w(e)`.
pub fn time_abstract_runs(t: &Machine, w: &WeightAssignment, depth: usize, budget: u64) -> Result<RunSet> {
    let Transitions::Ta(edges) = &t.transitions else {
        return Err(Error::Usage(format!("expected a ta machine, found {}", t.kind())));
    };
    let guards: Vec<Vec<Vec<Atom>>> = edges.iter().map(|e| dnf(&e.guard, true)).collect();
    let mut out = Vec::new();
    let mut visited = 0u64;
    let mut seen: BTreeSet<(Vec<usize>, Vec<usize>)> = BTreeSet::new();
    struct Frame {
        states: Vec<usize>,
        actions: Vec<usize>,
        weight: Rational,
        zone: Zone,
        last: Vec<usize>,
    }
    let mut stack = vec![Frame {
        states: vec![t.start()],
        actions: vec![],
        weight: Rational::one(),
        zone: Zone::new(),
        last: vec![0; t.num_clocks()],
    }];
    while let Some(f) = stack.pop() {
        visited += 1;
        if visited > budget {
            return Err(Error::Budget { what: "time-abstract runs".into(), limit: budget });
        }
        if seen.insert((f.states.clone(), f.actions.clone())) {
            out.push(RunView {
                states: f.states.clone(),
                actions: f.actions.clone(),
                times: None,
                measure: MeasureValue::Exact(f.weight.clone()),
            });
        }
        if f.actions.len() == depth {
            continue;
        }
        let s = *f.states.last().unwrap();
        let i = f.actions.len() + 1;
        for e in t.out_edges(s) {
            for branch in &guards[e] {
                let mut z = f.zone.clone();
                z.push_time();
                apply(&mut z, i, &f.last, branch);
                if !z.feasible() {
                    continue;
                }
                let mut last = f.last.clone();
                for &c in &edges[e].resets {
                    last[c] = i;
                }
                let mut states = f.states.clone();
                states.push(edges[e].to);
                let mut actions = f.actions.clone();
                actions.push(edges[e].action);
                stack.push(Frame { states, actions, weight: &f.weight * w.weight(e), zone: z, last });
            }
        }
    }
    Ok(RunSet::new(t.triple.states.clone(), t.triple.actions.clone(), t.start(), out))
}

/// States reachable when every delay is a multiple of `step` (the first
/// delay may be zero). Clock values above the largest guard constant are
/// clipped, which keeps the exploration finite.
pub fn grid_reachable(t: &Machine, step: &Rational) -> Result<BTreeSet<usize>> {
    let Transitions::Ta(edges) = &t.transitions else {
        return Err(Error::Usage(format!("expected a ta machine, found {}", t.kind())));
    };
    if !step.is_positive() {
        return Err(Error::Usage("grid step must be positive".into()));
    }
    let maxc = edges
        .iter()
        .flat_map(|e| e.guard.constants())
        .map(|c| c.abs())
        .max()
        .unwrap_or_else(Rational::zero);
    // clip target: the first grid value above every constant
    let units = (&maxc / step).floor_i64().ok_or_else(|| Error::Unsupported("constants too large".into()))? + 1;
    let cap = step * &Rational::integer(units);
    let clip = |v: Rational| if v > cap { cap.clone() } else { v };
    let mut seen: HashSet<(usize, Vec<Rational>, bool)> = HashSet::new();
    let init = (t.start(), vec![Rational::zero(); t.num_clocks()], true);
    let mut queue = VecDeque::from([init.clone()]);
    seen.insert(init);
    let mut states = BTreeSet::from([t.start()]);
    while let Some((s, v, first)) = queue.pop_front() {
        let lo = if first { 0 } else { 1 };
        for k in lo..=units {
            let dt = step * &Rational::integer(k);
            let before: Vec<Rational> = v.iter().map(|x| clip(x + &dt)).collect();
            for e in t.out_edges(s) {
                if !edges[e].guard.eval(&before)? {
                    continue;
                }
                let mut after = before.clone();
                for &c in &edges[e].resets {
                    after[c] = Rational::zero();
                }
                let next = (edges[e].to, after, false);
                if seen.insert(next.clone()) {
                    states.insert(edges[e].to);
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(states)
}
