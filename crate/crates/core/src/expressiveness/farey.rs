use num_rational::Ratio;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::exactmath::Rational;

pub type Q64 = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathShape {
    /// The path alternates between two distinct states.
    Alternating,
    /// Any path whose states each keep one parity of position.
    Embedded,
}

/// Search for edge probabilities of an `n`-state machine whose length-`2m`
/// prefix of one path has measure `(m!)^2 / (2 (2m+1)!)` for `m = 1..=k`.
#[derive(Clone, Debug)]
pub struct PrefixSearch {
    pub states: usize,
    pub constraints: usize,
    pub max_den: i64,
    pub shape: PathShape,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrefixSolution {
    pub path: Vec<usize>,
    pub probs: Vec<((usize, usize), Q64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrefixOutcome {
    pub solution: Option<PrefixSolution>,
    pub nodes: u64,
}

/// `c_m = (m!)^2 / (2 (2m+1)!)`, exactly.
pub fn prefix_target(m: u32) -> Rational {
    let mut r = Rational::new(1, 2);
    for j in 1..=m as i64 {
        // (j^2) / ((2j)(2j+1))
        r = r * Rational::new(j * j, (2 * j) * (2 * j + 1));
    }
    r
}

/// `c_{m+1} / c_m = (m+1) / (2 (2m+3))`.
fn segment_ratio(m: i64) -> Q64 {
    Ratio::new(m + 1, 2 * (2 * m + 3))
}

fn farey(max_den: i64) -> Vec<Q64> {
    let mut v: Vec<Q64> = (1..=max_den)
        .flat_map(|q| (1..=q).map(move |p| Ratio::new(p, q)))
        .collect();
    v.sort();
    v.dedup();
    v
}

struct Ctx<'a> {
    n: usize,
    max_den: i64,
    shape: PathShape,
    targets: Vec<Q64>,
    grid: &'a [Q64],
    p: Vec<Vec<Option<Q64>>>,
    parity: Vec<Option<usize>>,
    path: Vec<usize>,
    nodes: u64,
}

impl Ctx<'_> {
    fn admissible(&self, v: &Q64) -> bool {
        *v.denom() <= self.max_den && v.is_positive_ok()
    }

    fn row_ok(&self, s: usize) -> bool {
        let tot: Q64 = self.p[s].iter().flatten().fold(Q64::zero(), |a, b| a + b);
        tot <= Q64::one()
    }

    fn try_parity(&mut self, s: usize, par: usize) -> Option<bool> {
        match self.parity[s] {
            Some(x) if x != par => None,
            Some(_) => Some(false),
            None => {
                self.parity[s] = Some(par);
                Some(true)
            }
        }
    }

    fn next_states(&self, at: usize, par: usize) -> Vec<usize> {
        match self.shape {
            PathShape::Alternating => {
                if par == 1 {
                    vec![1]
                } else {
                    vec![0]
                }
            }
            PathShape::Embedded => {
                // symmetry breaking: a fresh state is the lowest unused one
                let fresh = (0..self.n).find(|&s| self.parity[s].is_none() && !self.path.contains(&s));
                (0..self.n)
                    .filter(|&s| s != at && (self.parity[s].is_some() || Some(s) == fresh))
                    .collect()
            }
        }
    }

    fn go(&mut self, seg: usize) -> bool {
        self.nodes += 1;
        if seg == self.targets.len() {
            return true;
        }
        let a = *self.path.last().unwrap();
        let r = self.targets[seg];
        for b in self.next_states(a, 1) {
            let Some(fresh_b) = self.try_parity(b, 1) else { continue };
            self.path.push(b);
            for c in self.next_states(b, 0) {
                let Some(fresh_c) = self.try_parity(c, 0) else { continue };
                self.path.push(c);
                if self.assign(a, b, c, r, seg) {
                    return true;
                }
                self.path.pop();
                if fresh_c {
                    self.parity[c] = None;
                }
            }
            self.path.pop();
            if fresh_b {
                self.parity[b] = None;
            }
        }
        false
    }

    /// Tries every value pair for edges `a->b`, `b->c` with product `r`.
    fn assign(&mut self, a: usize, b: usize, c: usize, r: Q64, seg: usize) -> bool {
        let (x, y) = (self.p[a][b], self.p[b][c]);
        match (x, y) {
            (Some(x), Some(y)) => x * y == r && self.go(seg + 1),
            (Some(x), None) => self.set_and_go(b, c, r / x, seg),
            (None, Some(y)) => self.set_and_go(a, b, r / y, seg),
            (None, None) => {
                for i in 0..self.grid.len() {
                    let u = self.grid[i];
                    let v = r / u;
                    if !self.admissible(&v) {
                        continue;
                    }
                    self.p[a][b] = Some(u);
                    if self.row_ok(a) && self.set_and_go(b, c, v, seg) {
                        return true;
                    }
                    self.p[a][b] = None;
                }
                false
            }
        }
    }

    fn set_and_go(&mut self, s: usize, t: usize, v: Q64, seg: usize) -> bool {
        if !self.admissible(&v) {
            return false;
        }
        self.p[s][t] = Some(v);
        if self.row_ok(s) && self.go(seg + 1) {
            return true;
        }
        self.p[s][t] = None;
        false
    }
}

trait PositiveOk {
    fn is_positive_ok(&self) -> bool;
}

impl PositiveOk for Q64 {
    fn is_positive_ok(&self) -> bool {
        *self > Q64::zero() && *self <= Q64::one()
    }
}

impl PrefixSearch {
    /// Depth-first over paths and edge values on the grid of fractions with
    /// denominator at most `max_den`; outgoing sums are only required to stay
    /// at most 1, so "none" also rules out every completed machine.
    pub fn run(&self) -> PrefixOutcome {
        let mut targets = vec![Ratio::new(1, 12)];
        targets.extend((1..self.constraints as i64).map(segment_ratio));
        let grid = farey(self.max_den);
        let n = self.states;
        if n < 2 {
            return PrefixOutcome { solution: None, nodes: 0 };
        }
        let mut ctx = Ctx {
            n,
            max_den: self.max_den,
            shape: self.shape,
            targets,
            grid: &grid,
            p: vec![vec![None; n]; n],
            parity: vec![None; n],
            path: vec![0],
            nodes: 0,
        };
        ctx.parity[0] = Some(0);
        let found = ctx.go(0);
        let solution = found.then(|| {
            let mut probs = Vec::new();
            for s in 0..n {
                for t in 0..n {
                    if let Some(v) = ctx.p[s][t] {
                        probs.push(((s, t), v));
                    }
                }
            }
            PrefixSolution { path: ctx.path.clone(), probs }
        });
        PrefixOutcome { solution, nodes: ctx.nodes }
    }

    pub fn to_json(&self, out: &PrefixOutcome) -> Value {
        json!({
            "states": self.states,
            "constraints": self.constraints,
            "max_denominator": self.max_den,
            "shape": match self.shape { PathShape::Alternating => "alternating", PathShape::Embedded => "embedded" },
            "targets": (1..=self.constraints as u32).map(|m| prefix_target(m).to_string()).collect::<Vec<_>>(),
            "nodes": out.nodes,
            "solution": out.solution.as_ref().map(|s| json!({
                "path": s.path,
                "probs": s.probs.iter().map(|((a, b), v)| json!([a, b, v.to_string()])).collect::<Vec<_>>(),
            })),
        })
    }
}
