use super::run::{advance_clocks, Run, StepChecker, TimeGrid};
use crate::automata::Machine;
use crate::error::{Error, Result};
use crate::exactmath::Rational;

pub const DEFAULT_RUN_BUDGET: u64 = 1_000_000;

/// All valid runs with exactly `depth` steps. Timed runs take their stamps,
/// in order, from `grid`. Output is sorted by states, actions, times, resets
/// and is free of duplicates.
pub fn enumerate_runs(m: &Machine, depth: usize, grid: &TimeGrid) -> Result<Vec<Run>> {
    enumerate_runs_with_budget(m, depth, grid, DEFAULT_RUN_BUDGET)
}

pub fn enumerate_runs_with_budget(m: &Machine, depth: usize, grid: &TimeGrid, budget: u64) -> Result<Vec<Run>> {
    if m.kind().is_timed() && depth > 0 && grid.is_empty() {
        return Err(Error::Usage("timed models need a non-empty time grid".into()));
    }
    let checker = StepChecker::new(m)?;
    let mut e = Explorer { m, grid: grid.points(), checker, budget, visited: 0, out: Vec::new() };
    let start = Run::empty(m);
    let iota = vec![Rational::zero(); m.num_clocks()];
    e.dfs(start, iota, Rational::zero(), 0, depth)?;
    Ok(canonicalize(m, e.out))
}

/// Runs of every length `0..=depth`, shortest first.
pub fn enumerate_levels(m: &Machine, depth: usize, grid: &TimeGrid, budget: u64) -> Result<Vec<Vec<Run>>> {
    (0..=depth).map(|k| enumerate_runs_with_budget(m, k, grid, budget)).collect()
}

pub(crate) fn canonicalize(m: &Machine, mut runs: Vec<Run>) -> Vec<Run> {
    runs.sort_by(|a, b| {
        a.content_key(m).cmp(&b.content_key(m)).then_with(|| a.edges.cmp(&b.edges))
    });
    runs.dedup_by(|b, a| a.content_key(m) == b.content_key(m));
    runs
}

struct Explorer<'a> {
    m: &'a Machine,
    grid: &'a [Rational],
    checker: StepChecker<'a>,
    budget: u64,
    visited: u64,
    out: Vec<Run>,
}

impl Explorer<'_> {
    fn dfs(&mut self, run: Run, iota: Vec<Rational>, last: Rational, next_t: usize, left: usize) -> Result<()> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::Budget { what: "run enumeration".into(), limit: self.budget });
        }
        if left == 0 {
            self.out.push(run);
            return Ok(());
        }
        let timed = self.m.kind().is_timed();
        let s = run.last_state();
        for e in self.m.out_edges(s) {
            let en = self.m.ends(e);
            let resets = self.m.resets(e);
            if !timed {
                if !self.checker.step_ok(e, &[], &[]) {
                    continue;
                }
                let mut r = run.clone();
                r.edges.push(e);
                r.actions.push(en.action);
                r.states.push(en.to);
                self.dfs(r, Vec::new(), Rational::zero(), 0, left - 1)?;
                continue;
            }
            // leave room for the remaining steps on the grid
            let last_idx = self.grid.len().saturating_sub(left - 1);
            for j in next_t..last_idx {
                let t = &self.grid[j];
                let dt = t - &last;
                let before = advance_clocks(&iota, &dt, &[]);
                let after = advance_clocks(&iota, &dt, resets);
                if !self.checker.step_ok(e, &before, &after) {
                    continue;
                }
                let mut r = run.clone();
                r.edges.push(e);
                r.actions.push(en.action);
                r.states.push(en.to);
                r.times.push(t.clone());
                self.dfs(r, after, t.clone(), j + 1, left - 1)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::q;
    use crate::fixtures;
    use crate::runs::validate_run;

    #[test]
    fn two_state_depth_one() {
        let m = fixtures::load("two_state_pa");
        let runs = enumerate_runs(&m, 1, &TimeGrid::empty()).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].states, vec![0, 0]);
        assert_eq!(runs[1].states, vec![0, 1]);
    }

    #[test]
    fn depth_zero_is_the_empty_run() {
        for n in fixtures::NAMES {
            let m = fixtures::load(n);
            let runs = enumerate_runs(&m, 0, &TimeGrid::new(vec![q(1, 2)]).unwrap()).unwrap();
            assert_eq!(runs, vec![Run::empty(&m)]);
        }
    }

    #[test]
    fn punctual_two_steps_brute_force() {
        let m = fixtures::load("punctual_ta");
        let grid = TimeGrid::new(vec![q(1, 2), q(1, 1)]).unwrap();
        let got = enumerate_runs(&m, 2, &grid).unwrap();
        // oracle: every edge pair at times (1/2, 1), checked by hand-rolled clock arithmetic
        let mut want = Vec::new();
        for e1 in 0..m.num_edges() {
            for e2 in 0..m.num_edges() {
                let (a, b) = (m.ends(e1), m.ends(e2));
                if a.from != m.start() || b.from != a.to {
                    continue;
                }
                let c1 = q(1, 2);
                let after1 = if m.resets(e1).is_empty() { c1.clone() } else { q(0, 1) };
                let c2 = &after1 + &q(1, 2);
                if m.guard(e1).unwrap().eval(&[c1]).unwrap() && m.guard(e2).unwrap().eval(&[c2]).unwrap() {
                    want.push((e1, e2));
                }
            }
        }
        let got_pairs: Vec<(usize, usize)> = got.iter().map(|r| (r.edges[0], r.edges[1])).collect();
        assert_eq!(got_pairs, want);
        assert_eq!(want, vec![(0, 0)]);
    }

    #[test]
    fn enumerated_runs_validate_and_are_unique() {
        let grid = TimeGrid::new(vec![q(1, 2), q(1, 1), q(2, 1), q(3, 1), q(4, 1)]).unwrap();
        for n in ["three_state_ta", "three_state_pta", "punctual_ta", "two_state_pa", "three_state_pa"] {
            let m = fixtures::load(n);
            for k in 0..=3 {
                let runs = enumerate_runs(&m, k, &grid).unwrap();
                for r in &runs {
                    assert!(validate_run(&m, r), "{n}: {:?}", r);
                }
                let mut dedup = runs.clone();
                dedup.dedup();
                assert_eq!(dedup.len(), runs.len());
                assert_eq!(runs, enumerate_runs(&m, k, &grid).unwrap());
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let m = fixtures::load("three_state_pa");
        let err = enumerate_runs_with_budget(&m, 8, &TimeGrid::empty(), 100).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }
}
