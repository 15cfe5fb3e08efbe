use std::collections::BTreeMap;

use crate::automata::{Machine, WeightAssignment};
use crate::error::Result;
use crate::exactmath::{MeasureValue, Rational};
use crate::measures::measure_run;
use crate::runs::{enumerate_levels, Run, TimeGrid};

/// Run as seen by the expressiveness checks: state, action and time
/// sequences plus the run measure.
#[derive(Clone, Debug, PartialEq)]
pub struct RunView {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    /// `None` for untimed runs.
    pub times: Option<Vec<Rational>>,
    pub measure: MeasureValue,
}

pub type RunKey = (Vec<usize>, Vec<usize>, Option<Vec<Rational>>);

impl RunView {
    pub fn key(&self) -> RunKey {
        (self.states.clone(), self.actions.clone(), self.times.clone())
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Finite run collection of one machine, sorted and free of duplicate keys.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSet {
    pub state_names: Vec<String>,
    pub action_names: Vec<String>,
    pub start: usize,
    pub runs: Vec<RunView>,
}

impl RunSet {
    pub fn new(state_names: Vec<String>, action_names: Vec<String>, start: usize, runs: Vec<RunView>) -> RunSet {
        let mut by_key: BTreeMap<RunKey, RunView> = BTreeMap::new();
        for r in runs {
            by_key.entry(r.key()).or_insert(r);
        }
        RunSet { state_names, action_names, start, runs: by_key.into_values().collect() }
    }

    pub fn from_runs(m: &Machine, w: Option<&WeightAssignment>, runs: &[Run]) -> Result<RunSet> {
        let views = runs
            .iter()
            .map(|r| {
                Ok(RunView {
                    states: r.states.clone(),
                    actions: r.actions.clone(),
                    times: r.is_timed().then(|| r.times.clone()),
                    measure: measure_run(m, w, r)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RunSet::new(m.triple.states.clone(), m.triple.actions.clone(), m.start(), views))
    }

    /// All runs of length at most `depth` on `grid`.
    pub fn from_machine(
        m: &Machine,
        w: Option<&WeightAssignment>,
        depth: usize,
        grid: &TimeGrid,
        budget: u64,
    ) -> Result<RunSet> {
        let runs: Vec<Run> = enumerate_levels(m, depth, grid, budget)?.into_iter().flatten().collect();
        RunSet::from_runs(m, w, &runs)
    }

    pub fn is_timed(&self) -> bool {
        self.runs.iter().any(|r| r.times.is_some())
    }

    /// Times dropped; runs that then coincide are merged.
    pub fn untimed(&self) -> RunSet {
        let runs = self.runs.iter().map(|r| RunView { times: None, ..r.clone() }).collect();
        RunSet::new(self.state_names.clone(), self.action_names.clone(), self.start, runs)
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Sorted distinct time stamps.
    pub fn time_points(&self) -> Vec<Rational> {
        let mut t: Vec<Rational> = self.runs.iter().filter_map(|r| r.times.as_ref()).flatten().cloned().collect();
        t.sort();
        t.dedup();
        t
    }

    pub fn used_states(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.runs.iter().flat_map(|r| r.states.iter().copied()).collect();
        s.push(self.start);
        s.sort();
        s.dedup();
        s
    }

    pub fn used_actions(&self) -> Vec<usize> {
        let mut a: Vec<usize> = self.runs.iter().flat_map(|r| r.actions.iter().copied()).collect();
        a.sort();
        a.dedup();
        a
    }

    /// Distinct `(from, action, to)` steps.
    pub fn steps(&self) -> std::collections::BTreeSet<(usize, usize, usize)> {
        self.runs
            .iter()
            .flat_map(|r| (0..r.len()).map(move |i| (r.states[i], r.actions[i], r.states[i + 1])))
            .collect()
    }

    pub fn index(&self) -> BTreeMap<RunKey, usize> {
        self.runs.iter().enumerate().map(|(i, r)| (r.key(), i)).collect()
    }

    /// Runs of exactly `k` steps, by index.
    pub fn level(&self, k: usize) -> Vec<usize> {
        (0..self.runs.len()).filter(|&i| self.runs[i].len() == k).collect()
    }
}

/// Both sides untimed as soon as one of them is.
pub fn align_timing(a: &RunSet, b: &RunSet) -> (RunSet, RunSet) {
    if a.is_timed() && b.is_timed() {
        (a.clone(), b.clone())
    } else {
        (a.untimed(), b.untimed())
    }
}
