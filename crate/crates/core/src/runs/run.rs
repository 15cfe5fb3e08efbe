use serde_json::{json, Value};

use crate::automata::{Machine, ModelKind, Transitions};
use crate::error::{Error, Result};
use crate::exactmath::{MultiPoly, Rational};

/// `result(c) = 0` for reset clocks, `iota(c) + dt` otherwise.
pub fn advance_clocks(iota: &[Rational], dt: &Rational, resets: &[usize]) -> Vec<Rational> {
    iota.iter()
        .enumerate()
        .map(|(c, v)| if resets.contains(&c) { Rational::zero() } else { v + dt })
        .collect()
}

/// Finite strictly increasing sequence of nonnegative time stamps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeGrid(Vec<Rational>);

impl TimeGrid {
    pub fn new(points: Vec<Rational>) -> Result<Self> {
        if points.first().is_some_and(|p| p.is_negative()) {
            return Err(Error::Validation("time stamps must be nonnegative".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("time stamps must be strictly increasing".into()));
        }
        Ok(TimeGrid(points))
    }

    pub fn empty() -> Self {
        TimeGrid(Vec::new())
    }

    pub fn points(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every stamp multiplied by `k > 0`.
    pub fn scaled(&self, k: &Rational) -> TimeGrid {
        TimeGrid(self.0.iter().map(|t| t * k).collect())
    }

    /// Parses "1/2,1,3/2".
    pub fn parse(s: &str) -> Result<Self> {
        let pts = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Rational>>>()?;
        TimeGrid::new(pts)
    }
}

/// Finite run: `states[0]` is the start configuration and step `i` takes edge
/// `edges[i]` with label `actions[i]` at time `times[i]` (timed models only).
/// Clock valuations are determined by the times and the edges' resets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Run {
    pub model: ModelKind,
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    pub times: Vec<Rational>,
    pub edges: Vec<usize>,
}

/// Clock valuations along a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClockTrace {
    /// `configs[i]` is the valuation stored in configuration `i`.
    pub configs: Vec<Vec<Rational>>,
    /// `before[i]` is the valuation at the instant of step `i`, before resets.
    pub before: Vec<Vec<Rational>>,
}

impl Run {
    pub fn empty(m: &Machine) -> Run {
        Run { model: m.kind(), states: vec![m.start()], actions: vec![], times: vec![], edges: vec![] }
    }

    /// Run taking `edges` from the start state at `times` (ignored for
    /// untimed models); fails unless the result is a valid run.
    pub fn along(m: &Machine, edges: &[usize], times: &[Rational]) -> Result<Run> {
        let mut r = Run::empty(m);
        for (i, &e) in edges.iter().enumerate() {
            if e >= m.num_edges() {
                return Err(Error::Structural(format!("edge {e} out of range")));
            }
            let en = m.ends(e);
            r.edges.push(e);
            r.actions.push(en.action);
            r.states.push(en.to);
            if m.kind().is_timed() {
                let t = times.get(i).ok_or_else(|| Error::Usage(format!("no time for step {}", i + 1)))?;
                r.times.push(t.clone());
            }
        }
        let bad = run_violations(m, &r);
        if let Some(v) = bad.first() {
            return Err(Error::Validation(v.clone()));
        }
        Ok(r)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_timed(&self) -> bool {
        self.model.is_timed()
    }

    pub fn last_state(&self) -> usize {
        *self.states.last().expect("runs have a start configuration")
    }

    /// `psi⌊k`: the first `k` steps.
    pub fn truncate(&self, k: usize) -> Run {
        let k = k.min(self.len());
        Run {
            model: self.model,
            states: self.states[..=k].to_vec(),
            actions: self.actions[..k].to_vec(),
            times: if self.is_timed() { self.times[..k].to_vec() } else { vec![] },
            edges: self.edges[..k].to_vec(),
        }
    }

    /// Reset set taken at every step.
    pub fn resets<'a>(&self, m: &'a Machine) -> Vec<&'a [usize]> {
        self.edges.iter().map(|&e| m.resets(e)).collect()
    }

    pub fn clock_trace(&self, m: &Machine) -> ClockTrace {
        let mut iota = vec![Rational::zero(); m.num_clocks()];
        let mut configs = vec![iota.clone()];
        let mut before = Vec::with_capacity(self.len());
        let mut last = Rational::zero();
        for (i, &e) in self.edges.iter().enumerate() {
            let t = self.times.get(i).cloned().unwrap_or_else(Rational::zero);
            let dt = &t - &last;
            let nu = advance_clocks(&iota, &dt, &[]);
            iota = advance_clocks(&iota, &dt, m.resets(e));
            before.push(nu);
            configs.push(iota.clone());
            last = t;
        }
        ClockTrace { configs, before }
    }

    /// Content used for run identity: configurations, labels and times. Two
    /// runs that differ only in which of several identical edges they name
    /// are the same run.
    pub fn content_key<'a>(&'a self, m: &'a Machine) -> (&'a [usize], &'a [usize], &'a [Rational], Vec<&'a [usize]>) {
        (&self.states, &self.actions, &self.times, self.resets(m))
    }

    pub fn to_json(&self, m: &Machine) -> Value {
        let timed = self.is_timed();
        let ct = if timed { Some(self.clock_trace(m)) } else { None };
        let config = |i: usize| -> Value {
            let state = m.state_name(self.states[i]);
            match &ct {
                None => json!({ "state": state }),
                Some(ct) => {
                    let resets: Vec<&str> = if i == 0 {
                        vec![]
                    } else {
                        m.resets(self.edges[i - 1]).iter().map(|&c| m.clocks[c].as_str()).collect()
                    };
                    let clocks: Vec<String> = ct.configs[i].iter().map(|v| v.to_string()).collect();
                    json!({ "state": state, "clocks": clocks, "resets": resets })
                }
            }
        };
        let mut steps = vec![json!({ "config": config(0), "action": Value::Null, "time": Value::Null })];
        for i in 0..self.len() {
            let time = if timed { Value::String(self.times[i].to_string()) } else { Value::Null };
            steps.push(json!({
                "config": config(i + 1),
                "action": m.action_name(self.actions[i]),
                "time": time,
                "edge": self.edges[i],
            }));
        }
        json!({ "model": self.model.name(), "steps": steps })
    }

    /// Reads a run written by [`Run::to_json`]. Steps without an `edge` field
    /// are matched against the first edge that fits and satisfies the step
    /// condition.
    pub fn from_json(m: &Machine, v: &Value) -> Result<Run> {
        let model = v
            .get("model")
            .and_then(Value::as_str)
            .map(ModelKind::parse)
            .transpose()?
            .unwrap_or(m.kind());
        if model != m.kind() {
            return Err(Error::Usage(format!("run is for a {model} but the machine is a {}", m.kind())));
        }
        let steps = v
            .get("steps")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("run needs a 'steps' array".into()))?;
        let state_of = |s: &Value| -> Result<usize> {
            let name = s
                .get("config")
                .and_then(|c| c.get("state"))
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse("step without config.state".into()))?;
            m.triple.state_index(name).ok_or_else(|| Error::Parse(format!("unknown state '{name}'")))
        };
        let first = steps.first().ok_or_else(|| Error::Parse("run has no configurations".into()))?;
        let mut run = Run::empty(m);
        run.states[0] = state_of(first)?;
        let checker = StepChecker::new(m)?;
        for s in &steps[1..] {
            let to = state_of(s)?;
            let aname = s
                .get("action")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse("step without action".into()))?;
            let action =
                m.triple.action_index(aname).ok_or_else(|| Error::Parse(format!("unknown action '{aname}'")))?;
            if model.is_timed() {
                let t = match s.get("time") {
                    Some(Value::String(x)) => x.parse()?,
                    Some(Value::Number(n)) if n.is_i64() => Rational::integer(n.as_i64().unwrap()),
                    _ => return Err(Error::Parse("timed step without a time".into())),
                };
                run.times.push(t);
            }
            let from = run.last_state();
            let wanted_resets: Option<Vec<usize>> = s
                .get("config")
                .and_then(|c| c.get("resets"))
                .and_then(Value::as_array)
                .map(|rs| {
                    rs.iter()
                        .filter_map(Value::as_str)
                        .filter_map(|n| m.clocks.iter().position(|c| c == n))
                        .collect()
                });
            let edge = match s.get("edge").and_then(Value::as_u64) {
                Some(e) => e as usize,
                None => {
                    let candidates: Vec<usize> = m
                        .out_edges(from)
                        .into_iter()
                        .filter(|&e| {
                            let en = m.ends(e);
                            en.action == action
                                && en.to == to
                                && wanted_resets.as_ref().map_or(true, |r| {
                                    let mut r = r.clone();
                                    r.sort_unstable();
                                    r == m.resets(e)
                                })
                        })
                        .collect();
                    let mut probe = run.clone();
                    probe.actions.push(action);
                    probe.states.push(to);
                    let pick = candidates.iter().copied().find(|&e| {
                        let mut p = probe.clone();
                        p.edges.push(e);
                        let ct = p.clock_trace(m);
                        let i = p.len() - 1;
                        checker.step_ok(e, &ct.before[i], &ct.configs[i + 1])
                    });
                    pick.or(candidates.first().copied())
                        .ok_or_else(|| Error::Parse(format!("no edge for step into '{}'", m.state_name(to))))?
                }
            };
            if edge >= m.num_edges() {
                return Err(Error::Parse(format!("edge index {edge} out of range")));
            }
            run.edges.push(edge);
            run.actions.push(action);
            run.states.push(to);
        }
        Ok(run)
    }
}

/// Run with its configurations replaced by padding.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace {
    pub model: ModelKind,
    pub actions: Vec<usize>,
    pub times: Vec<Rational>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn to_json(&self, m: &Machine) -> Value {
        let mut steps = vec![json!({ "config": "#", "action": Value::Null, "time": Value::Null })];
        for (i, &a) in self.actions.iter().enumerate() {
            let time = self.times.get(i).map_or(Value::Null, |t| Value::String(t.to_string()));
            steps.push(json!({ "config": "#", "action": m.action_name(a), "time": time }));
        }
        json!({ "model": self.model.name(), "steps": steps })
    }
}

pub fn trace_of(run: &Run) -> Trace {
    Trace { model: run.model, actions: run.actions.clone(), times: run.times.clone() }
}

/// Initial-segment test on configurations, labels and times.
pub fn is_prefix(m: &Machine, a: &Run, b: &Run) -> bool {
    if a.model != b.model || a.len() > b.len() {
        return false;
    }
    let k = a.len();
    a.states[..] == b.states[..=k]
        && a.actions[..] == b.actions[..k]
        && a.times[..] == b.times[..a.times.len()]
        && (0..k).all(|i| m.resets(a.edges[i]) == m.resets(b.edges[i]))
}

/// First ordered pair `(i, j)`, `i != j`, with `runs[i]` a prefix of `runs[j]`.
pub fn prefix_violation(m: &Machine, runs: &[Run]) -> Option<(usize, usize)> {
    for i in 0..runs.len() {
        for j in 0..runs.len() {
            if i != j && is_prefix(m, &runs[i], &runs[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

pub fn prefix_free(m: &Machine, runs: &[Run]) -> bool {
    prefix_violation(m, runs).is_none()
}

/// Per-step edge condition of each model, with TAPD truncations cached.
pub struct StepChecker<'a> {
    m: &'a Machine,
    truncations: Vec<MultiPoly>,
}

impl<'a> StepChecker<'a> {
    pub fn new(m: &'a Machine) -> Result<Self> {
        let truncations = match &m.transitions {
            Transitions::Tapd(edges) => {
                edges.iter().map(|e| e.truncation(m.num_clocks())).collect::<Result<Vec<_>>>()?
            }
            _ => Vec::new(),
        };
        Ok(StepChecker { m, truncations })
    }

    /// `before` is the valuation when the edge fires, `after` the one stored in
    /// the target configuration.
    pub fn step_ok(&self, edge: usize, before: &[Rational], after: &[Rational]) -> bool {
        let m = self.m;
        match &m.transitions {
            Transitions::Nfa(_) => true,
            Transitions::Pa(e) => e[edge].prob.is_positive(),
            Transitions::Ta(e) => e[edge].guard.eval(before).unwrap_or(false),
            Transitions::Pta(e) => e[edge].prob.is_positive() && e[edge].guard.eval(before).unwrap_or(false),
            Transitions::Tapd(e) => {
                e[edge].domain.contains(after)
                    && self.truncations[edge].eval(before).map(|v| !v.is_zero()).unwrap_or(false)
            }
            Transitions::Sta(e) => e[edge].domain.contains(after) && e[edge].func.is_positive_at(before),
        }
    }
}

/// Violations of the run conditions; empty means valid.
pub fn run_violations(m: &Machine, run: &Run) -> Vec<String> {
    let mut v = Vec::new();
    if run.model != m.kind() {
        v.push(format!("run is tagged {} but the machine is a {}", run.model, m.kind()));
        return v;
    }
    if run.states.len() != run.edges.len() + 1 || run.actions.len() != run.edges.len() {
        v.push("configuration count must be label count + 1".into());
        return v;
    }
    if run.states[0] != m.start() {
        v.push("run does not begin at the start state".into());
    }
    if run.is_timed() {
        if run.times.len() != run.len() {
            v.push("timed run needs one time stamp per step".into());
            return v;
        }
        if run.times.first().is_some_and(|t| t.is_negative()) {
            v.push("time stamps must be nonnegative".into());
        }
        if let Some(i) = run.times.windows(2).position(|w| w[0] >= w[1]) {
            v.push(format!("time stamps not strictly increasing at step {}", i + 1));
        }
    } else if !run.times.is_empty() {
        v.push("untimed run carries time stamps".into());
    }
    if run.edges.iter().any(|&e| e >= m.num_edges()) {
        v.push("edge index out of range".into());
        return v;
    }
    let checker = match StepChecker::new(m) {
        Ok(c) => c,
        Err(e) => {
            v.push(e.to_string());
            return v;
        }
    };
    let ct = run.clock_trace(m);
    for (i, &e) in run.edges.iter().enumerate() {
        let en = m.ends(e);
        if en.from != run.states[i] || en.to != run.states[i + 1] || en.action != run.actions[i] {
            v.push(format!("step {}: edge {e} does not connect the configurations", i + 1));
            continue;
        }
        if !checker.step_ok(e, &ct.before[i], &ct.configs[i + 1]) {
            v.push(format!("step {}: edge condition fails", i + 1));
        }
    }
    v
}

pub fn validate_run(m: &Machine, run: &Run) -> bool {
    run_violations(m, run).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::q;
    use crate::fixtures;

    fn ta_run(m: &Machine, edges: &[usize], times: &[Rational]) -> Run {
        let mut r = Run::empty(m);
        for (&e, t) in edges.iter().zip(times) {
            let en = m.ends(e);
            r.edges.push(e);
            r.actions.push(en.action);
            r.states.push(en.to);
            r.times.push(t.clone());
        }
        r
    }

    #[test]
    fn clock_update() {
        assert_eq!(advance_clocks(&[q(1, 1), q(2, 1)], &q(1, 1), &[1]), vec![q(2, 1), q(0, 1)]);
        assert_eq!(advance_clocks(&[q(1, 1), q(2, 1)], &q(0, 1), &[]), vec![q(1, 1), q(2, 1)]);
        assert_eq!(advance_clocks(&[q(0, 1), q(0, 1)], &q(3, 2), &[0, 1]), vec![q(0, 1), q(0, 1)]);
    }

    #[test]
    fn punctual_guarded_loop() {
        let m = fixtures::load("punctual_ta");
        let good = ta_run(&m, &[0, 0, 0, 1], &[q(1, 2), q(1, 1), q(3, 2), q(2, 1)]);
        assert!(validate_run(&m, &good), "{:?}", run_violations(&m, &good));
        let bad = ta_run(&m, &[0, 0, 0, 1], &[q(1, 2), q(1, 1), q(3, 2), q(3, 1)]);
        assert!(!validate_run(&m, &bad));
        let unordered = ta_run(&m, &[0, 0], &[q(1, 1), q(1, 2)]);
        assert!(!validate_run(&m, &unordered));
        // reset on the return edge restarts the clock
        let cycle = ta_run(&m, &[1, 3, 1], &[q(2, 1), q(4, 1), q(6, 1)]);
        assert!(validate_run(&m, &cycle));
    }

    #[test]
    fn traces_forget_configurations() {
        let m = fixtures::load("punctual_ta");
        let r = ta_run(&m, &[0, 1], &[q(1, 1), q(2, 1)]);
        let t = trace_of(&r);
        assert_eq!(t.actions, r.actions);
        assert_eq!(t.times, r.times);
        assert!(trace_of(&Run::empty(&m)).is_empty());
        let j = t.to_json(&m);
        assert_eq!(j["steps"][1]["config"], "#");
    }

    #[test]
    fn prefix_order() {
        let m = fixtures::load("two_state_pa");
        let mut r = Run::empty(&m);
        for e in [0, 0, 1, 2] {
            let en = m.ends(e);
            r.edges.push(e);
            r.actions.push(en.action);
            r.states.push(en.to);
        }
        assert!(is_prefix(&m, &r.truncate(2), &r));
        assert!(!prefix_free(&m, &[r.truncate(2), r.clone()]));
        let mut other = r.truncate(0);
        other.edges.push(1);
        other.actions.push(1);
        other.states.push(1);
        assert!(prefix_free(&m, &[r.truncate(1), other]));
    }

    #[test]
    fn run_json_roundtrip() {
        let m = fixtures::load("punctual_ta");
        let r = ta_run(&m, &[0, 1, 3], &[q(1, 2), q(2, 1), q(4, 1)]);
        let v = r.to_json(&m);
        assert_eq!(Run::from_json(&m, &v).unwrap(), r);
        let mut stripped = v.clone();
        for s in stripped["steps"].as_array_mut().unwrap() {
            s.as_object_mut().unwrap().remove("edge");
        }
        assert_eq!(Run::from_json(&m, &stripped).unwrap(), r);
    }
}
