//! Machine definition files.
//!
//! ```json
//! { "model": "pta", "states": ["s1","s2"], "start": "s1", "actions": ["a"],
//!   "clocks": ["c"],
//!   "edges": [ { "from": "s1", "action": "a", "to": "s2", "prob": "1",
//!                "guard": ["<=", "c", "2"], "resets": ["c"] } ] }
//! ```
//!
//! TAPD edges carry `domain` (list of `[lo, hi]`), `func` (prefix expression),
//! `degree` and `resets`; STA edges carry `domain`, `func` and `resets`.

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::automata::{
    canonical_resets, ClockConstraint, Machine, ModelKind, NfaEdge, PaEdge, PtaEdge, StaEdge, StateActionTriple,
    TaEdge, TapdEdge, Transitions,
};
use crate::error::{Error, Result};
use crate::exactmath::{DomainBox, FuncExpr, Rational};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineFile {
    model: ModelKind,
    states: Vec<String>,
    #[serde(default)]
    start: Option<String>,
    actions: Vec<String>,
    #[serde(default)]
    clocks: Vec<String>,
    #[serde(default)]
    edges: Vec<Map<String, Value>>,
}

pub fn parse_machine(text: &str) -> Result<Machine> {
    let file: MachineFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
    machine_from_file(file)
}

pub fn machine_from_value(v: Value) -> Result<Machine> {
    let file: MachineFile = serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?;
    machine_from_file(file)
}

fn machine_from_file(f: MachineFile) -> Result<Machine> {
    let start = match &f.start {
        None => 0,
        Some(s) => f
            .states
            .iter()
            .position(|x| x == s)
            .ok_or_else(|| Error::Parse(format!("start state '{s}' is not declared")))?,
    };
    let triple = StateActionTriple { states: f.states, start, actions: f.actions };
    let clocks = f.clocks;
    if !f.model.is_timed() && !clocks.is_empty() {
        return Err(Error::Parse(format!("{} machines have no clocks", f.model)));
    }
    let mut p = EdgeParser { triple: &triple, clocks: &clocks };
    let transitions = match f.model {
        ModelKind::Nfa => Transitions::Nfa(p.all(&f.edges, |p, e| {
            let (from, action, to) = p.ends(e)?;
            p.allow(e, &[])?;
            Ok(NfaEdge { from, action, to })
        })?),
        ModelKind::Ta => Transitions::Ta(p.all(&f.edges, |p, e| {
            let (from, action, to) = p.ends(e)?;
            p.allow(e, &["guard", "resets"])?;
            Ok(TaEdge { from, action, to, guard: p.guard(e)?, resets: p.resets(e)? })
        })?),
        ModelKind::Pa => Transitions::Pa(p.all(&f.edges, |p, e| {
            let (from, action, to) = p.ends(e)?;
            p.allow(e, &["prob"])?;
            Ok(PaEdge { from, action, to, prob: p.rational(e, "prob")? })
        })?),
        ModelKind::Pta => Transitions::Pta(p.all(&f.edges, |p, e| {
            let (from, action, to) = p.ends(e)?;
            p.allow(e, &["prob", "guard", "resets"])?;
            Ok(PtaEdge {
                from,
                action,
                to,
                prob: p.rational(e, "prob")?,
                guard: p.guard(e)?,
                resets: p.resets(e)?,
            })
        })?),
        ModelKind::Tapd => Transitions::Tapd(p.all(&f.edges, |p, e| {
            let (from, action, to) = p.ends(e)?;
            p.allow(e, &["domain", "func", "degree", "resets"])?;
            let degree = e
                .get("degree")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("tapd edge needs a natural 'degree'".into()))?;
            Ok(TapdEdge {
                from,
                action,
                to,
                domain: p.domain(e)?,
                func: p.func(e)?,
                degree: u32::try_from(degree).map_err(|_| Error::Parse("degree too large".into()))?,
                resets: p.resets(e)?,
            })
        })?),
        ModelKind::Sta => Transitions::Sta(p.all(&f.edges, |p, e| {
            let (from, action, to) = p.ends(e)?;
            p.allow(e, &["domain", "func", "resets"])?;
            Ok(StaEdge { from, action, to, domain: p.domain(e)?, func: p.func(e)?, resets: p.resets(e)? })
        })?),
    };
    Ok(Machine::new(triple, clocks, transitions))
}

struct EdgeParser<'a> {
    triple: &'a StateActionTriple,
    clocks: &'a [String],
}

type Obj = Map<String, Value>;

impl EdgeParser<'_> {
    fn all<T>(&mut self, edges: &[Obj], mut f: impl FnMut(&Self, &Obj) -> Result<T>) -> Result<Vec<T>> {
        edges
            .iter()
            .enumerate()
            .map(|(i, e)| f(self, e).map_err(|err| prefix_edge(i, err)))
            .collect()
    }

    fn allow(&self, e: &Obj, extra: &[&str]) -> Result<()> {
        for k in e.keys() {
            if !["from", "action", "to"].contains(&k.as_str()) && !extra.contains(&k.as_str()) {
                return Err(Error::Parse(format!("unexpected field '{k}'")));
            }
        }
        Ok(())
    }

    fn name<'v>(&self, e: &'v Obj, key: &str) -> Result<&'v str> {
        e.get(key).and_then(Value::as_str).ok_or_else(|| Error::Parse(format!("missing string field '{key}'")))
    }

    fn ends(&self, e: &Obj) -> Result<(usize, usize, usize)> {
        let state = |k: &str| -> Result<usize> {
            let n = self.name(e, k)?;
            self.triple.state_index(n).ok_or_else(|| Error::Parse(format!("unknown state '{n}'")))
        };
        let a = self.name(e, "action")?;
        let action = self.triple.action_index(a).ok_or_else(|| Error::Parse(format!("unknown action '{a}'")))?;
        Ok((state("from")?, action, state("to")?))
    }

    fn rational(&self, e: &Obj, key: &str) -> Result<Rational> {
        match e.get(key) {
            Some(Value::String(s)) => s.parse(),
            Some(Value::Number(n)) if n.is_i64() => Ok(Rational::integer(n.as_i64().unwrap())),
            Some(other) => Err(Error::Parse(format!("'{key}' must be a \"num/den\" string, found {other}"))),
            None => Err(Error::Parse(format!("missing field '{key}'"))),
        }
    }

    fn guard(&self, e: &Obj) -> Result<ClockConstraint> {
        match e.get("guard") {
            None => Ok(ClockConstraint::True),
            Some(v) => ClockConstraint::from_json(v, self.clocks),
        }
    }

    fn resets(&self, e: &Obj) -> Result<Vec<usize>> {
        let Some(v) = e.get("resets") else { return Ok(Vec::new()) };
        let items = v.as_array().ok_or_else(|| Error::Parse("'resets' must be a list of clock names".into()))?;
        let idx = items
            .iter()
            .map(|c| {
                let n = c.as_str().ok_or_else(|| Error::Parse("clock names are strings".into()))?;
                self.clocks.iter().position(|x| x == n).ok_or_else(|| Error::Parse(format!("unknown clock '{n}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(canonical_resets(idx))
    }

    fn domain(&self, e: &Obj) -> Result<DomainBox> {
        let v = e.get("domain").ok_or_else(|| Error::Parse("missing field 'domain'".into()))?;
        let pairs = v.as_array().ok_or_else(|| Error::Parse("'domain' must be a list of [lo, hi]".into()))?;
        let mut bounds = Vec::with_capacity(pairs.len());
        for p in pairs {
            let ends = p.as_array().filter(|a| a.len() == 2);
            let ends = ends.ok_or_else(|| Error::Parse("domain intervals are [lo, hi] pairs".into()))?;
            let r = |x: &Value| -> Result<Rational> {
                match x {
                    Value::String(s) => s.parse(),
                    Value::Number(n) if n.is_i64() => Ok(Rational::integer(n.as_i64().unwrap())),
                    other => Err(Error::Parse(format!("bad domain bound {other}"))),
                }
            };
            bounds.push((r(&ends[0])?, r(&ends[1])?));
        }
        DomainBox::new(bounds)
    }

    fn func(&self, e: &Obj) -> Result<FuncExpr> {
        FuncExpr::from_json(e.get("func").ok_or_else(|| Error::Parse("missing field 'func'".into()))?)
    }
}

fn prefix_edge(i: usize, err: Error) -> Error {
    match err {
        Error::Parse(s) => Error::Parse(format!("edge {i}: {s}")),
        Error::Validation(s) => Error::Validation(format!("edge {i}: {s}")),
        other => other,
    }
}

pub fn machine_to_value(m: &Machine) -> Value {
    let t = &m.triple;
    let names = |rs: &[usize]| -> Vec<String> { rs.iter().map(|&c| m.clocks[c].clone()).collect() };
    let base = |from: usize, action: usize, to: usize| -> Map<String, Value> {
        let mut o = Map::new();
        o.insert("from".into(), json!(t.states[from]));
        o.insert("action".into(), json!(t.actions[action]));
        o.insert("to".into(), json!(t.states[to]));
        o
    };
    let edges: Vec<Value> = match &m.transitions {
        Transitions::Nfa(es) => es.iter().map(|e| Value::Object(base(e.from, e.action, e.to))).collect(),
        Transitions::Ta(es) => es
            .iter()
            .map(|e| {
                let mut o = base(e.from, e.action, e.to);
                o.insert("guard".into(), e.guard.to_json(&m.clocks));
                o.insert("resets".into(), json!(names(&e.resets)));
                Value::Object(o)
            })
            .collect(),
        Transitions::Pa(es) => es
            .iter()
            .map(|e| {
                let mut o = base(e.from, e.action, e.to);
                o.insert("prob".into(), json!(e.prob.to_string()));
                Value::Object(o)
            })
            .collect(),
        Transitions::Pta(es) => es
            .iter()
            .map(|e| {
                let mut o = base(e.from, e.action, e.to);
                o.insert("prob".into(), json!(e.prob.to_string()));
                o.insert("guard".into(), e.guard.to_json(&m.clocks));
                o.insert("resets".into(), json!(names(&e.resets)));
                Value::Object(o)
            })
            .collect(),
        Transitions::Tapd(es) => es
            .iter()
            .map(|e| {
                let mut o = base(e.from, e.action, e.to);
                o.insert("domain".into(), serde_json::to_value(&e.domain).expect("serializable"));
                o.insert("func".into(), e.func.to_json());
                o.insert("degree".into(), json!(e.degree));
                o.insert("resets".into(), json!(names(&e.resets)));
                Value::Object(o)
            })
            .collect(),
        Transitions::Sta(es) => es
            .iter()
            .map(|e| {
                let mut o = base(e.from, e.action, e.to);
                o.insert("domain".into(), serde_json::to_value(&e.domain).expect("serializable"));
                o.insert("func".into(), e.func.to_json());
                o.insert("resets".into(), json!(names(&e.resets)));
                Value::Object(o)
            })
            .collect(),
    };
    let mut o = Map::new();
    o.insert("model".into(), json!(m.kind().name()));
    o.insert("states".into(), json!(t.states));
    o.insert("start".into(), json!(t.states.get(t.start)));
    o.insert("actions".into(), json!(t.actions));
    if m.kind().is_timed() {
        o.insert("clocks".into(), json!(m.clocks));
    }
    o.insert("edges".into(), Value::Array(edges));
    Value::Object(o)
}

pub fn serialize_machine(m: &Machine) -> String {
    let mut s = serde_json::to_string_pretty(&machine_to_value(m)).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_machine("{\n  \"model\": \"nfa\",\n  oops }").unwrap_err();
        assert!(matches!(&err, Error::Parse(s) if s.contains("line 3")), "{err}");
    }

    #[test]
    fn zero_denominator_rejected() {
        let text = r#"{"model":"pa","states":["s"],"actions":["a"],
            "edges":[{"from":"s","action":"a","to":"s","prob":"1/0"}]}"#;
        assert!(matches!(parse_machine(text), Err(Error::Parse(_))));
    }

    #[test]
    fn pta_roundtrip() {
        let text = r#"{"model":"pta","states":["s1","s2"],"start":"s1","actions":["a"],"clocks":["c"],
            "edges":[{"from":"s1","action":"a","to":"s2","prob":"1","guard":["<=","c","2"],"resets":["c"]}]}"#;
        let m = parse_machine(text).unwrap();
        assert_eq!(parse_machine(&serialize_machine(&m)).unwrap(), m);
    }
}
