use std::fmt;

use serde::{Deserialize, Serialize};

use super::constraint::ClockConstraint;
use crate::error::{Error, Result};
use crate::exactmath::{DomainBox, FuncExpr, MultiPoly, Rational};

/// States, start state and action alphabet shared by every model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateActionTriple {
    pub states: Vec<String>,
    pub start: usize,
    pub actions: Vec<String>,
}

impl StateActionTriple {
    pub fn new(states: Vec<String>, start: usize, actions: Vec<String>) -> Result<Self> {
        let t = StateActionTriple { states, start, actions };
        let problems = t.problems();
        if let Some(p) = problems.into_iter().next() {
            return Err(Error::Validation(p));
        }
        Ok(t)
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.states.is_empty() {
            out.push("machine has no states".to_string());
        }
        if self.start >= self.states.len() {
            out.push(format!("start state index {} out of range", self.start));
        }
        if self.actions.iter().any(|a| a.is_empty()) {
            out.push("empty action name".to_string());
        }
        for (i, a) in self.actions.iter().enumerate() {
            if self.actions[..i].contains(a) {
                out.push(format!("duplicate action '{a}'"));
            }
        }
        for (i, s) in self.states.iter().enumerate() {
            if self.states[..i].contains(s) {
                out.push(format!("duplicate state '{s}'"));
            }
        }
        out
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|s| s == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Nfa,
    Ta,
    Pa,
    Pta,
    Tapd,
    Sta,
}

impl ModelKind {
    pub fn is_timed(self) -> bool {
        matches!(self, ModelKind::Ta | ModelKind::Pta | ModelKind::Tapd | ModelKind::Sta)
    }

    /// NFA and TA measures need an external weighting.
    pub fn needs_weights(self) -> bool {
        matches!(self, ModelKind::Nfa | ModelKind::Ta)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Nfa => "nfa",
            ModelKind::Ta => "ta",
            ModelKind::Pa => "pa",
            ModelKind::Pta => "pta",
            ModelKind::Tapd => "tapd",
            ModelKind::Sta => "sta",
        }
    }

    pub fn parse(s: &str) -> Result<ModelKind> {
        Ok(match s {
            "nfa" => ModelKind::Nfa,
            "ta" => ModelKind::Ta,
            "pa" => ModelKind::Pa,
            "pta" => ModelKind::Pta,
            "tapd" => ModelKind::Tapd,
            "sta" => ModelKind::Sta,
            other => return Err(Error::Parse(format!("unknown model '{other}'"))),
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NfaEdge {
    pub from: usize,
    pub action: usize,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaEdge {
    pub from: usize,
    pub action: usize,
    pub to: usize,
    pub guard: ClockConstraint,
    /// Sorted, duplicate-free clock indices.
    pub resets: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaEdge {
    pub from: usize,
    pub action: usize,
    pub to: usize,
    pub prob: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PtaEdge {
    pub from: usize,
    pub action: usize,
    pub to: usize,
    pub prob: Rational,
    pub guard: ClockConstraint,
    pub resets: Vec<usize>,
}

/// Polynomial-delay edge: domain box, transition function and Taylor degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TapdEdge {
    pub from: usize,
    pub action: usize,
    pub to: usize,
    pub domain: DomainBox,
    pub func: FuncExpr,
    pub degree: u32,
    pub resets: Vec<usize>,
}

impl TapdEdge {
    /// Taylor truncation of the edge function to the edge degree.
    pub fn truncation(&self, nclocks: usize) -> Result<MultiPoly> {
        self.func.taylor(self.degree, nclocks)
    }
}

/// Stochastic-timed edge: domain box and density.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaEdge {
    pub from: usize,
    pub action: usize,
    pub to: usize,
    pub domain: DomainBox,
    pub func: FuncExpr,
    pub resets: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Transitions {
    Nfa(Vec<NfaEdge>),
    Ta(Vec<TaEdge>),
    Pa(Vec<PaEdge>),
    Pta(Vec<PtaEdge>),
    Tapd(Vec<TapdEdge>),
    Sta(Vec<StaEdge>),
}

/// One of the six machine classes: the shared triple, clocks (empty for the
/// untimed models) and the model-specific transition structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine {
    pub triple: StateActionTriple,
    pub clocks: Vec<String>,
    pub transitions: Transitions,
}

/// Model-independent view of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeEnds {
    pub from: usize,
    pub action: usize,
    pub to: usize,
}

static NO_RESETS: [usize; 0] = [];

impl Machine {
    pub fn new(triple: StateActionTriple, clocks: Vec<String>, transitions: Transitions) -> Self {
        Machine { triple, clocks, transitions }
    }

    pub fn kind(&self) -> ModelKind {
        match &self.transitions {
            Transitions::Nfa(_) => ModelKind::Nfa,
            Transitions::Ta(_) => ModelKind::Ta,
            Transitions::Pa(_) => ModelKind::Pa,
            Transitions::Pta(_) => ModelKind::Pta,
            Transitions::Tapd(_) => ModelKind::Tapd,
            Transitions::Sta(_) => ModelKind::Sta,
        }
    }

    pub fn num_states(&self) -> usize {
        self.triple.states.len()
    }

    pub fn num_clocks(&self) -> usize {
        self.clocks.len()
    }

    pub fn start(&self) -> usize {
        self.triple.start
    }

    pub fn num_edges(&self) -> usize {
        match &self.transitions {
            Transitions::Nfa(e) => e.len(),
            Transitions::Ta(e) => e.len(),
            Transitions::Pa(e) => e.len(),
            Transitions::Pta(e) => e.len(),
            Transitions::Tapd(e) => e.len(),
            Transitions::Sta(e) => e.len(),
        }
    }

    pub fn ends(&self, i: usize) -> EdgeEnds {
        let (from, action, to) = match &self.transitions {
            Transitions::Nfa(e) => (e[i].from, e[i].action, e[i].to),
            Transitions::Ta(e) => (e[i].from, e[i].action, e[i].to),
            Transitions::Pa(e) => (e[i].from, e[i].action, e[i].to),
            Transitions::Pta(e) => (e[i].from, e[i].action, e[i].to),
            Transitions::Tapd(e) => (e[i].from, e[i].action, e[i].to),
            Transitions::Sta(e) => (e[i].from, e[i].action, e[i].to),
        };
        EdgeEnds { from, action, to }
    }

    pub fn all_ends(&self) -> Vec<EdgeEnds> {
        (0..self.num_edges()).map(|i| self.ends(i)).collect()
    }

    /// Indices of edges leaving `s`, in edge order.
    pub fn out_edges(&self, s: usize) -> Vec<usize> {
        (0..self.num_edges()).filter(|&i| self.ends(i).from == s).collect()
    }

    pub fn guard(&self, i: usize) -> Option<&ClockConstraint> {
        match &self.transitions {
            Transitions::Ta(e) => Some(&e[i].guard),
            Transitions::Pta(e) => Some(&e[i].guard),
            _ => None,
        }
    }

    pub fn resets(&self, i: usize) -> &[usize] {
        match &self.transitions {
            Transitions::Ta(e) => &e[i].resets,
            Transitions::Pta(e) => &e[i].resets,
            Transitions::Tapd(e) => &e[i].resets,
            Transitions::Sta(e) => &e[i].resets,
            _ => &NO_RESETS,
        }
    }

    pub fn domain(&self, i: usize) -> Option<&DomainBox> {
        match &self.transitions {
            Transitions::Tapd(e) => Some(&e[i].domain),
            Transitions::Sta(e) => Some(&e[i].domain),
            _ => None,
        }
    }

    pub fn prob(&self, i: usize) -> Option<&Rational> {
        match &self.transitions {
            Transitions::Pa(e) => Some(&e[i].prob),
            Transitions::Pta(e) => Some(&e[i].prob),
            _ => None,
        }
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.triple.states[s]
    }

    pub fn action_name(&self, a: usize) -> &str {
        &self.triple.actions[a]
    }
}

/// Sorted, duplicate-free copy of a reset list.
pub fn canonical_resets(mut r: Vec<usize>) -> Vec<usize> {
    r.sort_unstable();
    r.dedup();
    r
}
