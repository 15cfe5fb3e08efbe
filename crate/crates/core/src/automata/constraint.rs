use serde_json::Value;

use crate::error::{Error, Result};
use crate::exactmath::Rational;

/// Atomic clock inequality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    /// `clock < bound` (strict) or `clock <= bound`.
    Upper { clock: usize, bound: Rational, strict: bool },
    /// `bound < clock` (strict) or `bound <= clock`.
    Lower { clock: usize, bound: Rational, strict: bool },
    /// `left + left_offset <= right + right_offset` (`<` when strict).
    Diagonal {
        left: usize,
        left_offset: Rational,
        right: usize,
        right_offset: Rational,
        strict: bool,
    },
}

/// Boolean combination of atoms. `True` is the empty constraint.
///
/// The grammar has negation and disjunction; `And` is kept as its own node so
/// that conjunctive guards stay readable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub enum ClockConstraint {
    #[default]
    True,
    Atom(Atom),
    Not(Box<ClockConstraint>),
    Or(Box<ClockConstraint>, Box<ClockConstraint>),
    And(Box<ClockConstraint>, Box<ClockConstraint>),
}

/// Interval of values a single clock may take under a conjunctive constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClockInterval {
    pub lo: Rational,
    pub lo_strict: bool,
    /// `None` means unbounded above.
    pub hi: Option<Rational>,
    pub hi_strict: bool,
}

impl ClockInterval {
    pub fn full() -> Self {
        ClockInterval { lo: Rational::zero(), lo_strict: false, hi: None, hi_strict: false }
    }

    fn meet_lower(&mut self, b: &Rational, strict: bool) {
        if b > &self.lo || (b == &self.lo && strict) {
            self.lo = b.clone();
            self.lo_strict = strict;
        }
    }

    fn meet_upper(&mut self, b: &Rational, strict: bool) {
        match &self.hi {
            Some(h) if b > h || (b == h && !strict) => {}
            _ => {
                self.hi = Some(b.clone());
                self.hi_strict = strict;
            }
        }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        let lo_ok = if self.lo_strict { v > &self.lo } else { v >= &self.lo };
        let hi_ok = match &self.hi {
            None => true,
            Some(h) => {
                if self.hi_strict {
                    v < h
                } else {
                    v <= h
                }
            }
        };
        lo_ok && hi_ok
    }

    pub fn is_empty(&self) -> bool {
        match &self.hi {
            None => false,
            Some(h) => h < &self.lo || (h == &self.lo && (self.lo_strict || self.hi_strict)),
        }
    }
}

impl Atom {
    pub fn eval(&self, v: &[Rational]) -> Result<bool> {
        let get = |i: usize| {
            v.get(i).ok_or_else(|| {
                Error::Structural(format!("clock index {i} out of range for {} clocks", v.len()))
            })
        };
        Ok(match self {
            Atom::Upper { clock, bound, strict } => {
                let x = get(*clock)?;
                if *strict {
                    x < bound
                } else {
                    x <= bound
                }
            }
            Atom::Lower { clock, bound, strict } => {
                let x = get(*clock)?;
                if *strict {
                    bound < x
                } else {
                    bound <= x
                }
            }
            Atom::Diagonal { left, left_offset, right, right_offset, strict } => {
                let l = get(*left)? + left_offset;
                let r = get(*right)? + right_offset;
                if *strict {
                    l < r
                } else {
                    l <= r
                }
            }
        })
    }

    pub fn negate(&self) -> Atom {
        match self {
            Atom::Upper { clock, bound, strict } => {
                Atom::Lower { clock: *clock, bound: bound.clone(), strict: !strict }
            }
            Atom::Lower { clock, bound, strict } => {
                Atom::Upper { clock: *clock, bound: bound.clone(), strict: !strict }
            }
            Atom::Diagonal { left, left_offset, right, right_offset, strict } => Atom::Diagonal {
                left: *right,
                left_offset: right_offset.clone(),
                right: *left,
                right_offset: left_offset.clone(),
                strict: !strict,
            },
        }
    }

    fn clocks(&self) -> Vec<usize> {
        match self {
            Atom::Upper { clock, .. } | Atom::Lower { clock, .. } => vec![*clock],
            Atom::Diagonal { left, right, .. } => vec![*left, *right],
        }
    }

    fn constants(&self) -> Vec<Rational> {
        match self {
            Atom::Upper { bound, .. } | Atom::Lower { bound, .. } => vec![bound.clone()],
            Atom::Diagonal { left_offset, right_offset, .. } => {
                vec![left_offset.clone(), right_offset.clone()]
            }
        }
    }

    fn scaled(&self, k: &Rational) -> Atom {
        match self {
            Atom::Upper { clock, bound, strict } => {
                Atom::Upper { clock: *clock, bound: bound * k, strict: *strict }
            }
            Atom::Lower { clock, bound, strict } => {
                Atom::Lower { clock: *clock, bound: bound * k, strict: *strict }
            }
            Atom::Diagonal { left, left_offset, right, right_offset, strict } => Atom::Diagonal {
                left: *left,
                left_offset: left_offset * k,
                right: *right,
                right_offset: right_offset * k,
                strict: *strict,
            },
        }
    }
}

impl ClockConstraint {
    pub fn atom(a: Atom) -> Self {
        ClockConstraint::Atom(a)
    }

    pub fn upper(clock: usize, bound: Rational, strict: bool) -> Self {
        ClockConstraint::Atom(Atom::Upper { clock, bound, strict })
    }

    pub fn lower(clock: usize, bound: Rational, strict: bool) -> Self {
        ClockConstraint::Atom(Atom::Lower { clock, bound, strict })
    }

    /// `clock == bound` as a conjunction of two closed atoms.
    pub fn equals(clock: usize, bound: Rational) -> Self {
        ClockConstraint::lower(clock, bound.clone(), false).and(ClockConstraint::upper(clock, bound, false))
    }

    pub fn and(self, other: ClockConstraint) -> Self {
        match (self, other) {
            (ClockConstraint::True, o) => o,
            (s, ClockConstraint::True) => s,
            (s, o) => ClockConstraint::And(Box::new(s), Box::new(o)),
        }
    }

    pub fn or(self, other: ClockConstraint) -> Self {
        ClockConstraint::Or(Box::new(self), Box::new(other))
    }

    pub fn negate(self) -> Self {
        ClockConstraint::Not(Box::new(self))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, ClockConstraint::True)
    }

    pub fn eval(&self, v: &[Rational]) -> Result<bool> {
        Ok(match self {
            ClockConstraint::True => true,
            ClockConstraint::Atom(a) => a.eval(v)?,
            ClockConstraint::Not(c) => !c.eval(v)?,
            ClockConstraint::Or(a, b) => {
                // evaluate both so that index errors are never masked
                let x = a.eval(v)?;
                let y = b.eval(v)?;
                x || y
            }
            ClockConstraint::And(a, b) => {
                let x = a.eval(v)?;
                let y = b.eval(v)?;
                x && y
            }
        })
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            ClockConstraint::True => {}
            ClockConstraint::Atom(a) => out.push(a),
            ClockConstraint::Not(c) => c.collect_atoms(out),
            ClockConstraint::Or(a, b) | ClockConstraint::And(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn max_clock(&self) -> Option<usize> {
        self.atoms().iter().flat_map(|a| a.clocks()).max()
    }

    pub fn constants(&self) -> Vec<Rational> {
        self.atoms().iter().flat_map(|a| a.constants()).collect()
    }

    pub fn has_diagonal(&self) -> bool {
        self.atoms().iter().any(|a| matches!(a, Atom::Diagonal { .. }))
    }

    /// Same constraint with every constant multiplied by `k`.
    pub fn scaled(&self, k: &Rational) -> ClockConstraint {
        match self {
            ClockConstraint::True => ClockConstraint::True,
            ClockConstraint::Atom(a) => ClockConstraint::Atom(a.scaled(k)),
            ClockConstraint::Not(c) => ClockConstraint::Not(Box::new(c.scaled(k))),
            ClockConstraint::Or(a, b) => {
                ClockConstraint::Or(Box::new(a.scaled(k)), Box::new(b.scaled(k)))
            }
            ClockConstraint::And(a, b) => {
                ClockConstraint::And(Box::new(a.scaled(k)), Box::new(b.scaled(k)))
            }
        }
    }

    /// Atoms of an equivalent conjunction, pushing negations inward.
    /// Disjunctive shapes are unsupported.
    pub fn conjunctive_atoms(&self) -> Result<Vec<Atom>> {
        let mut out = Vec::new();
        self.push_conj(true, &mut out)?;
        Ok(out)
    }

    fn push_conj(&self, positive: bool, out: &mut Vec<Atom>) -> Result<()> {
        match (self, positive) {
            (ClockConstraint::True, true) => Ok(()),
            (ClockConstraint::True, false) => {
                Err(Error::Unsupported("constraint is unsatisfiable".into()))
            }
            (ClockConstraint::Atom(a), true) => {
                out.push(a.clone());
                Ok(())
            }
            (ClockConstraint::Atom(a), false) => {
                out.push(a.negate());
                Ok(())
            }
            (ClockConstraint::Not(c), p) => c.push_conj(!p, out),
            (ClockConstraint::And(a, b), true) | (ClockConstraint::Or(a, b), false) => {
                a.push_conj(positive, out)?;
                b.push_conj(positive, out)
            }
            (ClockConstraint::Or(..), true) | (ClockConstraint::And(..), false) => Err(
                Error::Unsupported("disjunctive constraint has no single interval per clock".into()),
            ),
        }
    }

    /// Per-clock satisfying intervals; fails on diagonal atoms and disjunctive shapes.
    pub fn intervals(&self, nclocks: usize) -> Result<Vec<ClockInterval>> {
        let mut out = vec![ClockInterval::full(); nclocks];
        for a in self.conjunctive_atoms()? {
            match a {
                Atom::Upper { clock, bound, strict } => {
                    out.get_mut(clock)
                        .ok_or_else(|| Error::Structural(format!("clock index {clock} out of range")))?
                        .meet_upper(&bound, strict)
                }
                Atom::Lower { clock, bound, strict } => {
                    out.get_mut(clock)
                        .ok_or_else(|| Error::Structural(format!("clock index {clock} out of range")))?
                        .meet_lower(&bound, strict)
                }
                Atom::Diagonal { .. } => {
                    return Err(Error::Unsupported(
                        "diagonal atom has no per-clock interval".into(),
                    ))
                }
            }
        }
        Ok(out)
    }

    pub fn from_json(v: &Value, clocks: &[String]) -> Result<ClockConstraint> {
        match v {
            Value::Null | Value::Bool(true) => Ok(ClockConstraint::True),
            Value::Bool(false) => Ok(ClockConstraint::True.negate()),
            Value::Array(items) if items.is_empty() => Ok(ClockConstraint::True),
            Value::Array(items) => {
                let op = items[0]
                    .as_str()
                    .ok_or_else(|| Error::Parse("constraint operator must be a string".into()))?;
                let args = &items[1..];
                match op {
                    "and" | "or" => {
                        if args.is_empty() {
                            return Err(Error::Parse(format!("'{op}' needs arguments")));
                        }
                        let mut parts = args
                            .iter()
                            .map(|a| ClockConstraint::from_json(a, clocks))
                            .collect::<Result<Vec<_>>>()?
                            .into_iter();
                        let first = parts.next().unwrap();
                        Ok(parts.fold(first, |acc, p| {
                            if op == "and" {
                                ClockConstraint::And(Box::new(acc), Box::new(p))
                            } else {
                                ClockConstraint::Or(Box::new(acc), Box::new(p))
                            }
                        }))
                    }
                    "not" => {
                        if args.len() != 1 {
                            return Err(Error::Parse("'not' takes one argument".into()));
                        }
                        Ok(ClockConstraint::from_json(&args[0], clocks)?.negate())
                    }
                    "<" | "<=" | ">" | ">=" | "==" => parse_threshold(op, args, clocks),
                    "diag<" | "diag<=" => {
                        if args.len() != 4 {
                            return Err(Error::Parse(format!(
                                "'{op}' takes clock, offset, clock, offset"
                            )));
                        }
                        Ok(ClockConstraint::Atom(Atom::Diagonal {
                            left: clock_index(&args[0], clocks)?,
                            left_offset: rational_arg(&args[1])?,
                            right: clock_index(&args[2], clocks)?,
                            right_offset: rational_arg(&args[3])?,
                            strict: op == "diag<",
                        }))
                    }
                    other => Err(Error::Parse(format!("unknown constraint operator '{other}'"))),
                }
            }
            other => Err(Error::Parse(format!("unexpected constraint value {other}"))),
        }
    }

    pub fn to_json(&self, clocks: &[String]) -> Value {
        let name = |i: usize| Value::String(clocks.get(i).cloned().unwrap_or_else(|| format!("#{i}")));
        let s = |x: &str| Value::String(x.to_string());
        match self {
            ClockConstraint::True => Value::Bool(true),
            ClockConstraint::Atom(Atom::Upper { clock, bound, strict }) => Value::Array(vec![
                s(if *strict { "<" } else { "<=" }),
                name(*clock),
                Value::String(bound.to_string()),
            ]),
            ClockConstraint::Atom(Atom::Lower { clock, bound, strict }) => Value::Array(vec![
                s(if *strict { ">" } else { ">=" }),
                name(*clock),
                Value::String(bound.to_string()),
            ]),
            ClockConstraint::Atom(Atom::Diagonal { left, left_offset, right, right_offset, strict }) => {
                Value::Array(vec![
                    s(if *strict { "diag<" } else { "diag<=" }),
                    name(*left),
                    Value::String(left_offset.to_string()),
                    name(*right),
                    Value::String(right_offset.to_string()),
                ])
            }
            ClockConstraint::Not(c) => Value::Array(vec![s("not"), c.to_json(clocks)]),
            ClockConstraint::Or(a, b) => {
                Value::Array(vec![s("or"), a.to_json(clocks), b.to_json(clocks)])
            }
            ClockConstraint::And(a, b) => {
                Value::Array(vec![s("and"), a.to_json(clocks), b.to_json(clocks)])
            }
        }
    }
}

fn clock_index(v: &Value, clocks: &[String]) -> Result<usize> {
    let name = v
        .as_str()
        .ok_or_else(|| Error::Parse(format!("expected a clock name, found {v}")))?;
    clocks
        .iter()
        .position(|c| c == name)
        .ok_or_else(|| Error::Parse(format!("unknown clock '{name}'")))
}

fn rational_arg(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => s.parse(),
        Value::Number(n) => n
            .as_i64()
            .map(Rational::integer)
            .ok_or_else(|| Error::Parse(format!("non-integer number {n} in constraint"))),
        other => Err(Error::Parse(format!("expected a rational, found {other}"))),
    }
}

fn is_clock(v: &Value, clocks: &[String]) -> bool {
    v.as_str().is_some_and(|s| clocks.iter().any(|c| c == s))
}

fn parse_threshold(op: &str, args: &[Value], clocks: &[String]) -> Result<ClockConstraint> {
    if args.len() != 2 {
        return Err(Error::Parse(format!("'{op}' takes two arguments")));
    }
    // normalise to "clock op constant"
    let (clock, bound, op) = if is_clock(&args[0], clocks) {
        (clock_index(&args[0], clocks)?, rational_arg(&args[1])?, op.to_string())
    } else if is_clock(&args[1], clocks) {
        let flipped = match op {
            "<" => ">",
            "<=" => ">=",
            ">" => "<",
            ">=" => "<=",
            _ => "==",
        };
        (clock_index(&args[1], clocks)?, rational_arg(&args[0])?, flipped.to_string())
    } else {
        return Err(Error::Parse(format!("'{op}' needs a known clock operand")));
    };
    Ok(match op.as_str() {
        "<" => ClockConstraint::upper(clock, bound, true),
        "<=" => ClockConstraint::upper(clock, bound, false),
        ">" => ClockConstraint::lower(clock, bound, true),
        ">=" => ClockConstraint::lower(clock, bound, false),
        _ => ClockConstraint::equals(clock, bound),
    })
}

pub fn eval_constraint(con: &ClockConstraint, v: &[Rational]) -> Result<bool> {
    con.eval(v)
}
