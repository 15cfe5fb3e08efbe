//! Seeded random machines shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use quantauto::automata::{
    validate_machine, ClockConstraint, Machine, NfaEdge, PaEdge, StateActionTriple, TaEdge, TapdEdge, Transitions,
};
use quantauto::exactmath::{q, DomainBox, FuncExpr, Rational};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn triple(n: usize, nact: usize) -> StateActionTriple {
    StateActionTriple::new(
        (1..=n).map(|i| format!("s{i}")).collect(),
        0,
        (1..=nact).map(|i| format!("g{i}")).collect(),
    )
    .unwrap()
}

fn checked(m: Machine) -> Machine {
    let r = validate_machine(&m);
    assert!(r.valid, "generator produced an invalid machine: {:?}", r.violations);
    m
}

/// Distinct `(from, action, to)` triples: every state gets 1..=3 edges.
/// With `fresh_actions` each edge carries its own action.
fn shape(r: &mut ChaCha8Rng, n: usize, nact: usize, fresh_actions: bool) -> (Vec<(usize, usize, usize)>, usize) {
    let mut out = Vec::new();
    for s in 0..n {
        let k = r.gen_range(1..=3usize);
        let mut seen = BTreeSet::new();
        for _ in 0..k {
            let a = r.gen_range(0..nact);
            let t = r.gen_range(0..n);
            if seen.insert((a, t)) {
                out.push((s, a, t));
            }
        }
    }
    if fresh_actions {
        let m = out.len();
        for (i, e) in out.iter_mut().enumerate() {
            e.1 = i;
        }
        return (out, m);
    }
    (out, nact)
}

pub fn random_nfa(r: &mut ChaCha8Rng) -> Machine {
    let n = r.gen_range(1..=4);
    let nact = r.gen_range(1..=3);
    let (es, nact) = shape(r, n, nact, false);
    let edges = es.into_iter().map(|(from, action, to)| NfaEdge { from, action, to }).collect();
    checked(Machine::new(triple(n, nact), vec![], Transitions::Nfa(edges)))
}

fn random_guard(r: &mut ChaCha8Rng, nclk: usize, max_const: i64) -> ClockConstraint {
    let mut g = ClockConstraint::True;
    for _ in 0..r.gen_range(0..=2) {
        let c = r.gen_range(0..nclk);
        let strict = r.gen_bool(0.5);
        let atom = if r.gen_bool(0.5) {
            ClockConstraint::upper(c, q(r.gen_range(1..=max_const), 1), strict)
        } else {
            ClockConstraint::lower(c, q(r.gen_range(0..max_const), 1), strict)
        };
        g = if g.is_true() { atom } else { g.and(atom) };
    }
    g
}

fn random_resets(r: &mut ChaCha8Rng, nclk: usize) -> Vec<usize> {
    (0..nclk).filter(|_| r.gen_bool(0.3)).collect()
}

/// Integer-constant TA with 1..=2 clocks and interval guards.
pub fn random_ta(r: &mut ChaCha8Rng, max_const: i64, fresh_actions: bool) -> Machine {
    let n = r.gen_range(1..=4);
    let nact = r.gen_range(1..=3);
    let nclk = r.gen_range(1..=2);
    let (es, nact) = shape(r, n, nact, fresh_actions);
    let edges = es
        .into_iter()
        .map(|(from, action, to)| TaEdge {
            from,
            action,
            to,
            guard: random_guard(r, nclk, max_const),
            resets: random_resets(r, nclk),
        })
        .collect();
    let clocks = (1..=nclk).map(|i| format!("c{i}")).collect();
    checked(Machine::new(triple(n, nact), clocks, Transitions::Ta(edges)))
}

/// `k` positive parts of `total`.
fn composition(r: &mut ChaCha8Rng, total: i64, k: usize) -> Vec<i64> {
    let mut cuts: Vec<i64> = (1..total).collect();
    cuts.shuffle(r);
    let mut cuts: Vec<i64> = cuts.into_iter().take(k - 1).collect();
    cuts.sort();
    let mut parts = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts.into_iter().chain([total]) {
        parts.push(c - prev);
        prev = c;
    }
    parts
}

/// PA whose probabilities share one denominator `d <= max_den`.
pub fn random_pa(r: &mut ChaCha8Rng, max_den: i64) -> Machine {
    let n = r.gen_range(1..=4);
    let nact = r.gen_range(1..=3);
    let (es, nact) = shape(r, n, nact, false);
    let d = r.gen_range(3..=max_den);
    let mut edges = Vec::new();
    for s in 0..n {
        let mine: Vec<_> = es.iter().filter(|e| e.0 == s).collect();
        let parts = composition(r, d, mine.len());
        for (&&(from, action, to), p) in mine.iter().zip(parts) {
            edges.push(PaEdge { from, action, to, prob: q(p, d) });
        }
    }
    checked(Machine::new(triple(n, nact), vec![], Transitions::Pa(edges)))
}

fn quarter_box(r: &mut ChaCha8Rng, nclk: usize) -> DomainBox {
    DomainBox::new(
        (0..nclk)
            .map(|_| {
                let lo = r.gen_range(0..=2);
                let hi = r.gen_range(lo + 1..=4);
                (q(lo, 4), q(hi, 4))
            })
            .collect(),
    )
    .unwrap()
}

fn linear(c: Rational, slopes: &[Rational]) -> FuncExpr {
    let mut terms = vec![FuncExpr::Const(c)];
    for (i, s) in slopes.iter().enumerate() {
        if !s.is_zero() {
            terms.push(FuncExpr::mul(FuncExpr::Const(s.clone()), FuncExpr::var(i)));
        }
    }
    FuncExpr::Add(terms)
}

/// TAPD whose sibling densities are linear, nonnegative on the unit cube
/// and sum to 1.
pub fn random_tapd(r: &mut ChaCha8Rng) -> Machine {
    let n = r.gen_range(1..=4);
    let nact = r.gen_range(1..=3);
    let nclk = r.gen_range(1..=2);
    let (es, nact) = shape(r, n, nact, false);
    let mut edges = Vec::new();
    for s in 0..n {
        let mine: Vec<_> = es.iter().filter(|e| e.0 == s).collect();
        let k = mine.len();
        // eighths: the first k-1 densities use at most 8 in total
        let mut budget = 8i64;
        let mut funcs = Vec::with_capacity(k);
        let mut sum_c = Rational::zero();
        let mut sum_s = vec![Rational::zero(); nclk];
        for _ in 0..k.saturating_sub(1) {
            let share = budget / 2;
            let c = r.gen_range(1..=share.max(1)).min(budget);
            budget -= c;
            let mut slopes = vec![Rational::zero(); nclk];
            for sl in slopes.iter_mut() {
                if budget > 0 && r.gen_bool(0.5) {
                    let b = r.gen_range(1..=budget);
                    budget -= b;
                    *sl = q(b, 8);
                }
            }
            sum_c += &q(c, 8);
            for (a, b) in sum_s.iter_mut().zip(&slopes) {
                *a += b;
            }
            funcs.push(linear(q(c, 8), &slopes));
        }
        let neg: Vec<Rational> = sum_s.iter().map(|x| -x.clone()).collect();
        funcs.push(linear(Rational::one() - &sum_c, &neg));
        for (&&(from, action, to), func) in mine.iter().zip(funcs) {
            edges.push(TapdEdge {
                from,
                action,
                to,
                domain: quarter_box(r, nclk),
                func,
                degree: r.gen_range(1..=2),
                resets: random_resets(r, nclk),
            });
        }
    }
    let clocks = (1..=nclk).map(|i| format!("x{i}")).collect();
    checked(Machine::new(triple(n, nact), clocks, Transitions::Tapd(edges)))
}
