use super::*;
use crate::automata::{assign_weights, uniform_weights, Machine, StateActionTriple};
use crate::exactmath::{q, Rational};
use crate::fixtures;
use crate::runs::TimeGrid;
use crate::translations::{nfa_to_timed, prob_to_nfa_gcd, region_automaton, DEFAULT_REGION_BUDGET, DEFAULT_SPLIT_BUDGET};

fn renamed(m: &Machine, perm: &[usize]) -> Machine {
    // state i of m becomes state perm[i]
    let mut names = vec![String::new(); m.num_states()];
    for (i, &p) in perm.iter().enumerate() {
        names[p] = format!("{}'", m.state_name(i));
    }
    let triple = StateActionTriple::new(names, perm[m.start()], m.triple.actions.clone()).unwrap();
    let mut t = m.transitions.clone();
    if let crate::automata::Transitions::Pa(es) = &mut t {
        for e in es.iter_mut() {
            e.from = perm[e.from];
            e.to = perm[e.to];
        }
    }
    Machine::new(triple, m.clocks.clone(), t)
}

#[test]
fn identity_and_renaming() {
    let pa = fixtures::load("three_state_pa");
    let g = TimeGrid::empty();
    let a = RunSet::from_machine(&pa, None, 3, &g, 100_000).unwrap();
    let w = find_iso(&a, &a).unwrap().found().unwrap();
    assert!(w.phi.iter().all(|(x, y)| x == y));
    assert!(w.alpha.iter().enumerate().all(|(i, &j)| i == j));

    let perm = [2, 0, 1];
    let pb = renamed(&pa, &perm);
    let b = RunSet::from_machine(&pb, None, 3, &g, 100_000).unwrap();
    let w = find_iso(&a, &b).unwrap().found().unwrap();
    for (x, y) in &w.phi {
        assert_eq!(perm[*x], *y);
    }
    // the inverse maps back, and searching the other way finds it
    let back = find_iso(&b, &a).unwrap().found().unwrap();
    assert_eq!(back.phi, w.inverse().phi);
}

#[test]
fn measure_mismatch_is_no() {
    let pa = fixtures::load("two_state_pa");
    let nfa = fixtures::two_state_nfa();
    let w = uniform_weights(&nfa).unwrap();
    let opts = CheckOptions::new(1, TimeGrid::empty());
    let r = check_machine_iso(&pa, None, &nfa, Some(&w), &opts).unwrap();
    assert_eq!(r.verdict, Verdict::No);
    let r = check_machine_iso(&pa, None, &pa, None, &opts).unwrap();
    assert_eq!(r.verdict, Verdict::Yes);
    assert_eq!(r.to_json()["budgets"]["subset_cap"], 6);
}

#[test]
fn budget_gives_unknown() {
    let pa = fixtures::load("three_state_pa");
    let mut opts = CheckOptions::new(2, TimeGrid::empty());
    opts.search_budget = 1;
    let r = check_machine_iso(&pa, None, &pa, None, &opts).unwrap();
    assert_eq!(r.verdict, Verdict::Unknown);
    opts.search_budget = DEFAULT_SEARCH_BUDGET;
    opts.run_budget = 3;
    assert_eq!(check_machine_iso(&pa, None, &pa, None, &opts).unwrap().verdict, Verdict::Unknown);
}

#[test]
fn timed_lift_is_isomorphic() {
    let nfa = fixtures::two_state_nfa();
    let w = assign_weights(&nfa, &q(1, 10)).unwrap();
    let t = nfa_to_timed(&nfa).unwrap();
    let grid = TimeGrid::parse("1,2,3,4").unwrap();
    for depth in 1..=4 {
        let opts = CheckOptions::new(depth, grid.clone());
        let r = check_machine_iso(&nfa, Some(&w), &t.machine, Some(&w), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Yes, "{:?}", r.counter_evidence);
    }
}

#[test]
fn region_collapse_is_a_homomorphism() {
    let t = fixtures::load("punctual_ta");
    let w = assign_weights(&t, &q(1, 5)).unwrap();
    let r = region_automaton(&t, &w, DEFAULT_REGION_BUDGET).unwrap();
    let a = time_abstract_runs(&t, &w, 2, 100_000).unwrap();
    let b = RunSet::from_machine(&r.machine, r.weights.as_ref(), 2, &TimeGrid::empty(), 100_000).unwrap();
    let theta: Vec<usize> = (0..t.triple.actions.len()).collect();
    let hom = check_hom(&a, &b, &r.witness.state_map, &theta).unwrap();
    assert!(hom.fibers.iter().all(|f| !f.is_empty()));
    let found = find_hom(&a, &b).unwrap().found().expect("search finds a homomorphism");
    assert!(found.fibers.iter().all(|f| !f.is_empty()));
}

#[test]
fn gcd_split_is_a_homomorphism() {
    let pa = fixtures::load("two_state_pa");
    let s = prob_to_nfa_gcd(&pa, DEFAULT_SPLIT_BUDGET).unwrap();
    let g = TimeGrid::empty();
    let a = RunSet::from_machine(&pa, None, 2, &g, 100_000).unwrap();
    let b = RunSet::from_machine(&s.machine, s.weights.as_ref(), 2, &g, 100_000).unwrap();
    let theta: Vec<usize> = (0..pa.triple.actions.len()).collect();
    let hom = check_hom(&a, &b, &s.witness.state_map, &theta).unwrap();
    // the s1 self-loop has 3 copies, each weighted 1/4
    assert!(hom.fibers.iter().any(|f| f.len() == 3));
    assert!(find_hom(&a, &b).unwrap().found().is_some());
    // measures that cannot be matched by any fiber
    let nfa = fixtures::two_state_nfa();
    let u = uniform_weights(&nfa).unwrap();
    let c = RunSet::from_machine(&nfa, Some(&u), 1, &g, 100).unwrap();
    let a1 = RunSet::from_machine(&pa, None, 1, &g, 100).unwrap();
    assert!(matches!(find_hom(&a1, &c).unwrap(), Search::None(_)));
}

#[test]
fn region_dead_ends_lose_fiber_mass() {
    use crate::automata::{ClockConstraint, TaEdge, Transitions};
    // one loop guarded by c <= 1: the branch entering c = 1 cannot loop again
    let triple = StateActionTriple::new(vec!["s".into()], 0, vec!["a".into()]).unwrap();
    let e = TaEdge { from: 0, action: 0, to: 0, guard: ClockConstraint::upper(0, q(1, 1), false), resets: vec![] };
    let t = Machine::new(triple, vec!["c".into()], Transitions::Ta(vec![e]));
    let w = assign_weights(&t, &q(1, 2)).unwrap();
    let r = region_automaton(&t, &w, DEFAULT_REGION_BUDGET).unwrap();
    let a = time_abstract_runs(&t, &w, 2, 1000).unwrap();
    let b = RunSet::from_machine(&r.machine, r.weights.as_ref(), 2, &TimeGrid::empty(), 1000).unwrap();
    let fiber = |len: usize| -> Rational {
        b.runs.iter().filter(|v| v.len() == len).map(|v| v.measure.as_exact().unwrap().clone()).sum()
    };
    assert_eq!(fiber(1), q(1, 2));
    assert_eq!(fiber(2), q(1, 6));
    assert_eq!(a.runs[2].measure.as_exact(), Some(&q(1, 4)));
    assert!(check_hom(&a, &b, &r.witness.state_map, &[0]).is_err());
}
