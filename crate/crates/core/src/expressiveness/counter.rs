use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::{json, Value};

use super::farey::{prefix_target, PathShape, PrefixSearch};
use super::runset::RunSet;
use super::search::{find_iso, Search};
use crate::automata::uniform_weights;
use crate::error::Result;
use crate::exactmath::{certify_not_small_rational, q, quad_numeric, FuncExpr, MeasureValue, Rational, Real};
use crate::fixtures;
use crate::measures::measure_run;
use crate::runs::{enumerate_runs, Run, TimeGrid};

#[derive(Clone, Debug, Serialize)]
pub struct CounterItem {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterReport {
    pub items: Vec<CounterItem>,
}

impl CounterReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn item(&self, name: &str) -> Option<&CounterItem> {
        self.items.iter().find(|i| i.name == name)
    }
}

fn exact(v: &MeasureValue) -> Option<Rational> {
    v.as_exact().cloned()
}

/// PA self-loop against the uniformly weighted two-state NFA.
pub fn pa_vs_nfa() -> Result<CounterItem> {
    let pa = fixtures::load("two_state_pa");
    let nfa = fixtures::two_state_nfa();
    let w = uniform_weights(&nfa)?;
    let loop_pa = Run::along(&pa, &[0], &[])?;
    let loop_nfa = Run::along(&nfa, &[0], &[])?;
    let hp = exact(&measure_run(&pa, None, &loop_pa)?);
    let hn = exact(&measure_run(&nfa, Some(&w), &loop_nfa)?);
    let none = TimeGrid::empty();
    let a = RunSet::from_runs(&pa, None, &enumerate_runs(&pa, 1, &none)?)?;
    let b = RunSet::from_runs(&nfa, Some(&w), &enumerate_runs(&nfa, 1, &none)?)?;
    let iso = find_iso(&a, &b)?;
    let iso_none = matches!(iso, Search::None(_));
    let passed = hp == Some(q(3, 4)) && hn == Some(q(1, 2)) && iso_none;
    Ok(CounterItem {
        name: "pa-vs-nfa".into(),
        passed,
        detail: json!({
            "pa_loop": hp.map(|v| v.to_string()),
            "nfa_loop": hn.map(|v| v.to_string()),
            "iso_at_depth_1": if iso_none { "none" } else { "found" },
            "reason": match iso { Search::None(r) => Some(r), Search::Found(_) => None },
        }),
    })
}

/// Alternating `g1` run of the polynomial-delay fixture at lengths 2 and 4.
pub fn tapd_constants() -> Result<CounterItem> {
    let m = fixtures::load("linear_tapd");
    let t = [q(1, 8), q(1, 4), q(3, 8), q(1, 2)];
    let two = exact(&measure_run(&m, None, &Run::along(&m, &[0, 4], &t)?)?);
    let four = exact(&measure_run(&m, None, &Run::along(&m, &[0, 4, 0, 4], &t)?)?);
    let square = two.as_ref().map(|v| v * v);
    let passed = two == Some(q(1, 12)) && four == Some(q(1, 60)) && square.as_ref() != four.as_ref();
    Ok(CounterItem {
        name: "tapd-vs-pta".into(),
        passed,
        detail: json!({
            "length_2": two.map(|v| v.to_string()),
            "length_4": four.map(|v| v.to_string()),
            "square_of_length_2": square.map(|v| v.to_string()),
            "square_differs": passed,
        }),
    })
}

/// Numeric `∫ exp` over `[0,1]` and a certificate that no small rational
/// lies within the error bound.
pub fn exp_certificate(max_den: u64) -> Result<CounterItem> {
    let f = FuncExpr::exp(FuncExpr::var(0));
    let r = quad_numeric(&f, &crate::exactmath::DomainBox::unit(1), &Rational::new(1, 10).pow(20))?;
    let e1 = Real::one().exp().sub(&Real::one());
    let diff = r.value.sub(&e1).abs();
    let within = diff <= Real::from_rational(&Rational::new(1, 10).pow(12));
    let cert = certify_not_small_rational(&r, max_den);
    let naive = Real::from_rational(&q(171, 100)).sub(&r.value).abs();
    let naive_differs = naive > r.error_bound;
    Ok(CounterItem {
        name: "sta-vs-tapd".into(),
        passed: within && cert.holds && naive_differs,
        detail: json!({
            "estimate": r.value.to_decimal_string(30),
            "error_bound": r.error_bound.to_decimal_string(3),
            "evaluations": r.evaluations,
            "distance_to_e_minus_1": diff.to_decimal_string(3),
            "max_denominator": max_den,
            "nearest_rational": cert.nearest.to_string(),
            "nearest_distance": cert.distance.to_decimal_string(3),
            "certificate_holds": cert.holds,
            "differs_from_171/100": naive_differs,
        }),
    })
}

/// The guarded-loop TA on `τ` and on `τ/2`: the halved grid fits a fourth
/// `g1` before the guard closes, so the time-abstract runs depend on the
/// grid, which no NFA's runs do.
pub fn grid_squeeze() -> Result<CounterItem> {
    let t = fixtures::load("punctual_ta");
    let tau = TimeGrid::new((1..=8).map(|i| q(i, 2)).collect())?;
    let half = tau.scaled(&q(1, 2));
    let words = |g: &TimeGrid| -> Result<BTreeSet<Vec<usize>>> {
        Ok(enumerate_runs(&t, 4, g)?.into_iter().map(|r| r.actions).collect())
    };
    let (wa, wb) = (words(&tau)?, words(&half)?);
    let g1 = t.triple.action_index("g1").expect("fixture action");
    let block = vec![g1; 4];
    let only_half: Vec<String> = wb
        .difference(&wa)
        .map(|w| w.iter().map(|&a| t.action_name(a)).collect::<Vec<_>>().join(" "))
        .collect();
    let passed = !wa.contains(&block) && wb.contains(&block);
    Ok(CounterItem {
        name: "ta-vs-nfa".into(),
        passed,
        detail: json!({
            "grid": tau.points().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "halved_grid": half.points().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "depth": 4,
            "words_on_grid": wa.len(),
            "words_on_halved_grid": wb.len(),
            "only_on_halved_grid": only_half,
        }),
    })
}

/// No edge probabilities with denominator at most 60 reproduce the
/// alternating prefix measures on 2- or 3-state machines.
pub fn prefix_search() -> CounterItem {
    let mut runs = Vec::new();
    let mut passed = true;
    for n in [2usize, 3] {
        for shape in [PathShape::Alternating, PathShape::Embedded] {
            let s = PrefixSearch { states: n, constraints: n * n + 1, max_den: 60, shape };
            let out = s.run();
            passed &= out.solution.is_none();
            runs.push(s.to_json(&out));
        }
        let pair = PrefixSearch { states: n, constraints: 2, max_den: 60, shape: PathShape::Alternating };
        let out = pair.run();
        passed &= out.solution.is_none();
        runs.push(pair.to_json(&out));
    }
    CounterItem {
        name: "pta-prefix-search".into(),
        passed,
        detail: json!({
            "first_targets": [prefix_target(1).to_string(), prefix_target(2).to_string()],
            "instances": runs,
        }),
    }
}

pub fn verify_counterexamples() -> Result<CounterReport> {
    Ok(CounterReport {
        items: vec![pa_vs_nfa()?, tapd_constants()?, exp_certificate(1_000_000)?, grid_squeeze()?, prefix_search()],
    })
}
