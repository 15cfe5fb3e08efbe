use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use super::runset::{align_timing, RunKey, RunSet};
use crate::error::{Error, Result};
use crate::exactmath::{MeasureValue, Rational};

pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;

/// Maps of an isomorphism from `Ψ` onto `Ψ′`, plus the run bijection.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoWitness {
    /// `(state of Ψ, state of Ψ′)` over the used states.
    pub phi: Vec<(usize, usize)>,
    /// `(action of Ψ, action of Ψ′)` over the used actions.
    pub theta: Vec<(usize, usize)>,
    /// Order-preserving time map; empty when a side is untimed.
    pub epsilon: Vec<(Rational, Rational)>,
    /// `alpha[i]` is the index in `Ψ′` of the image of run `i` of `Ψ`.
    pub alpha: Vec<usize>,
}

/// Maps of a homomorphism: `phi` sends used states of `Ψ′` onto states of
/// `Ψ`; every run of `Ψ` has a non-empty fiber whose measures sum to its own.
#[derive(Clone, Debug, PartialEq)]
pub struct HomWitness {
    pub phi: Vec<(usize, usize)>,
    pub theta: Vec<(usize, usize)>,
    pub epsilon: Vec<(Rational, Rational)>,
    /// `fibers[i]` lists the runs of `Ψ′` over run `i` of `Ψ`.
    pub fibers: Vec<Vec<usize>>,
}

fn pairs_json(p: &[(usize, usize)], left: &[String], right: &[String]) -> Value {
    Value::Object(p.iter().map(|&(a, b)| (left[a].clone(), json!(right[b]))).collect())
}

fn eps_json(e: &[(Rational, Rational)]) -> Value {
    Value::Object(e.iter().map(|(a, b)| (a.to_string(), json!(b.to_string()))).collect())
}

impl IsoWitness {
    pub fn to_json(&self, a: &RunSet, b: &RunSet) -> Value {
        json!({
            "state_map": pairs_json(&self.phi, &a.state_names, &b.state_names),
            "action_map": pairs_json(&self.theta, &a.action_names, &b.action_names),
            "time_map": eps_json(&self.epsilon),
        })
    }

    /// The same maps read from `Ψ′` back to `Ψ`.
    pub fn inverse(&self) -> IsoWitness {
        let flip = |v: &[(usize, usize)]| {
            let mut o: Vec<(usize, usize)> = v.iter().map(|&(x, y)| (y, x)).collect();
            o.sort();
            o
        };
        let mut alpha = vec![0; self.alpha.len()];
        for (i, &j) in self.alpha.iter().enumerate() {
            alpha[j] = i;
        }
        IsoWitness {
            phi: flip(&self.phi),
            theta: flip(&self.theta),
            epsilon: self.epsilon.iter().map(|(x, y)| (y.clone(), x.clone())).collect(),
            alpha,
        }
    }
}

impl HomWitness {
    pub fn to_json(&self, a: &RunSet, b: &RunSet) -> Value {
        json!({
            "state_map": pairs_json(&self.phi, &b.state_names, &a.state_names),
            "action_map": pairs_json(&self.theta, &a.action_names, &b.action_names),
            "time_map": eps_json(&self.epsilon),
        })
    }
}

fn order_iso(a: &RunSet, b: &RunSet) -> Option<Vec<(Rational, Rational)>> {
    let (ta, tb) = (a.time_points(), b.time_points());
    (ta.len() == tb.len()).then(|| ta.into_iter().zip(tb).collect())
}

fn map_time(eps: &BTreeMap<Rational, Rational>, t: &Option<Vec<Rational>>) -> Option<Vec<Rational>> {
    t.as_ref().map(|v| v.iter().map(|x| eps[x].clone()).collect())
}

struct Budget {
    left: u64,
    limit: u64,
}

impl Budget {
    fn new(limit: u64) -> Budget {
        Budget { left: limit, limit }
    }

    fn tick(&mut self) -> Result<()> {
        if self.left == 0 {
            return Err(Error::Budget { what: "candidate maps".into(), limit: self.limit });
        }
        self.left -= 1;
        Ok(())
    }
}

/// Where a state occurs: `(position, run length, measure)` per occurrence.
fn state_signatures(s: &RunSet, with_measure: bool) -> BTreeMap<usize, Vec<(usize, usize, Rational)>> {
    let mut out: BTreeMap<usize, Vec<(usize, usize, Rational)>> = BTreeMap::new();
    for r in &s.runs {
        let m = if with_measure { r.measure.sort_key() } else { Rational::zero() };
        for (i, &st) in r.states.iter().enumerate() {
            out.entry(st).or_default().push((i, r.len(), m.clone()));
        }
    }
    for v in out.values_mut() {
        v.sort();
    }
    out
}

fn action_signatures(s: &RunSet, with_measure: bool) -> BTreeMap<usize, Vec<(usize, usize, Rational)>> {
    let mut out: BTreeMap<usize, Vec<(usize, usize, Rational)>> = BTreeMap::new();
    for r in &s.runs {
        let m = if with_measure { r.measure.sort_key() } else { Rational::zero() };
        for (i, &a) in r.actions.iter().enumerate() {
            out.entry(a).or_default().push((i, r.len(), m.clone()));
        }
    }
    for v in out.values_mut() {
        v.sort();
    }
    out
}

fn measure_multiset(s: &RunSet) -> Vec<(usize, Rational)> {
    let mut v: Vec<(usize, Rational)> = s.runs.iter().map(|r| (r.len(), r.measure.sort_key())).collect();
    v.sort();
    v
}

/// Injective assignments of `from` into `to`, restricted by `allowed`,
/// in lexicographic order.
struct Injections<'a> {
    allowed: &'a [Vec<usize>],
}

impl Injections<'_> {
    fn for_each<F>(&self, budget: &mut Budget, mut f: F) -> Result<bool>
    where
        F: FnMut(&[usize], &mut Budget) -> Result<bool>,
    {
        let mut cur = Vec::with_capacity(self.allowed.len());
        let mut used = BTreeSet::new();
        self.go(&mut cur, &mut used, budget, &mut f)
    }

    fn go<F>(&self, cur: &mut Vec<usize>, used: &mut BTreeSet<usize>, budget: &mut Budget, f: &mut F) -> Result<bool>
    where
        F: FnMut(&[usize], &mut Budget) -> Result<bool>,
    {
        if cur.len() == self.allowed.len() {
            return f(cur, budget);
        }
        for &c in &self.allowed[cur.len()] {
            if used.contains(&c) {
                continue;
            }
            budget.tick()?;
            cur.push(c);
            used.insert(c);
            let done = self.go(cur, used, budget, f)?;
            used.remove(&c);
            cur.pop();
            if done {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn candidates<K: Ord + Clone, V: PartialEq>(
    left: &[K],
    right: &[K],
    sl: &BTreeMap<K, V>,
    sr: &BTreeMap<K, V>,
) -> Vec<Vec<usize>> {
    left.iter()
        .map(|a| (0..right.len()).filter(|&j| sl.get(a) == sr.get(&right[j])).collect())
        .collect()
}

/// Outcome of a search; `Err(Error::Budget)` means "unknown".
#[derive(Clone, Debug, PartialEq)]
pub enum Search<W> {
    Found(W),
    /// No witness; the string says why.
    None(String),
}

impl<W> Search<W> {
    pub fn found(self) -> Option<W> {
        match self {
            Search::Found(w) => Some(w),
            Search::None(_) => None,
        }
    }
}

pub fn find_iso(a: &RunSet, b: &RunSet) -> Result<Search<IsoWitness>> {
    find_iso_with_budget(a, b, DEFAULT_SEARCH_BUDGET)
}

/// Exhaustive search over action and state bijections between the used
/// symbols; the lexicographically least witness is returned.
pub fn find_iso_with_budget(a: &RunSet, b: &RunSet, limit: u64) -> Result<Search<IsoWitness>> {
    let (a, b) = align_timing(a, b);
    if a.len() != b.len() {
        return Ok(Search::None(format!("{} runs against {}", a.len(), b.len())));
    }
    let (ma, mb) = (measure_multiset(&a), measure_multiset(&b));
    if ma.len() == mb.len() && !ma.iter().zip(&mb).all(|(x, y)| x.0 == y.0 && x.1 == y.1) {
        let i = (0..ma.len()).find(|&i| ma[i] != mb[i]).unwrap_or(0);
        return Ok(Search::None(format!(
            "run measures differ: length {} measure {} against length {} measure {}",
            ma[i].0, ma[i].1, mb[i].0, mb[i].1
        )));
    }
    let epsilon = if a.is_timed() {
        match order_iso(&a, &b) {
            Some(e) => e,
            None => return Ok(Search::None("time point sets differ in size".into())),
        }
    } else {
        vec![]
    };
    let eps: BTreeMap<Rational, Rational> = epsilon.iter().cloned().collect();
    let (ua, ub) = (a.used_states(), b.used_states());
    let (aa, ab) = (a.used_actions(), b.used_actions());
    if ua.len() != ub.len() || aa.len() != ab.len() {
        return Ok(Search::None("used state or action counts differ".into()));
    }
    let act_allowed = candidates(&aa, &ab, &action_signatures(&a, true), &action_signatures(&b, true));
    let st_allowed = candidates(&ua, &ub, &state_signatures(&a, true), &state_signatures(&b, true));
    let steps_a = a.steps();
    let steps_b = b.steps();
    let index_b = b.index();
    let mut budget = Budget::new(limit);
    let mut result = None;

    let st_pos: BTreeMap<usize, usize> = ua.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let act_pos: BTreeMap<usize, usize> = aa.iter().enumerate().map(|(i, &x)| (x, i)).collect();

    Injections { allowed: &act_allowed }.for_each(&mut budget, |acts, budget| {
        let theta: Vec<usize> = acts.iter().map(|&j| ab[j]).collect();
        // step-consistency pruning on every partial state map
        let consistent = |partial: &[usize]| {
            steps_a.iter().all(|&(s, x, t)| {
                let (ps, pt) = (st_pos[&s], st_pos[&t]);
                if ps >= partial.len() || pt >= partial.len() {
                    return true;
                }
                steps_b.contains(&(ub[partial[ps]], theta[act_pos[&x]], ub[partial[pt]]))
            })
        };
        let inj = Injections { allowed: &st_allowed };
        let mut cur = Vec::new();
        let mut used = BTreeSet::new();
        let found = iso_states(&inj, &mut cur, &mut used, budget, &consistent, &mut |phi| {
            let phi: Vec<usize> = phi.iter().map(|&j| ub[j]).collect();
            if phi[st_pos[&a.start]] != b.start {
                return None;
            }
            let mut alpha = Vec::with_capacity(a.len());
            for r in &a.runs {
                let key: RunKey = (
                    r.states.iter().map(|s| phi[st_pos[s]]).collect(),
                    r.actions.iter().map(|x| theta[act_pos[x]]).collect(),
                    map_time(&eps, &r.times),
                );
                let j = *index_b.get(&key)?;
                if !b.runs[j].measure.agrees(&r.measure) {
                    return None;
                }
                alpha.push(j);
            }
            Some(IsoWitness {
                phi: ua.iter().copied().zip(phi.iter().copied()).collect(),
                theta: aa.iter().copied().zip(theta.iter().copied()).collect(),
                epsilon: epsilon.clone(),
                alpha,
            })
        })?;
        if let Some(w) = found {
            result = Some(w);
            return Ok(true);
        }
        Ok(false)
    })?;
    Ok(match result {
        Some(w) => Search::Found(w),
        None => Search::None("no state and action bijection maps the runs onto each other".into()),
    })
}

fn iso_states<C, L, W>(
    inj: &Injections,
    cur: &mut Vec<usize>,
    used: &mut BTreeSet<usize>,
    budget: &mut Budget,
    consistent: &C,
    leaf: &mut L,
) -> Result<Option<W>>
where
    C: Fn(&[usize]) -> bool,
    L: FnMut(&[usize]) -> Option<W>,
{
    if cur.len() == inj.allowed.len() {
        return Ok(leaf(cur));
    }
    for &c in &inj.allowed[cur.len()] {
        if used.contains(&c) {
            continue;
        }
        budget.tick()?;
        cur.push(c);
        used.insert(c);
        let r = if consistent(cur) { iso_states(inj, cur, used, budget, consistent, leaf)? } else { None };
        used.remove(&c);
        cur.pop();
        if r.is_some() {
            return Ok(r);
        }
    }
    Ok(None)
}

/// Checks fixed homomorphism maps. `phi` is indexed by states of `Ψ′`;
/// `theta` by actions of `Ψ`, with `usize::MAX` for unmapped actions.
pub fn check_hom(a: &RunSet, b: &RunSet, phi: &[usize], theta: &[usize]) -> std::result::Result<HomWitness, String> {
    let (a, b) = align_timing(a, b);
    let epsilon = if a.is_timed() {
        order_iso(&a, &b).ok_or("time point sets differ in size")?
    } else {
        vec![]
    };
    let inv_eps: BTreeMap<Rational, Rational> = epsilon.iter().map(|(x, y)| (y.clone(), x.clone())).collect();
    let mut inv_theta: BTreeMap<usize, usize> = BTreeMap::new();
    for (x, &y) in theta.iter().enumerate() {
        if y == usize::MAX {
            continue;
        }
        if inv_theta.insert(y, x).is_some() {
            return Err("action map is not injective".into());
        }
    }
    let index_a = a.index();
    let mut fibers = vec![Vec::new(); a.len()];
    for (j, r) in b.runs.iter().enumerate() {
        let states: Option<Vec<usize>> = r.states.iter().map(|&s| phi.get(s).copied()).collect();
        let actions: Option<Vec<usize>> = r.actions.iter().map(|x| inv_theta.get(x).copied()).collect();
        let key: RunKey = (
            states.ok_or("state map does not cover the runs")?,
            actions.ok_or("action map does not cover the runs")?,
            map_time(&inv_eps, &r.times),
        );
        match index_a.get(&key) {
            Some(&i) => fibers[i].push(j),
            None => return Err(format!("run {j} of the second set has no image")),
        }
    }
    for (i, f) in fibers.iter().enumerate() {
        if f.is_empty() {
            return Err(format!("run {i} of the first set has an empty fiber"));
        }
        let total = f
            .iter()
            .skip(1)
            .fold(b.runs[f[0]].measure.clone(), |acc, &j| acc.add(&b.runs[j].measure));
        if !total.agrees(&a.runs[i].measure) {
            return Err(format!(
                "run {i} of the first set has measure {} but its fiber sums to {}",
                a.runs[i].measure, total
            ));
        }
    }
    let used_b = b.used_states();
    let used_a = a.used_actions();
    if used_a.iter().any(|&x| theta.get(x).is_none_or(|&y| y == usize::MAX)) {
        return Err("action map does not cover the runs".into());
    }
    Ok(HomWitness {
        phi: used_b.iter().map(|&s| (s, phi[s])).collect(),
        theta: used_a.iter().map(|&x| (x, theta[x])).collect(),
        epsilon,
        fibers,
    })
}

pub fn find_hom(a: &RunSet, b: &RunSet) -> Result<Search<HomWitness>> {
    find_hom_with_budget(a, b, DEFAULT_SEARCH_BUDGET)
}

/// Search over action bijections and arbitrary maps from the used states of
/// `Ψ′` onto those of `Ψ`, assigning states in order of first appearance.
pub fn find_hom_with_budget(a: &RunSet, b: &RunSet, limit: u64) -> Result<Search<HomWitness>> {
    let (a, b) = align_timing(a, b);
    if a.is_timed() && order_iso(&a, &b).is_none() {
        return Ok(Search::None("time point sets differ in size".into()));
    }
    let (aa, ab) = (a.used_actions(), b.used_actions());
    if aa.len() != ab.len() {
        return Ok(Search::None("used action counts differ".into()));
    }
    // fibers repeat runs, so only the occurrence sets must agree
    let dedup = |mut m: BTreeMap<usize, Vec<(usize, usize, Rational)>>| {
        m.values_mut().for_each(|v| v.dedup());
        m
    };
    let act_allowed =
        candidates(&aa, &ab, &dedup(action_signatures(&a, false)), &dedup(action_signatures(&b, false)));
    let ua = a.used_states();
    // states of Ψ′ in order of first appearance
    let mut order: Vec<usize> = Vec::new();
    for r in &b.runs {
        for &s in &r.states {
            if !order.contains(&s) {
                order.push(s);
            }
        }
    }
    if !order.contains(&b.start) {
        order.insert(0, b.start);
    }
    let occ_a = positions(&a);
    let occ_b = positions(&b);
    let steps_a = a.steps();
    let steps_b: Vec<(usize, usize, usize)> = b.steps().into_iter().collect();
    let nb = b.state_names.len();
    let mut budget = Budget::new(limit);
    let mut result = None;
    let mut last_reason = String::from("no action bijection is consistent");

    Injections { allowed: &act_allowed }.for_each(&mut budget, |acts, budget| {
        let mut theta = vec![usize::MAX; a.action_names.len()];
        let mut inv = vec![usize::MAX; b.action_names.len()];
        for (i, &j) in acts.iter().enumerate() {
            theta[aa[i]] = ab[j];
            inv[ab[j]] = aa[i];
        }
        let mut phi = vec![usize::MAX; nb];
        let found = hom_states(
            0,
            &order,
            &mut phi,
            budget,
            &mut |phi: &mut Vec<usize>, k: usize| {
                // candidates for order[k]
                let s = order[k];
                ua.iter()
                    .copied()
                    .filter(|&c| (s != b.start || c == a.start) && occ_b[&s].is_subset(&occ_a[&c]))
                    .filter(|&c| {
                        phi[s] = c;
                        let ok = steps_b.iter().all(|&(x, y, z)| {
                            phi[x] == usize::MAX
                                || phi[z] == usize::MAX
                                || steps_a.contains(&(phi[x], inv[y], phi[z]))
                        });
                        phi[s] = usize::MAX;
                        ok
                    })
                    .collect()
            },
            &mut |phi: &[usize]| {
                let full: Vec<usize> = phi.iter().map(|&p| if p == usize::MAX { 0 } else { p }).collect();
                match check_hom(&a, &b, &full, &theta) {
                    Ok(mut w) => {
                        w.phi.retain(|&(s, _)| phi[s] != usize::MAX);
                        Some(w)
                    }
                    Err(e) => {
                        last_reason = e;
                        None
                    }
                }
            },
        )?;
        if let Some(w) = found {
            result = Some(w);
            return Ok(true);
        }
        Ok(false)
    })?;
    Ok(match result {
        Some(w) => Search::Found(w),
        None => Search::None(format!("no homomorphism; last rejection: {last_reason}")),
    })
}

fn positions(s: &RunSet) -> BTreeMap<usize, BTreeSet<(usize, usize)>> {
    let mut out: BTreeMap<usize, BTreeSet<(usize, usize)>> = BTreeMap::new();
    for r in &s.runs {
        for (i, &st) in r.states.iter().enumerate() {
            out.entry(st).or_default().insert((i, r.len()));
        }
    }
    out.entry(s.start).or_default().insert((0, 0));
    out
}

fn hom_states<C, L, W>(
    k: usize,
    order: &[usize],
    phi: &mut Vec<usize>,
    budget: &mut Budget,
    cands: &mut C,
    leaf: &mut L,
) -> Result<Option<W>>
where
    C: FnMut(&mut Vec<usize>, usize) -> Vec<usize>,
    L: FnMut(&[usize]) -> Option<W>,
{
    if k == order.len() {
        return Ok(leaf(phi));
    }
    for c in cands(phi, k) {
        budget.tick()?;
        phi[order[k]] = c;
        let r = hom_states(k + 1, order, phi, budget, cands, leaf)?;
        phi[order[k]] = usize::MAX;
        if r.is_some() {
            return Ok(r);
        }
    }
    Ok(None)
}

/// `ℒ` of a collection given by run indices.
pub fn collection_measure(s: &RunSet, idx: &[usize]) -> MeasureValue {
    idx.iter()
        .fold(MeasureValue::Exact(Rational::zero()), |acc, &i| acc.add(&s.runs[i].measure))
}
