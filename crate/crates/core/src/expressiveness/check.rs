use serde::Serialize;
use serde_json::{json, Value};

use super::runset::{align_timing, RunSet};
use super::search::{collection_measure, find_hom_with_budget, find_iso_with_budget, Search, DEFAULT_SEARCH_BUDGET};
use crate::automata::{Machine, WeightAssignment};
use crate::error::{Error, Result};
use crate::runs::{TimeGrid, DEFAULT_RUN_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Iso,
    Hom,
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub depth: usize,
    pub grid_a: TimeGrid,
    pub grid_b: TimeGrid,
    pub run_budget: u64,
    pub search_budget: u64,
    /// Level sets up to this size have all their subsets compared.
    pub subset_cap: usize,
}

impl CheckOptions {
    pub fn new(depth: usize, grid: TimeGrid) -> CheckOptions {
        CheckOptions {
            depth,
            grid_a: grid.clone(),
            grid_b: grid,
            run_budget: DEFAULT_RUN_BUDGET,
            search_budget: DEFAULT_SEARCH_BUDGET,
            subset_cap: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpressReport {
    pub mode: Mode,
    pub verdict: Verdict,
    pub depth: usize,
    pub grid_a: Vec<String>,
    pub grid_b: Vec<String>,
    pub witness: Option<Value>,
    pub counter_evidence: Option<String>,
    pub subsets_checked: u64,
    pub subset_cap: usize,
    pub run_budget: u64,
    pub search_budget: u64,
}

impl ExpressReport {
    fn new(mode: Mode, opts: &CheckOptions) -> ExpressReport {
        let g = |t: &TimeGrid| t.points().iter().map(|p| p.to_string()).collect();
        ExpressReport {
            mode,
            verdict: Verdict::Unknown,
            depth: opts.depth,
            grid_a: g(&opts.grid_a),
            grid_b: g(&opts.grid_b),
            witness: None,
            counter_evidence: None,
            subsets_checked: 0,
            subset_cap: opts.subset_cap,
            run_budget: opts.run_budget,
            search_budget: opts.search_budget,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "mode": self.mode,
            "verdict": self.verdict,
            "depth": self.depth,
            "grid": { "first": self.grid_a, "second": self.grid_b },
            "witness": self.witness,
            "counter_evidence": self.counter_evidence,
            "subsets_checked": self.subsets_checked,
            "budgets": {
                "runs": self.run_budget,
                "search": self.search_budget,
                "subset_cap": self.subset_cap,
            },
            "scope": format!("runs of length at most {} on the given grids", self.depth),
        })
    }
}

fn unknown_on_budget<T>(r: Result<T>, report: &mut ExpressReport) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ Error::Budget { .. }) => {
            report.verdict = Verdict::Unknown;
            report.counter_evidence = Some(e.to_string());
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn run_sets(
    a: &Machine,
    wa: Option<&WeightAssignment>,
    b: &Machine,
    wb: Option<&WeightAssignment>,
    opts: &CheckOptions,
) -> Result<(RunSet, RunSet)> {
    if opts.depth == 0 {
        return Err(Error::Usage("depth must be at least 1".into()));
    }
    let ra = RunSet::from_machine(a, wa, opts.depth, &opts.grid_a, opts.run_budget)?;
    let rb = RunSet::from_machine(b, wb, opts.depth, &opts.grid_b, opts.run_budget)?;
    Ok(align_timing(&ra, &rb))
}

/// Isomorphism of the two machines' run collections up to `depth`, followed
/// by `ℒ` agreement on every subset of each small enough level set.
pub fn check_machine_iso(
    a: &Machine,
    wa: Option<&WeightAssignment>,
    b: &Machine,
    wb: Option<&WeightAssignment>,
    opts: &CheckOptions,
) -> Result<ExpressReport> {
    let mut report = ExpressReport::new(Mode::Iso, opts);
    let Some((ra, rb)) = unknown_on_budget(run_sets(a, wa, b, wb, opts), &mut report)? else {
        return Ok(report);
    };
    check_sets_iso(&ra, &rb, opts, report)
}

pub fn check_sets_iso(ra: &RunSet, rb: &RunSet, opts: &CheckOptions, mut report: ExpressReport) -> Result<ExpressReport> {
    let Some(found) = unknown_on_budget(find_iso_with_budget(ra, rb, opts.search_budget), &mut report)? else {
        return Ok(report);
    };
    let w = match found {
        Search::Found(w) => w,
        Search::None(why) => {
            report.verdict = Verdict::No;
            report.counter_evidence = Some(why);
            return Ok(report);
        }
    };
    for k in 0..=opts.depth {
        let level = ra.level(k);
        if level.is_empty() || level.len() > opts.subset_cap {
            continue;
        }
        for mask in 1u64..(1 << level.len()) {
            let sa: Vec<usize> = (0..level.len()).filter(|i| mask >> i & 1 == 1).map(|i| level[i]).collect();
            let sb: Vec<usize> = sa.iter().map(|&i| w.alpha[i]).collect();
            let (la, lb) = (collection_measure(ra, &sa), collection_measure(rb, &sb));
            report.subsets_checked += 1;
            if !la.agrees(&lb) {
                report.verdict = Verdict::No;
                report.counter_evidence = Some(format!("collection measures {la} and {lb} differ at length {k}"));
                return Ok(report);
            }
        }
    }
    report.witness = Some(w.to_json(ra, rb));
    report.verdict = Verdict::Yes;
    Ok(report)
}

/// Homomorphism from the second machine's runs onto the first's.
pub fn check_machine_hom(
    a: &Machine,
    wa: Option<&WeightAssignment>,
    b: &Machine,
    wb: Option<&WeightAssignment>,
    opts: &CheckOptions,
) -> Result<ExpressReport> {
    let mut report = ExpressReport::new(Mode::Hom, opts);
    let Some((ra, rb)) = unknown_on_budget(run_sets(a, wa, b, wb, opts), &mut report)? else {
        return Ok(report);
    };
    let Some(found) = unknown_on_budget(find_hom_with_budget(&ra, &rb, opts.search_budget), &mut report)? else {
        return Ok(report);
    };
    match found {
        Search::Found(w) => {
            report.witness = Some(w.to_json(&ra, &rb));
            report.verdict = Verdict::Yes;
        }
        Search::None(why) => {
            report.verdict = Verdict::No;
            report.counter_evidence = Some(why);
        }
    }
    Ok(report)
}
