//! Bounded-depth isomorphism and homomorphism checks between run
//! collections, and the packaged counterexamples.

mod runset;
mod search;

pub use runset::{align_timing, RunKey, RunSet, RunView};
pub use search::{
    check_hom, collection_measure, find_hom, find_hom_with_budget, find_iso, find_iso_with_budget, HomWitness,
    IsoWitness, Search, DEFAULT_SEARCH_BUDGET,
};

mod check;

pub use check::{check_machine_hom, check_machine_iso, check_sets_iso, CheckOptions, ExpressReport, Mode, Verdict};

mod oracle;

pub use oracle::{grid_reachable, time_abstract_runs};

mod farey;

pub use farey::{prefix_target, PathShape, PrefixOutcome, PrefixSearch, PrefixSolution, Q64};

mod counter;

pub use counter::{
    exp_certificate, grid_squeeze, pa_vs_nfa, prefix_search, tapd_constants, verify_counterexamples, CounterItem,
    CounterReport,
};

#[cfg(test)]
mod tests;
