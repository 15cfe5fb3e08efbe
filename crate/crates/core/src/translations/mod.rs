//! Constructions that turn a machine of one class into another, each with a
//! witness relating the two.

mod lifts;
mod region;
mod split;
mod witness;

pub use lifts::{
    delay_to_stochastic, nfa_to_prob, nfa_to_timed, prob_shape, prob_to_probtimed, probtimed_to_delay,
    timed_to_probtimed,
};
pub use region::{region_automaton, region_graph, region_reachable, Region, RegionGraph, DEFAULT_REGION_BUDGET};
pub use split::{prob_to_nfa_gcd, probability_gcd, probtimed_to_timed, DEFAULT_SPLIT_BUDGET};
pub use witness::Witness;

use crate::automata::{Machine, WeightAssignment};

/// Output machine, its weights when the class needs them, and the witness.
#[derive(Clone, Debug)]
pub struct Translation {
    pub machine: Machine,
    pub weights: Option<WeightAssignment>,
    pub witness: Witness,
}
