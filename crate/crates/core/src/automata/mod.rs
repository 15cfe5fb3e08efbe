//! The six machine classes, clock constraints, validation, clock ceilings and
//! edge weightings.

pub mod ceiling;
pub mod constraint;
pub mod machine;
pub mod validate;
pub mod weights;

pub use ceiling::{clock_ceiling, normalize_domains};
pub use constraint::{eval_constraint, Atom, ClockConstraint, ClockInterval};
pub use machine::{
    canonical_resets, EdgeEnds, Machine, ModelKind, NfaEdge, PaEdge, PtaEdge, StaEdge, StateActionTriple,
    TaEdge, TapdEdge, Transitions,
};
pub use validate::{validate_machine, ValidationReport};
pub use weights::{assign_weights, uniform_weights, WeightAssignment, WeightBound};
