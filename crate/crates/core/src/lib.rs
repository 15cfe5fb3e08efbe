//! Weighted, probabilistic and timed automata over exact rationals: run
//! semantics, run measures, translations between the six machine classes and
//! bounded-depth expressiveness checks.

pub mod error;
pub mod automata;
pub mod cli;
pub mod exactmath;
pub mod expressiveness;
pub mod fixtures;
pub mod format;
pub mod measures;
pub mod runs;
pub mod translations;

pub use error::{Error, Result};
