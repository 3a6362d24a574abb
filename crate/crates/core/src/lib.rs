//! Exact-arithmetic workbench for the cellular automata that multiply by
//! `p/q` in base `pq`, their trace subshifts, the companion base-`p/q`
//! representation and sofic shifts with the same complexity function.

pub mod arith;
pub mod automaton;
pub mod config;
pub mod error;
pub mod language;
pub mod mahler;
pub mod numbers;
pub mod representations;
pub mod sofic;
pub mod verify;

pub use arith::{Digit, DigitWord, Params};
pub use automaton::{Automaton, Ca, Direction, Factor};
pub use config::Configuration;
pub use error::{Error, Result};
