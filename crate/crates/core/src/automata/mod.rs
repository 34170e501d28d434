//! Finite-automata algebra: alphabets with event attributes, deterministic
//! partial automata, completion, synchronous products and language
//! equivalence.

mod alphabet;
mod complete;
mod dfa;
pub mod dot;
mod equiv;
mod product;

pub use alphabet::{Alphabet, Event, EventFlags, EventSet};
pub use complete::{complete, strip_dump, CompleteDfa};
pub use dfa::{PartialDfa, StateId};
pub use equiv::{language_equal, Equivalence};
pub use product::{build_gds, sync_product, DualMarkedDfa};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("invalid event name {0:?}")]
    BadEventName(String),
    #[error("duplicate event {0:?}")]
    DuplicateEvent(String),
    #[error("event {0:?}: {1}")]
    FlagViolation(String, &'static str),
    #[error("unknown event {0:?}")]
    UnknownEvent(String),
    #[error("event {0:?} is not in the automaton's alphabet")]
    EventNotInAlphabet(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("nondeterministic transition at state {state:?} on {event:?}")]
    Nondeterministic { state: String, event: String },
}
