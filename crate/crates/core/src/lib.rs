//! Obfuscation of discrete-event supervisors against actuator enablement
//! attackers that eavesdrop control commands.
//!
//! The pipeline takes a plant, an insecure supervisor, control and attack
//! constraints and a damage automaton. It enumerates behavior-preserving
//! supervisors of increasing size with a SAT encoding ([`satenc`],
//! [`obfuscate`]) and keeps the first one that the verification in
//! [`attack`] finds non-attackable.

pub mod attack;
pub mod automata;
pub mod control;
pub mod exec;
pub mod obfuscate;
pub mod problem;
pub mod sat;
pub mod satenc;
