//! Problem files: parsing, validation and emission, plus helpers for
//! machine-readable run summaries.

mod format;

pub use format::{
    add_sink, parse_automaton, parse_problem, parse_supervisor, write_automaton, write_problem,
    ParseError, Problem,
};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::automata::{Event, PartialDfa};
use crate::control::{
    check_supervisor, closed_loop, damage_outside_plant, repair_selfloops, validate_damage,
    ControlError, DamageError, Supervisor, Violation, ViolationKind,
};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("supervisor: {0}")]
    Supervisor(ControlError),
    #[error("damage automaton: {0}")]
    Damage(#[from] DamageError),
}

/// A problem whose supervisor and damage automaton passed validation.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub problem: Problem,
    pub supervisor: Supervisor,
    pub closed_loop: PartialDfa,
    /// A shortest damaging string the plant cannot generate, if any.
    pub damage_warning: Option<Vec<Event>>,
}

/// Parses `text`, optionally replaces its supervisor with the one in
/// `supervisor_text`, and validates the result.
pub fn load(text: &str, supervisor_text: Option<&str>, repair: bool) -> Result<Loaded, LoadError> {
    let mut problem = parse_problem(text)?;
    if let Some(s) = supervisor_text {
        problem.supervisor = parse_supervisor(s, &problem.alphabet)?;
    }
    if repair {
        repair_selfloops(&mut problem.supervisor, &problem.control);
    }
    let supervisor = Supervisor::new(problem.supervisor.clone(), problem.control.clone())
        .map_err(LoadError::Supervisor)?;
    let closed_loop = closed_loop(&problem.plant, &supervisor);
    validate_damage(&problem.damage, &closed_loop)?;
    let damage_warning = damage_outside_plant(&problem.damage, &problem.plant);
    Ok(Loaded {
        problem,
        supervisor,
        closed_loop,
        damage_warning,
    })
}

/// Human-readable lines for supervisor violations.
pub fn describe_violations(s: &PartialDfa, violations: &[Violation]) -> Vec<String> {
    violations
        .iter()
        .map(|v| {
            let what = match v.kind {
                ViolationKind::Controllability => "uncontrollable event not defined",
                ViolationKind::Observability => "unobservable event is not a self-loop",
            };
            format!(
                "state {}: {what}: {}",
                s.name(v.state),
                s.alphabet().name(v.event)
            )
        })
        .collect()
}

/// Violations of the supervisor in `p` against its control constraint.
pub fn supervisor_violations(p: &Problem) -> Vec<Violation> {
    check_supervisor(&p.supervisor, &p.control)
}

/// Hex SHA-256 over the given inputs, each length-prefixed.
pub fn inputs_digest(inputs: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for i in inputs {
        h.update((i.len() as u64).to_le_bytes());
        h.update(i);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
