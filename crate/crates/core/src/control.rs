//! Supervisory-control semantics: control and attack constraints, validity of
//! supervisor realizations, control commands, closed loops and damage
//! automata.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::automata::{complete, sync_product, Alphabet, Event, EventSet, PartialDfa, StateId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ControlError {
    #[error("controllable events must be observable")]
    NotNormal,
    #[error("attackable events must be attacker-observable")]
    AttackableNotObserved,
    #[error("attackable events must be controllable")]
    AttackableNotControllable,
    #[error("attacker-observable events must be observable")]
    AttackerSeesMore,
    #[error("supervisor violates its control constraint at {} place(s)", .0.len())]
    InvalidSupervisor(Vec<Violation>),
}

/// `(Σc, Σo)` with `Σc ⊆ Σo`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlConstraint {
    controllable: EventSet,
    observable: EventSet,
}

impl ControlConstraint {
    pub fn new(controllable: EventSet, observable: EventSet) -> Result<Self, ControlError> {
        if !controllable.is_subset(&observable) {
            return Err(ControlError::NotNormal);
        }
        Ok(ControlConstraint {
            controllable,
            observable,
        })
    }

    pub fn from_alphabet(alphabet: &Alphabet) -> Self {
        ControlConstraint {
            controllable: alphabet.controllable(),
            observable: alphabet.observable(),
        }
    }

    pub fn controllable(&self) -> &EventSet {
        &self.controllable
    }

    pub fn observable(&self) -> &EventSet {
        &self.observable
    }

    pub fn uncontrollable(&self) -> EventSet {
        self.controllable.complement()
    }

    pub fn unobservable(&self) -> EventSet {
        self.observable.complement()
    }

    #[inline]
    pub fn is_controllable(&self, e: Event) -> bool {
        self.controllable.contains(e)
    }

    #[inline]
    pub fn is_observable(&self, e: Event) -> bool {
        self.observable.contains(e)
    }
}

/// `(Σc,A, Σo,A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackConstraint {
    attackable: EventSet,
    attacker_observable: EventSet,
}

impl AttackConstraint {
    /// Checks `Σc,A ⊆ Σo,A`, `Σc,A ⊆ Σc` and `Σo,A ⊆ Σo` against `control`.
    pub fn new(
        attackable: EventSet,
        attacker_observable: EventSet,
        control: &ControlConstraint,
    ) -> Result<Self, ControlError> {
        if !attackable.is_subset(&attacker_observable) {
            return Err(ControlError::AttackableNotObserved);
        }
        if !attackable.is_subset(control.controllable()) {
            return Err(ControlError::AttackableNotControllable);
        }
        if !attacker_observable.is_subset(control.observable()) {
            return Err(ControlError::AttackerSeesMore);
        }
        Ok(AttackConstraint {
            attackable,
            attacker_observable,
        })
    }

    pub fn from_alphabet(alphabet: &Alphabet) -> Self {
        AttackConstraint {
            attackable: alphabet.attackable(),
            attacker_observable: alphabet.attacker_observable(),
        }
    }

    pub fn attackable(&self) -> &EventSet {
        &self.attackable
    }

    pub fn attacker_observable(&self) -> &EventSet {
        &self.attacker_observable
    }

    #[inline]
    pub fn is_attackable(&self, e: Event) -> bool {
        self.attackable.contains(e)
    }

    #[inline]
    pub fn is_attacker_observable(&self, e: Event) -> bool {
        self.attacker_observable.contains(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    /// An uncontrollable event is undefined.
    Controllability,
    /// An unobservable event is defined but is not a self-loop.
    Observability,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub state: StateId,
    pub event: Event,
    pub kind: ViolationKind,
}

/// Every `(state, event)` pair violating (C) or the normal form of (O).
/// An empty list means the automaton is a valid supervisor realization.
pub fn check_supervisor(s: &PartialDfa, c: &ControlConstraint) -> Vec<Violation> {
    let mut out = Vec::new();
    for x in s.states() {
        for e in s.alphabet().events() {
            match s.next(x, e) {
                None if !c.is_controllable(e) => out.push(Violation {
                    state: x,
                    event: e,
                    kind: ViolationKind::Controllability,
                }),
                Some(d) if !c.is_observable(e) && d != x => out.push(Violation {
                    state: x,
                    event: e,
                    kind: ViolationKind::Observability,
                }),
                _ => {}
            }
        }
    }
    out
}

/// Adds the unobservable self-loops that the normal form requires where they
/// are missing. Existing transitions are left alone.
pub fn repair_selfloops(s: &mut PartialDfa, c: &ControlConstraint) {
    for x in s.states() {
        for e in c.unobservable().iter() {
            if s.next(x, e).is_none() && s.events().contains(e) {
                s.add_transition(x, e, x).expect("slot is free");
            }
        }
    }
}

/// A finite-state realization of a supervisor, valid for its constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Supervisor {
    automaton: PartialDfa,
    constraint: ControlConstraint,
}

impl Supervisor {
    pub fn new(automaton: PartialDfa, constraint: ControlConstraint) -> Result<Self, ControlError> {
        let v = check_supervisor(&automaton, &constraint);
        if !v.is_empty() {
            return Err(ControlError::InvalidSupervisor(v));
        }
        Ok(Supervisor {
            automaton,
            constraint,
        })
    }

    pub fn automaton(&self) -> &PartialDfa {
        &self.automaton
    }

    pub fn constraint(&self) -> &ControlConstraint {
        &self.constraint
    }

    pub fn into_automaton(self) -> PartialDfa {
        self.automaton
    }
}

/// The command `γ` issued at supervisor state `x`: every event defined there.
pub fn control_command(s: &Supervisor, x: StateId) -> EventSet {
    s.automaton.enabled(x)
}

/// `S ∥ G`, whose language is the closed-loop behavior `L(V/G)`.
pub fn closed_loop(g: &PartialDfa, s: &Supervisor) -> PartialDfa {
    let mut k = sync_product(g, &s.automaton);
    k.set_marked(None).expect("clear marking");
    k
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DamageError {
    #[error("damage automaton has no marked set")]
    NoMarking,
    #[error("damage automaton is not complete: state {state:?} lacks event {event:?}")]
    NotComplete { state: String, event: String },
    #[error("closed loop generates the damaging string {rendered:?}")]
    DamagingClosedLoop { word: Vec<Event>, rendered: String },
}

/// Checks that `h` is complete and that no closed-loop string of `k` reaches
/// a marked state of `h`.
pub fn validate_damage(h: &PartialDfa, k: &PartialDfa) -> Result<(), DamageError> {
    if !h.has_marking() {
        return Err(DamageError::NoMarking);
    }
    if let Some((q, e)) = h.missing_transition() {
        return Err(DamageError::NotComplete {
            state: h.name(q).to_string(),
            event: h.alphabet().name(e).to_string(),
        });
    }
    if h.events().len() != h.alphabet().len() {
        let e = h
            .alphabet()
            .full_set()
            .difference(h.events())
            .iter()
            .next()
            .unwrap();
        return Err(DamageError::NotComplete {
            state: h.name(h.initial()).to_string(),
            event: h.alphabet().name(e).to_string(),
        });
    }
    let mut loop_only = k.clone();
    loop_only.set_marked(None).expect("clear marking");
    let kh = sync_product(&loop_only, h);
    match kh.shortest_word_to(|v| kh.is_marked(v)) {
        Some(word) => Err(DamageError::DamagingClosedLoop {
            rendered: h.alphabet().render(&word),
            word,
        }),
        None => Ok(()),
    }
}

/// A shortest damaging string the plant cannot generate, if any. Such strings
/// are irrelevant to attackability, so callers report them as warnings.
pub fn damage_outside_plant(h: &PartialDfa, g: &PartialDfa) -> Option<Vec<Event>> {
    let gbar = complete(g);
    let init = (gbar.initial(), h.initial());
    type Pair = (StateId, StateId);
    let mut pred: HashMap<Pair, Option<(Pair, Event)>> = HashMap::from([(init, None)]);
    let mut queue = VecDeque::from([init]);
    while let Some((q, z)) = queue.pop_front() {
        if q == gbar.dump() && h.is_marked(z) {
            let mut word = Vec::new();
            let mut cur = (q, z);
            while let Some(Some((p, e))) = pred.get(&cur) {
                word.push(*e);
                cur = *p;
            }
            word.reverse();
            return Some(word);
        }
        for e in h.alphabet().events() {
            let Some(z2) = h.next(z, e) else { continue };
            let d = (gbar.next(q, e), z2);
            if let std::collections::hash_map::Entry::Vacant(v) = pred.entry(d) {
                v.insert(Some(((q, z), e)));
                queue.push_back(d);
            }
        }
    }
    None
}
