use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;

use super::AutomatonError;

/// Index of an event in its [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event(pub u32);

impl Event {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Attributes attached to every event of an alphabet.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EventFlags {
    pub controllable: bool,
    pub observable: bool,
    pub attackable: bool,
    pub attacker_observable: bool,
}

/// Ordered, named event universe shared by every automaton of a problem.
///
/// The flags record the control constraint `(Σc, Σo)` and attack constraint
/// `(Σc,A, Σo,A)` of the input problem. They are validated on construction:
/// controllable events are observable, attackable events are controllable and
/// attacker-observable, and attacker-observable events are observable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    flags: Vec<EventFlags>,
    index: HashMap<String, Event>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(
        events: impl IntoIterator<Item = (S, EventFlags)>,
    ) -> Result<Self, AutomatonError> {
        let mut names = Vec::new();
        let mut flags = Vec::new();
        let mut index = HashMap::new();
        for (name, f) in events {
            let name = name.into();
            if name.is_empty() || name.contains('#') || name.chars().any(char::is_whitespace) {
                return Err(AutomatonError::BadEventName(name));
            }
            if f.controllable && !f.observable {
                return Err(AutomatonError::FlagViolation(
                    name,
                    "controllable but unobservable",
                ));
            }
            if f.attackable && !f.attacker_observable {
                return Err(AutomatonError::FlagViolation(
                    name,
                    "attackable but not attacker-observable",
                ));
            }
            if f.attackable && !f.controllable {
                return Err(AutomatonError::FlagViolation(
                    name,
                    "attackable but uncontrollable",
                ));
            }
            if f.attacker_observable && !f.observable {
                return Err(AutomatonError::FlagViolation(
                    name,
                    "attacker-observable but unobservable",
                ));
            }
            let id = Event(names.len() as u32);
            if index.insert(name.clone(), id).is_some() {
                return Err(AutomatonError::DuplicateEvent(name));
            }
            names.push(name);
            flags.push(f);
        }
        Ok(Alphabet {
            names,
            flags,
            index,
        })
    }

    /// Alphabet whose events are all controllable and observable, and neither
    /// attackable nor attacker-observable.
    pub fn plain<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
    ) -> Result<Self, AutomatonError> {
        let full = EventFlags {
            controllable: true,
            observable: true,
            ..Default::default()
        };
        Self::new(names.into_iter().map(|n| (n, full)))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = Event> + Clone {
        (0..self.names.len() as u32).map(Event)
    }

    pub fn name(&self, e: Event) -> &str {
        &self.names[e.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<Event> {
        self.index.get(name).copied()
    }

    pub fn flags(&self, e: Event) -> EventFlags {
        self.flags[e.index()]
    }

    pub fn full_set(&self) -> EventSet {
        let mut s = EventSet::empty(self.len());
        s.0.insert_range(..);
        s
    }

    fn select(&self, pred: impl Fn(EventFlags) -> bool) -> EventSet {
        EventSet::from_events(self.len(), self.events().filter(|&e| pred(self.flags(e))))
    }

    pub fn controllable(&self) -> EventSet {
        self.select(|f| f.controllable)
    }

    pub fn observable(&self) -> EventSet {
        self.select(|f| f.observable)
    }

    pub fn attackable(&self) -> EventSet {
        self.select(|f| f.attackable)
    }

    pub fn attacker_observable(&self) -> EventSet {
        self.select(|f| f.attacker_observable)
    }

    /// Renders a string of events as space-separated names, `ε` when empty.
    pub fn render(&self, word: &[Event]) -> String {
        if word.is_empty() {
            return "ε".to_string();
        }
        word.iter()
            .map(|&e| self.name(e))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses a whitespace-separated list of event names.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Event>, AutomatonError> {
        text.split_whitespace()
            .map(|t| {
                self.lookup(t)
                    .ok_or_else(|| AutomatonError::UnknownEvent(t.to_string()))
            })
            .collect()
    }
}

/// A set of events of a fixed alphabet; ordered and hashable so it can be
/// used as an interned control command.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventSet(FixedBitSet);

impl EventSet {
    pub fn empty(universe: usize) -> Self {
        EventSet(FixedBitSet::with_capacity(universe))
    }

    pub fn from_events(universe: usize, events: impl IntoIterator<Item = Event>) -> Self {
        let mut s = Self::empty(universe);
        for e in events {
            s.insert(e);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, e: Event) {
        self.0.insert(e.index());
    }

    pub fn remove(&mut self, e: Event) {
        self.0.set(e.index(), false);
    }

    #[inline]
    pub fn contains(&self, e: Event) -> bool {
        self.0.contains(e.index())
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = Event> + '_ {
        self.0.ones().map(|i| Event(i as u32))
    }

    pub fn is_subset(&self, other: &EventSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn complement(&self) -> EventSet {
        let mut c = self.0.clone();
        c.toggle_range(..);
        EventSet(c)
    }

    pub fn union(&self, other: &EventSet) -> EventSet {
        let mut u = self.0.clone();
        u.grow(other.0.len());
        u.union_with(&other.0);
        EventSet(u)
    }

    pub fn intersection(&self, other: &EventSet) -> EventSet {
        let mut u = self.0.clone();
        u.intersect_with(&other.0);
        EventSet(u)
    }

    pub fn difference(&self, other: &EventSet) -> EventSet {
        let mut u = self.0.clone();
        u.difference_with(&other.0);
        EventSet(u)
    }

    /// `{a,b,d}` style rendering in alphabet order.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        let names: Vec<&str> = self.iter().map(|e| alphabet.name(e)).collect();
        format!("{{{}}}", names.join(","))
    }
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.ones()).finish()
    }
}
