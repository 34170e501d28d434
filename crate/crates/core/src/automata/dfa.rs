use std::collections::VecDeque;
use std::sync::Arc;

use super::{Alphabet, AutomatonError, Event, EventSet};

pub type StateId = usize;

/// Deterministic partial finite automaton over a shared [`Alphabet`].
///
/// `events` is the automaton's own alphabet; transitions are only defined on
/// events in it. A missing marking means every state is marked, which is the
/// convention for plants and supervisors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialDfa {
    alphabet: Arc<Alphabet>,
    events: EventSet,
    names: Vec<String>,
    trans: Vec<Option<StateId>>,
    initial: StateId,
    marked: Option<Vec<bool>>,
}

impl PartialDfa {
    /// Automaton over the full alphabet with the given state names and no
    /// transitions.
    pub fn new<S: Into<String>>(
        alphabet: Arc<Alphabet>,
        names: impl IntoIterator<Item = S>,
        initial: StateId,
    ) -> Result<Self, AutomatonError> {
        let events = alphabet.full_set();
        Self::with_events(alphabet, events, names, initial)
    }

    pub fn with_events<S: Into<String>>(
        alphabet: Arc<Alphabet>,
        events: EventSet,
        names: impl IntoIterator<Item = S>,
        initial: StateId,
    ) -> Result<Self, AutomatonError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if initial >= names.len() {
            return Err(AutomatonError::StateOutOfRange(initial));
        }
        let trans = vec![None; names.len() * alphabet.len()];
        Ok(PartialDfa {
            alphabet,
            events,
            names,
            trans,
            initial,
            marked: None,
        })
    }

    /// Adds `src --e--> dst`. Redefining an existing transition to a different
    /// target is rejected as nondeterminism.
    pub fn add_transition(
        &mut self,
        src: StateId,
        e: Event,
        dst: StateId,
    ) -> Result<(), AutomatonError> {
        let n = self.names.len();
        if src >= n {
            return Err(AutomatonError::StateOutOfRange(src));
        }
        if dst >= n {
            return Err(AutomatonError::StateOutOfRange(dst));
        }
        if !self.events.contains(e) {
            return Err(AutomatonError::EventNotInAlphabet(
                self.alphabet.name(e).to_string(),
            ));
        }
        let slot = &mut self.trans[src * self.alphabet.len() + e.index()];
        match *slot {
            Some(old) if old != dst => Err(AutomatonError::Nondeterministic {
                state: self.names[src].clone(),
                event: self.alphabet.name(e).to_string(),
            }),
            _ => {
                *slot = Some(dst);
                Ok(())
            }
        }
    }

    pub fn remove_transition(&mut self, src: StateId, e: Event) {
        let i = src * self.alphabet.len() + e.index();
        self.trans[i] = None;
    }

    pub fn set_marked(&mut self, marked: Option<Vec<bool>>) -> Result<(), AutomatonError> {
        if let Some(m) = &marked {
            if m.len() != self.names.len() {
                return Err(AutomatonError::StateOutOfRange(m.len()));
            }
        }
        self.marked = marked;
        Ok(())
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn events(&self) -> &EventSet {
        &self.events
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.names.len()
    }

    pub fn name(&self, q: StateId) -> &str {
        &self.names[q]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    #[inline]
    pub fn next(&self, q: StateId, e: Event) -> Option<StateId> {
        self.trans[q * self.alphabet.len() + e.index()]
    }

    pub fn has_marking(&self) -> bool {
        self.marked.is_some()
    }

    pub fn marking(&self) -> Option<&[bool]> {
        self.marked.as_deref()
    }

    #[inline]
    pub fn is_marked(&self, q: StateId) -> bool {
        self.marked.as_ref().is_none_or(|m| m[q])
    }

    /// `(src, event, dst)` triples in state-then-alphabet order.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, Event, StateId)> + '_ {
        let k = self.alphabet.len();
        self.trans
            .iter()
            .enumerate()
            .filter_map(move |(i, t)| t.map(|d| (i / k, Event((i % k) as u32), d)))
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.iter().filter(|t| t.is_some()).count()
    }

    /// Events defined at `q`.
    pub fn enabled(&self, q: StateId) -> EventSet {
        EventSet::from_events(
            self.alphabet.len(),
            self.alphabet
                .events()
                .filter(|&e| self.next(q, e).is_some()),
        )
    }

    /// True when every event of the automaton's alphabet is defined everywhere.
    pub fn is_total(&self) -> bool {
        self.missing_transition().is_none()
    }

    pub fn missing_transition(&self) -> Option<(StateId, Event)> {
        self.states()
            .flat_map(|q| self.events.iter().map(move |e| (q, e)))
            .find(|&(q, e)| self.next(q, e).is_none())
    }

    /// State reached from the initial state by `word`, if defined.
    pub fn run(&self, word: &[Event]) -> Option<StateId> {
        word.iter().try_fold(self.initial, |q, &e| self.next(q, e))
    }

    /// Membership in `L` (or in `L_m` when `marked` is set).
    pub fn accepts(&self, word: &[Event], marked: bool) -> bool {
        match self.run(word) {
            Some(q) => !marked || self.is_marked(q),
            None => false,
        }
    }

    /// Membership test on a space-separated event string.
    pub fn accepts_str(&self, word: &str, marked: bool) -> Result<bool, AutomatonError> {
        let w = self.alphabet.parse_word(word)?;
        Ok(self.accepts(&w, marked))
    }

    /// States reachable from the initial state, in breadth-first order
    /// (events explored in alphabet order).
    pub fn reachable_order(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            i += 1;
            for e in self.alphabet.events() {
                if let Some(d) = self.next(q, e) {
                    if !seen[d] {
                        seen[d] = true;
                        order.push(d);
                    }
                }
            }
        }
        order
    }

    pub fn num_reachable(&self) -> usize {
        self.reachable_order().len()
    }

    /// Keeps only the states in `keep`, renumbered in the given order. The
    /// initial state must be kept; transitions to dropped states disappear.
    pub fn restrict(&self, keep: &[StateId]) -> PartialDfa {
        let mut map = vec![None; self.num_states()];
        for (i, &q) in keep.iter().enumerate() {
            map[q] = Some(i);
        }
        let k = self.alphabet.len();
        let mut trans = vec![None; keep.len() * k];
        for (i, &q) in keep.iter().enumerate() {
            for e in self.alphabet.events() {
                trans[i * k + e.index()] = self.next(q, e).and_then(|d| map[d]);
            }
        }
        PartialDfa {
            alphabet: self.alphabet.clone(),
            events: self.events.clone(),
            names: keep.iter().map(|&q| self.names[q].clone()).collect(),
            trans,
            initial: map[self.initial].expect("initial state must be kept"),
            marked: self
                .marked
                .as_ref()
                .map(|m| keep.iter().map(|&q| m[q]).collect()),
        }
    }

    /// Reachable part, states in breadth-first order.
    pub fn trim(&self) -> PartialDfa {
        self.restrict(&self.reachable_order())
    }

    pub fn rename_states(&mut self, names: Vec<String>) {
        assert_eq!(names.len(), self.names.len());
        self.names = names;
    }

    /// Shortest word from the initial state to a state satisfying `target`.
    pub fn shortest_word_to(&self, target: impl Fn(StateId) -> bool) -> Option<Vec<Event>> {
        let mut pred: Vec<Option<(StateId, Event)>> = vec![None; self.num_states()];
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            if target(q) {
                let mut word = Vec::new();
                let mut cur = q;
                while let Some((p, e)) = pred[cur] {
                    word.push(e);
                    cur = p;
                }
                word.reverse();
                return Some(word);
            }
            for e in self.alphabet.events() {
                if let Some(d) = self.next(q, e) {
                    if !seen[d] {
                        seen[d] = true;
                        pred[d] = Some((q, e));
                        queue.push_back(d);
                    }
                }
            }
        }
        None
    }
}
