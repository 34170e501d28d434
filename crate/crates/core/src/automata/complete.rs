use super::{Alphabet, Event, PartialDfa, StateId};

/// Completion of a partial automaton: a total transition function, one
/// absorbing dump state, and every non-dump state marked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompleteDfa {
    inner: PartialDfa,
    dump: StateId,
}

fn fresh_dump_name(p: &PartialDfa) -> String {
    let mut name = String::from("dump");
    while p.state_by_name(&name).is_some() {
        name.insert(0, '_');
    }
    name
}

/// Adds a dump state and redirects every undefined `(state, event)` pair of
/// the automaton's own alphabet to it. `L_m(result) = L(p)`.
pub fn complete(p: &PartialDfa) -> CompleteDfa {
    let dump = p.num_states();
    let mut names = p.names().to_vec();
    names.push(fresh_dump_name(p));
    let mut c =
        PartialDfa::with_events(p.alphabet().clone(), p.events().clone(), names, p.initial())
            .expect("initial state in range");
    for q in p.states() {
        for e in p.events().iter() {
            let d = p.next(q, e).unwrap_or(dump);
            c.add_transition(q, e, d).expect("fresh table");
        }
    }
    for e in p.events().iter() {
        c.add_transition(dump, e, dump).expect("fresh table");
    }
    let mut marked = vec![true; dump + 1];
    marked[dump] = false;
    c.set_marked(Some(marked)).expect("sized marking");
    CompleteDfa { inner: c, dump }
}

/// Removes the dump state and its incident transitions. `L(result) = L_m(c)`.
pub fn strip_dump(c: &CompleteDfa) -> PartialDfa {
    let keep: Vec<StateId> = c.inner.states().filter(|&q| q != c.dump).collect();
    let mut p = c.inner.restrict(&keep);
    p.set_marked(None).expect("no marking");
    p
}

impl CompleteDfa {
    /// Wraps an automaton that is already total with `dump` absorbing. The
    /// marking is reset to "all but dump".
    pub fn from_total(mut inner: PartialDfa, dump: StateId) -> Option<CompleteDfa> {
        if dump >= inner.num_states() || !inner.is_total() {
            return None;
        }
        if inner
            .events()
            .iter()
            .any(|e| inner.next(dump, e) != Some(dump))
        {
            return None;
        }
        let mut marked = vec![true; inner.num_states()];
        marked[dump] = false;
        inner.set_marked(Some(marked)).ok()?;
        Some(CompleteDfa { inner, dump })
    }

    pub fn dfa(&self) -> &PartialDfa {
        &self.inner
    }

    pub fn dump(&self) -> StateId {
        self.dump
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.inner.alphabet()
    }

    pub fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    pub fn initial(&self) -> StateId {
        self.inner.initial()
    }

    #[inline]
    pub fn next(&self, q: StateId, e: Event) -> StateId {
        self.inner.next(q, e).unwrap_or(self.dump)
    }
}
