use std::collections::HashMap;

use super::{CompleteDfa, Event, PartialDfa, StateId};

/// Synchronous product `a ∥ b`, reachable part only.
///
/// Events private to one side move that side alone; shared events move both.
/// The result is marked iff at least one operand carries a marking, with a
/// pair marked when both components are.
pub fn sync_product(a: &PartialDfa, b: &PartialDfa) -> PartialDfa {
    let alphabet = a.alphabet().clone();
    let events = a.events().union(b.events());
    let step = |(x, y): (StateId, StateId), e: Event| -> Option<(StateId, StateId)> {
        match (a.events().contains(e), b.events().contains(e)) {
            (true, true) => Some((a.next(x, e)?, b.next(y, e)?)),
            (true, false) => Some((a.next(x, e)?, y)),
            (false, true) => Some((x, b.next(y, e)?)),
            (false, false) => None,
        }
    };

    let init = (a.initial(), b.initial());
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::from([(init, 0)]);
    let mut pairs = vec![init];
    let mut edges = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let p = pairs[i];
        for e in alphabet.events() {
            if let Some(d) = step(p, e) {
                let j = *index.entry(d).or_insert_with(|| {
                    pairs.push(d);
                    pairs.len() - 1
                });
                edges.push((i, e, j));
            }
        }
        i += 1;
    }

    let names: Vec<String> = pairs
        .iter()
        .map(|&(x, y)| format!("({},{})", a.name(x), b.name(y)))
        .collect();
    let mut out = PartialDfa::with_events(alphabet, events, names, 0).expect("nonempty product");
    for (s, e, d) in edges {
        out.add_transition(s, e, d).expect("deterministic product");
    }
    if a.has_marking() || b.has_marking() {
        let m = pairs
            .iter()
            .map(|&(x, y)| a.is_marked(x) && b.is_marked(y))
            .collect();
        out.set_marked(Some(m)).expect("sized marking");
    }
    out
}

/// Complete product automaton with two marking sets, the substrate of the
/// behavior-preserving supervisor encoding.
///
/// `mark_a` recognises `L(G) ∩ L(S)` (neither component dumped) and `mark_b`
/// recognises `L(G) \ L(S)` (plant alive, supervisor dumped). States are
/// stored in breadth-first order from the initial pair, which is index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualMarkedDfa {
    pub pairs: Vec<(StateId, StateId)>,
    pub names: Vec<String>,
    num_events: usize,
    trans: Vec<StateId>,
    pub mark_a: Vec<bool>,
    pub mark_b: Vec<bool>,
}

impl DualMarkedDfa {
    pub fn num_states(&self) -> usize {
        self.pairs.len()
    }

    pub fn initial(&self) -> StateId {
        0
    }

    #[inline]
    pub fn next(&self, y: StateId, e: Event) -> StateId {
        self.trans[y * self.num_events + e.index()]
    }

    pub fn num_events(&self) -> usize {
        self.num_events
    }

    pub fn run(&self, word: &[Event]) -> StateId {
        word.iter().fold(0, |y, &e| self.next(y, e))
    }
}

/// Builds `G↓S` from the completions of plant and supervisor.
pub fn build_gds(gbar: &CompleteDfa, sbar: &CompleteDfa) -> DualMarkedDfa {
    let alphabet = gbar.alphabet();
    let k = alphabet.len();
    let init = (gbar.initial(), sbar.initial());
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::from([(init, 0)]);
    let mut pairs = vec![init];
    let mut trans = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (q, x) = pairs[i];
        for e in alphabet.events() {
            let d = (gbar.next(q, e), sbar.next(x, e));
            let j = *index.entry(d).or_insert_with(|| {
                pairs.push(d);
                pairs.len() - 1
            });
            trans.push(j);
        }
        i += 1;
    }
    let mark_a = pairs
        .iter()
        .map(|&(q, x)| q != gbar.dump() && x != sbar.dump())
        .collect();
    let mark_b = pairs
        .iter()
        .map(|&(q, x)| q != gbar.dump() && x == sbar.dump())
        .collect();
    let names = pairs
        .iter()
        .map(|&(q, x)| format!("({},{})", gbar.dfa().name(q), sbar.dfa().name(x)))
        .collect();
    DualMarkedDfa {
        pairs,
        names,
        num_events: k,
        trans,
        mark_a,
        mark_b,
    }
}
