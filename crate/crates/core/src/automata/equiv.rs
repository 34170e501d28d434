use std::collections::{HashMap, VecDeque};

use super::{Event, PartialDfa, StateId};

/// Outcome of a language comparison. `witness` is a shortest string in the
/// symmetric difference when the languages differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equivalence {
    pub equal: bool,
    pub witness: Option<Vec<Event>>,
}

/// Decides `L(a) = L(b)` for the prefix-closed languages of two partial DFAs
/// over the same alphabet by breadth-first search over the product of their
/// completions. `None` stands for the dump state.
pub fn language_equal(a: &PartialDfa, b: &PartialDfa) -> Equivalence {
    type Pair = (Option<StateId>, Option<StateId>);
    let alphabet = a.alphabet();
    let init: Pair = (Some(a.initial()), Some(b.initial()));
    let mut pred: HashMap<Pair, Option<(Pair, Event)>> = HashMap::from([(init, None)]);
    let mut queue = VecDeque::from([init]);
    while let Some(p) = queue.pop_front() {
        if p.0.is_some() != p.1.is_some() {
            let mut word = Vec::new();
            let mut cur = p;
            while let Some(Some((prev, e))) = pred.get(&cur) {
                word.push(*e);
                cur = *prev;
            }
            word.reverse();
            return Equivalence {
                equal: false,
                witness: Some(word),
            };
        }
        let (Some(x), Some(y)) = p else { continue };
        for e in alphabet.events() {
            let d = (a.next(x, e), b.next(y, e));
            if d == (None, None) || pred.contains_key(&d) {
                continue;
            }
            pred.insert(d, Some((p, e)));
            queue.push_back(d);
        }
    }
    Equivalence {
        equal: true,
        witness: None,
    }
}
