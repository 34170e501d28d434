//! Bounded brute-force attackability check, used as a test oracle.
//!
//! Closed-loop strings are grouped by attacker observation, one observation
//! layer at a time. Two strings that end in the same plant/supervisor/damage
//! state and produce the same observation are interchangeable for the
//! attackability conditions, so a group is kept as a set of state triples.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::automata::{Event, EventSet, PartialDfa, StateId};
use crate::control::{AttackConstraint, Supervisor};

/// One attacker observation step: the event if the attacker sees it, and
/// the command issued after the supervisor observed it.
pub type ObsStep = (Option<Event>, EventSet);

pub type Triple = (StateId, StateId, StateId);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Attackable {
        observation: Vec<ObsStep>,
        event: Event,
    },
    /// No attack exists at any observation of length at most the given depth.
    NoAttackUpTo(usize),
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub verdict: OracleVerdict,
    /// Observation depth up to which every group was explored completely.
    pub complete_depth: usize,
    /// Depth the length bound allows; reaching it makes a negative verdict
    /// cover every string within the bound.
    pub max_depth: usize,
    /// Number of (state, observation) pairs visited.
    pub explored: usize,
}

struct Product<'a> {
    g: &'a PartialDfa,
    s: &'a PartialDfa,
    h: &'a PartialDfa,
    observable: &'a EventSet,
}

impl Product<'_> {
    fn step(&self, (q, x, z): Triple, e: Event) -> Option<Triple> {
        Some((self.g.next(q, e)?, self.s.next(x, e)?, self.h.next(z, e)?))
    }

    fn initial(&self) -> Triple {
        (self.g.initial(), self.s.initial(), self.h.initial())
    }

    fn reachable(&self) -> Vec<Triple> {
        let mut seen = BTreeSet::from([self.initial()]);
        let mut queue = VecDeque::from([self.initial()]);
        while let Some(v) = queue.pop_front() {
            for e in self.g.alphabet().events() {
                if let Some(d) = self.step(v, e) {
                    if seen.insert(d) {
                        queue.push_back(d);
                    }
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Largest distance, over reachable states, from a state to anything it
    /// reaches by unobservable events alone.
    fn unobservable_eccentricity(&self) -> usize {
        let mut worst = 0;
        for v in self.reachable() {
            let mut dist = HashMap::from([(v, 0usize)]);
            let mut queue = VecDeque::from([v]);
            while let Some(u) = queue.pop_front() {
                let du = dist[&u];
                worst = worst.max(du);
                for e in self
                    .g
                    .alphabet()
                    .events()
                    .filter(|&e| !self.observable.contains(e))
                {
                    if let Some(d) = self.step(u, e) {
                        dist.entry(d).or_insert_with(|| {
                            queue.push_back(d);
                            du + 1
                        });
                    }
                }
            }
        }
        worst
    }
}

type Group = (Vec<ObsStep>, BTreeSet<Triple>);

impl Product<'_> {
    /// States reachable from `seeds` by unobservable events.
    fn unobservable_closure(&self, seeds: BTreeSet<Triple>) -> BTreeSet<Triple> {
        let mut out = seeds.clone();
        let mut stack: Vec<Triple> = seeds.into_iter().collect();
        while let Some(v) = stack.pop() {
            for e in self
                .g
                .alphabet()
                .events()
                .filter(|&e| !self.observable.contains(e))
            {
                if let Some(d) = self.step(v, e) {
                    if out.insert(d) {
                        stack.push(d);
                    }
                }
            }
        }
        out
    }

    /// Groups one observation longer than those in `layer`. Every closed-loop
    /// string extending a string of a group by one observable event and
    /// then unobservable events lands in exactly one of them.
    fn next_layer(&self, ac: &AttackConstraint, layer: &[Group]) -> Vec<Group> {
        let mut out = Vec::new();
        for (word, members) in layer {
            let mut moves: BTreeMap<ObsStep, BTreeSet<Triple>> = BTreeMap::new();
            for &v in members {
                for e in self.observable.iter() {
                    if let Some(d) = self.step(v, e) {
                        let seen = ac.is_attacker_observable(e).then_some(e);
                        moves
                            .entry((seen, self.s.enabled(d.1)))
                            .or_default()
                            .insert(d);
                    }
                }
            }
            for (step, seeds) in moves {
                let mut w = word.clone();
                w.push(step);
                out.push((w, self.unobservable_closure(seeds)));
            }
        }
        out
    }

    fn first_layer(&self) -> Vec<Group> {
        vec![(
            Vec::new(),
            self.unobservable_closure(BTreeSet::from([self.initial()])),
        )]
    }
}

fn layer_size(layer: &[Group]) -> usize {
    layer.iter().map(|(_, m)| m.len()).sum()
}

/// Attacker-observation groups of all closed-loop strings with at most
/// `depth` observable events.
pub fn observation_groups(
    g: &PartialDfa,
    s: &Supervisor,
    h: &PartialDfa,
    ac: &AttackConstraint,
    depth: usize,
) -> BTreeMap<Vec<ObsStep>, BTreeSet<Triple>> {
    let p = Product {
        g,
        s: s.automaton(),
        h,
        observable: s.constraint().observable(),
    };
    let mut layer = p.first_layer();
    let mut out = BTreeMap::new();
    for d in 0..=depth {
        out.extend(layer.iter().cloned());
        if d < depth {
            layer = p.next_layer(ac, &layer);
        }
    }
    out
}

/// Events `σ` that satisfy both attackability conditions for a group:
/// some member can be attacked into damage on `σ`, and every member in
/// which the plant can take `σ` would be damaged by it.
pub fn attack_events(
    g: &PartialDfa,
    s: &PartialDfa,
    h: &PartialDfa,
    ac: &AttackConstraint,
    group: &BTreeSet<Triple>,
) -> Vec<Event> {
    ac.attackable()
        .iter()
        .filter(|&e| {
            let damaging = |&(q, _, z): &Triple| {
                g.next(q, e).is_some() && h.next(z, e).is_some_and(|z2| h.is_marked(z2))
            };
            let exists = group
                .iter()
                .any(|v| damaging(v) && s.next(v.1, e).is_none());
            let all = group
                .iter()
                .filter(|v| g.next(v.0, e).is_some())
                .all(damaging);
            exists && all
        })
        .collect()
}

/// Default exploration budget, in (state, observation) pairs.
pub const DEFAULT_BUDGET: usize = 200_000;

/// Checks attackability on all closed-loop strings of length at most
/// `len_bound`.
///
/// A group of strings sharing an observation with `d` steps contains every
/// state its observation allows once strings of length `d(L+1)+L` are
/// considered, where `L` bounds the unobservable detours. Observations up to
/// the largest such `d` are judged, stopping early when the next layer of
/// groups would take the number of visited pairs past `budget`.
pub fn brute_force_attackable(
    g: &PartialDfa,
    s: &Supervisor,
    h: &PartialDfa,
    ac: &AttackConstraint,
    len_bound: usize,
    budget: usize,
) -> OracleReport {
    let p = Product {
        g,
        s: s.automaton(),
        h,
        observable: s.constraint().observable(),
    };
    let l = p.unobservable_eccentricity();
    let max_depth = len_bound.saturating_sub(l) / (l + 1);
    let mut layer = p.first_layer();
    let mut explored = layer_size(&layer);
    let mut depth = 0;
    loop {
        for (obs, members) in &layer {
            if let Some(&event) = attack_events(g, s.automaton(), h, ac, members).first() {
                return OracleReport {
                    verdict: OracleVerdict::Attackable {
                        observation: obs.clone(),
                        event,
                    },
                    complete_depth: depth,
                    max_depth,
                    explored,
                };
            }
        }
        if depth == max_depth {
            break;
        }
        let next = p.next_layer(ac, &layer);
        if next.is_empty() {
            depth = max_depth;
            break;
        }
        if explored + layer_size(&next) > budget {
            break;
        }
        explored += layer_size(&next);
        layer = next;
        depth += 1;
    }
    OracleReport {
        verdict: OracleVerdict::NoAttackUpTo(depth),
        complete_depth: depth,
        max_depth,
        explored,
    }
}
