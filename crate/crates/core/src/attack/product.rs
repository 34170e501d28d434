use std::collections::HashMap;

use super::annotate::{AnnotatedSupervisor, CommandId};
use crate::automata::{Event, PartialDfa, StateId};
use crate::control::AttackConstraint;

/// Label of a core transition of the generalized product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GpLabel {
    /// `(σ, (o, γ))` for an observable `σ`; `seen` is `Some(σ)` when the
    /// attacker observes `σ` and `None` (ε) otherwise.
    Observable {
        event: Event,
        seen: Option<Event>,
        command: CommandId,
    },
    /// `(σ, ε)` for an unobservable `σ`.
    Unobservable(Event),
}

/// Target of an attack transition: `⊤` (damage done) or `⊥` (attack
/// detected without damage).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttackOutcome {
    Top,
    Bot,
}

/// Core state `(q, x, z)` of the generalized product.
pub type Triple = (StateId, StateId, StateId);

/// Reachable part of the generalized product `GP(G, S^A, H)`. Core states are
/// indexed in breadth-first order with the initial triple at 0; `⊤` and `⊥`
/// are kept implicit in `attacks`.
#[derive(Clone, Debug)]
pub struct GpAutomaton {
    pub states: Vec<Triple>,
    pub edges: Vec<Vec<(GpLabel, usize)>>,
    pub attacks: Vec<Vec<(Event, AttackOutcome)>>,
}

impl GpAutomaton {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn attack(&self, v: usize, e: Event) -> Option<AttackOutcome> {
        self.attacks[v]
            .iter()
            .find(|(a, _)| *a == e)
            .map(|&(_, o)| o)
    }
}

/// Builds the generalized product.
///
/// Every event that plant, supervisor and damage automaton can all take
/// produces a core transition labelled according to its observability. An
/// attackable event that the plant can take but the supervisor disables
/// leads to `⊤` when the damage automaton moves into a marked state, and to
/// `⊥` otherwise.
pub fn general_product(
    g: &PartialDfa,
    sa: &AnnotatedSupervisor,
    h: &PartialDfa,
    ac: &AttackConstraint,
) -> GpAutomaton {
    let alphabet = g.alphabet();
    let init = (g.initial(), sa.initial(), h.initial());
    let mut index: HashMap<Triple, usize> = HashMap::from([(init, 0)]);
    let mut states = vec![init];
    let mut edges = Vec::new();
    let mut attacks = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let (q, x, z) = states[i];
        let mut out = Vec::new();
        let mut atk = Vec::new();
        for e in alphabet.events() {
            let Some(q2) = g.next(q, e) else { continue };
            match sa.next(x, e) {
                Some((x2, cmd)) => {
                    let Some(z2) = h.next(z, e) else { continue };
                    let label = match cmd {
                        Some(command) => GpLabel::Observable {
                            event: e,
                            seen: ac.is_attacker_observable(e).then_some(e),
                            command,
                        },
                        None => GpLabel::Unobservable(e),
                    };
                    let d = (q2, x2, z2);
                    let j = *index.entry(d).or_insert_with(|| {
                        states.push(d);
                        states.len() - 1
                    });
                    out.push((label, j));
                }
                None if ac.is_attackable(e) => {
                    let hit = h.next(z, e).is_some_and(|z2| h.is_marked(z2));
                    atk.push((
                        e,
                        if hit {
                            AttackOutcome::Top
                        } else {
                            AttackOutcome::Bot
                        },
                    ));
                }
                None => {}
            }
        }
        edges.push(out);
        attacks.push(atk);
        i += 1;
    }
    GpAutomaton {
        states,
        edges,
        attacks,
    }
}
