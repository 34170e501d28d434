use std::collections::HashMap;

use crate::automata::{Alphabet, Event, EventSet, StateId};
use crate::control::{control_command, Supervisor};

/// Index of an interned control command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CommandId(pub u32);

/// Control commands interned by value, so equal commands compare equal
/// regardless of the state that issued them.
#[derive(Clone, Debug, Default)]
pub struct CommandTable {
    sets: Vec<EventSet>,
    index: HashMap<EventSet, CommandId>,
}

impl CommandTable {
    pub fn intern(&mut self, set: EventSet) -> CommandId {
        if let Some(&id) = self.index.get(&set) {
            return id;
        }
        let id = CommandId(self.sets.len() as u32);
        self.sets.push(set.clone());
        self.index.insert(set, id);
        id
    }

    pub fn get(&self, id: CommandId) -> &EventSet {
        &self.sets[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Supervisor whose observable transitions carry the command issued at
/// their destination: `x --(σ,γ)--> x'` iff `x --σ--> x'` and `γ` is the
/// command of `x'`. Unobservable transitions keep their bare event.
#[derive(Clone, Debug)]
pub struct AnnotatedSupervisor {
    num_events: usize,
    observable: EventSet,
    trans: Vec<Option<(StateId, Option<CommandId>)>>,
    state_command: Vec<CommandId>,
    initial: StateId,
    pub commands: CommandTable,
}

impl AnnotatedSupervisor {
    /// Successor of `x` on `e` with the command attached to the move, `None`
    /// for the command when `e` is unobservable.
    #[inline]
    pub fn next(&self, x: StateId, e: Event) -> Option<(StateId, Option<CommandId>)> {
        self.trans[x * self.num_events + e.index()]
    }

    /// Whether the underlying supervisor enables `e` at `x`.
    #[inline]
    pub fn enables(&self, x: StateId, e: Event) -> bool {
        self.trans[x * self.num_events + e.index()].is_some()
    }

    pub fn command_of(&self, x: StateId) -> CommandId {
        self.state_command[x]
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.state_command.len()
    }

    pub fn is_observable(&self, e: Event) -> bool {
        self.observable.contains(e)
    }

    /// Annotated transitions rendered as `(src, label, dst)`, for display.
    pub fn labelled_transitions<'a>(
        &'a self,
        alphabet: &'a Alphabet,
    ) -> impl Iterator<Item = (StateId, String, StateId)> + 'a {
        (0..self.num_states()).flat_map(move |x| {
            alphabet.events().filter_map(move |e| {
                self.next(x, e).map(|(d, cmd)| {
                    let label = match cmd {
                        Some(c) => format!(
                            "({}, {})",
                            alphabet.name(e),
                            self.commands.get(c).render(alphabet)
                        ),
                        None => alphabet.name(e).to_string(),
                    };
                    (x, label, d)
                })
            })
        })
    }
}

pub fn annotate(s: &Supervisor) -> AnnotatedSupervisor {
    let a = s.automaton();
    let k = a.alphabet().len();
    let mut commands = CommandTable::default();
    let state_command: Vec<CommandId> = a
        .states()
        .map(|x| commands.intern(control_command(s, x)))
        .collect();
    let observable = s.constraint().observable().clone();
    let mut trans = vec![None; a.num_states() * k];
    for (x, e, d) in a.transitions() {
        let cmd = observable.contains(e).then(|| state_command[d]);
        trans[x * k + e.index()] = Some((d, cmd));
    }
    AnnotatedSupervisor {
        num_events: k,
        observable,
        trans,
        state_command,
        initial: a.initial(),
        commands,
    }
}
