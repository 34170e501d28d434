//! CNF encoding of bounded behavior-preserving supervisor existence.
//!
//! A candidate supervisor `S'` has states `x0..x(n-1)` plus the dump `xn`
//! of its completion. Variable `t(i,σ,j)` says the completed transition
//! function maps `(xi, σ)` to `xj`; `r(i,y)` over-approximates reachability
//! of `(xi, y)` in the product of the completed `S'` with `G↓S`. The
//! formula is the conjunction of
//!
//! * exactly one successor for every non-dump state and observable event,
//! * no uncontrollable observable event leading to the dump,
//! * a reachable initial pair, with reachability propagated along
//!   transitions,
//! * no `Y_A` state paired with the dump, and no `Y_B` state paired with a
//!   non-dump state.
//!
//! Rows for unobservable events and for the dump are fixed by the normal
//! form and by completion, so they are compile-time constants rather than
//! solver variables.

use std::io::{self, Write};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::automata::{
    strip_dump, Alphabet, CompleteDfa, DualMarkedDfa, Event, EventSet, PartialDfa,
};
use crate::control::ControlConstraint;
use crate::sat::dimacs::write_dimacs;
use crate::sat::Model;

/// A transition variable, or the constant it was resolved to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TVar {
    Var(u32),
    True,
    False,
}

/// Variable addressing for one bound `n`. `t`-variables are allocated first
/// in `(i, event, j)` order, then `r`-variables in `(i, y)` order with `y` in
/// the breadth-first order of `G↓S`.
#[derive(Clone, Debug)]
pub struct VarTable {
    n: usize,
    alphabet: Arc<Alphabet>,
    observable: EventSet,
    num_y: usize,
    t: Vec<TVar>,
    r: Vec<u32>,
    next_free: u32,
    y_names: Vec<String>,
}

impl VarTable {
    pub fn new(
        n: usize,
        alphabet: Arc<Alphabet>,
        constraint: &ControlConstraint,
        gds: &DualMarkedDfa,
    ) -> Self {
        assert!(n >= 1, "bound must be positive");
        let k = alphabet.len();
        let mut next = 1u32;
        let mut t = Vec::with_capacity((n + 1) * k * (n + 1));
        for i in 0..=n {
            for e in alphabet.events() {
                for j in 0..=n {
                    let v = if i == n {
                        if j == n {
                            TVar::True
                        } else {
                            TVar::False
                        }
                    } else if !constraint.is_observable(e) {
                        if i == j {
                            TVar::True
                        } else {
                            TVar::False
                        }
                    } else {
                        next += 1;
                        TVar::Var(next - 1)
                    };
                    t.push(v);
                }
            }
        }
        let num_y = gds.num_states();
        let r: Vec<u32> = (0..(n + 1) * num_y).map(|o| next + o as u32).collect();
        next += r.len() as u32;
        VarTable {
            n,
            alphabet,
            observable: constraint.observable().clone(),
            num_y,
            t,
            r,
            next_free: next,
            y_names: gds.names.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn observable(&self) -> &EventSet {
        &self.observable
    }

    #[inline]
    pub fn t(&self, i: usize, e: Event, j: usize) -> TVar {
        let k = self.alphabet.len();
        self.t[(i * k + e.index()) * (self.n + 1) + j]
    }

    #[inline]
    pub fn r(&self, i: usize, y: usize) -> u32 {
        self.r[i * self.num_y + y]
    }

    pub fn num_vars(&self) -> u32 {
        self.next_free - 1
    }

    /// One `c t <i> <event> <j> = <var>` / `c r <i> <y> = <var>` line (without
    /// the `c `) per allocated variable, in allocation order.
    pub fn dimacs_comments(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..=self.n {
            for e in self.alphabet.events() {
                for j in 0..=self.n {
                    if let TVar::Var(v) = self.t(i, e, j) {
                        out.push(format!("t {i} {} {j} = {v}", self.alphabet.name(e)));
                    }
                }
            }
        }
        for i in 0..=self.n {
            for y in 0..self.num_y {
                out.push(format!("r {i} {} = {}", self.y_names[y], self.r(i, y)));
            }
        }
        out
    }
}

/// Constraint families of the encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ConstraintGroup {
    /// At most one target per state and observable event, the dump included.
    AtMostOne,
    /// At least one target per state and observable event.
    AtLeastOne,
    /// Observable uncontrollable events never lead to the dump.
    Controllability,
    /// The initial states are related.
    InitialReachable,
    /// The relation is closed under transitions.
    Propagation,
    /// Closed-loop strings never reach the dump.
    KeepAccepted,
    /// Strings the original supervisor disables always reach the dump.
    RejectSeparated,
}

impl ConstraintGroup {
    /// Short diagnostic name.
    pub fn label(self) -> &'static str {
        match self {
            ConstraintGroup::AtMostOne => "at-most-one",
            ConstraintGroup::AtLeastOne => "at-least-one",
            ConstraintGroup::Controllability => "controllability",
            ConstraintGroup::InitialReachable => "initial",
            ConstraintGroup::Propagation => "propagation",
            ConstraintGroup::KeepAccepted => "keep-accepted",
            ConstraintGroup::RejectSeparated => "reject-separated",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfInstance {
    pub num_vars: u32,
    pub clauses: Vec<Vec<i32>>,
    /// Clause count per constraint family, in emission order.
    pub groups: Vec<(ConstraintGroup, usize)>,
}

impl CnfInstance {
    fn push_group(&mut self, g: ConstraintGroup, clauses: Vec<Vec<i32>>) {
        self.groups.push((g, clauses.len()));
        self.clauses.extend(clauses);
    }
}

fn var(v: TVar) -> i32 {
    match v {
        TVar::Var(x) => x as i32,
        _ => panic!("constant transition variable in a solver clause"),
    }
}

/// The [`ConstraintGroup::AtMostOne`] and [`ConstraintGroup::AtLeastOne`] clauses.
pub fn encode_fsa(vt: &VarTable) -> (Vec<Vec<i32>>, Vec<Vec<i32>>) {
    let n = vt.n;
    let (mut amo, mut alo) = (Vec::new(), Vec::new());
    for i in 0..n {
        for e in vt.observable.iter() {
            for j in 0..=n {
                for k in j + 1..=n {
                    amo.push(vec![-var(vt.t(i, e, j)), -var(vt.t(i, e, k))]);
                }
            }
            alo.push((0..=n).map(|j| var(vt.t(i, e, j))).collect());
        }
    }
    (amo, alo)
}

/// The [`ConstraintGroup::Controllability`] clauses.
pub fn encode_con(vt: &VarTable, constraint: &ControlConstraint) -> Vec<Vec<i32>> {
    let n = vt.n;
    let events = constraint
        .uncontrollable()
        .intersection(constraint.observable());
    let mut out = Vec::new();
    for i in 0..n {
        for e in events.iter() {
            out.push((0..n).map(|j| var(vt.t(i, e, j))).collect());
        }
    }
    out
}

/// The relation clauses: initial, propagation, keep and reject, in that order.
pub fn encode_sep(vt: &VarTable, gds: &DualMarkedDfa) -> [Vec<Vec<i32>>; 4] {
    let n = vt.n;
    let init = vec![vec![vt.r(0, gds.initial()) as i32]];
    let mut prop = Vec::new();
    for i in 0..=n {
        for y1 in 0..gds.num_states() {
            for e in vt.alphabet.events() {
                let y2 = gds.next(y1, e);
                for j in 0..=n {
                    let from = vt.r(i, y1) as i32;
                    let to = vt.r(j, y2) as i32;
                    match vt.t(i, e, j) {
                        TVar::False => {}
                        TVar::True => {
                            if from != to {
                                prop.push(vec![-from, to]);
                            }
                        }
                        TVar::Var(t) => {
                            if from != to {
                                prop.push(vec![-from, -(t as i32), to]);
                            }
                        }
                    }
                }
            }
        }
    }
    let keep = (0..gds.num_states())
        .filter(|&y| gds.mark_a[y])
        .map(|y| vec![-(vt.r(n, y) as i32)])
        .collect();
    let reject = (0..gds.num_states())
        .filter(|&y| gds.mark_b[y])
        .flat_map(|y| (0..n).map(move |i| (i, y)))
        .map(|(i, y)| vec![-(vt.r(i, y) as i32)])
        .collect();
    [init, prop, keep, reject]
}

/// Builds the full formula for bound `n`.
pub fn encode(
    n: usize,
    gds: &DualMarkedDfa,
    alphabet: &Arc<Alphabet>,
    constraint: &ControlConstraint,
) -> (CnfInstance, VarTable) {
    let vt = VarTable::new(n, alphabet.clone(), constraint, gds);
    let mut cnf = CnfInstance {
        num_vars: vt.num_vars(),
        ..Default::default()
    };
    let (amo, alo) = encode_fsa(&vt);
    cnf.push_group(ConstraintGroup::AtMostOne, amo);
    cnf.push_group(ConstraintGroup::AtLeastOne, alo);
    cnf.push_group(
        ConstraintGroup::Controllability,
        encode_con(&vt, constraint),
    );
    let [init, prop, keep, reject] = encode_sep(&vt, gds);
    cnf.push_group(ConstraintGroup::InitialReachable, init);
    cnf.push_group(ConstraintGroup::Propagation, prop);
    cnf.push_group(ConstraintGroup::KeepAccepted, keep);
    cnf.push_group(ConstraintGroup::RejectSeparated, reject);
    (cnf, vt)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("model gives state {state} several successors on {event:?}")]
    Ambiguous { state: usize, event: String },
    #[error("model gives state {state} no successor on {event:?}")]
    Missing { state: usize, event: String },
}

fn successor(model: &Model, vt: &VarTable, i: usize, e: Event) -> Result<usize, DecodeError> {
    let mut found = None;
    for j in 0..=vt.n {
        let on = match vt.t(i, e, j) {
            TVar::True => true,
            TVar::False => false,
            TVar::Var(v) => model.value(v),
        };
        if on {
            if found.is_some() {
                return Err(DecodeError::Ambiguous {
                    state: i,
                    event: vt.alphabet.name(e).into(),
                });
            }
            found = Some(j);
        }
    }
    found.ok_or_else(|| DecodeError::Missing {
        state: i,
        event: vt.alphabet.name(e).into(),
    })
}

/// The completed candidate `S̄'` with `n + 1` states, the last being the dump.
pub fn decode_complete(model: &Model, vt: &VarTable) -> Result<CompleteDfa, DecodeError> {
    let n = vt.n;
    let names = (0..n)
        .map(|i| format!("x{i}"))
        .chain(std::iter::once("xd".to_string()));
    let mut p = PartialDfa::new(vt.alphabet.clone(), names, 0).expect("n >= 1");
    for i in 0..=n {
        for e in vt.alphabet.events() {
            let j = successor(model, vt, i, e)?;
            p.add_transition(i, e, j).expect("fresh table");
        }
    }
    Ok(CompleteDfa::from_total(p, n).expect("dump row is constant"))
}

/// A decoded supervisor together with the candidate indices of its states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub supervisor: PartialDfa,
    /// Reachable candidate states, ascending; position `k` is state `k` of
    /// `supervisor`.
    pub reachable: Vec<usize>,
}

/// Strips the dump from the decoded completion and restricts to the part
/// reachable from `x0`.
pub fn decode(model: &Model, vt: &VarTable) -> Result<Decoded, DecodeError> {
    let full = strip_dump(&decode_complete(model, vt)?);
    let mut reachable = full.reachable_order();
    reachable.sort_unstable();
    Ok(Decoded {
        supervisor: full.restrict(&reachable),
        reachable,
    })
}

/// Clause excluding every model whose transition function agrees with
/// `model` on the reachable candidate states.
pub fn blocking_clause(model: &Model, vt: &VarTable, reachable: &[usize]) -> Vec<i32> {
    let mut out = Vec::new();
    for &i in reachable {
        for e in vt.observable.iter() {
            for j in 0..=vt.n {
                if let TVar::Var(v) = vt.t(i, e, j) {
                    if model.value(v) {
                        out.push(-(v as i32));
                    }
                }
            }
        }
    }
    out
}

/// Clause excluding the given transition table placed on candidate states
/// via `place` (table state `k` is candidate `place[k]`). `None` targets go
/// to the dump.
pub fn blocking_clause_for_table(
    vt: &VarTable,
    table: &[Option<usize>],
    place: &[usize],
) -> Vec<i32> {
    let k = vt.alphabet.len();
    let mut out = Vec::new();
    for (s, &i) in place.iter().enumerate() {
        for e in vt.observable.iter() {
            let j = table[s * k + e.index()].map_or(vt.n, |d| place[d]);
            if let TVar::Var(v) = vt.t(i, e, j) {
                out.push(-(v as i32));
            }
        }
    }
    out
}

/// Writes the instance as DIMACS, preceded by the variable map comments.
pub fn export_dimacs<W: Write>(cnf: &CnfInstance, vt: &VarTable, sink: W) -> io::Result<()> {
    write_dimacs(sink, cnf.num_vars, &cnf.clauses, &vt.dimacs_comments())
}
