use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use super::annotate::{CommandId, CommandTable};
use super::product::{AttackOutcome, GpAutomaton, GpLabel};
use crate::automata::dot::{escape, write_edges};
use crate::automata::{Alphabet, Event, EventSet};
use crate::control::AttackConstraint;

/// An attacker-view event `(o, γ)`; `seen = None` is `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObsEvent {
    pub seen: Option<Event>,
    pub command: CommandId,
}

/// Attacker projection of the core of a generalized product: each
/// observable label keeps only its `(o, γ)` part and each unobservable label
/// becomes `ε`. Attack transitions are not part of it.
#[derive(Clone, Debug)]
pub struct EpsAutomaton {
    pub eps: Vec<Vec<usize>>,
    pub obs: Vec<Vec<(ObsEvent, usize)>>,
}

pub fn attacker_projection(gp: &GpAutomaton) -> EpsAutomaton {
    let mut eps = vec![Vec::new(); gp.num_states()];
    let mut obs = vec![Vec::new(); gp.num_states()];
    for (v, out) in gp.edges.iter().enumerate() {
        for &(label, d) in out {
            match label {
                GpLabel::Observable { seen, command, .. } => {
                    obs[v].push((ObsEvent { seen, command }, d))
                }
                GpLabel::Unobservable(_) => eps[v].push(d),
            }
        }
    }
    EpsAutomaton { eps, obs }
}

/// Determinization of the attacker projection, with the attack labelling.
///
/// `labels[y]` holds the attackable events `σ` for which some state of `y`
/// reaches `⊤` on `σ` while no state of `y` reaches `⊥` on `σ`.
#[derive(Clone, Debug)]
pub struct SubsetAutomaton {
    /// Sorted core-state indices of each subset; subset 0 is initial.
    pub subsets: Vec<Vec<usize>>,
    pub trans: Vec<Vec<(ObsEvent, usize)>>,
    pub labels: Vec<EventSet>,
    /// Breadth-first tree: predecessor subset and the event leading here.
    pub pred: Vec<Option<(usize, ObsEvent)>>,
}

fn closure(eps: &EpsAutomaton, seeds: impl IntoIterator<Item = usize>, n: usize) -> Vec<usize> {
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    for s in seeds {
        if !seen[s] {
            seen[s] = true;
            stack.push(s);
        }
    }
    let mut out = stack.clone();
    while let Some(v) = stack.pop() {
        for &d in &eps.eps[v] {
            if !seen[d] {
                seen[d] = true;
                stack.push(d);
                out.push(d);
            }
        }
    }
    out.sort_unstable();
    out
}

fn label(subset: &[usize], gp: &GpAutomaton, ac: &AttackConstraint, universe: usize) -> EventSet {
    let mut out = EventSet::empty(universe);
    for e in ac.attackable().iter() {
        let mut top = false;
        let mut bot = false;
        for &v in subset {
            match gp.attack(v, e) {
                Some(AttackOutcome::Top) => top = true,
                Some(AttackOutcome::Bot) => bot = true,
                None => {}
            }
        }
        if top && !bot {
            out.insert(e);
        }
    }
    out
}

/// Subset construction with `ε`-closure before and after every observable
/// step. Subsets and their successors are discovered breadth-first with
/// successor events visited in `(o, γ)` order.
pub fn determinize_and_label(
    eps: &EpsAutomaton,
    gp: &GpAutomaton,
    ac: &AttackConstraint,
) -> SubsetAutomaton {
    let n = gp.num_states();
    let universe = ac.attackable().universe();
    let init = closure(eps, [0], n);
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(init.clone(), 0)]);
    let mut sa = SubsetAutomaton {
        labels: vec![label(&init, gp, ac, universe)],
        subsets: vec![init],
        trans: Vec::new(),
        pred: vec![None],
    };
    let mut i = 0;
    while i < sa.subsets.len() {
        let mut moves: BTreeMap<ObsEvent, Vec<usize>> = BTreeMap::new();
        for &v in &sa.subsets[i] {
            for &(o, d) in &eps.obs[v] {
                moves.entry(o).or_default().push(d);
            }
        }
        let mut out = Vec::with_capacity(moves.len());
        for (o, seeds) in moves {
            let target = closure(eps, seeds, n);
            let j = match index.get(&target) {
                Some(&j) => j,
                None => {
                    let j = sa.subsets.len();
                    index.insert(target.clone(), j);
                    sa.labels.push(label(&target, gp, ac, universe));
                    sa.subsets.push(target);
                    sa.pred.push(Some((i, o)));
                    j
                }
            };
            out.push((o, j));
        }
        sa.trans.push(out);
        i += 1;
    }
    sa
}

impl SubsetAutomaton {
    pub fn num_states(&self) -> usize {
        self.subsets.len()
    }

    /// Attacker-view events from the initial subset to `y` along the
    /// breadth-first tree; a shortest such path.
    pub fn path_to(&self, mut y: usize) -> Vec<ObsEvent> {
        let mut path = Vec::new();
        while let Some((p, o)) = self.pred[y] {
            path.push(o);
            y = p;
        }
        path.reverse();
        path
    }

    /// Subset reached by an attacker observation, if any.
    pub fn run(&self, word: &[ObsEvent]) -> Option<usize> {
        word.iter().try_fold(0, |y, o| {
            self.trans[y].iter().find(|(e, _)| e == o).map(|&(_, d)| d)
        })
    }

    /// Graphviz rendering; subsets with a nonempty label are filled red and
    /// list their attack events.
    pub fn to_dot(
        &self,
        gp: &GpAutomaton,
        commands: &CommandTable,
        alphabet: &Alphabet,
        name: &str,
    ) -> String {
        let mut out = String::new();
        writeln!(out, "digraph \"{}\" {{", escape(name)).unwrap();
        writeln!(out, "  rankdir=LR;").unwrap();
        writeln!(out, "  init [shape=point];").unwrap();
        writeln!(out, "  init -> n0;").unwrap();
        for (y, subset) in self.subsets.iter().enumerate() {
            let members: Vec<String> = subset
                .iter()
                .map(|&v| {
                    let (q, x, z) = gp.states[v];
                    format!("({q},{x},{z})")
                })
                .collect();
            let mut label = format!("{{{}}}", members.join(" "));
            let style = if self.labels[y].is_empty() {
                ""
            } else {
                label.push_str(&format!("\\nLf={}", self.labels[y].render(alphabet)));
                ", style=filled, fillcolor=salmon"
            };
            writeln!(
                out,
                "  n{y} [label=\"{}\", shape=box{style}];",
                escape(&label).replace("\\\\n", "\\n")
            )
            .unwrap();
        }
        write_edges(
            &mut out,
            self.trans.iter().enumerate().flat_map(|(y, ts)| {
                ts.iter()
                    .map(move |&(o, d)| (y, render_obs(o, commands, alphabet), d))
            }),
            |_| "",
        );
        out.push_str("}\n");
        out
    }
}

/// `(o, {γ})` with `ε` for an unobserved event.
pub fn render_obs(o: ObsEvent, commands: &CommandTable, alphabet: &Alphabet) -> String {
    let seen = o.seen.map_or("ε", |e| alphabet.name(e));
    format!("({seen}, {})", commands.get(o.command).render(alphabet))
}
