//! Line-oriented problem file format.
//!
//! ```text
//! [alphabet]
//! a b c
//! [controllable]
//! a
//! [observable]
//! a b
//! [attackable]
//! [attacker-observable]
//! [plant]
//! states: q0 q1
//! initial: q0
//! trans:
//! q0 a q1
//! [supervisor]
//! ...
//! [damage]
//! states: z0 z1
//! initial: z0
//! marked: z1
//! auto-complete: true
//! trans:
//! z0 a z1
//! ```
//!
//! `#` starts a comment. Flag sections list event names. The optional
//! `[target-controllable]` and `[target-observable]` sections give the control
//! constraint for synthesized supervisors; each defaults to its counterpart.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;
use std::sync::Arc;

use thiserror::Error;

use crate::automata::{Alphabet, Event, EventFlags, EventSet, PartialDfa};
use crate::control::{AttackConstraint, ControlConstraint};

/// A diagnostic; `line` is 1-based, or 0 when it concerns the whole file.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{}{message}", if *.line > 0 { format!("line {}: ", .line) } else { String::new() })]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

const FLAG_SECTIONS: [&str; 6] = [
    "controllable",
    "observable",
    "attackable",
    "attacker-observable",
    "target-controllable",
    "target-observable",
];
const REQUIRED: [&str; 8] = [
    "alphabet",
    "controllable",
    "observable",
    "attackable",
    "attacker-observable",
    "plant",
    "supervisor",
    "damage",
];

/// A parsed and cross-checked problem instance. The supervisor is not yet
/// checked against its control constraint.
#[derive(Clone, Debug)]
pub struct Problem {
    pub alphabet: Arc<Alphabet>,
    pub control: ControlConstraint,
    /// Control constraint for synthesized supervisors.
    pub target: ControlConstraint,
    pub attack: AttackConstraint,
    pub plant: PartialDfa,
    pub supervisor: PartialDfa,
    pub damage: PartialDfa,
    /// Whether the damage automaton received a sink state during loading.
    pub damage_completed: bool,
}

type Line<'a> = (usize, Vec<&'a str>);
/// Section headers in file order, and the lines of each section.
type Sections<'a> = (Vec<(&'a str, usize)>, HashMap<&'a str, Vec<Line<'a>>>);

/// Splits the text into sections of nonempty, comment-free token lines.
fn sections(text: &str) -> Result<Sections<'_>, ParseError> {
    let mut order = Vec::new();
    let mut map: HashMap<&str, Vec<Line>> = HashMap::new();
    let mut current: Option<&str> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return err(lineno, format!("malformed section header {line:?}"));
            };
            let name = name.trim();
            if !REQUIRED.contains(&name) && !FLAG_SECTIONS.contains(&name) {
                return err(lineno, format!("unknown section [{name}]"));
            }
            if map.contains_key(name) {
                return err(lineno, format!("duplicate section [{name}]"));
            }
            map.insert(name, Vec::new());
            order.push((name, lineno));
            current = Some(name);
            continue;
        }
        let Some(sec) = current else {
            return err(lineno, "content before the first section header");
        };
        map.get_mut(sec)
            .unwrap()
            .push((lineno, line.split_whitespace().collect()));
    }
    Ok((order, map))
}

fn event_list(alphabet: &Alphabet, lines: &[Line]) -> Result<EventSet, ParseError> {
    let mut set = EventSet::empty(alphabet.len());
    for (lineno, toks) in lines {
        for t in toks {
            match alphabet.lookup(t) {
                Some(e) => set.insert(e),
                None => return err(*lineno, format!("unknown event {t:?}")),
            }
        }
    }
    Ok(set)
}

/// Parses the body of an automaton section.
pub fn parse_automaton(
    alphabet: &Arc<Alphabet>,
    section: &str,
    header_line: usize,
    lines: &[Line],
    allow_auto_complete: bool,
) -> Result<(PartialDfa, bool), ParseError> {
    let mut states: Vec<String> = Vec::new();
    let mut initial: Option<(usize, String)> = None;
    let mut marked: Option<Vec<(usize, String)>> = None;
    let mut auto_complete = false;
    let mut trans: Vec<(usize, &str, &str, &str)> = Vec::new();
    let mut in_trans = false;
    for &(lineno, ref toks) in lines {
        let key = toks[0];
        let rest = &toks[1..];
        match key {
            "states:" => {
                in_trans = false;
                states.extend(rest.iter().map(|s| s.to_string()));
            }
            "initial:" => {
                in_trans = false;
                if rest.len() != 1 {
                    return err(lineno, "initial: expects exactly one state");
                }
                if initial.is_some() {
                    return err(lineno, "initial state given twice");
                }
                initial = Some((lineno, rest[0].to_string()));
            }
            "marked:" => {
                in_trans = false;
                marked
                    .get_or_insert_with(Vec::new)
                    .extend(rest.iter().map(|s| (lineno, s.to_string())));
            }
            "auto-complete:" => {
                in_trans = false;
                if !allow_auto_complete {
                    return err(
                        lineno,
                        format!("auto-complete is only allowed in [damage], not [{section}]"),
                    );
                }
                auto_complete = match rest {
                    ["true"] => true,
                    ["false"] => false,
                    _ => return err(lineno, "auto-complete: expects true or false"),
                };
            }
            "trans:" => {
                if !rest.is_empty() {
                    return err(lineno, "transitions go on the lines after trans:");
                }
                in_trans = true;
            }
            _ if in_trans => {
                let [src, ev, dst] = toks[..] else {
                    return err(
                        lineno,
                        format!(
                            "expected `<src> <event> <dst>`, found {} token(s)",
                            toks.len()
                        ),
                    );
                };
                trans.push((lineno, src, ev, dst));
            }
            _ => return err(lineno, format!("unexpected {key:?} in [{section}]")),
        }
    }
    if states.is_empty() {
        return err(header_line, format!("[{section}] declares no states"));
    }
    let mut seen = HashSet::new();
    for s in &states {
        if s.contains(':') {
            return err(header_line, format!("state name {s:?} contains ':'"));
        }
        if !seen.insert(s.as_str()) {
            return err(header_line, format!("duplicate state {s:?} in [{section}]"));
        }
    }
    let index: HashMap<&str, usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let state = |lineno: usize, name: &str| -> Result<usize, ParseError> {
        index.get(name).copied().ok_or_else(|| ParseError {
            line: lineno,
            message: format!("unknown state {name:?} in [{section}]"),
        })
    };
    let Some((init_line, init)) = initial else {
        return err(header_line, format!("[{section}] has no initial: line"));
    };
    let init = state(init_line, &init)?;
    let mut p = PartialDfa::new(alphabet.clone(), states.iter().cloned(), init).map_err(|e| {
        ParseError {
            line: header_line,
            message: e.to_string(),
        }
    })?;
    for (lineno, src, ev, dst) in trans {
        let s = state(lineno, src)?;
        let d = state(lineno, dst)?;
        let Some(e) = alphabet.lookup(ev) else {
            return err(lineno, format!("unknown event {ev:?}"));
        };
        if p.next(s, e).is_some() {
            return err(
                lineno,
                format!("duplicate transition from {src:?} on {ev:?}"),
            );
        }
        p.add_transition(s, e, d).map_err(|e| ParseError {
            line: lineno,
            message: e.to_string(),
        })?;
    }
    if section == "damage" && marked.is_none() {
        return err(
            header_line,
            "[damage] needs a marked: line (it may be empty)",
        );
    }
    if let Some(m) = marked {
        let mut flags = vec![false; p.num_states()];
        for (lineno, name) in m {
            flags[state(lineno, &name)?] = true;
        }
        p.set_marked(Some(flags)).expect("sized to the state count");
    }
    let completed = auto_complete && !p.is_total();
    if completed {
        p = add_sink(&p);
    }
    Ok((p, completed))
}

/// Adds a fresh non-marked absorbing state receiving every undefined
/// transition.
pub fn add_sink(p: &PartialDfa) -> PartialDfa {
    let mut name = "sink".to_string();
    while p.state_by_name(&name).is_some() {
        name.insert(0, '_');
    }
    let names = p.names().iter().cloned().chain(std::iter::once(name));
    let mut out = PartialDfa::new(p.alphabet().clone(), names, p.initial()).expect("initial kept");
    let sink = p.num_states();
    for q in 0..=sink {
        for e in p.alphabet().events() {
            let d = if q < sink {
                p.next(q, e).unwrap_or(sink)
            } else {
                sink
            };
            out.add_transition(q, e, d).expect("fresh table");
        }
    }
    let mut marks: Vec<bool> = p
        .states()
        .map(|q| p.is_marked(q) && p.has_marking())
        .collect();
    marks.push(false);
    out.set_marked(Some(marks)).expect("sized");
    out
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let (order, map) = sections(text)?;
    for name in REQUIRED {
        if !map.contains_key(name) {
            return err(0, format!("missing section [{name}]"));
        }
    }
    let header = |name: &str| {
        order
            .iter()
            .find(|(n, _)| *n == name)
            .map_or(0, |&(_, l)| l)
    };

    let mut names: Vec<(usize, &str)> = Vec::new();
    for (lineno, toks) in &map["alphabet"] {
        names.extend(toks.iter().map(|t| (*lineno, *t)));
    }
    if names.is_empty() {
        return err(header("alphabet"), "empty alphabet");
    }
    let mut declared = HashSet::new();
    for &(lineno, n) in &names {
        if !declared.insert(n) {
            return err(lineno, format!("duplicate event {n:?}"));
        }
    }
    let plain = Alphabet::plain(names.iter().map(|(_, n)| *n)).map_err(|e| ParseError {
        line: header("alphabet"),
        message: e.to_string(),
    })?;
    let flag_set = |sec: &str| event_list(&plain, &map[sec]);
    let controllable = flag_set("controllable")?;
    let observable = flag_set("observable")?;
    let attackable = flag_set("attackable")?;
    let attacker_observable = flag_set("attacker-observable")?;
    let alphabet = Arc::new(
        Alphabet::new(plain.events().map(|e| {
            (
                plain.name(e).to_string(),
                EventFlags {
                    controllable: controllable.contains(e),
                    observable: observable.contains(e),
                    attackable: attackable.contains(e),
                    attacker_observable: attacker_observable.contains(e),
                },
            )
        }))
        .map_err(|e| ParseError {
            line: 0,
            message: e.to_string(),
        })?,
    );
    let control = ControlConstraint::from_alphabet(&alphabet);
    let attack = AttackConstraint::from_alphabet(&alphabet);
    let target_c = match map.get("target-controllable") {
        Some(lines) => event_list(&alphabet, lines)?,
        None => control.controllable().clone(),
    };
    let target_o = match map.get("target-observable") {
        Some(lines) => event_list(&alphabet, lines)?,
        None => control.observable().clone(),
    };
    let target = ControlConstraint::new(target_c, target_o).map_err(|e| ParseError {
        line: header("target-controllable").max(header("target-observable")),
        message: format!("target constraint: {e}"),
    })?;
    AttackConstraint::new(attackable, attacker_observable, &target).map_err(|e| ParseError {
        line: header("target-controllable").max(header("target-observable")),
        message: format!("target constraint vs attack constraint: {e}"),
    })?;

    let (plant, _) = parse_automaton(&alphabet, "plant", header("plant"), &map["plant"], false)?;
    let (supervisor, _) = parse_automaton(
        &alphabet,
        "supervisor",
        header("supervisor"),
        &map["supervisor"],
        false,
    )?;
    let (damage, damage_completed) =
        parse_automaton(&alphabet, "damage", header("damage"), &map["damage"], true)?;
    Ok(Problem {
        alphabet,
        control,
        target,
        attack,
        plant,
        supervisor,
        damage,
        damage_completed,
    })
}

/// Parses a file holding a single `[supervisor]` section over `alphabet`.
pub fn parse_supervisor(text: &str, alphabet: &Arc<Alphabet>) -> Result<PartialDfa, ParseError> {
    let (order, map) = sections(text)?;
    if order.len() != 1 || order[0].0 != "supervisor" {
        return err(0, "expected exactly one [supervisor] section");
    }
    Ok(parse_automaton(
        alphabet,
        "supervisor",
        order[0].1,
        &map["supervisor"],
        false,
    )?
    .0)
}

/// Renders an automaton as a section that [`parse_automaton`] reads back to
/// the same automaton.
pub fn write_automaton(section: &str, p: &PartialDfa) -> String {
    let mut out = String::new();
    writeln!(out, "[{section}]").unwrap();
    key_line(&mut out, "states:", p.names().iter().map(String::as_str));
    writeln!(out, "initial: {}", p.name(p.initial())).unwrap();
    if let Some(m) = p.marking() {
        key_line(
            &mut out,
            "marked:",
            p.states().filter(|&q| m[q]).map(|q| p.name(q)),
        );
    }
    writeln!(out, "trans:").unwrap();
    for (q, e, d) in p.transitions() {
        writeln!(out, "{} {} {}", p.name(q), p.alphabet().name(e), p.name(d)).unwrap();
    }
    out
}

fn key_line<'a>(out: &mut String, key: &str, items: impl Iterator<Item = &'a str>) {
    out.push_str(key);
    for i in items {
        out.push(' ');
        out.push_str(i);
    }
    out.push('\n');
}

fn write_events(
    out: &mut String,
    section: &str,
    alphabet: &Alphabet,
    set: impl Iterator<Item = Event>,
) {
    writeln!(out, "[{section}]").unwrap();
    let names: Vec<&str> = set.map(|e| alphabet.name(e)).collect();
    if !names.is_empty() {
        writeln!(out, "{}", names.join(" ")).unwrap();
    }
}

/// Renders a whole problem; the damage automaton is written in completed
/// form.
pub fn write_problem(p: &Problem) -> String {
    let a = &p.alphabet;
    let mut out = String::new();
    write_events(&mut out, "alphabet", a, a.events());
    write_events(&mut out, "controllable", a, p.control.controllable().iter());
    write_events(&mut out, "observable", a, p.control.observable().iter());
    write_events(&mut out, "attackable", a, p.attack.attackable().iter());
    write_events(
        &mut out,
        "attacker-observable",
        a,
        p.attack.attacker_observable().iter(),
    );
    if p.target.controllable() != p.control.controllable() {
        write_events(
            &mut out,
            "target-controllable",
            a,
            p.target.controllable().iter(),
        );
    }
    if p.target.observable() != p.control.observable() {
        write_events(
            &mut out,
            "target-observable",
            a,
            p.target.observable().iter(),
        );
    }
    out.push_str(&write_automaton("plant", &p.plant));
    out.push_str(&write_automaton("supervisor", &p.supervisor));
    out.push_str(&write_automaton("damage", &p.damage));
    out
}
