//! Shared helpers for the integration tests: fixture loading, random
//! instances and brute-force enumerations used as oracles.

#![allow(dead_code)]

pub mod criteria;

use std::path::PathBuf;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use supobf::automata::{sync_product, Alphabet, Event, EventFlags, PartialDfa};
use supobf::control::{closed_loop, AttackConstraint, ControlConstraint, Supervisor};
use supobf::problem::{load, Loaded};

#[derive(Clone, Debug)]
pub struct Instance {
    pub alphabet: Arc<Alphabet>,
    pub control: ControlConstraint,
    pub attack: AttackConstraint,
    pub plant: PartialDfa,
    pub supervisor: Supervisor,
    pub damage: PartialDfa,
}

impl Instance {
    pub fn closed_loop(&self) -> PartialDfa {
        closed_loop(&self.plant, &self.supervisor)
    }

    pub fn with_supervisor(&self, s: PartialDfa) -> Instance {
        let supervisor = Supervisor::new(s, self.control.clone()).expect("valid supervisor");
        Instance {
            supervisor,
            ..self.clone()
        }
    }
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn loaded(name: &str) -> Loaded {
    load(&fixture_text(name), None, false).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture(name: &str) -> Instance {
    let l = loaded(name);
    Instance {
        alphabet: l.problem.alphabet.clone(),
        control: l.problem.control.clone(),
        attack: l.problem.attack.clone(),
        plant: l.problem.plant.clone(),
        supervisor: l.supervisor.clone(),
        damage: l.problem.damage.clone(),
    }
}

pub const FIXTURES: [&str; 5] = [
    "tri.problem",
    "single.problem",
    "atk.problem",
    "example1.problem",
    "perf.problem",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub events: usize,
    pub plant: usize,
    pub supervisor: usize,
    pub damage: usize,
    /// Probability that a plant transition is defined.
    pub density: f64,
}

/// Event flags drawn at random subject to the alphabet invariants.
pub fn random_alphabet(rng: &mut impl Rng, k: usize) -> Arc<Alphabet> {
    let events = (0..k).map(|i| {
        let observable = rng.gen_bool(0.75);
        let controllable = observable && rng.gen_bool(0.6);
        let attacker_observable = observable && rng.gen_bool(0.6);
        let attackable = controllable && attacker_observable && rng.gen_bool(0.7);
        let name = ["a", "b", "c", "d", "e", "f"][i].to_string();
        (
            name,
            EventFlags {
                controllable,
                observable,
                attackable,
                attacker_observable,
            },
        )
    });
    Arc::new(Alphabet::new(events).unwrap())
}

pub fn random_plant(
    rng: &mut impl Rng,
    alphabet: &Arc<Alphabet>,
    n: usize,
    density: f64,
) -> PartialDfa {
    let mut g = PartialDfa::new(alphabet.clone(), (0..n).map(|i| format!("q{i}")), 0).unwrap();
    for q in 0..n {
        for e in alphabet.events() {
            if rng.gen_bool(density) {
                g.add_transition(q, e, rng.gen_range(0..n)).unwrap();
            }
        }
    }
    g
}

/// A supervisor satisfying the normal form for the alphabet's constraint.
pub fn random_supervisor(rng: &mut impl Rng, alphabet: &Arc<Alphabet>, n: usize) -> PartialDfa {
    let mut s = PartialDfa::new(alphabet.clone(), (0..n).map(|i| format!("x{i}")), 0).unwrap();
    for x in 0..n {
        for e in alphabet.events() {
            let f = alphabet.flags(e);
            if !f.observable {
                s.add_transition(x, e, x).unwrap();
            } else if !f.controllable || rng.gen_bool(0.6) {
                s.add_transition(x, e, rng.gen_range(0..n)).unwrap();
            }
        }
    }
    s
}

/// A complete damage automaton whose marked states are never reached by a
/// closed-loop string.
pub fn random_damage(
    rng: &mut impl Rng,
    alphabet: &Arc<Alphabet>,
    n: usize,
    closed: &PartialDfa,
) -> PartialDfa {
    let mut h = PartialDfa::new(alphabet.clone(), (0..n).map(|i| format!("z{i}")), 0).unwrap();
    for z in 0..n {
        for e in alphabet.events() {
            h.add_transition(z, e, rng.gen_range(0..n)).unwrap();
        }
    }
    let mut marks: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let mut plain = h.clone();
    plain.set_marked(None).unwrap();
    let mut k = closed.clone();
    k.set_marked(None).unwrap();
    let kh = sync_product(&k, &plain);
    for name in kh.names() {
        let z = name.rsplit(',').next().unwrap().trim_end_matches(')');
        marks[plain.state_by_name(z).unwrap()] = false;
    }
    h.set_marked(Some(marks)).unwrap();
    h
}

pub fn random_instance(rng: &mut impl Rng, shape: Shape) -> Instance {
    let alphabet = random_alphabet(rng, shape.events);
    let control = ControlConstraint::from_alphabet(&alphabet);
    let attack = AttackConstraint::from_alphabet(&alphabet);
    let plant = random_plant(rng, &alphabet, shape.plant, shape.density);
    let supervisor = Supervisor::new(
        random_supervisor(rng, &alphabet, shape.supervisor),
        control.clone(),
    )
    .unwrap();
    let closed = closed_loop(&plant, &supervisor);
    let damage = random_damage(rng, &alphabet, shape.damage, &closed);
    Instance {
        alphabet,
        control,
        attack,
        plant,
        supervisor,
        damage,
    }
}

/// Every supervisor on exactly `n` states (all of them, reachable or not)
/// that satisfies the normal form for `constraint`.
pub fn all_supervisors(
    alphabet: &Arc<Alphabet>,
    constraint: &ControlConstraint,
    n: usize,
) -> Vec<PartialDfa> {
    let slots: Vec<(usize, Event, bool)> = (0..n)
        .flat_map(|x| {
            constraint
                .observable()
                .iter()
                .map(move |e| (x, e))
                .collect::<Vec<_>>()
        })
        .map(|(x, e)| (x, e, constraint.is_controllable(e)))
        .collect();
    let radix: Vec<usize> = slots
        .iter()
        .map(|&(_, _, c)| if c { n + 1 } else { n })
        .collect();
    let mut digits = vec![0usize; slots.len()];
    let mut out = Vec::new();
    loop {
        let mut s = PartialDfa::new(alphabet.clone(), (0..n).map(|i| format!("x{i}")), 0).unwrap();
        for x in 0..n {
            for e in constraint.unobservable().iter() {
                s.add_transition(x, e, x).unwrap();
            }
        }
        for (&(x, e, _), &d) in slots.iter().zip(&digits) {
            if d < n {
                s.add_transition(x, e, d).unwrap();
            }
        }
        out.push(s);
        let mut i = 0;
        loop {
            if i == digits.len() {
                return out;
            }
            digits[i] += 1;
            if digits[i] < radix[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// All words over the alphabet of length at most `max_len`, shortest first.
pub fn words(alphabet: &Alphabet, max_len: usize) -> Vec<Vec<Event>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for e in alphabet.events() {
                let mut v: Vec<Event> = w.clone();
                v.push(e);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Membership agreement on all words up to `max_len`, checked by running
/// both automata word by word.
pub fn agree_upto(a: &PartialDfa, b: &PartialDfa, max_len: usize) -> bool {
    words(a.alphabet(), max_len)
        .iter()
        .all(|w| a.run(w).is_some() == b.run(w).is_some())
}

/// Behavior preservation `L(s2 ∥ g) = L(s ∥ g)`, checked by exploring
/// closed-loop words and merging words that reach the same state triple.
pub fn preserves_by_words(g: &PartialDfa, s: &PartialDfa, s2: &PartialDfa) -> bool {
    let start = (g.initial(), s.initial(), s2.initial());
    let mut seen = std::collections::HashSet::from([start]);
    let mut stack = vec![start];
    while let Some((q, x, y)) = stack.pop() {
        for e in g.alphabet().events() {
            let Some(q2) = g.next(q, e) else { continue };
            match (s.next(x, e), s2.next(y, e)) {
                (Some(x2), Some(y2)) => {
                    if seen.insert((q2, x2, y2)) {
                        stack.push((q2, x2, y2));
                    }
                }
                (None, None) => {}
                _ => return false,
            }
        }
    }
    true
}

/// The same automaton with its states permuted by `perm` (old `q` becomes
/// new `perm[q]`).
pub fn permute(p: &PartialDfa, perm: &[usize]) -> PartialDfa {
    let mut names = vec![String::new(); p.num_states()];
    for q in p.states() {
        names[perm[q]] = p.name(q).to_string();
    }
    let mut out = PartialDfa::new(p.alphabet().clone(), names, perm[p.initial()]).unwrap();
    for (q, e, d) in p.transitions() {
        out.add_transition(perm[q], e, perm[d]).unwrap();
    }
    out
}

pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    v
}

/// Damage as a copy of the plant plus one marked state. Plant moves on
/// attackable events that the closed loop never takes are redirected to the
/// marked state at random; moves the plant lacks become self-loops. Unlike
/// [`random_damage`] this ties damage to moves the supervisor disables,
/// which makes attacks common.
pub fn plant_damage(
    rng: &mut impl Rng,
    plant: &PartialDfa,
    s: &Supervisor,
    attack: &AttackConstraint,
) -> PartialDfa {
    let n = plant.num_states();
    let sup = s.automaton();
    let mut taken = std::collections::HashSet::new();
    let mut seen = std::collections::HashSet::from([(plant.initial(), sup.initial())]);
    let mut stack = vec![(plant.initial(), sup.initial())];
    while let Some((q, x)) = stack.pop() {
        for e in plant.alphabet().events() {
            if let (Some(q2), Some(x2)) = (plant.next(q, e), sup.next(x, e)) {
                taken.insert((q, e));
                if seen.insert((q2, x2)) {
                    stack.push((q2, x2));
                }
            }
        }
    }
    let names = plant.names().iter().cloned().chain(["dmg".to_string()]);
    let mut h = PartialDfa::new(plant.alphabet().clone(), names, plant.initial()).unwrap();
    for q in 0..=n {
        for e in plant.alphabet().events() {
            let d = match (q < n).then(|| plant.next(q, e)).flatten() {
                None => q,
                Some(_)
                    if attack.is_attackable(e) && !taken.contains(&(q, e)) && rng.gen_bool(0.5) =>
                {
                    n
                }
                Some(d) => d,
            };
            h.add_transition(q, e, d).unwrap();
        }
    }
    h.set_marked(Some((0..=n).map(|q| q == n).collect()))
        .unwrap();
    h
}

/// A random instance with at least one attackable event and plant-copy
/// damage.
pub fn random_attack_instance(rng: &mut impl Rng, shape: Shape) -> Instance {
    let mut i = random_instance(rng, shape);
    while i.attack.attackable().is_empty() {
        i = random_instance(rng, shape);
    }
    i.damage = plant_damage(rng, &i.plant, &i.supervisor, &i.attack);
    i
}

/// `G↓S` of an instance.
pub fn gds(i: &Instance) -> supobf::automata::DualMarkedDfa {
    use supobf::automata::{build_gds, complete};
    build_gds(&complete(&i.plant), &complete(i.supervisor.automaton()))
}

/// Decoded supervisors of up to `cap` models of `φ_n`, blocking each
/// model's reachable transition function before the next solve.
pub fn enumerate_models(i: &Instance, n: usize, cap: usize) -> Vec<supobf::satenc::Decoded> {
    use supobf::sat::{CdclSolver, SatBackend, SatResult};
    use supobf::satenc::{blocking_clause, decode, encode};
    let (cnf, vt) = encode(n, &gds(i), &i.alphabet, &i.control);
    let mut solver = CdclSolver::new();
    solver.reserve_vars(cnf.num_vars);
    for c in &cnf.clauses {
        solver.add_clause(c);
    }
    let mut out = Vec::new();
    while out.len() < cap {
        let SatResult::Sat(model) = solver.solve() else {
            break;
        };
        let d = decode(&model, &vt).expect("honest model");
        solver.add_clause(&blocking_clause(&model, &vt, &d.reachable));
        out.push(d);
    }
    out
}

/// Whether some supervisor on exactly `n` states (reachable or not)
/// preserves the closed-loop behavior, by exhaustive enumeration.
pub fn brute_force_bp_exists(i: &Instance, n: usize) -> bool {
    all_supervisors(&i.alphabet, &i.control, n)
        .iter()
        .any(|s| preserves_by_words(&i.plant, i.supervisor.automaton(), s))
}

/// Every alphabet of `k` events with every control flag combination
/// allowed by the invariants. Attack flags are left off.
pub fn all_control_alphabets(k: usize) -> Vec<Arc<Alphabet>> {
    let choices = [(false, false), (false, true), (true, true)];
    let mut out = Vec::new();
    for code in 0..choices.len().pow(k as u32) {
        let events = (0..k).map(|i| {
            let (controllable, observable) =
                choices[code / choices.len().pow(i as u32) % choices.len()];
            let name = ["a", "b", "c", "d"][i].to_string();
            (
                name,
                EventFlags {
                    controllable,
                    observable,
                    ..Default::default()
                },
            )
        });
        out.push(Arc::new(Alphabet::new(events).unwrap()));
    }
    out
}

/// Every partial transition function on `n` states, initial state 0.
pub fn all_automata(alphabet: &Arc<Alphabet>, n: usize) -> Vec<PartialDfa> {
    let slots: Vec<(usize, Event)> = (0..n)
        .flat_map(|q| alphabet.events().map(move |e| (q, e)))
        .collect();
    let total = (n + 1).pow(slots.len() as u32);
    (0..total)
        .map(|mut code| {
            let mut p =
                PartialDfa::new(alphabet.clone(), (0..n).map(|i| format!("s{i}")), 0).unwrap();
            for &(q, e) in &slots {
                let d = code % (n + 1);
                code /= n + 1;
                if d < n {
                    p.add_transition(q, e, d).unwrap();
                }
            }
            p
        })
        .collect()
}

/// A complete damage automaton on `n` states whose last state is marked and
/// absorbing. The others form a random automaton, except that moves on
/// attackable events that the closed loop never takes from a state are
/// redirected to the marked state with probability `p`.
pub fn random_reactive_damage(
    rng: &mut impl Rng,
    closed: &PartialDfa,
    attack: &AttackConstraint,
    n: usize,
    p: f64,
) -> PartialDfa {
    let alphabet = closed.alphabet().clone();
    let dmg = n - 1;
    let mut base = vec![vec![0; alphabet.len()]; dmg];
    for row in base.iter_mut() {
        for d in row.iter_mut() {
            *d = rng.gen_range(0..dmg);
        }
    }
    let mut taken = std::collections::HashSet::new();
    let mut seen = std::collections::HashSet::from([(closed.initial(), 0)]);
    let mut stack = vec![(closed.initial(), 0)];
    while let Some((k, z)) = stack.pop() {
        for e in alphabet.events() {
            if let Some(k2) = closed.next(k, e) {
                taken.insert((z, e));
                let z2 = base[z][e.index()];
                if seen.insert((k2, z2)) {
                    stack.push((k2, z2));
                }
            }
        }
    }
    let names = (0..n).map(|i| format!("z{i}"));
    let mut h = PartialDfa::new(alphabet.clone(), names, 0).unwrap();
    for (z, row) in base.iter().enumerate() {
        for e in alphabet.events() {
            let redirect = attack.is_attackable(e) && !taken.contains(&(z, e));
            let d = if redirect && rng.gen_bool(p) {
                dmg
            } else {
                row[e.index()]
            };
            h.add_transition(z, e, d).unwrap();
        }
    }
    for e in alphabet.events() {
        h.add_transition(dmg, e, dmg).unwrap();
    }
    h.set_marked(Some((0..n).map(|z| z == dmg).collect()))
        .unwrap();
    h
}

/// `s` unfolded by a counter modulo `r` that advances on `e`. The result
/// has the same language as `s` and up to `r` times as many states.
pub fn unfold(s: &PartialDfa, e: Event, r: usize) -> PartialDfa {
    let n = s.num_states();
    let names = (0..n * r).map(|i| format!("x{i}"));
    let mut out = PartialDfa::new(s.alphabet().clone(), names, s.initial() * r).unwrap();
    for (x, f, d) in s.transitions() {
        for c in 0..r {
            let c2 = if f == e { (c + 1) % r } else { c };
            out.add_transition(x * r + c, f, d * r + c2).unwrap();
        }
    }
    out
}
