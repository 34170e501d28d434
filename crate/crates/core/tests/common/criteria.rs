//! The acceptance criteria, one function each. A criterion returns a short
//! summary on success and a description of the first violation otherwise.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use supobf::attack::{brute_force_attackable, non_attackable, OracleVerdict, Verdict};
use supobf::automata::{language_equal, EventSet, PartialDfa};
use supobf::control::{
    check_supervisor, closed_loop, control_command, AttackConstraint, Supervisor,
};
use supobf::obfuscate::{
    canonical_table, obfuscate, supbp, ObfuscationOptions, ObfuscationRequest, Outcome,
};
use supobf::problem::{load, parse_problem, write_problem};
use supobf::sat::dimacs::{parse_dimacs, write_dimacs};

use super::*;

pub type Criterion = Result<String, String>;

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn verdict(i: &Instance) -> Verdict {
    non_attackable(&i.plant, &i.supervisor, &i.damage, &i.attack).expect("valid instance")
}

pub fn preserves(i: &Instance, s: &PartialDfa) -> bool {
    match Supervisor::new(s.clone(), i.control.clone()) {
        Ok(s) => language_equal(&closed_loop(&i.plant, &s), &i.closed_loop()).equal,
        Err(_) => false,
    }
}

fn names(i: &Instance, set: &EventSet) -> String {
    set.render(&i.alphabet)
}

pub fn command_after(i: &Instance, word: &str) -> EventSet {
    let w = i.alphabet.parse_word(word).unwrap();
    let x = i.supervisor.automaton().run(&w).expect("word in L(S)");
    control_command(&i.supervisor, x)
}

/// Example 1 with the supervisor in `example1_obfuscated.supervisor`.
pub fn example1_obfuscated() -> Instance {
    let ex = fixture("example1.problem");
    let l = load(
        &fixture_text("example1.problem"),
        Some(&fixture_text("example1_obfuscated.supervisor")),
        false,
    )
    .expect("obfuscated supervisor loads");
    ex.with_supervisor(l.supervisor.automaton().clone())
}

pub fn example1_scenario() -> Criterion {
    let start = Instant::now();
    let ex = fixture("example1.problem");
    let obf = example1_obfuscated();
    let set = |names: &[&str]| {
        EventSet::from_events(
            ex.alphabet.len(),
            names.iter().map(|n| ex.alphabet.lookup(n).unwrap()),
        )
    };
    let abd = set(&["a", "b", "d"]);
    for (inst, word, want) in [
        (&ex, "a c", &abd),
        (&ex, "a c d", &set(&["b"])),
        (&obf, "a c", &abd),
        (&obf, "a c d", &abd),
    ] {
        let got = command_after(inst, word);
        require(&got == want, || {
            format!("command after {word:?} is {}", names(inst, &got))
        })?;
    }

    // Every plant string reaching the bad state ends in a' after an
    // observation of a c d.
    let bad = ex.plant.state_by_name("8").unwrap();
    let a_prime = ex.alphabet.lookup("a'").unwrap();
    let mut hits = 0;
    for w in words(&ex.alphabet, ex.plant.num_states()) {
        if ex.plant.run(&w) != Some(bad) {
            continue;
        }
        hits += 1;
        let (last, prefix) = w.split_last().unwrap();
        let observed: Vec<_> = prefix
            .iter()
            .copied()
            .filter(|&e| ex.control.is_observable(e))
            .collect();
        require(
            *last == a_prime && ex.alphabet.render(&observed) == "a c d",
            || format!("bad state reached by {}", ex.alphabet.render(&w)),
        )?;
    }
    require(hits > 0, || "bad state unreachable".into())?;

    require(!verdict(&ex).is_non_attackable(), || {
        "S is reported non-attackable".into()
    })?;
    require(verdict(&obf).is_non_attackable(), || {
        "S' is reported attackable".into()
    })?;
    require(
        language_equal(&ex.closed_loop(), &obf.closed_loop()).equal,
        || "S' changes the closed loop".into(),
    )?;
    let elapsed = start.elapsed();
    require(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("S attackable, S' non-attackable, {elapsed:.1?}"))
}

/// Decoded models of random instances preserve behavior and are valid.
pub fn encoding_soundness(instances: usize, seed: u64) -> Criterion {
    let mut r = rng(seed);
    let (mut satisfiable, mut models) = (0, 0);
    for k in 0..instances {
        let shape = Shape {
            events: r.gen_range(1..=4),
            plant: r.gen_range(1..=5),
            supervisor: r.gen_range(1..=4),
            damage: 2,
            density: 0.6,
        };
        let i = random_instance(&mut r, shape);
        let n = r.gen_range(1..=4);
        let found = enumerate_models(&i, n, 30);
        satisfiable += usize::from(!found.is_empty());
        for d in found {
            models += 1;
            require(
                check_supervisor(&d.supervisor, &i.control).is_empty(),
                || format!("instance {k}, n={n}: invalid supervisor {:?}", d.supervisor),
            )?;
            require(preserves(&i, &d.supervisor), || {
                format!(
                    "instance {k}, n={n}: behavior changed by {:?}",
                    d.supervisor
                )
            })?;
        }
    }
    require(satisfiable * 2 >= instances, || {
        format!("only {satisfiable} satisfiable instances")
    })?;
    Ok(format!(
        "{instances} instances, {satisfiable} satisfiable, {models} models checked"
    ))
}

/// Satisfiability against exhaustive search on every instance with at most
/// two plant, supervisor and candidate states over at most two events.
pub fn encoding_completeness() -> Criterion {
    let mut checked = 0;
    for k in 1..=2 {
        for alphabet in all_control_alphabets(k) {
            let control = supobf::control::ControlConstraint::from_alphabet(&alphabet);
            let attack = AttackConstraint::from_alphabet(&alphabet);
            let mut damage = PartialDfa::new(alphabet.clone(), ["z"], 0).unwrap();
            for e in alphabet.events() {
                damage.add_transition(0, e, 0).unwrap();
            }
            damage.set_marked(Some(vec![false])).unwrap();
            let candidates: Vec<Vec<PartialDfa>> = (1..=2)
                .map(|n| all_supervisors(&alphabet, &control, n))
                .collect();
            let supervisors: Vec<Supervisor> = (1..=2)
                .flat_map(|n| all_automata(&alphabet, n))
                .filter_map(|s| Supervisor::new(s, control.clone()).ok())
                .collect();
            for plant in (1..=2).flat_map(|n| all_automata(&alphabet, n)) {
                for s in &supervisors {
                    let i = Instance {
                        alphabet: alphabet.clone(),
                        control: control.clone(),
                        attack: attack.clone(),
                        plant: plant.clone(),
                        supervisor: s.clone(),
                        damage: damage.clone(),
                    };
                    for n in 1..=2 {
                        let sat = !enumerate_models(&i, n, 1).is_empty();
                        let brute = candidates[n - 1]
                            .iter()
                            .any(|c| preserves_by_words(&plant, s.automaton(), c));
                        require(sat == brute, || {
                            format!("n={n}: SAT says {sat}, enumeration says {brute}\n{i:#?}")
                        })?;
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{checked} instance/bound pairs agree"))
}

/// Transition table in the automaton's own state numbering.
fn raw_table(p: &PartialDfa) -> Vec<Option<u32>> {
    p.states()
        .flat_map(|q| {
            p.alphabet()
                .events()
                .map(move |e| p.next(q, e).map(|d| d as u32))
        })
        .collect()
}

/// `supbp` against the brute-force set of exact-size supervisors.
pub fn allsat_exactness() -> Criterion {
    let mut compared = 0;
    for name in ["tri.problem", "single.problem"] {
        let i = fixture(name);
        for n in 1..=3 {
            let brute: Vec<PartialDfa> = all_supervisors(&i.alphabet, &i.control, n)
                .into_iter()
                .filter(|s| s.num_reachable() == n && preserves(&i, s))
                .collect();
            for dedupe in [true, false] {
                let options = ObfuscationOptions {
                    dedupe_isomorphic: dedupe,
                    ..Default::default()
                };
                let found = supbp(&i.plant, &i.supervisor, &i.control, n, &options);
                let (ours, theirs): (BTreeSet<_>, BTreeSet<_>) = if dedupe {
                    (
                        found
                            .candidates
                            .iter()
                            .map(|c| canonical_table(c.automaton()))
                            .collect(),
                        brute.iter().map(canonical_table).collect(),
                    )
                } else {
                    (
                        found
                            .candidates
                            .iter()
                            .map(|c| raw_table(c.automaton()))
                            .collect(),
                        brute.iter().map(raw_table).collect(),
                    )
                };
                require(ours.len() == found.candidates.len(), || {
                    format!("{name} n={n}: duplicate candidates")
                })?;
                require(ours == theirs, || {
                    format!(
                        "{name} n={n} dedupe={dedupe}: {} enumerated vs {} by brute force",
                        ours.len(),
                        theirs.len()
                    )
                })?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} candidate sets match"))
}

#[derive(Debug, PartialEq, Eq)]
pub enum Agreement {
    Agree,
    Inconclusive,
}

/// Oracle budget for the differential suite, in (state, observation) pairs.
pub const ORACLE_BUDGET: usize = 50_000;

/// Compares the verification with the oracle at bound `|Q|·|X|·|Z| + 2`.
pub fn differential(i: &Instance) -> Result<Agreement, String> {
    let bound =
        i.plant.num_states() * i.supervisor.automaton().num_states() * i.damage.num_states() + 2;
    let report = brute_force_attackable(
        &i.plant,
        &i.supervisor,
        &i.damage,
        &i.attack,
        bound,
        ORACLE_BUDGET,
    );
    match (verdict(i), &report.verdict) {
        (Verdict::NonAttackable, OracleVerdict::NoAttackUpTo(d)) if *d == report.max_depth => {
            Ok(Agreement::Agree)
        }
        (Verdict::NonAttackable, OracleVerdict::NoAttackUpTo(_)) => Ok(Agreement::Inconclusive),
        (Verdict::NonAttackable, OracleVerdict::Attackable { .. }) => Err(format!(
            "oracle found an attack the verification missed: {report:?}\n{i:#?}"
        )),
        (Verdict::Attackable(_), OracleVerdict::Attackable { .. }) => Ok(Agreement::Agree),
        (Verdict::Attackable(w), OracleVerdict::NoAttackUpTo(d)) => {
            if w.observation.len() <= *d {
                return Err(format!(
                    "oracle missed the witness {w:?} within depth {d}\n{i:#?}"
                ));
            }
            Ok(Agreement::Inconclusive)
        }
    }
}

fn differential_shape() -> Shape {
    Shape {
        events: 3,
        plant: 4,
        supervisor: 3,
        damage: 3,
        density: 0.55,
    }
}

pub fn verification_differential(instances: usize, seed: u64) -> Criterion {
    let mut r = rng(seed);
    let (mut conclusive, mut attackable) = (0, 0);
    for k in 0..instances {
        // Plant-copy damage has the plant's states plus one, so its plant
        // gets one state fewer to stay within four damage states.
        let i = if k % 2 == 0 {
            random_instance(&mut r, differential_shape())
        } else {
            let shape = Shape {
                plant: 3,
                ..differential_shape()
            };
            random_attack_instance(&mut r, shape)
        };
        require(i.damage.num_states() <= 4, || "damage too large".into())?;
        if differential(&i)? == Agreement::Agree {
            conclusive += 1;
        }
        attackable += usize::from(!verdict(&i).is_non_attackable());
    }
    require(conclusive >= 100.min(instances), || {
        format!("only {conclusive} conclusive comparisons")
    })?;
    require(attackable * 20 >= instances, || {
        format!("only {attackable} attackable instances")
    })?;
    Ok(format!(
        "{instances} instances, {conclusive} conclusive, {attackable} attackable"
    ))
}

pub fn without_attackable(i: &Instance) -> Instance {
    let none = EventSet::empty(i.alphabet.len());
    let attack =
        AttackConstraint::new(none, i.attack.attacker_observable().clone(), &i.control).unwrap();
    Instance {
        attack,
        ..i.clone()
    }
}

pub fn without_marking(i: &Instance) -> Instance {
    let mut damage = i.damage.clone();
    damage
        .set_marked(Some(vec![false; damage.num_states()]))
        .unwrap();
    Instance {
        damage,
        ..i.clone()
    }
}

pub fn metamorphic(renamings: usize, seed: u64) -> Criterion {
    let mut r = rng(seed);
    let mut checks = 0;
    for name in FIXTURES {
        let i = fixture(name);
        require(verdict(&without_attackable(&i)).is_non_attackable(), || {
            format!("{name}: attackable without attackable events")
        })?;
        require(verdict(&without_marking(&i)).is_non_attackable(), || {
            format!("{name}: attackable without damage")
        })?;
        let base = verdict(&i).is_non_attackable();
        for _ in 0..renamings {
            let perm = random_permutation(&mut r, i.supervisor.automaton().num_states());
            let j = i.with_supervisor(permute(i.supervisor.automaton(), &perm));
            require(verdict(&j).is_non_attackable() == base, || {
                format!("{name}: renaming {perm:?} flips the verdict")
            })?;
        }
        checks += 2 + renamings;
    }
    Ok(format!("{checks} checks over {} fixtures", FIXTURES.len()))
}

/// Obfuscation on the fixtures and tiny random instances, against exhaustive
/// search over all smaller supervisors.
pub fn minimality(instances: usize, seed: u64) -> Criterion {
    let mut cases: Vec<(String, Instance, usize)> = FIXTURES
        .iter()
        .map(|name| (name.to_string(), fixture(name), 3))
        .collect();
    let mut r = rng(seed);
    for k in 0..instances {
        let events = r.gen_range(2..=3);
        let shape = Shape {
            events,
            plant: 3,
            supervisor: r.gen_range(2..=3),
            damage: 3,
            density: 0.7,
        };
        let i = if k % 2 == 0 {
            let mut i = random_instance(&mut r, shape);
            i.damage = random_reactive_damage(&mut r, &i.closed_loop(), &i.attack, 3, 0.7);
            i
        } else {
            random_attack_instance(&mut r, shape)
        };
        cases.push((format!("instance {k}"), i, if events == 2 { 3 } else { 2 }));
    }
    let (mut found, mut beyond_min) = (0, 0);
    for (label, i, n_max) in &cases {
        let mut req = ObfuscationRequest::new(
            i.plant.clone(),
            i.supervisor.clone(),
            i.control.clone(),
            i.attack.clone(),
            i.damage.clone(),
        );
        req.n_max = *n_max;
        let result = obfuscate(&req).map_err(|e| format!("{label}: {e}"))?;
        let below = match &result.outcome {
            Outcome::Found {
                supervisor, size, ..
            } => {
                let s = supervisor.automaton();
                require(s.num_reachable() == *size, || {
                    format!("{label}: size mismatch")
                })?;
                require(preserves(i, s), || format!("{label}: not preserving"))?;
                require(
                    verdict(&i.with_supervisor(s.clone())).is_non_attackable(),
                    || format!("{label}: result attackable"),
                )?;
                found += 1;
                if (1..*size).any(|m| brute_force_bp_exists(i, m)) {
                    beyond_min += 1;
                }
                *size - 1
            }
            Outcome::NotFoundUpTo(n) => *n,
        };
        for m in 1..=below {
            for s in all_supervisors(&i.alphabet, &i.control, m) {
                if preserves(i, &s) {
                    let j = i.with_supervisor(s);
                    require(!verdict(&j).is_non_attackable(), || {
                        format!(
                            "{label}: {:?} beats {:?}",
                            j.supervisor.automaton(),
                            result.outcome
                        )
                    })?;
                }
            }
        }
    }
    require(found > 0 && beyond_min > 0, || {
        format!(
            "weak suite: {found} found, {beyond_min} above the smallest behavior-preserving size"
        )
    })?;
    Ok(format!(
        "{} instances, {found} found, {beyond_min} above the smallest behavior-preserving size",
        cases.len()
    ))
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_supobf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Byte-identical repeated `obfuscate` runs, and round trips of problem,
/// supervisor and DIMACS files.
pub fn determinism_and_round_trips() -> Criterion {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let problem = fixture_path("example1.problem");
    let mut outputs = Vec::new();
    for (k, extra) in [&[][..], &[][..], &["--sequential"][..]].iter().enumerate() {
        let json = d.join(format!("run{k}.json"));
        let out = d.join(format!("run{k}.supervisor"));
        let mut args = vec![
            "obfuscate",
            path_str(&problem),
            "--json",
            path_str(&json),
            "--out",
            path_str(&out),
        ];
        args.extend_from_slice(extra);
        let o = run_cli(&args);
        require(o.status.code() == Some(0), || {
            format!("obfuscate exited with {:?}", o.status)
        })?;
        outputs.push((
            std::fs::read(&json).unwrap(),
            std::fs::read(&out).unwrap(),
            o.stdout,
        ));
    }
    require(outputs.windows(2).all(|w| w[0] == w[1]), || {
        "repeated obfuscate runs differ".into()
    })?;

    // The emitted supervisor is accepted back as an input.
    let out = d.join("run0.supervisor");
    let o = run_cli(&["check", path_str(&problem), "--supervisor", path_str(&out)]);
    require(o.status.code() == Some(0), || {
        "emitted supervisor is not accepted as non-attackable".into()
    })?;

    let mut files = 0;
    for name in FIXTURES {
        let text = fixture_text(name);
        let once = write_problem(&parse_problem(&text).map_err(|e| e.to_string())?);
        let twice = write_problem(&parse_problem(&once).map_err(|e| e.to_string())?);
        require(once == twice, || {
            format!("{name}: problem round trip differs")
        })?;

        let dimacs = d.join(format!("{name}.cnf"));
        let o = run_cli(&[
            "synth-bp",
            path_str(&fixture_path(name)),
            "-n",
            "2",
            "--dimacs",
            path_str(&dimacs),
        ]);
        require(o.status.success(), || format!("{name}: synth-bp failed"))?;
        let text = std::fs::read_to_string(&dimacs).unwrap();
        let parsed = parse_dimacs(&text).map_err(|e| e.to_string())?;
        let mut again = Vec::new();
        write_dimacs(
            &mut again,
            parsed.num_vars,
            &parsed.clauses,
            &parsed.comments,
        )
        .unwrap();
        require(again == text.as_bytes(), || {
            format!("{name}: DIMACS round trip differs")
        })?;
        files += 2;
    }
    Ok(format!("3 identical runs, {files} files round-trip"))
}

pub fn performance_smoke() -> Criterion {
    let i = fixture("perf.problem");
    let dims = (
        i.plant.num_states(),
        i.supervisor.automaton().num_states(),
        i.damage.num_states(),
        i.alphabet.len(),
    );
    require(dims == (8, 6, 6, 5), || {
        format!("fixture dimensions {dims:?}")
    })?;
    let mut req = ObfuscationRequest::new(
        i.plant.clone(),
        i.supervisor.clone(),
        i.control.clone(),
        i.attack.clone(),
        i.damage.clone(),
    );
    req.n_max = 6;
    let start = Instant::now();
    let result = obfuscate(&req).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    require(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    let size = match result.outcome {
        Outcome::Found { size, .. } => size.to_string(),
        Outcome::NotFoundUpTo(n) => format!("none up to {n}"),
    };
    Ok(format!("resilient size {size} in {elapsed:.1?}"))
}
