//! Search for a minimum-state supervisor that preserves the closed-loop
//! behavior and is not attackable.
//!
//! For each size `n`, every behavior-preserving supervisor with exactly `n`
//! reachable states is enumerated through the SAT encoding, the candidates
//! are put in a canonical order, and the first non-attackable one is
//! returned. Because all smaller sizes were exhausted first, its size is
//! minimal.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::attack::{analyze, AttackError};
use crate::automata::{build_gds, complete, DualMarkedDfa, PartialDfa, StateId};
use crate::control::{
    closed_loop, validate_damage, AttackConstraint, ControlConstraint, ControlError, Supervisor,
};
use crate::exec::Execution;
use crate::sat::{CdclSolver, SatBackend, SatResult, SolverStats};
use crate::satenc::{blocking_clause, decode, encode};

/// Number of candidates tested per round. Rounds are evaluated in full even
/// after a resilient candidate is found, so the work done does not depend on
/// the execution mode.
pub const NA_CHUNK: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObfuscationOptions {
    /// Start at the smallest feasible size, found by bisection.
    pub bisect: bool,
    /// Drop candidates isomorphic to an earlier one.
    pub dedupe_isomorphic: bool,
    /// Stop enumerating a size after this many solver models.
    pub enumeration_limit: Option<usize>,
    pub execution: Execution,
}

impl Default for ObfuscationOptions {
    fn default() -> Self {
        ObfuscationOptions {
            bisect: false,
            dedupe_isomorphic: true,
            enumeration_limit: None,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ObfuscationRequest {
    pub plant: PartialDfa,
    pub supervisor: Supervisor,
    /// Control constraint the new supervisor must satisfy. It may differ
    /// from the original supervisor's.
    pub target: ControlConstraint,
    pub attack: AttackConstraint,
    pub damage: PartialDfa,
    pub n_max: usize,
    pub options: ObfuscationOptions,
}

impl ObfuscationRequest {
    /// Request with default options and `n_max` set to the number of
    /// reachable supervisor states.
    pub fn new(
        plant: PartialDfa,
        supervisor: Supervisor,
        target: ControlConstraint,
        attack: AttackConstraint,
        damage: PartialDfa,
    ) -> Self {
        let n_max = supervisor.automaton().num_reachable();
        ObfuscationRequest {
            plant,
            supervisor,
            target,
            attack,
            damage,
            n_max,
            options: ObfuscationOptions::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ObfuscateError {
    #[error("n_max must be at least 1")]
    ZeroBound,
    #[error("attack constraint incompatible with the target control constraint: {0}")]
    AttackConstraint(ControlError),
    #[error(transparent)]
    Attack(#[from] AttackError),
}

/// Per-size statistics of the search.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub n: usize,
    /// Solver models enumerated, including those with fewer reachable states.
    pub models: usize,
    /// Behavior-preserving supervisors of exact size `n`.
    pub candidates: usize,
    pub tested: usize,
    pub resilient: usize,
    pub truncated: bool,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Found {
        supervisor: Supervisor,
        size: usize,
        candidates_tested: usize,
    },
    NotFoundUpTo(usize),
}

#[derive(Clone, Debug)]
pub struct ObfuscationResult {
    pub outcome: Outcome,
    pub trace: Vec<TraceEntry>,
    pub stats: SolverStats,
    /// First size searched; 0 when bisection found no feasible size.
    pub n_start: usize,
}

/// Behavior-preserving supervisors of one exact size, in canonical order.
#[derive(Clone, Debug)]
pub struct Supbp {
    pub candidates: Vec<Supervisor>,
    pub models: usize,
    pub truncated: bool,
    pub stats: SolverStats,
}

/// Transition table of the reachable part after breadth-first renumbering
/// from the initial state, flattened as `[state * |Σ| + event]`. Two
/// supervisors are isomorphic iff their tables are equal.
pub fn canonical_table(p: &PartialDfa) -> Vec<Option<u32>> {
    canonical_parts(p).0
}

fn canonical_parts(p: &PartialDfa) -> (Vec<Option<u32>>, Vec<StateId>) {
    let order = p.reachable_order();
    let mut index = vec![u32::MAX; p.num_states()];
    for (i, &q) in order.iter().enumerate() {
        index[q] = i as u32;
    }
    let table = order
        .iter()
        .flat_map(|&q| p.alphabet().events().map(move |e| (q, e)))
        .map(|(q, e)| p.next(q, e).map(|d| index[d]))
        .collect();
    (table, order)
}

/// Reachable part renumbered breadth-first, with states named `x0, x1, ...`.
pub fn canonical_form(p: &PartialDfa) -> PartialDfa {
    let order = p.reachable_order();
    let mut out = p.restrict(&order);
    out.rename_states((0..order.len()).map(|i| format!("x{i}")).collect());
    out
}

fn gds_of(g: &PartialDfa, s: &Supervisor) -> DualMarkedDfa {
    build_gds(&complete(g), &complete(s.automaton()))
}

/// Whether some supervisor with at most `n` states over `constraint`
/// preserves the closed loop of `(g, s)`.
pub fn bp_exists(
    g: &PartialDfa,
    s: &Supervisor,
    constraint: &ControlConstraint,
    n: usize,
) -> (bool, SolverStats) {
    let gds = gds_of(g, s);
    let (cnf, _) = encode(n, &gds, g.alphabet(), constraint);
    let mut solver = CdclSolver::new();
    solver.reserve_vars(cnf.num_vars);
    for c in &cnf.clauses {
        solver.add_clause(c);
    }
    let sat = solver.solve().is_sat();
    (sat, solver.stats())
}

/// Smallest `n ≤ n_max` with a behavior-preserving supervisor of at most `n`
/// states, found by bisection. Existence is monotone in `n` because unused
/// states can always be left unreachable.
pub fn min_bp_size(
    g: &PartialDfa,
    s: &Supervisor,
    constraint: &ControlConstraint,
    n_max: usize,
) -> Option<usize> {
    min_bp_size_with_stats(g, s, constraint, n_max).0
}

fn min_bp_size_with_stats(
    g: &PartialDfa,
    s: &Supervisor,
    constraint: &ControlConstraint,
    n_max: usize,
) -> (Option<usize>, SolverStats) {
    let mut stats = SolverStats::default();
    let mut check = |n| {
        let (sat, st) = bp_exists(g, s, constraint, n);
        stats += st;
        sat
    };
    if n_max == 0 || !check(n_max) {
        return (None, stats);
    }
    let (mut lo, mut hi) = (1, n_max);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if check(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    (Some(lo), stats)
}

/// Enumerates behavior-preserving supervisors of exactly `n` reachable
/// states over `constraint`, using the in-tree solver.
pub fn supbp(
    g: &PartialDfa,
    s: &Supervisor,
    constraint: &ControlConstraint,
    n: usize,
    options: &ObfuscationOptions,
) -> Supbp {
    supbp_with_backend(CdclSolver::new(), g, s, constraint, n, options)
}

/// [`supbp`] on a caller-supplied SAT backend.
///
/// Each model is decoded, its reachable transition function is blocked, and
/// it is kept when all `n` candidate states are reachable. The result is
/// sorted by canonical table, so it does not depend on the order in which
/// the backend returns models.
pub fn supbp_with_backend<B: SatBackend>(
    mut solver: B,
    g: &PartialDfa,
    s: &Supervisor,
    constraint: &ControlConstraint,
    n: usize,
    options: &ObfuscationOptions,
) -> Supbp {
    let gds = gds_of(g, s);
    let (cnf, vt) = encode(n, &gds, g.alphabet(), constraint);
    solver.reserve_vars(cnf.num_vars);
    for c in &cnf.clauses {
        solver.add_clause(c);
    }
    // Keyed by canonical table, then by raw table when isomorphic copies are kept.
    type Key = (Vec<Option<u32>>, Vec<Option<u32>>);
    let mut found: BTreeMap<Key, PartialDfa> = BTreeMap::new();
    let mut models = 0;
    let mut truncated = false;
    while let SatResult::Sat(model) = solver.solve() {
        if options.enumeration_limit.is_some_and(|l| models >= l) {
            truncated = true;
            break;
        }
        models += 1;
        let decoded = decode(&model, &vt).expect("solver model satisfies the encoding");
        let block = blocking_clause(&model, &vt, &decoded.reachable);
        if decoded.reachable.len() == n {
            let (canon, _) = canonical_parts(&decoded.supervisor);
            let key = if options.dedupe_isomorphic {
                (canon, Vec::new())
            } else {
                let raw = raw_table(&decoded.supervisor);
                (canon, raw)
            };
            found.entry(key).or_insert_with(|| {
                if options.dedupe_isomorphic {
                    canonical_form(&decoded.supervisor)
                } else {
                    decoded.supervisor.clone()
                }
            });
        }
        if block.is_empty() {
            break;
        }
        solver.add_clause(&block);
    }
    let candidates = found
        .into_values()
        .map(|p| {
            Supervisor::new(p, constraint.clone())
                .expect("decoded supervisors satisfy the constraint")
        })
        .collect();
    Supbp {
        candidates,
        models,
        truncated,
        stats: solver.stats(),
    }
}

fn raw_table(p: &PartialDfa) -> Vec<Option<u32>> {
    p.states()
        .flat_map(|q| {
            p.alphabet()
                .events()
                .map(move |e| p.next(q, e).map(|d| d as u32))
        })
        .collect()
}

/// Runs the obfuscation search.
pub fn obfuscate(req: &ObfuscationRequest) -> Result<ObfuscationResult, ObfuscateError> {
    obfuscate_with_progress(req, |_| {})
}

/// [`obfuscate`], reporting each completed size to `progress`.
pub fn obfuscate_with_progress(
    req: &ObfuscationRequest,
    mut progress: impl FnMut(&TraceEntry),
) -> Result<ObfuscationResult, ObfuscateError> {
    if req.n_max == 0 {
        return Err(ObfuscateError::ZeroBound);
    }
    AttackConstraint::new(
        req.attack.attackable().clone(),
        req.attack.attacker_observable().clone(),
        &req.target,
    )
    .map_err(ObfuscateError::AttackConstraint)?;
    let (g, h, ac) = (&req.plant, &req.damage, &req.attack);
    validate_damage(h, &closed_loop(g, &req.supervisor)).map_err(AttackError::from)?;

    let mut stats = SolverStats::default();
    let mut trace = Vec::new();
    let n_start = if req.options.bisect {
        let (m, st) = min_bp_size_with_stats(g, &req.supervisor, &req.target, req.n_max);
        stats += st;
        match m {
            Some(m) => m,
            None => {
                return Ok(ObfuscationResult {
                    outcome: Outcome::NotFoundUpTo(req.n_max),
                    trace,
                    stats,
                    n_start: 0,
                })
            }
        }
    } else {
        1
    };

    let mut tested_total = 0;
    for n in n_start..=req.n_max {
        let bp = supbp(g, &req.supervisor, &req.target, n, &req.options);
        stats += bp.stats;
        let mut entry = TraceEntry {
            n,
            models: bp.models,
            candidates: bp.candidates.len(),
            truncated: bp.truncated,
            ..TraceEntry::default()
        };
        let mut winner = None;
        for chunk in bp.candidates.chunks(NA_CHUNK) {
            let verdicts = req.options.execution.map(chunk, |cand| {
                analyze(g, cand, h, ac).verdict().is_non_attackable()
            });
            entry.tested += chunk.len();
            entry.resilient += verdicts.iter().filter(|&&v| v).count();
            if let Some(i) = verdicts.iter().position(|&v| v) {
                winner = Some(chunk[i].clone());
                break;
            }
        }
        tested_total += entry.tested;
        progress(&entry);
        trace.push(entry);
        if let Some(supervisor) = winner {
            return Ok(ObfuscationResult {
                outcome: Outcome::Found {
                    supervisor,
                    size: n,
                    candidates_tested: tested_total,
                },
                trace,
                stats,
                n_start,
            });
        }
    }
    Ok(ObfuscationResult {
        outcome: Outcome::NotFoundUpTo(req.n_max),
        trace,
        stats,
        n_start,
    })
}
