//! SAT backend interface, the in-tree CDCL solver and DIMACS I/O.

mod cdcl;
pub mod dimacs;

pub use cdcl::CdclSolver;

use serde::Serialize;

/// Total assignment returned by a satisfiable solve; indexed by DIMACS
/// variable number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model(Vec<bool>);

impl Model {
    pub fn new(values: Vec<bool>) -> Self {
        Model(values)
    }

    /// Value of DIMACS variable `var` (1-based). Variables never mentioned
    /// to the backend read as false.
    #[inline]
    pub fn value(&self, var: u32) -> bool {
        self.0.get(var as usize - 1).copied().unwrap_or(false)
    }

    pub fn lit_true(&self, lit: i32) -> bool {
        self.value(lit.unsigned_abs()) == (lit > 0)
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Model> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolverStats {
    pub solves: u64,
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
}

impl std::ops::AddAssign for SolverStats {
    fn add_assign(&mut self, o: SolverStats) {
        self.solves += o.solves;
        self.decisions += o.decisions;
        self.conflicts += o.conflicts;
        self.propagations += o.propagations;
    }
}

/// Incremental SAT solving session.
///
/// Clauses use DIMACS literals (nonzero `i32`). Clauses may be added after a
/// satisfiable `solve`, which is how blocking clauses are fed in. A backend
/// must be deterministic: the same clause sequence yields the same models.
pub trait SatBackend {
    /// Makes variables `1..=n` part of the problem even if no clause
    /// mentions them.
    fn reserve_vars(&mut self, n: u32);
    fn add_clause(&mut self, clause: &[i32]);
    fn solve(&mut self) -> SatResult;
    fn stats(&self) -> SolverStats {
        SolverStats::default()
    }
}
