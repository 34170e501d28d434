//! Non-attackability verification against command-eavesdropping actuator
//! enablement attackers.

pub mod annotate;
pub mod oracle;
pub mod product;
pub mod subset;

use thiserror::Error;

pub use annotate::{annotate, AnnotatedSupervisor, CommandId, CommandTable};
pub use oracle::{
    brute_force_attackable, observation_groups, ObsStep, OracleReport, OracleVerdict,
};
pub use product::{general_product, AttackOutcome, GpAutomaton, GpLabel, Triple};
pub use subset::{
    attacker_projection, determinize_and_label, render_obs, EpsAutomaton, ObsEvent, SubsetAutomaton,
};

use crate::automata::{Alphabet, Event, PartialDfa};
use crate::control::{closed_loop, validate_damage, AttackConstraint, DamageError, Supervisor};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("invalid damage automaton: {0}")]
    Damage(#[from] DamageError),
}

/// A successful attack: the attacker observes `observation`, at which point
/// its state estimate is `subset`, and then enables `event`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub observation: Vec<ObsStep>,
    pub subset: Vec<Triple>,
    pub event: Event,
}

impl Witness {
    /// One line per observation step, `(o, {γ})` with `ε` for an event the
    /// attacker does not see, then `ATTACK <event>`.
    pub fn render(&self, alphabet: &Alphabet) -> Vec<String> {
        let mut lines: Vec<String> = self
            .observation
            .iter()
            .map(|(seen, cmd)| {
                let o = seen.map_or("ε", |e| alphabet.name(e));
                format!("({o}, {})", cmd.render(alphabet))
            })
            .collect();
        lines.push(format!("ATTACK {}", alphabet.name(self.event)));
        lines
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    NonAttackable,
    Attackable(Witness),
}

impl Verdict {
    pub fn is_non_attackable(&self) -> bool {
        matches!(self, Verdict::NonAttackable)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::NonAttackable => None,
            Verdict::Attackable(w) => Some(w),
        }
    }
}

/// All intermediate automata of the verification.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub annotated: AnnotatedSupervisor,
    pub gp: GpAutomaton,
    pub sub: SubsetAutomaton,
}

impl Analysis {
    /// Non-attackable iff no reachable subset carries an attack label. The
    /// witness is taken at the first labelled subset in breadth-first order,
    /// so its observation is a shortest one.
    pub fn verdict(&self) -> Verdict {
        let Some(y) = (0..self.sub.num_states()).find(|&y| !self.sub.labels[y].is_empty()) else {
            return Verdict::NonAttackable;
        };
        let event = self.sub.labels[y].iter().next().expect("nonempty label");
        let observation = self
            .sub
            .path_to(y)
            .into_iter()
            .map(|o| (o.seen, self.annotated.commands.get(o.command).clone()))
            .collect();
        let subset = self.sub.subsets[y]
            .iter()
            .map(|&v| self.gp.states[v])
            .collect();
        Verdict::Attackable(Witness {
            observation,
            subset,
            event,
        })
    }
}

/// Runs the verification pipeline without validating the damage automaton.
pub fn analyze(g: &PartialDfa, s: &Supervisor, h: &PartialDfa, ac: &AttackConstraint) -> Analysis {
    let annotated = annotate(s);
    let gp = general_product(g, &annotated, h, ac);
    let sub = determinize_and_label(&attacker_projection(&gp), &gp, ac);
    Analysis { annotated, gp, sub }
}

/// Decides non-attackability of `(g, s)`, after checking that `h` is
/// complete and marks no closed-loop string.
pub fn non_attackable(
    g: &PartialDfa,
    s: &Supervisor,
    h: &PartialDfa,
    ac: &AttackConstraint,
) -> Result<Verdict, AttackError> {
    validate_damage(h, &closed_loop(g, s))?;
    Ok(analyze(g, s, h, ac).verdict())
}
