//! Options, statistics and the normalize / lift / project plumbing shared by
//! the pre* and post* procedures.

use std::time::{Duration, Instant};

use crate::automaton::{AutState, Label, PAutomaton};
use crate::error::{Error, Result};
use crate::model::{DiagnosticKind, Normalized, Smpds};

/// Resource caps; `None` means unlimited. Memory is the engine's own
/// estimate of the bytes held by the automaton and its indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Budget {
    pub time: Option<Duration>,
    pub memory_bytes: Option<usize>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SaturationOptions {
    /// Accept automata that already went through saturation: pre* outputs
    /// may have transitions into initial states, post* outputs may have
    /// `ε` transitions out of initial states.
    pub accept_saturated_input: bool,
    pub budget: Budget,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SaturationStats {
    pub transitions_added: usize,
    pub phases_materialized: usize,
    pub elapsed: Duration,
    /// Largest memory estimate seen while saturating.
    pub peak_bytes: usize,
}

#[derive(Debug, Clone)]
pub struct Saturation {
    pub automaton: PAutomaton,
    pub stats: SaturationStats,
}

pub(crate) struct Meter {
    start: Instant,
    budget: Budget,
    ticks: u32,
    peak: usize,
}

impl Meter {
    pub(crate) fn new(budget: Budget) -> Self {
        Meter {
            start: Instant::now(),
            budget,
            ticks: 0,
            peak: 0,
        }
    }

    pub(crate) fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    /// Called once per unit of work; true every few hundred calls, when
    /// the caller should run [`Meter::check`].
    pub(crate) fn due(&mut self) -> bool {
        self.ticks = self.ticks.wrapping_add(1);
        self.ticks.is_multiple_of(256)
    }

    pub(crate) fn peak(&self, bytes_now: usize) -> usize {
        self.peak.max(bytes_now)
    }

    pub(crate) fn check(&mut self, bytes: usize) -> Result<()> {
        self.peak = self.peak.max(bytes);
        if let Some(limit) = self.budget.time {
            if self.start.elapsed() > limit {
                return Err(Error::Timeout(limit));
            }
        }
        if let Some(limit) = self.budget.memory_bytes {
            if bytes > limit {
                return Err(Error::OutOfMemory(limit));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_system(smpds: &Smpds, need_short_pushes: bool) -> Result<()> {
    let report = smpds.validate();
    if let Some(d) = report.errors().next() {
        return Err(Error::Invalid(d.message.clone()));
    }
    if let Some(d) = report
        .diagnostics
        .iter()
        .find(|d| d.kind == DiagnosticKind::SelfReference)
    {
        return Err(Error::SelfReference(
            d.rule.expect("self-reference names a rule"),
        ));
    }
    if need_short_pushes && report.count(DiagnosticKind::NeedsNormalizePush) > 0 {
        return Err(Error::Precondition(
            "rules pushing more than two symbols; run normalize_push first".into(),
        ));
    }
    Ok(())
}

/// Checks that the automaton only mentions declared control points,
/// symbols and rules.
pub(crate) fn check_alphabet(smpds: &Smpds, aut: &PAutomaton) -> Result<()> {
    for q in aut.state_ids() {
        let (p, g, th) = match aut.state(q) {
            AutState::Initial(p, th) => (Some(*p), None, Some(*th)),
            AutState::Generated(p, g, th) => (Some(*p), Some(*g), Some(*th)),
            AutState::Plain(_) => (None, None, None),
        };
        if p.is_some_and(|p| p.index() >= smpds.num_states())
            || g.is_some_and(|g| g.index() >= smpds.num_symbols())
            || th.is_some_and(|th| th.set().bound() as usize > smpds.num_rules())
        {
            return Err(Error::Precondition(
                "automaton mentions undeclared control points, symbols or rules".into(),
            ));
        }
    }
    if aut.transitions().iter().any(|t| match t.label {
        Label::Symbol(g) => g.index() >= smpds.num_symbols(),
        Label::Epsilon => false,
    }) {
        return Err(Error::Precondition(
            "automaton reads undeclared symbols".into(),
        ));
    }
    Ok(())
}

impl Normalized {
    /// Rewrites the phases of initial and generated states into the
    /// normalized system.
    pub fn lift_automaton(&self, aut: &PAutomaton) -> PAutomaton {
        if self.is_identity() {
            return aut.clone();
        }
        aut.map(
            |s| match s {
                AutState::Initial(p, th) => AutState::Initial(*p, self.lift_phase(*th)),
                AutState::Generated(p, g, th) => AutState::Generated(*p, *g, self.lift_phase(*th)),
                AutState::Plain(n) => AutState::Plain(n.clone()),
            },
            Some,
        )
    }

    /// Inverse of [`Normalized::lift_automaton`] on the original alphabet:
    /// states and transitions that only exist because of auxiliary control
    /// points or symbols are dropped. States of `original` are always
    /// kept, so the result contains every transition of `original`.
    pub fn project_automaton(&self, aut: &PAutomaton, original: &PAutomaton) -> PAutomaton {
        if self.is_identity() {
            return aut.clone();
        }
        let aux = |s: &AutState| matches!(s, AutState::Initial(p, _) if self.is_aux_state(*p));
        // Push splitting creates intermediate states keyed by auxiliary
        // control points and symbols; they become plain states.
        let m = &self.smpds;
        let mapped = aut.map(
            |s| match s {
                AutState::Initial(p, th) => AutState::Initial(*p, self.project_phase(*th)),
                AutState::Generated(p, g, th)
                    if self.is_aux_state(*p) || self.is_aux_symbol(*g) =>
                {
                    AutState::Plain(format!(
                        "{}.{}.{}",
                        m.state_name(*p),
                        m.symbol_name(*g),
                        m.phase_label(self.project_phase(*th))
                    ))
                }
                AutState::Generated(p, g, th) => {
                    AutState::Generated(*p, *g, self.project_phase(*th))
                }
                AutState::Plain(n) => AutState::Plain(n.clone()),
            },
            |l| match l {
                Label::Symbol(g) if self.is_aux_symbol(g) => None,
                l => Some(l),
            },
        );
        let keep_always: Vec<bool> = mapped
            .state_ids()
            .map(|q| original.id_of(mapped.state(q)).is_some())
            .collect();
        let mut reach = vec![false; mapped.num_states()];
        let mut stack = Vec::new();
        for q in mapped.state_ids() {
            let s = mapped.state(q);
            if keep_always[q.index()] || (s.is_initial() && !aux(s)) {
                reach[q.index()] = true;
                stack.push(q);
            }
        }
        while let Some(q) = stack.pop() {
            for &(_, t) in mapped.outgoing(q) {
                if !reach[t.index()] && !aux(mapped.state(t)) {
                    reach[t.index()] = true;
                    stack.push(t);
                }
            }
        }
        let mut out = PAutomaton::new();
        for q in original.state_ids() {
            out.add_state(original.state(q).clone());
        }
        for q in mapped.state_ids() {
            if reach[q.index()] {
                let id = out.add_state(mapped.state(q).clone());
                if mapped.is_final(q) {
                    out.set_final(id);
                }
            }
        }
        for t in original.transitions() {
            let (a, b) = (
                out.id_of(original.state(t.from)),
                out.id_of(original.state(t.to)),
            );
            out.add_transition(a.unwrap(), t.label, b.unwrap());
        }
        for t in mapped.transitions() {
            if reach[t.from.index()] && reach[t.to.index()] {
                let a = out.id_of(mapped.state(t.from)).unwrap();
                let b = out.id_of(mapped.state(t.to)).unwrap();
                out.add_transition(a, t.label, b);
            }
        }
        out
    }
}

/// Runs `engine` on the normalized system and maps the result back.
pub(crate) fn run_normalized(
    normalized: &Normalized,
    aut: &PAutomaton,
    engine: impl FnOnce(&Smpds, PAutomaton) -> Result<Saturation>,
) -> Result<Saturation> {
    let lifted = normalized.lift_automaton(aut);
    let raw = engine(&normalized.smpds, lifted)?;
    let automaton = normalized.project_automaton(&raw.automaton, aut);
    let stats = SaturationStats {
        transitions_added: automaton.num_transitions() - aut.num_transitions(),
        ..raw.stats
    };
    Ok(Saturation { automaton, stats })
}
