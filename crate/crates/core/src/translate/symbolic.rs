use std::collections::BTreeSet;
use std::fmt::Write;

use crate::model::{Configuration, RuleId, Smpds, StateId, SymbolId};

/// How a symbolic rule relates the phase before and after firing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseRelation {
    /// `theta' = theta`, provided `guard` is in `theta`.
    Identity { guard: RuleId },
    /// `theta' = (theta \ {removed}) ∪ {added}`, provided both `guard` and
    /// `removed` are in `theta`.
    Modify {
        guard: RuleId,
        removed: RuleId,
        added: RuleId,
    },
}

impl PhaseRelation {
    pub fn apply(&self, theta: crate::Phase) -> Option<crate::Phase> {
        match *self {
            PhaseRelation::Identity { guard } => theta.contains(guard).then_some(theta),
            PhaseRelation::Modify {
                guard,
                removed,
                added,
            } => (theta.contains(guard) && theta.contains(removed))
                .then(|| theta.modified(removed, added)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicRule {
    pub from: StateId,
    pub symbol: SymbolId,
    pub to: StateId,
    pub word: Vec<SymbolId>,
    pub relation: PhaseRelation,
}

/// A pushdown system whose rules carry relations on phases.
#[derive(Debug, Clone, Default)]
pub struct SymbolicPds {
    pub rules: Vec<SymbolicRule>,
}

impl SymbolicPds {
    pub fn to_text(&self, smpds: &Smpds) -> String {
        let mut out = String::new();
        for (i, r) in self.rules.iter().enumerate() {
            write!(
                out,
                "rule s{i}: {} {} -> {}",
                smpds.state_name(r.from),
                smpds.symbol_name(r.symbol),
                smpds.state_name(r.to)
            )
            .unwrap();
            for g in &r.word {
                write!(out, " {}", smpds.symbol_name(*g)).unwrap();
            }
            match r.relation {
                PhaseRelation::Identity { guard } => {
                    writeln!(out, " [id {}]", smpds.rule_name(guard)).unwrap()
                }
                PhaseRelation::Modify {
                    guard,
                    removed,
                    added,
                } => writeln!(
                    out,
                    " [mod {} {} -> {}]",
                    smpds.rule_name(guard),
                    smpds.rule_name(removed),
                    smpds.rule_name(added)
                )
                .unwrap(),
            }
        }
        out
    }
}

/// One symbolic rule per ordinary rule, and one per self-modifying rule
/// and stack symbol.
pub fn to_symbolic_pds(smpds: &Smpds) -> SymbolicPds {
    let mut rules = Vec::new();
    for (id, r) in smpds.delta() {
        rules.push(SymbolicRule {
            from: r.from,
            symbol: r.symbol,
            to: r.to,
            word: r.word.clone(),
            relation: PhaseRelation::Identity { guard: id },
        });
    }
    for (id, r) in smpds.delta_c() {
        for g in smpds.symbols() {
            rules.push(SymbolicRule {
                from: r.from,
                symbol: g,
                to: r.to,
                word: vec![g],
                relation: PhaseRelation::Modify {
                    guard: id,
                    removed: r.removed,
                    added: r.added,
                },
            });
        }
    }
    SymbolicPds { rules }
}

pub fn symbolic_step(spds: &SymbolicPds, c: &Configuration) -> BTreeSet<Configuration> {
    let Some(top) = c.top() else {
        return BTreeSet::new();
    };
    spds.rules
        .iter()
        .filter(|r| r.from == c.state && r.symbol == top)
        .filter_map(|r| {
            let th = r.relation.apply(c.phase)?;
            let mut stack = r.word.clone();
            stack.extend_from_slice(&c.stack[1..]);
            Some(Configuration::new(r.to, stack, th))
        })
        .collect()
}
