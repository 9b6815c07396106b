//! Translation-based baselines: encoding phases into control points (an
//! ordinary PDS), or into relations on rules (a symbolic PDS), followed by
//! classical saturation.

mod classical;
mod erase;
mod symbolic;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::model::{Configuration, Phase, Rule, Smpds, StateId, SymbolId};
use crate::prestar::predecessors;
use crate::saturation::{Budget, Meter};

pub use classical::{pds_poststar, pds_prestar};
pub use erase::erase_self_modification;
pub use symbolic::{symbolic_step, to_symbolic_pds, PhaseRelation, SymbolicPds, SymbolicRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosureDirection {
    /// Phases reachable by applying self-modifying rules.
    #[default]
    Forward,
    /// Phases from which a seed is reachable.
    Backward,
    Both,
}

/// Phases reachable from `seeds` by self-modification.
pub fn phase_closure(smpds: &Smpds, seeds: &BTreeSet<Phase>) -> BTreeSet<Phase> {
    phase_closure_with(smpds, seeds, ClosureDirection::Forward, usize::MAX)
        .expect("unbounded closure")
}

/// Least superset of `seeds` closed under the chosen direction; fails once
/// more than `limit` phases have been found.
pub fn phase_closure_with(
    smpds: &Smpds,
    seeds: &BTreeSet<Phase>,
    direction: ClosureDirection,
    limit: usize,
) -> Result<BTreeSet<Phase>> {
    let forward = direction != ClosureDirection::Backward;
    let backward = direction != ClosureDirection::Forward;
    let rules: Vec<_> = smpds.delta_c().map(|(id, r)| (id, *r)).collect();
    let mut seen = seeds.clone();
    let mut stack: Vec<Phase> = seeds.iter().copied().collect();
    while let Some(th) = stack.pop() {
        let set = th.set();
        let mut next = Vec::new();
        for &(id, r) in &rules {
            if forward && set.contains(id) && set.contains(r.removed) {
                next.push(th.modified(r.removed, r.added));
            }
            if backward {
                next.extend(predecessors(&set, id, r.removed, r.added));
            }
        }
        for n in next {
            if seen.insert(n) {
                if seen.len() > limit {
                    return Err(Error::Params(format!("more than {limit} phases")));
                }
                stack.push(n);
            }
        }
    }
    Ok(seen)
}

/// Phases a translation-based pre* of targets in `seeds` needs: those that
/// can reach a seed, closed forward so that the translation is defined.
pub fn prestar_phases(
    smpds: &Smpds,
    seeds: &BTreeSet<Phase>,
    limit: usize,
) -> Result<BTreeSet<Phase>> {
    let back = phase_closure_with(smpds, seeds, ClosureDirection::Backward, limit)?;
    phase_closure_with(smpds, &back, ClosureDirection::Forward, limit)
}

/// Control point of the translated PDS: a pair `(p, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ControlId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairedRule {
    pub from: ControlId,
    pub symbol: SymbolId,
    pub to: ControlId,
    pub word: Vec<SymbolId>,
}

/// An ordinary pushdown system over `(control point, phase)` pairs.
#[derive(Debug, Clone, Default)]
pub struct Pds {
    controls: Vec<(StateId, Phase)>,
    index: HashMap<(StateId, Phase), ControlId>,
    pub rules: Vec<PairedRule>,
    pub num_symbols: usize,
}

impl Pds {
    fn control(&mut self, p: StateId, th: Phase) -> ControlId {
        *self.index.entry((p, th)).or_insert_with(|| {
            self.controls.push((p, th));
            ControlId(self.controls.len() as u32 - 1)
        })
    }

    pub fn controls(&self) -> &[(StateId, Phase)] {
        &self.controls
    }

    pub fn control_id(&self, p: StateId, th: Phase) -> Option<ControlId> {
        self.index.get(&(p, th)).copied()
    }

    pub fn pair(&self, c: ControlId) -> (StateId, Phase) {
        self.controls[c.0 as usize]
    }

    /// One step of the PDS on the configuration `<(c.state, c.phase), c.stack>`.
    pub fn step(&self, c: &Configuration) -> BTreeSet<Configuration> {
        let Some(ctl) = self.control_id(c.state, c.phase) else {
            return BTreeSet::new();
        };
        let Some(&top) = c.stack.first() else {
            return BTreeSet::new();
        };
        self.rules
            .iter()
            .filter(|r| r.from == ctl && r.symbol == top)
            .map(|r| {
                let (p, th) = self.pair(r.to);
                let mut stack = r.word.clone();
                stack.extend_from_slice(&c.stack[1..]);
                Configuration::new(p, stack, th)
            })
            .collect()
    }

    pub fn heap_bytes(&self) -> usize {
        self.rules.len() * (std::mem::size_of::<PairedRule>() + 16) + self.controls.len() * 48
    }

    /// Print-only listing; control points are written `p@phase`.
    pub fn to_text(&self, smpds: &Smpds) -> String {
        let name = |c: ControlId| {
            let (p, th) = self.pair(c);
            format!("{}@{}", smpds.state_name(p), smpds.phase_label(th))
        };
        let mut out = String::new();
        for (i, r) in self.rules.iter().enumerate() {
            write!(
                out,
                "rule t{i}: {} {} -> {}",
                name(r.from),
                smpds.symbol_name(r.symbol),
                name(r.to)
            )
            .unwrap();
            for g in &r.word {
                write!(out, " {}", smpds.symbol_name(*g)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn check_closed(smpds: &Smpds, phases: &BTreeSet<Phase>) -> Result<()> {
    for &th in phases {
        let set = th.set();
        for (id, r) in smpds.delta_c() {
            if set.contains(id)
                && set.contains(r.removed)
                && !phases.contains(&th.modified(r.removed, r.added))
            {
                return Err(Error::UnclosedPhases);
            }
        }
    }
    Ok(())
}

/// Encodes phases into control points, for every phase of `phases`.
pub fn to_pds(smpds: &Smpds, phases: &BTreeSet<Phase>) -> Result<Pds> {
    to_pds_with(smpds, phases, Budget::unlimited())
}

pub fn to_pds_with(smpds: &Smpds, phases: &BTreeSet<Phase>, budget: Budget) -> Result<Pds> {
    check_closed(smpds, phases)?;
    let mut meter = Meter::new(budget);
    let mut pds = Pds {
        num_symbols: smpds.num_symbols(),
        ..Pds::default()
    };
    for &th in phases {
        let set = th.set();
        for r in set.iter() {
            if meter.due() {
                meter.check(pds.heap_bytes())?;
            }
            match smpds.rule(r) {
                Some(Rule::Pds(rule)) => {
                    let from = pds.control(rule.from, th);
                    let to = pds.control(rule.to, th);
                    pds.rules.push(PairedRule {
                        from,
                        symbol: rule.symbol,
                        to,
                        word: rule.word.clone(),
                    });
                }
                Some(Rule::SelfMod(rule)) if set.contains(rule.removed) => {
                    let from = pds.control(rule.from, th);
                    let to = pds.control(rule.to, th.modified(rule.removed, rule.added));
                    for g in smpds.symbols() {
                        pds.rules.push(PairedRule {
                            from,
                            symbol: g,
                            to,
                            word: vec![g],
                        });
                    }
                }
                _ => {}
            }
        }
    }
    Ok(pds)
}
