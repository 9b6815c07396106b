//! Textbook saturation for ordinary pushdown systems with right-hand sides
//! of length at most two. Control points `(p, theta)` are identified with
//! the automaton's initial states, so results compare directly with the
//! self-modifying engines.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::{ControlId, Pds};
use crate::automaton::{AutState, AutStateId, Label, PAutomaton};
use crate::error::{Error, Result};
use crate::model::SymbolId;
use crate::saturation::{Budget, Meter, Saturation, SaturationStats};

type Edge = (AutStateId, SymbolId, AutStateId);
/// A control state with the symbol on top.
type Head = (AutStateId, SymbolId);

fn prepare(pds: &Pds, aut: &PAutomaton) -> Result<(PAutomaton, Vec<AutStateId>)> {
    if pds.rules.iter().any(|r| r.word.len() > 2) {
        return Err(Error::Precondition(
            "rules pushing more than two symbols; run normalize_push first".into(),
        ));
    }
    if aut.has_epsilon() {
        return Err(Error::Precondition("automaton has ε transitions".into()));
    }
    if aut.has_transition_into_initial() {
        return Err(Error::Precondition(
            "automaton has transitions into initial states".into(),
        ));
    }
    let mut aut = aut.clone();
    let ctl = pds
        .controls()
        .iter()
        .map(|&(p, th)| aut.add_initial(p, th))
        .collect();
    Ok((aut, ctl))
}

fn finish(pds: &Pds, aut: PAutomaton, before: usize, meter: &Meter, extra: usize) -> Saturation {
    let phases: BTreeSet<_> = pds.controls().iter().map(|&(_, th)| th).collect();
    Saturation {
        stats: SaturationStats {
            transitions_added: aut.num_transitions() - before,
            phases_materialized: phases.len(),
            elapsed: meter.elapsed(),
            peak_bytes: meter.peak(aut.heap_bytes() + extra),
        },
        automaton: aut,
    }
}

fn symbol_edges(aut: &PAutomaton) -> Vec<Edge> {
    aut.transitions()
        .iter()
        .filter_map(|t| match t.label {
            Label::Symbol(g) => Some((t.from, g, t.to)),
            Label::Epsilon => None,
        })
        .collect()
}

/// Backward saturation of `aut` under `pds`.
pub fn pds_prestar(pds: &Pds, aut: &PAutomaton, budget: Budget) -> Result<Saturation> {
    let (mut aut, ctl) = prepare(pds, aut)?;
    let before = aut.num_transitions();
    let c = |id: ControlId| ctl[id.0 as usize];
    let mut meter = Meter::new(budget);

    let mut trans = symbol_edges(&aut);
    let mut rhs1: HashMap<Head, Vec<Head>> = HashMap::new();
    let mut rhs2: HashMap<Head, Vec<(AutStateId, SymbolId, SymbolId)>> = HashMap::new();
    for r in &pds.rules {
        match r.word[..] {
            [] => trans.push((c(r.from), r.symbol, c(r.to))),
            [a] => rhs1
                .entry((c(r.to), a))
                .or_default()
                .push((c(r.from), r.symbol)),
            [a, b] => rhs2
                .entry((c(r.to), a))
                .or_default()
                .push((c(r.from), r.symbol, b)),
            _ => unreachable!(),
        }
    }

    let mut rel: HashSet<Edge> = HashSet::new();
    let mut rel_out: HashMap<(AutStateId, SymbolId), Vec<AutStateId>> = HashMap::new();
    let mut derived: HashMap<Head, Vec<Head>> = HashMap::new();

    while let Some((q, g, q2)) = trans.pop() {
        if !rel.insert((q, g, q2)) {
            continue;
        }
        if meter.due() {
            meter.check(aut.heap_bytes() + rel.len() * 48)?;
        }
        aut.add_transition(q, Label::Symbol(g), q2);
        rel_out.entry((q, g)).or_default().push(q2);
        if let Some(rs) = rhs1.get(&(q, g)) {
            trans.extend(rs.iter().map(|&(p1, g1)| (p1, g1, q2)));
        }
        if let Some(rs) = rhs2.get(&(q, g)) {
            for &(p1, g1, g2) in rs {
                derived.entry((q2, g2)).or_default().push((p1, g1));
                if let Some(ends) = rel_out.get(&(q2, g2)) {
                    trans.extend(ends.iter().map(|&q3| (p1, g1, q3)));
                }
            }
        }
        if let Some(ds) = derived.get(&(q, g)) {
            trans.extend(ds.iter().map(|&(p1, g1)| (p1, g1, q2)));
        }
    }
    Ok(finish(pds, aut, before, &meter, rel.len() * 48))
}

/// Forward saturation of `aut` under `pds`.
pub fn pds_poststar(pds: &Pds, aut: &PAutomaton, budget: Budget) -> Result<Saturation> {
    let (mut aut, ctl) = prepare(pds, aut)?;
    let before = aut.num_transitions();
    let c = |id: ControlId| ctl[id.0 as usize];
    let mut meter = Meter::new(budget);

    type Rhs = (AutStateId, Vec<SymbolId>, Option<AutStateId>);
    let mut by_lhs: HashMap<(AutStateId, SymbolId), Vec<Rhs>> = HashMap::new();
    for r in &pds.rules {
        let mid = (r.word.len() == 2).then(|| {
            let (p, th) = pds.pair(r.to);
            aut.add_state(AutState::Generated(p, r.word[0], th))
        });
        by_lhs
            .entry((c(r.from), r.symbol))
            .or_default()
            .push((c(r.to), r.word.clone(), mid));
    }

    let mut rel: HashSet<(AutStateId, Label, AutStateId)> = HashSet::new();
    let mut rel_out: HashMap<AutStateId, Vec<(SymbolId, AutStateId)>> = HashMap::new();
    let mut eps_into: HashMap<AutStateId, Vec<AutStateId>> = HashMap::new();
    let mut trans: Vec<(AutStateId, Label, AutStateId)> = Vec::new();
    for (q, g, q2) in symbol_edges(&aut) {
        if aut.is_initial(q) {
            trans.push((q, Label::Symbol(g), q2));
        } else {
            rel.insert((q, Label::Symbol(g), q2));
            rel_out.entry(q).or_default().push((g, q2));
        }
    }

    while let Some((p, l, q)) = trans.pop() {
        if !rel.insert((p, l, q)) {
            continue;
        }
        if meter.due() {
            meter.check(aut.heap_bytes() + rel.len() * 48)?;
        }
        aut.add_transition(p, l, q);
        match l {
            Label::Symbol(g) => {
                rel_out.entry(p).or_default().push((g, q));
                let Some(rs) = by_lhs.get(&(p, g)) else {
                    continue;
                };
                for (p2, word, mid) in rs {
                    match (&word[..], *mid) {
                        ([], _) => trans.push((*p2, Label::Epsilon, q)),
                        ([a], _) => trans.push((*p2, Label::Symbol(*a), q)),
                        ([a, b], Some(mid)) => {
                            trans.push((*p2, Label::Symbol(*a), mid));
                            if rel.insert((mid, Label::Symbol(*b), q)) {
                                aut.add_transition(mid, Label::Symbol(*b), q);
                                rel_out.entry(mid).or_default().push((*b, q));
                                if let Some(srcs) = eps_into.get(&mid) {
                                    trans.extend(srcs.iter().map(|&s| (s, Label::Symbol(*b), q)));
                                }
                            }
                        }
                        _ => unreachable!(),
                    }
                }
            }
            Label::Epsilon => {
                eps_into.entry(q).or_default().push(p);
                if let Some(out) = rel_out.get(&q) {
                    trans.extend(out.iter().map(|&(g, q2)| (p, Label::Symbol(g), q2)));
                }
            }
        }
    }
    Ok(finish(pds, aut, before, &meter, rel.len() * 48))
}
