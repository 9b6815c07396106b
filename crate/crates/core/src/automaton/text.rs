//! Textual format for P-automata.
//!
//! ```text
//! initial p1 th0
//! state s1
//! final s2
//! trans p1@th0 g1 s1
//! trans s1 g1 s2
//! trans p2@th0 eps s1
//! ```
//!
//! Initial states are written `p@phase`, post* states `p^g@phase`, where
//! `phase` is a declared phase name or a `{r1,r2}` literal. Any other name
//! denotes a plain state. States are declared implicitly on first use.

use std::fmt::Write;

use super::{AutState, Label, PAutomaton};
use crate::error::{Error, Result};
use crate::model::Smpds;

pub fn state_name(smpds: &Smpds, state: &AutState) -> String {
    match state {
        AutState::Initial(p, th) => format!("{}@{}", smpds.state_name(*p), smpds.phase_label(*th)),
        AutState::Generated(p, g, th) => format!(
            "{}^{}@{}",
            smpds.state_name(*p),
            smpds.symbol_name(*g),
            smpds.phase_label(*th)
        ),
        AutState::Plain(n) => n.clone(),
    }
}

pub fn label_name(smpds: &Smpds, label: Label) -> &str {
    match label {
        Label::Epsilon => "eps",
        Label::Symbol(g) => smpds.symbol_name(g),
    }
}

fn parse_state(smpds: &Smpds, line: usize, tok: &str) -> Result<AutState> {
    let Some((left, phase)) = tok.split_once('@') else {
        if tok.contains('^') {
            return Err(Error::parse(line, format!("`{tok}` lacks a phase")));
        }
        return Ok(AutState::Plain(tok.to_owned()));
    };
    let phase = smpds
        .resolve_phase(phase)
        .map_err(|e| Error::parse(line, e.to_string()))?;
    let state = |n: &str| {
        smpds
            .state_id(n)
            .ok_or_else(|| Error::parse(line, format!("unknown control point `{n}`")))
    };
    match left.split_once('^') {
        None => Ok(AutState::Initial(state(left)?, phase)),
        Some((p, g)) => {
            let g = smpds
                .symbol_id(g)
                .ok_or_else(|| Error::parse(line, format!("unknown symbol `{g}`")))?;
            Ok(AutState::Generated(state(p)?, g, phase))
        }
    }
}

pub fn parse(smpds: &Smpds, text: &str) -> Result<PAutomaton> {
    let mut aut = PAutomaton::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        let arity = |n: usize| {
            if toks.len() == n {
                Ok(())
            } else {
                Err(Error::parse(
                    line,
                    format!("`{}` takes {} operands", toks[0], n - 1),
                ))
            }
        };
        match toks.first().copied() {
            None => {}
            Some("initial") => {
                arity(3)?;
                let p = smpds.state_id(toks[1]).ok_or_else(|| {
                    Error::parse(line, format!("unknown control point `{}`", toks[1]))
                })?;
                let th = smpds
                    .resolve_phase(toks[2])
                    .map_err(|e| Error::parse(line, e.to_string()))?;
                aut.add_initial(p, th);
            }
            Some("state") => {
                arity(2)?;
                aut.add_state(parse_state(smpds, line, toks[1])?);
            }
            Some("final") => {
                arity(2)?;
                let q = aut.add_state(parse_state(smpds, line, toks[1])?);
                aut.set_final(q);
            }
            Some("trans") => {
                arity(4)?;
                let from = aut.add_state(parse_state(smpds, line, toks[1])?);
                let label = match toks[2] {
                    "eps" => Label::Epsilon,
                    g => Label::Symbol(
                        smpds
                            .symbol_id(g)
                            .ok_or_else(|| Error::parse(line, format!("unknown symbol `{g}`")))?,
                    ),
                };
                let to = aut.add_state(parse_state(smpds, line, toks[3])?);
                aut.add_transition(from, label, to);
            }
            Some(other) => return Err(Error::parse(line, format!("unknown directive `{other}`"))),
        }
    }
    Ok(aut)
}

/// Canonical form: every section sorted by printed names.
pub fn print(smpds: &Smpds, aut: &PAutomaton) -> String {
    let names: Vec<String> = aut
        .state_ids()
        .map(|q| state_name(smpds, aut.state(q)))
        .collect();
    let mut initials = Vec::new();
    let mut others = Vec::new();
    for q in aut.state_ids() {
        match aut.state(q) {
            AutState::Initial(p, th) => initials.push(format!(
                "initial {} {}",
                smpds.state_name(*p),
                smpds.phase_label(*th)
            )),
            _ => others.push(format!("state {}", names[q.index()])),
        }
    }
    let mut finals: Vec<String> = aut
        .finals()
        .map(|q| format!("final {}", names[q.index()]))
        .collect();
    let mut trans: Vec<(&str, &str, &str)> = aut
        .transitions()
        .iter()
        .map(|t| {
            (
                names[t.from.index()].as_str(),
                label_name(smpds, t.label),
                names[t.to.index()].as_str(),
            )
        })
        .collect();
    initials.sort();
    others.sort();
    finals.sort();
    trans.sort();
    let mut out = String::new();
    for l in initials.iter().chain(&others).chain(&finals) {
        out.push_str(l);
        out.push('\n');
    }
    for (a, g, b) in trans {
        writeln!(out, "trans {a} {g} {b}").unwrap();
    }
    out
}
