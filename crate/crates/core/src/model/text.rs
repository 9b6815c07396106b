//! Line-oriented textual format for SM-PDSs.
//!
//! ```text
//! # comment
//! state p1
//! symbol g1
//! rule r1: p1 g1 -> p2 g2 g1
//! smrule r': p3 (r1 -> r3) p4
//! phase th0: r1 r2 r'
//! config: p1 th0 g1 g1
//! ```
//!
//! States and symbols are declared implicitly on first use. Rules may be
//! referenced before they are defined. [`print`] emits a canonical form in
//! which every state and symbol is declared up front, so that
//! `parse(print(m)) == m`.

use std::fmt::Write;

use super::{Configuration, PdsRule, Phase, Rule, RuleId, SelfModRule, Smpds};
use crate::error::{Error, Result};

pub(crate) fn tokenize(line: &str) -> Vec<String> {
    let line = line.split('#').next().unwrap_or("");
    let mut spaced = String::with_capacity(line.len() + 8);
    for ch in line.chars() {
        if matches!(ch, ':' | '(' | ')') {
            spaced.push(' ');
            spaced.push(ch);
            spaced.push(' ');
        } else {
            spaced.push(ch);
        }
    }
    spaced.split_whitespace().map(str::to_owned).collect()
}

pub(crate) fn is_name(tok: &str) -> bool {
    !tok.is_empty()
        && tok != "->"
        && !tok.chars().any(|c| {
            c.is_whitespace() || matches!(c, ':' | '(' | ')' | '#' | '{' | '}' | ',' | '@' | '^')
        })
}

fn name(line: usize, tok: Option<&String>, what: &str) -> Result<String> {
    match tok {
        Some(t) if is_name(t) => Ok(t.clone()),
        Some(t) => Err(Error::parse(line, format!("invalid {what} `{t}`"))),
        None => Err(Error::parse(line, format!("missing {what}"))),
    }
}

fn expect(line: usize, tok: Option<&String>, want: &str) -> Result<()> {
    match tok {
        Some(t) if t == want => Ok(()),
        Some(t) => Err(Error::parse(
            line,
            format!("expected `{want}`, found `{t}`"),
        )),
        None => Err(Error::parse(line, format!("expected `{want}`"))),
    }
}

struct PendingSelfMod {
    line: usize,
    id: RuleId,
    removed: String,
    added: String,
}

pub fn parse(text: &str) -> Result<Smpds> {
    let mut m = Smpds::new();
    let mut selfmods = Vec::new();
    let mut phases: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut configs: Vec<(usize, String, String, Vec<String>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(raw);
        let mut it = toks.iter();
        let Some(head) = it.next() else { continue };
        match head.as_str() {
            "state" => {
                let n = name(line, it.next(), "state name")?;
                m.state(&n);
            }
            "symbol" => {
                let n = name(line, it.next(), "symbol name")?;
                m.symbol(&n);
            }
            "rule" => {
                let id = name(line, it.next(), "rule id")?;
                expect(line, it.next(), ":")?;
                let from = name(line, it.next(), "state")?;
                let sym = name(line, it.next(), "symbol")?;
                expect(line, it.next(), "->")?;
                let to = name(line, it.next(), "state")?;
                let word = it
                    .map(|t| name(line, Some(t), "symbol"))
                    .collect::<Result<Vec<_>>>()?;
                let rule = PdsRule {
                    from: m.state(&from),
                    symbol: m.symbol(&sym),
                    to: m.state(&to),
                    word: word.iter().map(|w| m.symbol(w)).collect(),
                };
                m.add_rule(&id, Rule::Pds(rule))
                    .map_err(|e| Error::parse(line, e.to_string()))?;
            }
            "smrule" => {
                let id = name(line, it.next(), "rule id")?;
                expect(line, it.next(), ":")?;
                let from = name(line, it.next(), "state")?;
                expect(line, it.next(), "(")?;
                let removed = name(line, it.next(), "rule id")?;
                expect(line, it.next(), "->")?;
                let added = name(line, it.next(), "rule id")?;
                expect(line, it.next(), ")")?;
                let to = name(line, it.next(), "state")?;
                if let Some(t) = it.next() {
                    return Err(Error::parse(line, format!("unexpected `{t}`")));
                }
                let placeholder = SelfModRule {
                    from: m.state(&from),
                    removed: RuleId(u32::MAX),
                    added: RuleId(u32::MAX),
                    to: m.state(&to),
                };
                let id = m
                    .add_rule(&id, Rule::SelfMod(placeholder))
                    .map_err(|e| Error::parse(line, e.to_string()))?;
                selfmods.push(PendingSelfMod {
                    line,
                    id,
                    removed,
                    added,
                });
            }
            "phase" => {
                let n = name(line, it.next(), "phase name")?;
                expect(line, it.next(), ":")?;
                let members = it
                    .map(|t| name(line, Some(t), "rule id"))
                    .collect::<Result<Vec<_>>>()?;
                phases.push((line, n, members));
            }
            "config" => {
                expect(line, it.next(), ":")?;
                let p = name(line, it.next(), "state")?;
                let phase = it
                    .next()
                    .cloned()
                    .ok_or_else(|| Error::parse(line, "missing phase"))?;
                let stack = it
                    .map(|t| name(line, Some(t), "symbol"))
                    .collect::<Result<Vec<_>>>()?;
                m.state(&p);
                for s in &stack {
                    m.symbol(s);
                }
                configs.push((line, p, phase, stack));
            }
            other => return Err(Error::parse(line, format!("unknown directive `{other}`"))),
        }
    }

    for sm in selfmods {
        let lookup = |n: &str| {
            m.rule_id(n)
                .ok_or_else(|| Error::parse(sm.line, format!("unknown rule `{n}`")))
        };
        let (removed, added) = (lookup(&sm.removed)?, lookup(&sm.added)?);
        let Some(Rule::SelfMod(rule)) = m.rule(sm.id).cloned() else {
            unreachable!()
        };
        m.replace_rule(
            sm.id,
            Rule::SelfMod(SelfModRule {
                removed,
                added,
                ..rule
            }),
        );
    }

    for (line, n, members) in phases {
        let ids = members
            .iter()
            .map(|r| {
                m.rule_id(r)
                    .ok_or_else(|| Error::parse(line, format!("unknown rule `{r}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        m.define_phase(&n, Phase::from_rules(ids))
            .map_err(|e| Error::parse(line, e.to_string()))?;
    }

    for (line, p, phase, stack) in configs {
        let phase = m
            .resolve_phase(&phase)
            .map_err(|e| Error::parse(line, e.to_string()))?;
        let stack: Vec<&str> = stack.iter().map(String::as_str).collect();
        let c = m
            .config(&p, &stack, phase)
            .map_err(|e| Error::parse(line, e.to_string()))?;
        m.add_config(c);
    }

    Ok(m)
}

pub fn print(m: &Smpds) -> String {
    let mut out = String::new();
    for s in m.states() {
        writeln!(out, "state {}", m.state_name(s)).unwrap();
    }
    for s in m.symbols() {
        writeln!(out, "symbol {}", m.symbol_name(s)).unwrap();
    }
    for (id, rule) in m.rules() {
        out.push_str(&rule_line(m, id, rule));
        out.push('\n');
    }
    for (n, phase) in m.named_phases() {
        write!(out, "phase {n}:").unwrap();
        for r in phase.set().iter() {
            write!(out, " {}", m.rule_name(r)).unwrap();
        }
        out.push('\n');
    }
    for c in m.configs() {
        out.push_str(&config_line(m, c));
        out.push('\n');
    }
    out
}

pub fn rule_line(m: &Smpds, id: RuleId, rule: &Rule) -> String {
    match rule {
        Rule::Pds(r) => {
            let mut s = format!(
                "rule {}: {} {} -> {}",
                m.rule_name(id),
                m.state_name(r.from),
                m.symbol_name(r.symbol),
                m.state_name(r.to)
            );
            for w in &r.word {
                s.push(' ');
                s.push_str(m.symbol_name(*w));
            }
            s
        }
        Rule::SelfMod(r) => format!(
            "smrule {}: {} ({} -> {}) {}",
            m.rule_name(id),
            m.state_name(r.from),
            rule_ref(m, r.removed),
            rule_ref(m, r.added),
            m.state_name(r.to)
        ),
    }
}

fn rule_ref(m: &Smpds, r: RuleId) -> String {
    if r.index() < m.num_rules() {
        m.rule_name(r).to_owned()
    } else {
        format!("?{}", r.0)
    }
}

pub fn config_line(m: &Smpds, c: &Configuration) -> String {
    format!("config: {}", config_body(m, c))
}

/// `<p> <phase> <g1> ...`, the form accepted by [`Smpds::parse_config`].
pub fn config_body(m: &Smpds, c: &Configuration) -> String {
    let mut s = format!("{} {}", m.state_name(c.state), m.phase_label(c.phase));
    for g in &c.stack {
        s.push(' ');
        s.push_str(m.symbol_name(*g));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn example_one_parses() {
        let m = fixtures::example_one();
        assert_eq!(m.num_states(), 4);
        assert_eq!(m.num_symbols(), 3);
        assert_eq!(m.delta().count(), 3);
        assert_eq!(m.delta_c().count(), 1);
        let (_, rp) = m.delta_c().next().unwrap();
        assert_eq!(rp.removed, m.rule_id("r1").unwrap());
        assert_eq!(rp.added, m.rule_id("r3").unwrap());
    }

    #[test]
    fn canonical_round_trip() {
        let m = fixtures::example_one();
        let text = print(&m);
        let again = parse(&text).unwrap();
        assert_eq!(again, m);
        assert_eq!(print(&again), text);
    }

    #[test]
    fn forward_references_resolve() {
        let m = parse("smrule a: p (b -> b) q\nrule b: p g -> q\n").unwrap();
        let (_, sm) = m.delta_c().next().unwrap();
        assert_eq!(sm.removed, m.rule_id("b").unwrap());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse("state p\nrule r: p g => q\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse("smrule s: p (x -> y) q\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse("rule r: p g -> q\nrule r: p g -> q\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse("bogus\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn anonymous_phase_literal_in_config() {
        let m = parse("rule a: p g -> q\nrule b: q g -> p\nconfig: p {a,b} g\n").unwrap();
        assert_eq!(m.configs()[0].phase, m.all_rules_phase());
        assert_eq!(config_line(&m, &m.configs()[0]), "config: p {a,b} g");
    }
}
