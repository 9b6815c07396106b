//! Self-modifying pushdown systems and their configurations.

mod config;
mod normalize;
mod phase;
mod semantics;
pub mod text;
mod validate;

use std::collections::HashMap;
use std::fmt;

pub use config::Configuration;
pub use normalize::{normalize, normalize_push, normalize_selfmod, Normalized};
pub use phase::{Phase, PhaseSet};
pub use semantics::{bounded_reach, BoundedReach};
pub use validate::{Diagnostic, DiagnosticKind, Severity, ValidationReport};

use crate::error::{Error, Result};

/// Control point of the pushdown system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

/// Stack symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

/// Dense index into the rule table. Phases refer to rules by id, so two
/// structurally equal rules with different ids are distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId(pub u32);

macro_rules! index_impl {
    ($($t:ty),*) => {$(
        impl $t {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    )*};
}
index_impl!(StateId, SymbolId, RuleId);

/// `<from, symbol> -> <to, word>`; the leftmost symbol of `word` ends up on
/// top of the stack.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PdsRule {
    pub from: StateId,
    pub symbol: SymbolId,
    pub to: StateId,
    pub word: Vec<SymbolId>,
}

/// `from --(removed, added)--> to`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SelfModRule {
    pub from: StateId,
    pub removed: RuleId,
    pub added: RuleId,
    pub to: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rule {
    Pds(PdsRule),
    SelfMod(SelfModRule),
}

impl Rule {
    pub fn as_pds(&self) -> Option<&PdsRule> {
        match self {
            Rule::Pds(r) => Some(r),
            Rule::SelfMod(_) => None,
        }
    }

    pub fn as_selfmod(&self) -> Option<&SelfModRule> {
        match self {
            Rule::SelfMod(r) => Some(r),
            Rule::Pds(_) => None,
        }
    }

    pub fn from_state(&self) -> StateId {
        match self {
            Rule::Pds(r) => r.from,
            Rule::SelfMod(r) => r.from,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct NameTable {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl NameTable {
    fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    fn intern(&mut self, name: &str) -> u32 {
        if let Some(id) = self.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    fn fresh(&mut self, stem: &str) -> u32 {
        if self.get(stem).is_none() {
            return self.intern(stem);
        }
        (1..)
            .map(|i| format!("{stem}~{i}"))
            .find(|n| self.get(n).is_none())
            .map(|n| self.intern(&n))
            .unwrap()
    }

    fn len(&self) -> usize {
        self.names.len()
    }
}

/// A self-modifying pushdown system `(P, Γ, Δ, Δc)` together with the named
/// phases and configurations that its textual form may carry.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Smpds {
    states: NameTable,
    symbols: NameTable,
    rules: Vec<Rule>,
    rule_names: NameTable,
    phases: Vec<(String, Phase)>,
    configs: Vec<Configuration>,
}

impl Smpds {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a control point, returning the existing id for known names.
    pub fn state(&mut self, name: &str) -> StateId {
        StateId(self.states.intern(name))
    }

    pub fn symbol(&mut self, name: &str) -> SymbolId {
        SymbolId(self.symbols.intern(name))
    }

    pub(crate) fn fresh_state(&mut self, stem: &str) -> StateId {
        StateId(self.states.fresh(stem))
    }

    pub(crate) fn fresh_symbol(&mut self, stem: &str) -> SymbolId {
        SymbolId(self.symbols.fresh(stem))
    }

    pub(crate) fn fresh_rule_name(&self, stem: &str) -> String {
        if self.rule_names.get(stem).is_none() {
            return stem.to_owned();
        }
        (1..)
            .map(|i| format!("{stem}~{i}"))
            .find(|n| self.rule_names.get(n).is_none())
            .unwrap()
    }

    /// Appends a rule. References inside self-modifying rules are not
    /// checked here; see [`Smpds::validate`].
    pub fn add_rule(&mut self, name: &str, rule: Rule) -> Result<RuleId> {
        if self.rule_names.get(name).is_some() {
            return Err(Error::Duplicate {
                kind: "rule",
                name: name.to_owned(),
            });
        }
        let id = RuleId(self.rule_names.intern(name));
        debug_assert_eq!(id.index(), self.rules.len());
        self.rules.push(rule);
        Ok(id)
    }

    /// Convenience: `<from, symbol> -> <to, word>` by names.
    pub fn add_pds_rule(
        &mut self,
        name: &str,
        from: &str,
        symbol: &str,
        to: &str,
        word: &[&str],
    ) -> Result<RuleId> {
        let rule = PdsRule {
            from: self.state(from),
            symbol: self.symbol(symbol),
            to: self.state(to),
            word: word.iter().map(|s| self.symbol(s)).collect(),
        };
        self.add_rule(name, Rule::Pds(rule))
    }

    /// Convenience: `from --(removed, added)--> to` by names. Both rule
    /// names must already be declared.
    pub fn add_selfmod_rule(
        &mut self,
        name: &str,
        from: &str,
        removed: &str,
        added: &str,
        to: &str,
    ) -> Result<RuleId> {
        let lookup = |n: &str| {
            self.rule_id(n)
                .ok_or_else(|| Error::Invalid(format!("unknown rule `{n}`")))
        };
        let rule = SelfModRule {
            removed: lookup(removed)?,
            added: lookup(added)?,
            from: self.state(from),
            to: self.state(to),
        };
        self.add_rule(name, Rule::SelfMod(rule))
    }

    pub(crate) fn replace_rule(&mut self, id: RuleId, rule: Rule) {
        self.rules[id.index()] = rule;
    }

    pub fn define_phase(&mut self, name: &str, phase: Phase) -> Result<()> {
        if self.phases.iter().any(|(n, _)| n == name) {
            return Err(Error::Duplicate {
                kind: "phase",
                name: name.to_owned(),
            });
        }
        self.phases.push((name.to_owned(), phase));
        Ok(())
    }

    pub fn add_config(&mut self, c: Configuration) {
        self.configs.push(c);
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn rules(&self) -> impl Iterator<Item = (RuleId, &Rule)> {
        self.rules
            .iter()
            .enumerate()
            .map(|(i, r)| (RuleId(i as u32), r))
    }

    pub fn rule(&self, id: RuleId) -> Option<&Rule> {
        self.rules.get(id.index())
    }

    /// The ordinary rules `Δ`.
    pub fn delta(&self) -> impl Iterator<Item = (RuleId, &PdsRule)> {
        self.rules()
            .filter_map(|(id, r)| r.as_pds().map(|r| (id, r)))
    }

    /// The self-modifying rules `Δc`.
    pub fn delta_c(&self) -> impl Iterator<Item = (RuleId, &SelfModRule)> {
        self.rules()
            .filter_map(|(id, r)| r.as_selfmod().map(|r| (id, r)))
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn symbols(&self) -> impl Iterator<Item = SymbolId> {
        (0..self.symbols.len() as u32).map(SymbolId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states.names[s.index()]
    }

    pub fn symbol_name(&self, s: SymbolId) -> &str {
        &self.symbols.names[s.index()]
    }

    pub fn rule_name(&self, r: RuleId) -> &str {
        &self.rule_names.names[r.index()]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.get(name).map(StateId)
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.symbols.get(name).map(SymbolId)
    }

    pub fn rule_id(&self, name: &str) -> Option<RuleId> {
        self.rule_names.get(name).map(RuleId)
    }

    pub fn named_phases(&self) -> &[(String, Phase)] {
        &self.phases
    }

    pub fn phase_by_name(&self, name: &str) -> Option<Phase> {
        self.phases.iter().find(|(n, _)| n == name).map(|&(_, p)| p)
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    /// The phase containing every rule.
    pub fn all_rules_phase(&self) -> Phase {
        Phase::from_rules((0..self.rules.len() as u32).map(RuleId))
    }

    /// Declared name of `phase`, or its member list as `{r1,r2}`.
    pub fn phase_label(&self, phase: Phase) -> String {
        if let Some((name, _)) = self.phases.iter().find(|(_, p)| *p == phase) {
            return name.clone();
        }
        let members: Vec<&str> = phase
            .set()
            .iter()
            .map(|r| {
                self.rule_names
                    .names
                    .get(r.index())
                    .map_or("?", String::as_str)
            })
            .collect();
        format!("{{{}}}", members.join(","))
    }

    /// Resolves a phase name or a `{r1,r2}` literal.
    pub fn resolve_phase(&self, token: &str) -> Result<Phase> {
        if let Some(inner) = token.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
            let members = inner
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|n| {
                    self.rule_id(n).ok_or_else(|| {
                        Error::Invalid(format!("unknown rule `{n}` in phase literal"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(Phase::from_rules(members));
        }
        self.phase_by_name(token)
            .ok_or_else(|| Error::Invalid(format!("unknown phase `{token}`")))
    }

    /// Builds a configuration from names; `stack` is listed top first.
    pub fn config(&self, state: &str, stack: &[&str], phase: Phase) -> Result<Configuration> {
        let state = self
            .state_id(state)
            .ok_or_else(|| Error::MalformedConfig(format!("unknown state `{state}`")))?;
        let stack = stack
            .iter()
            .map(|s| {
                self.symbol_id(s)
                    .ok_or_else(|| Error::MalformedConfig(format!("unknown symbol `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Configuration::new(state, stack, phase))
    }

    /// Parses `<p> <phase> <g1> <g2> ...`.
    pub fn parse_config(&self, text: &str) -> Result<Configuration> {
        let mut tokens = text.split_whitespace();
        let (Some(state), Some(phase)) = (tokens.next(), tokens.next()) else {
            return Err(Error::MalformedConfig(format!(
                "expected `<state> <phase> <symbols...>`, got `{text}`"
            )));
        };
        let phase = self.resolve_phase(phase)?;
        let stack: Vec<&str> = tokens.collect();
        self.config(state, &stack, phase)
    }

    pub fn display_config<'a>(&'a self, c: &'a Configuration) -> impl fmt::Display + 'a {
        DisplayConfig { smpds: self, c }
    }

    pub(crate) fn map_phases(&mut self, f: impl Fn(Phase) -> Phase) {
        for (_, p) in &mut self.phases {
            *p = f(*p);
        }
        for c in &mut self.configs {
            c.phase = f(c.phase);
        }
    }
}

struct DisplayConfig<'a> {
    smpds: &'a Smpds,
    c: &'a Configuration,
}

impl fmt::Display for DisplayConfig<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(<{}", self.smpds.state_name(self.c.state))?;
        if self.c.stack.is_empty() {
            write!(f, ", ε")?;
        } else {
            write!(f, ",")?;
            for s in &self.c.stack {
                write!(f, " {}", self.smpds.symbol_name(*s))?;
            }
        }
        write!(f, ">, {})", self.smpds.phase_label(self.c.phase))
    }
}
