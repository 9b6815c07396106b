//! Rewritings that establish the preconditions of the saturation
//! procedures: no self-modifying rule removes itself, and no ordinary rule
//! pushes more than two symbols.
//!
//! Both rewritings keep every original state, symbol and rule id, append
//! fresh ones, and put the appended rules into every phase. Because nothing
//! can ever remove those rules again, phases of the rewritten system are in
//! bijection with phases of the original one via [`Normalized::lift_phase`]
//! and [`Normalized::project_phase`].

use super::{Configuration, PdsRule, Phase, Rule, RuleId, SelfModRule, Smpds, StateId, SymbolId};

#[derive(Debug, Clone)]
pub struct Normalized {
    pub smpds: Smpds,
    original_states: usize,
    original_symbols: usize,
    /// For each original rule, the ids standing for it in `smpds`; the
    /// first entry is always the original id itself.
    pub rule_map: Vec<Vec<RuleId>>,
    /// The inert rule `r_bot` when one had to be introduced.
    pub bottom: Option<RuleId>,
    always_on: Phase,
    pub warnings: Vec<String>,
}

impl Normalized {
    /// The trivial normalization of an already normal system.
    pub fn identity(smpds: &Smpds) -> Self {
        Normalized {
            original_states: smpds.num_states(),
            original_symbols: smpds.num_symbols(),
            rule_map: (0..smpds.num_rules() as u32)
                .map(|r| vec![RuleId(r)])
                .collect(),
            bottom: None,
            always_on: Phase::empty(),
            warnings: Vec::new(),
            smpds: smpds.clone(),
        }
    }

    /// True when nothing had to be rewritten.
    pub fn is_identity(&self) -> bool {
        self.always_on.is_empty()
    }

    /// Rules added by the rewriting; every lifted phase contains them.
    pub fn always_on(&self) -> Phase {
        self.always_on
    }

    pub fn original_states(&self) -> usize {
        self.original_states
    }

    pub fn original_symbols(&self) -> usize {
        self.original_symbols
    }

    pub fn is_aux_state(&self, s: StateId) -> bool {
        s.index() >= self.original_states
    }

    pub fn is_aux_symbol(&self, s: SymbolId) -> bool {
        s.index() >= self.original_symbols
    }

    pub fn is_aux_rule(&self, r: RuleId) -> bool {
        self.always_on.contains(r)
    }

    pub fn lift_phase(&self, phase: Phase) -> Phase {
        if self.always_on.is_empty() {
            return phase;
        }
        Phase::intern(phase.set().union(&self.always_on.set()))
    }

    pub fn project_phase(&self, phase: Phase) -> Phase {
        if self.always_on.is_empty() {
            return phase;
        }
        Phase::intern(phase.set().difference(&self.always_on.set()))
    }

    pub fn lift_config(&self, c: &Configuration) -> Configuration {
        Configuration::new(c.state, c.stack.clone(), self.lift_phase(c.phase))
    }

    /// `None` for configurations that mention auxiliary states or symbols.
    pub fn project_config(&self, c: &Configuration) -> Option<Configuration> {
        if self.is_aux_state(c.state) || c.stack.iter().any(|&g| self.is_aux_symbol(g)) {
            return None;
        }
        Some(Configuration::new(
            c.state,
            c.stack.clone(),
            self.project_phase(c.phase),
        ))
    }

    fn then(self, next: Normalized) -> Normalized {
        let rule_map = self
            .rule_map
            .iter()
            .map(|ids| {
                ids.iter()
                    .flat_map(|r| next.rule_map[r.index()].iter().copied())
                    .collect()
            })
            .collect();
        let always_on = self
            .always_on
            .members()
            .into_iter()
            .flat_map(|r| next.rule_map[r.index()].iter().copied())
            .chain(next.always_on.members());
        let mut warnings = self.warnings;
        warnings.extend(next.warnings);
        Normalized {
            smpds: next.smpds,
            original_states: self.original_states,
            original_symbols: self.original_symbols,
            rule_map,
            bottom: self.bottom.or(next.bottom),
            always_on: Phase::from_rules(always_on),
            warnings,
        }
    }
}

fn finish(mut out: Normalized, added: Vec<RuleId>) -> Normalized {
    if added.is_empty() {
        return out;
    }
    out.always_on = Phase::from_rules(added);
    let always_on = out.always_on.set();
    out.smpds
        .map_phases(|p| Phase::intern(p.set().union(&always_on)));
    out
}

/// Splits every self-modifying rule `r = p --(r, r2)--> p'` with `r2 != r`
/// into `r = p --(r_bot, r_bot)--> p_i` and `p_i --(r, r2)--> p'`.
pub fn normalize_selfmod(smpds: &Smpds) -> Normalized {
    let mut out = Normalized::identity(smpds);
    let offending: Vec<(RuleId, SelfModRule)> = smpds
        .delta_c()
        .filter(|(id, r)| r.removed == *id && r.added != *id)
        .map(|(id, r)| (id, *r))
        .collect();
    if offending.is_empty() {
        return out;
    }
    let m = &mut out.smpds;
    let p_bot = m.fresh_state("bot");
    let bot_name = m.fresh_rule_name("r_bot");
    let bot = RuleId(m.num_rules() as u32);
    m.add_rule(
        &bot_name,
        Rule::SelfMod(SelfModRule {
            from: p_bot,
            removed: bot,
            added: bot,
            to: p_bot,
        }),
    )
    .expect("fresh rule name");
    let mut added = vec![bot];
    for (id, rule) in offending {
        let stem = format!("{}.mid", m.rule_name(id));
        let mid = m.fresh_state(&stem);
        m.replace_rule(
            id,
            Rule::SelfMod(SelfModRule {
                from: rule.from,
                removed: bot,
                added: bot,
                to: mid,
            }),
        );
        let name = m.fresh_rule_name(&format!("{}.2", m.rule_name(id)));
        let helper = m
            .add_rule(
                &name,
                Rule::SelfMod(SelfModRule {
                    from: mid,
                    removed: id,
                    added: rule.added,
                    to: rule.to,
                }),
            )
            .expect("fresh rule name");
        out.rule_map[id.index()].push(helper);
        added.push(helper);
    }
    out.bottom = Some(bot);
    finish(out, added)
}

/// Replaces every rule `<p, g> -> <p', g1 ... gn>` with `n > 2` by `n - 1`
/// rules through fresh states `p_1 .. p_{n-2}` and fresh symbols
/// `a_1 .. a_{n-2}`. The first of them keeps the original id, so
/// self-modifying rules that mention a split rule now refer to the head of
/// its group.
pub fn normalize_push(smpds: &Smpds) -> Normalized {
    let mut out = Normalized::identity(smpds);
    let long: Vec<(RuleId, PdsRule)> = smpds
        .delta()
        .filter(|(_, r)| r.word.len() > 2)
        .map(|(id, r)| (id, r.clone()))
        .collect();
    let mut added = Vec::new();
    for (id, rule) in long {
        let m = &mut out.smpds;
        let n = rule.word.len();
        let name = m.rule_name(id).to_owned();
        let states: Vec<StateId> = (1..=n - 2)
            .map(|i| m.fresh_state(&format!("{name}.p{i}")))
            .collect();
        let symbols: Vec<SymbolId> = (1..=n - 2)
            .map(|i| m.fresh_symbol(&format!("{name}.a{i}")))
            .collect();
        m.replace_rule(
            id,
            Rule::Pds(PdsRule {
                from: rule.from,
                symbol: rule.symbol,
                to: states[0],
                word: vec![symbols[0], rule.word[n - 1]],
            }),
        );
        for i in 0..n - 2 {
            let (to, word) = if i + 1 < n - 2 {
                (states[i + 1], vec![symbols[i + 1], rule.word[n - 2 - i]])
            } else {
                (rule.to, vec![rule.word[0], rule.word[1]])
            };
            let tail_name = m.fresh_rule_name(&format!("{name}.{}", i + 2));
            let tail = m
                .add_rule(
                    &tail_name,
                    Rule::Pds(PdsRule {
                        from: states[i],
                        symbol: symbols[i],
                        to,
                        word,
                    }),
                )
                .expect("fresh rule name");
            out.rule_map[id.index()].push(tail);
            added.push(tail);
        }
        let referenced = smpds
            .delta_c()
            .any(|(_, sm)| sm.removed == id || sm.added == id);
        if referenced {
            out.warnings.push(format!(
                "rule {name} is split by normalize_push; self-modifying rules now refer to the head of its group"
            ));
        }
    }
    finish(out, added)
}

/// `normalize_selfmod` followed by `normalize_push`.
pub fn normalize(smpds: &Smpds) -> Normalized {
    let first = normalize_selfmod(smpds);
    let second = normalize_push(&first.smpds);
    first.then(second)
}
