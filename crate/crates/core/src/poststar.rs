//! Forward saturation: `post*` of a regular set of configurations.
//!
//! Transitions leaving initial states are the only ones rules can match.
//! Since `ε` transitions only ever go from an initial state to a
//! non-initial one, a path reading one symbol from an initial state is
//! either a single transition or an `ε` step followed by one; the engine
//! keeps those one-symbol *reads* in a separate index instead of adding
//! shortcut transitions to the automaton.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::automaton::{AutState, AutStateId, Label, PAutomaton};
use crate::error::{Error, Result};
use crate::model::{normalize, Phase, PhaseSet, RuleId, Smpds, StateId, SymbolId};
use crate::saturation::{
    check_alphabet, check_system, run_normalized, Meter, Saturation, SaturationOptions,
    SaturationStats,
};

/// `post*` of `L(aut)`, normalizing the system first when needed.
pub fn poststar(smpds: &Smpds, aut: &PAutomaton) -> Result<PAutomaton> {
    poststar_with(smpds, aut, &SaturationOptions::default()).map(|s| s.automaton)
}

pub fn poststar_with(
    smpds: &Smpds,
    aut: &PAutomaton,
    opts: &SaturationOptions,
) -> Result<Saturation> {
    check_alphabet(smpds, aut)?;
    check_input(aut, opts)?;
    let normalized = normalize(smpds);
    run_normalized(&normalized, aut, |m, lifted| {
        poststar_direct(m, lifted, opts)
    })
}

fn check_input(aut: &PAutomaton, opts: &SaturationOptions) -> Result<()> {
    if aut.has_transition_into_initial() {
        return Err(Error::Precondition(
            "automaton has transitions into initial states".into(),
        ));
    }
    for t in aut.transitions() {
        if t.label == Label::Epsilon && !(opts.accept_saturated_input && aut.is_initial(t.from)) {
            return Err(Error::Precondition("automaton has ε transitions".into()));
        }
    }
    Ok(())
}

/// The saturation procedure proper. `smpds` must be normalized.
pub fn poststar_direct(
    smpds: &Smpds,
    aut: PAutomaton,
    opts: &SaturationOptions,
) -> Result<Saturation> {
    check_system(smpds, true)?;
    check_alphabet(smpds, &aut)?;
    check_input(&aut, opts)?;
    let mut engine = Engine::new(smpds, aut, opts);
    engine.run()?;
    let stats = SaturationStats {
        transitions_added: engine.aut.num_transitions() - engine.initial_transitions,
        phases_materialized: engine.phases.len(),
        elapsed: engine.meter.elapsed(),
        peak_bytes: engine.meter.peak(engine.bytes()),
    };
    Ok(Saturation {
        automaton: engine.aut,
        stats,
    })
}

enum Event {
    /// `(initial, g, q)`: the initial state reads `g` and may end in `q`.
    Read(AutStateId, SymbolId, AutStateId),
    Empty(AutStateId),
}

struct Engine<'a> {
    smpds: &'a Smpds,
    aut: PAutomaton,
    initial_transitions: usize,
    meter: Meter,
    reads: HashSet<(AutStateId, SymbolId, AutStateId)>,
    /// Initial states with an `ε` transition into the key.
    eps_into: HashMap<AutStateId, Vec<AutStateId>>,
    empty: HashSet<AutStateId>,
    phases: HashMap<Phase, Arc<PhaseSet>>,
    by_lhs: HashMap<(StateId, SymbolId), Vec<RuleId>>,
    selfmod_by_from: HashMap<StateId, Vec<RuleId>>,
    work: VecDeque<Event>,
}

impl<'a> Engine<'a> {
    fn new(smpds: &'a Smpds, aut: PAutomaton, opts: &SaturationOptions) -> Self {
        let mut by_lhs: HashMap<_, Vec<_>> = HashMap::new();
        for (id, r) in smpds.delta() {
            by_lhs.entry((r.from, r.symbol)).or_default().push(id);
        }
        let mut selfmod_by_from: HashMap<_, Vec<_>> = HashMap::new();
        for (id, r) in smpds.delta_c() {
            selfmod_by_from.entry(r.from).or_default().push(id);
        }
        Engine {
            smpds,
            initial_transitions: aut.num_transitions(),
            aut,
            meter: Meter::new(opts.budget),
            reads: HashSet::new(),
            eps_into: HashMap::new(),
            empty: HashSet::new(),
            phases: HashMap::new(),
            by_lhs,
            selfmod_by_from,
            work: VecDeque::new(),
        }
    }

    fn bytes(&self) -> usize {
        self.aut.heap_bytes()
            + self.reads.len() * 64
            + self.phases.len() * (self.smpds.num_rules() / 8 + 64)
    }

    fn set(&mut self, th: Phase) -> Arc<PhaseSet> {
        self.phases.entry(th).or_insert_with(|| th.set()).clone()
    }

    fn run(&mut self) -> Result<()> {
        for t in self.aut.transitions().to_vec() {
            self.on_transition(t.from, t.label, t.to);
        }
        let initials: Vec<(AutStateId, Phase)> = self
            .aut
            .initial_states()
            .map(|(q, _, th)| (q, th))
            .collect();
        for (q, th) in initials {
            self.set(th);
            if self.aut.is_final(q) {
                self.mark_empty(q);
            }
        }
        while let Some(ev) = self.work.pop_front() {
            if self.meter.due() {
                self.meter.check(self.bytes())?;
            }
            match ev {
                Event::Read(s, g, q) => self.process_read(s, g, q),
                Event::Empty(s) => self.process_empty(s),
            }
        }
        Ok(())
    }

    fn mark_empty(&mut self, q: AutStateId) {
        if self.empty.insert(q) {
            self.work.push_back(Event::Empty(q));
        }
    }

    fn read(&mut self, s: AutStateId, g: SymbolId, q: AutStateId) {
        if self.reads.insert((s, g, q)) {
            self.work.push_back(Event::Read(s, g, q));
        }
    }

    fn add(&mut self, from: AutStateId, label: Label, to: AutStateId) {
        if self.aut.add_transition(from, label, to) {
            self.on_transition(from, label, to);
        }
    }

    /// Index maintenance for a transition that just entered the automaton.
    fn on_transition(&mut self, from: AutStateId, label: Label, to: AutStateId) {
        match label {
            Label::Symbol(g) => {
                if self.aut.is_initial(from) {
                    self.read(from, g, to);
                } else if let Some(sources) = self.eps_into.get(&from) {
                    for s in sources.clone() {
                        self.read(s, g, to);
                    }
                }
            }
            Label::Epsilon => {
                self.eps_into.entry(to).or_default().push(from);
                let outs: Vec<(Label, AutStateId)> = self.aut.outgoing(to).to_vec();
                for (l, t) in outs {
                    if let Label::Symbol(g) = l {
                        self.read(from, g, t);
                    }
                }
                if self.aut.is_final(to) {
                    self.mark_empty(from);
                }
            }
        }
    }

    fn process_read(&mut self, s: AutStateId, g: SymbolId, q: AutStateId) {
        let AutState::Initial(p, th) = *self.aut.state(s) else {
            unreachable!("reads start at initial states")
        };
        let set = self.set(th);
        for r in self.by_lhs.get(&(p, g)).cloned().unwrap_or_default() {
            if !set.contains(r) {
                continue;
            }
            let rule = self.smpds.rule(r).and_then(|r| r.as_pds()).unwrap();
            let (to, word) = (rule.to, rule.word.clone());
            let target = self.aut.add_initial(to, th);
            match word.as_slice() {
                [] => self.add(target, Label::Epsilon, q),
                [g1] => self.add(target, Label::Symbol(*g1), q),
                [g1, g2] => {
                    let mid = self.aut.add_state(AutState::Generated(to, *g1, th));
                    self.add(target, Label::Symbol(*g1), mid);
                    self.add(mid, Label::Symbol(*g2), q);
                }
                _ => unreachable!("checked by check_system"),
            }
        }
        for (to, next) in self.selfmod_successors(p, th, &set) {
            let target = self.aut.add_initial(to, next);
            self.set(next);
            self.add(target, Label::Symbol(g), q);
        }
    }

    fn process_empty(&mut self, s: AutStateId) {
        let AutState::Initial(p, th) = *self.aut.state(s) else {
            return;
        };
        let set = self.set(th);
        for (to, next) in self.selfmod_successors(p, th, &set) {
            let target = self.aut.add_initial(to, next);
            self.set(next);
            self.aut.set_final(target);
            self.mark_empty(target);
        }
    }

    fn selfmod_successors(&self, p: StateId, th: Phase, set: &PhaseSet) -> Vec<(StateId, Phase)> {
        let Some(rules) = self.selfmod_by_from.get(&p) else {
            return Vec::new();
        };
        rules
            .iter()
            .filter(|&&r| set.contains(r))
            .filter_map(|&r| {
                let rule = self.smpds.rule(r)?.as_selfmod()?;
                set.contains(rule.removed)
                    .then(|| (rule.to, th.modified(rule.removed, rule.added)))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::Configuration;

    #[test]
    fn example_one_end_is_in_post_star_of_the_start() {
        let m = fixtures::example_one();
        let th0 = m.phase_by_name("th0").unwrap();
        let th1 = m.phase_by_name("th1").unwrap();
        let start = m.config("p1", &["g1", "g1"], th0).unwrap();
        let result = poststar(&m, &PAutomaton::from_configs([&start])).unwrap();
        assert!(result.accepts(&start));
        assert!(result.accepts(&m.config("p3", &["g3", "g1"], th1).unwrap()));
        assert!(result.accepts(&m.config("p4", &["g1", "g1"], th1).unwrap()));
        assert!(!result.accepts(&m.config("p3", &["g3", "g3"], th1).unwrap()));
    }

    #[test]
    fn generated_states_are_shared() {
        let m = fixtures::example_one();
        let th0 = m.phase_by_name("th0").unwrap();
        let a = m.config("p1", &["g1"], th0).unwrap();
        let b = m.config("p1", &["g1", "g2"], th0).unwrap();
        let result = poststar(&m, &PAutomaton::from_configs([&a, &b])).unwrap();
        let generated = result
            .state_ids()
            .filter(|&q| matches!(result.state(q), AutState::Generated(_, _, th) if *th == th0))
            .count();
        assert_eq!(generated, 1);
    }

    #[test]
    fn rejects_epsilon_input() {
        let m = fixtures::example_one();
        let th0 = m.phase_by_name("th0").unwrap();
        let mut aut = PAutomaton::new();
        let a = aut.add_initial(StateId(0), th0);
        let b = aut.add_fresh_plain("b");
        aut.add_transition(a, Label::Epsilon, b);
        assert!(matches!(poststar(&m, &aut), Err(Error::Precondition(_))));
    }

    #[test]
    fn long_pushes_are_normalized_away() {
        let mut m = Smpds::new();
        m.add_pds_rule("r", "p", "g", "q", &["a", "b", "c"])
            .unwrap();
        let all = m.all_rules_phase();
        let start = m.config("p", &["g"], all).unwrap();
        let result = poststar(&m, &PAutomaton::from_configs([&start])).unwrap();
        let goal = m.config("q", &["a", "b", "c"], all).unwrap();
        let expected = std::collections::BTreeSet::from([start, goal]);
        assert_eq!(result.enumerate(4), expected);
        let aux = result
            .transitions()
            .iter()
            .any(|t| matches!(t.label, Label::Symbol(g) if g.index() >= m.num_symbols()));
        assert!(!aux);
    }

    #[test]
    fn idempotent_on_own_output() {
        let m = fixtures::example_one();
        let th0 = m.phase_by_name("th0").unwrap();
        let start = m.config("p1", &["g1", "g1"], th0).unwrap();
        let once = poststar(&m, &PAutomaton::from_configs([&start])).unwrap();
        let opts = SaturationOptions {
            accept_saturated_input: true,
            ..Default::default()
        };
        let twice = poststar_with(&m, &once, &opts).unwrap();
        assert_eq!(twice.stats.transitions_added, 0);
        assert_eq!(twice.automaton.enumerate(4), once.enumerate(4));
    }

    #[test]
    fn selfmod_on_empty_stack() {
        let m = fixtures::example_one();
        let th0 = m.phase_by_name("th0").unwrap();
        let th1 = m.phase_by_name("th1").unwrap();
        let start = m.config("p2", &["g2"], th0).unwrap();
        let result = poststar(&m, &PAutomaton::from_configs([&start])).unwrap();
        let expected = Configuration::new(m.state_id("p4").unwrap(), vec![], th1);
        assert!(result.accepts(&expected));
    }
}
