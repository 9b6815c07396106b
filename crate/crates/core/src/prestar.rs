//! Backward saturation: `pre*` of a regular set of configurations.
//!
//! The engine is a worklist algorithm over *reads* `(s, g, t)`: `t` can be
//! reached from `s` by a path that reads exactly `g`, with `ε` moves of the
//! input automaton before and after. Saturation never adds `ε` transitions,
//! so the `ε`-closure is computed once up front.
//!
//! Phases are materialized on demand: only phases of initial states present
//! in the automaton are ever considered, and backward self-modification
//! introduces new ones as needed.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::automaton::{AutState, AutStateId, Label, PAutomaton};
use crate::error::{Error, Result};
use crate::model::{normalize_selfmod, Phase, PhaseSet, RuleId, Smpds, StateId, SymbolId};
use crate::saturation::{
    check_alphabet, check_system, run_normalized, Meter, Saturation, SaturationOptions,
    SaturationStats,
};

/// `pre*` of `L(aut)`, normalizing self-referential rules first.
pub fn prestar(smpds: &Smpds, aut: &PAutomaton) -> Result<PAutomaton> {
    prestar_with(smpds, aut, &SaturationOptions::default()).map(|s| s.automaton)
}

pub fn prestar_with(
    smpds: &Smpds,
    aut: &PAutomaton,
    opts: &SaturationOptions,
) -> Result<Saturation> {
    check_alphabet(smpds, aut)?;
    let normalized = normalize_selfmod(smpds);
    run_normalized(&normalized, aut, |m, lifted| {
        prestar_direct(m, lifted, opts)
    })
}

/// The saturation procedure proper. `smpds` must be free of
/// self-referential rules; `aut` is consumed and extended in place.
pub fn prestar_direct(
    smpds: &Smpds,
    aut: PAutomaton,
    opts: &SaturationOptions,
) -> Result<Saturation> {
    check_system(smpds, false)?;
    check_alphabet(smpds, &aut)?;
    if !opts.accept_saturated_input && aut.has_transition_into_initial() {
        return Err(Error::Precondition(
            "automaton has transitions into initial states".into(),
        ));
    }
    let mut engine = Engine::new(smpds, aut, opts);
    engine.run()?;
    let stats = SaturationStats {
        transitions_added: engine.aut.num_transitions() - engine.initial_transitions,
        phases_materialized: engine.materialized.len(),
        elapsed: engine.meter.elapsed(),
        peak_bytes: engine.meter.peak(engine.bytes()),
    };
    Ok(Saturation {
        automaton: engine.aut,
        stats,
    })
}

enum Event {
    Read(AutStateId, SymbolId, AutStateId),
    /// The initial state accepts the empty stack.
    Empty(AutStateId),
}

/// A state together with a symbol it reads.
type Edge = (AutStateId, SymbolId);

struct Engine<'a> {
    smpds: &'a Smpds,
    aut: PAutomaton,
    initial_transitions: usize,
    meter: Meter,
    /// Static `ε`-closure and its inverse; states created during
    /// saturation have no `ε` edges and are absent from both maps.
    closure: HashMap<AutStateId, Vec<AutStateId>>,
    rev_closure: HashMap<AutStateId, Vec<AutStateId>>,
    reads: HashMap<(AutStateId, SymbolId), Vec<AutStateId>>,
    read_set: HashSet<(AutStateId, SymbolId, AutStateId)>,
    /// Partial matches of right-hand sides: `(rule, phase, position)`
    /// waiting at a state for the next symbol.
    waiting: HashMap<Edge, Vec<(RuleId, Phase, usize)>>,
    partial: HashSet<(RuleId, Phase, usize, AutStateId)>,
    empty: HashSet<AutStateId>,
    materialized: HashSet<Phase>,
    sets: HashMap<Phase, Arc<PhaseSet>>,
    /// Ordinary rules by `(target state, first pushed symbol)`.
    by_rhs: HashMap<(StateId, SymbolId), Vec<RuleId>>,
    pops: Vec<RuleId>,
    selfmod_by_to: HashMap<StateId, Vec<RuleId>>,
    work: VecDeque<Event>,
}

fn symbol_of(label: Label) -> Option<SymbolId> {
    match label {
        Label::Symbol(g) => Some(g),
        Label::Epsilon => None,
    }
}

impl<'a> Engine<'a> {
    fn new(smpds: &'a Smpds, aut: PAutomaton, opts: &SaturationOptions) -> Self {
        let mut by_rhs: HashMap<_, Vec<_>> = HashMap::new();
        let mut pops = Vec::new();
        for (id, r) in smpds.delta() {
            match r.word.first() {
                Some(&g) => by_rhs.entry((r.to, g)).or_default().push(id),
                None => pops.push(id),
            }
        }
        let mut selfmod_by_to: HashMap<_, Vec<_>> = HashMap::new();
        for (id, r) in smpds.delta_c() {
            selfmod_by_to.entry(r.to).or_default().push(id);
        }
        let mut closure = HashMap::new();
        let mut rev_closure: HashMap<_, Vec<_>> = HashMap::new();
        if aut.has_epsilon() {
            for q in aut.state_ids() {
                let c: Vec<AutStateId> = aut.eps_closure(q).to_vec();
                for &t in &c {
                    rev_closure.entry(t).or_default().push(q);
                }
                closure.insert(q, c);
            }
        }
        Engine {
            smpds,
            initial_transitions: aut.num_transitions(),
            aut,
            meter: Meter::new(opts.budget),
            closure,
            rev_closure,
            reads: HashMap::new(),
            read_set: HashSet::new(),
            waiting: HashMap::new(),
            partial: HashSet::new(),
            empty: HashSet::new(),
            materialized: HashSet::new(),
            sets: HashMap::new(),
            by_rhs,
            pops,
            selfmod_by_to,
            work: VecDeque::new(),
        }
    }

    fn bytes(&self) -> usize {
        self.aut.heap_bytes()
            + self.read_set.len() * 64
            + self.partial.len() * 96
            + self.sets.len() * (self.smpds.num_rules() / 8 + 64)
    }

    fn set(&mut self, th: Phase) -> Arc<PhaseSet> {
        self.sets.entry(th).or_insert_with(|| th.set()).clone()
    }

    fn closure_of(&self, q: AutStateId) -> Vec<AutStateId> {
        self.closure.get(&q).cloned().unwrap_or_else(|| vec![q])
    }

    fn rev_closure_of(&self, q: AutStateId) -> Vec<AutStateId> {
        self.rev_closure.get(&q).cloned().unwrap_or_else(|| vec![q])
    }

    fn run(&mut self) -> Result<()> {
        let initials: Vec<(AutStateId, Phase)> = self
            .aut
            .initial_states()
            .map(|(q, _, th)| (q, th))
            .collect();
        let transitions = self.aut.transitions().to_vec();
        for t in transitions {
            if let Some(g) = symbol_of(t.label) {
                self.new_reads(t.from, g, t.to);
            }
        }
        for (q, th) in initials {
            self.materialize(th);
            if self.closure_of(q).iter().any(|&s| self.aut.is_final(s)) && self.empty.insert(q) {
                self.work.push_back(Event::Empty(q));
            }
        }
        while let Some(ev) = self.work.pop_front() {
            if self.meter.due() {
                self.meter.check(self.bytes())?;
            }
            match ev {
                Event::Read(s, g, t) => self.process_read(s, g, t),
                Event::Empty(s) => self.process_empty(s),
            }
        }
        Ok(())
    }

    fn initial(&mut self, p: StateId, th: Phase) -> AutStateId {
        let q = self.aut.add_initial(p, th);
        self.materialize(th);
        q
    }

    /// First sight of a phase: pop rules need no path, so they fire now.
    fn materialize(&mut self, th: Phase) {
        if !self.materialized.insert(th) {
            return;
        }
        let set = self.set(th);
        for i in 0..self.pops.len() {
            let r = self.pops[i];
            if !set.contains(r) {
                continue;
            }
            let rule = self.smpds.rule(r).and_then(|r| r.as_pds()).unwrap().clone();
            let target = self.initial(rule.to, th);
            let from = self.initial(rule.from, th);
            for q in self.closure_of(target) {
                self.add_transition(from, rule.symbol, q);
            }
        }
    }

    fn add_transition(&mut self, from: AutStateId, g: SymbolId, to: AutStateId) {
        if self.aut.add_transition(from, Label::Symbol(g), to) {
            self.new_reads(from, g, to);
        }
    }

    fn new_reads(&mut self, from: AutStateId, g: SymbolId, to: AutStateId) {
        let targets = self.closure_of(to);
        for s in self.rev_closure_of(from) {
            for &t in &targets {
                if self.read_set.insert((s, g, t)) {
                    self.reads.entry((s, g)).or_default().push(t);
                    self.work.push_back(Event::Read(s, g, t));
                }
            }
        }
    }

    fn process_read(&mut self, s: AutStateId, g: SymbolId, t: AutStateId) {
        if let Some(items) = self.waiting.get(&(s, g)) {
            for (r, th, k) in items.clone() {
                self.advance(r, th, k + 1, t);
            }
        }
        let AutState::Initial(p1, th) = *self.aut.state(s) else {
            return;
        };
        let set = self.set(th);
        if let Some(rules) = self.by_rhs.get(&(p1, g)) {
            for r in rules.clone() {
                if set.contains(r) {
                    self.advance(r, th, 1, t);
                }
            }
        }
        // Backward self-modification onto the predecessor phases.
        for r in self.selfmod_by_to.get(&p1).cloned().unwrap_or_default() {
            let rule = *self.smpds.rule(r).and_then(|r| r.as_selfmod()).unwrap();
            for pred in predecessors(&set, r, rule.removed, rule.added) {
                let from = self.initial(rule.from, pred);
                self.add_transition(from, g, t);
            }
        }
    }

    fn process_empty(&mut self, s: AutStateId) {
        let AutState::Initial(p1, th) = *self.aut.state(s) else {
            return;
        };
        let set = self.set(th);
        for r in self.selfmod_by_to.get(&p1).cloned().unwrap_or_default() {
            let rule = *self.smpds.rule(r).and_then(|r| r.as_selfmod()).unwrap();
            for pred in predecessors(&set, r, rule.removed, rule.added) {
                let q = self.initial(rule.from, pred);
                self.aut.set_final(q);
                if self.empty.insert(q) {
                    self.work.push_back(Event::Empty(q));
                }
            }
        }
    }

    /// The right-hand side of `r` has been read up to `k` symbols from
    /// `(to, th)` and the path currently ends at `at`.
    fn advance(&mut self, r: RuleId, th: Phase, k: usize, at: AutStateId) {
        let mut stack = vec![(k, at)];
        let rule = self.smpds.rule(r).and_then(|r| r.as_pds()).unwrap().clone();
        while let Some((k, at)) = stack.pop() {
            if k == rule.word.len() {
                let from = self.initial(rule.from, th);
                self.add_transition(from, rule.symbol, at);
                continue;
            }
            if !self.partial.insert((r, th, k, at)) {
                continue;
            }
            let key = (at, rule.word[k]);
            self.waiting.entry(key).or_default().push((r, th, k));
            if let Some(ts) = self.reads.get(&key) {
                stack.extend(ts.iter().map(|&t| (k + 1, t)));
            }
        }
    }
}

/// All `theta'` with `r, r1 in theta'` and `(theta' \ {r1}) u {r2} = theta`.
pub(crate) fn predecessors(theta: &PhaseSet, r: RuleId, r1: RuleId, r2: RuleId) -> Vec<Phase> {
    if !theta.contains(r2) {
        return Vec::new();
    }
    let mut out: Vec<Phase> = Vec::with_capacity(2);
    for cand in [theta.without(r2).with(r1), theta.with(r1)] {
        if cand.contains(r) && cand.contains(r1) && cand.modified(r1, r2) == *theta {
            let ph = Phase::intern(cand);
            if !out.contains(&ph) {
                out.push(ph);
            }
        }
    }
    out
}
