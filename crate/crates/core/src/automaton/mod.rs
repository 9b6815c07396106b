//! P-automata: finite automata over the stack alphabet whose initial states
//! are `(control point, phase)` pairs. A configuration `(<p, w>, theta)` is
//! accepted when some path labelled `w` leads from `(p, theta)` to a final
//! state, with `ε` moves allowed anywhere along the path.

mod dot;
pub mod text;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::{Arc, RwLock};

use crate::model::{Configuration, Phase, Smpds, StateId, SymbolId};

pub use dot::to_dot;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AutState {
    Initial(StateId, Phase),
    Plain(String),
    /// The state that post* creates for a push rule with right-hand side
    /// `<p', g1 g2>` in phase `theta`.
    Generated(StateId, SymbolId, Phase),
}

impl AutState {
    pub fn is_initial(&self) -> bool {
        matches!(self, AutState::Initial(..))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AutStateId(pub u32);

impl AutStateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Epsilon,
    Symbol(SymbolId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub from: AutStateId,
    pub label: Label,
    pub to: AutStateId,
}

#[derive(Debug, Default)]
pub struct PAutomaton {
    states: Vec<AutState>,
    index: HashMap<AutState, AutStateId>,
    finals: Vec<bool>,
    transitions: Vec<Transition>,
    present: HashSet<Transition>,
    out: Vec<Vec<(Label, AutStateId)>>,
    eps_memo: RwLock<HashMap<AutStateId, Arc<[AutStateId]>>>,
}

impl Clone for PAutomaton {
    fn clone(&self) -> Self {
        PAutomaton {
            states: self.states.clone(),
            index: self.index.clone(),
            finals: self.finals.clone(),
            transitions: self.transitions.clone(),
            present: self.present.clone(),
            out: self.out.clone(),
            eps_memo: RwLock::default(),
        }
    }
}

impl PAutomaton {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `state`, adding it if necessary.
    pub fn add_state(&mut self, state: AutState) -> AutStateId {
        if let Some(&id) = self.index.get(&state) {
            return id;
        }
        let id = AutStateId(self.states.len() as u32);
        self.index.insert(state.clone(), id);
        self.states.push(state);
        self.finals.push(false);
        self.out.push(Vec::new());
        id
    }

    pub fn add_initial(&mut self, p: StateId, phase: Phase) -> AutStateId {
        self.add_state(AutState::Initial(p, phase))
    }

    /// A plain state named `stem`, or `stem~N` if that name is taken.
    pub fn add_fresh_plain(&mut self, stem: &str) -> AutStateId {
        let mut name = stem.to_owned();
        let mut i = 1;
        while self.index.contains_key(&AutState::Plain(name.clone())) {
            name = format!("{stem}~{i}");
            i += 1;
        }
        self.add_state(AutState::Plain(name))
    }

    pub fn id_of(&self, state: &AutState) -> Option<AutStateId> {
        self.index.get(state).copied()
    }

    pub fn initial(&self, p: StateId, phase: Phase) -> Option<AutStateId> {
        self.id_of(&AutState::Initial(p, phase))
    }

    pub fn state(&self, id: AutStateId) -> &AutState {
        &self.states[id.index()]
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_ids(&self) -> impl Iterator<Item = AutStateId> {
        (0..self.states.len() as u32).map(AutStateId)
    }

    pub fn initial_states(&self) -> impl Iterator<Item = (AutStateId, StateId, Phase)> + '_ {
        self.states.iter().enumerate().filter_map(|(i, s)| match s {
            AutState::Initial(p, th) => Some((AutStateId(i as u32), *p, *th)),
            _ => None,
        })
    }

    pub fn is_initial(&self, id: AutStateId) -> bool {
        self.states[id.index()].is_initial()
    }

    pub fn set_final(&mut self, id: AutStateId) {
        self.finals[id.index()] = true;
    }

    pub fn is_final(&self, id: AutStateId) -> bool {
        self.finals[id.index()]
    }

    pub fn finals(&self) -> impl Iterator<Item = AutStateId> + '_ {
        self.state_ids().filter(|&s| self.is_final(s))
    }

    /// Inserts a transition; returns false if it was already present.
    pub fn add_transition(&mut self, from: AutStateId, label: Label, to: AutStateId) -> bool {
        let t = Transition { from, label, to };
        if !self.present.insert(t) {
            return false;
        }
        self.transitions.push(t);
        self.out[from.index()].push((label, to));
        if label == Label::Epsilon {
            self.eps_memo.get_mut().unwrap().clear();
        }
        true
    }

    pub fn contains(&self, from: AutStateId, label: Label, to: AutStateId) -> bool {
        self.present.contains(&Transition { from, label, to })
    }

    /// Transitions in insertion order.
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn outgoing(&self, from: AutStateId) -> &[(Label, AutStateId)] {
        &self.out[from.index()]
    }

    pub fn has_epsilon(&self) -> bool {
        self.transitions.iter().any(|t| t.label == Label::Epsilon)
    }

    pub fn has_transition_into_initial(&self) -> bool {
        self.transitions.iter().any(|t| self.is_initial(t.to))
    }

    /// All states reachable from `q` by `ε` moves, including `q`.
    pub fn eps_closure(&self, q: AutStateId) -> Arc<[AutStateId]> {
        if let Some(c) = self.eps_memo.read().unwrap().get(&q) {
            return c.clone();
        }
        let mut seen = BTreeSet::from([q]);
        let mut stack = vec![q];
        while let Some(s) = stack.pop() {
            for &(label, t) in &self.out[s.index()] {
                if label == Label::Epsilon && seen.insert(t) {
                    stack.push(t);
                }
            }
        }
        let closure: Arc<[AutStateId]> = seen.into_iter().collect();
        self.eps_memo.write().unwrap().insert(q, closure.clone());
        closure
    }

    fn close(&self, set: &BTreeSet<AutStateId>) -> BTreeSet<AutStateId> {
        set.iter()
            .flat_map(|&q| self.eps_closure(q).iter().copied().collect::<Vec<_>>())
            .collect()
    }

    fn read(&self, set: &BTreeSet<AutStateId>, g: SymbolId) -> BTreeSet<AutStateId> {
        let next = set
            .iter()
            .flat_map(|&q| self.out[q.index()].iter())
            .filter(|(l, _)| *l == Label::Symbol(g))
            .map(|&(_, t)| t)
            .collect();
        self.close(&next)
    }

    /// States reachable from `from` along a path labelled `word`.
    pub fn reach_states(&self, from: AutStateId, word: &[SymbolId]) -> BTreeSet<AutStateId> {
        let mut set = self.close(&BTreeSet::from([from]));
        for &g in word {
            if set.is_empty() {
                break;
            }
            set = self.read(&set, g);
        }
        set
    }

    pub fn accepts(&self, c: &Configuration) -> bool {
        let Some(q) = self.initial(c.state, c.phase) else {
            return false;
        };
        self.reach_states(q, &c.stack)
            .into_iter()
            .any(|s| self.is_final(s))
    }

    /// Every accepted configuration with at most `max_len` stack symbols.
    pub fn enumerate(&self, max_len: usize) -> BTreeSet<Configuration> {
        let mut symbols: Vec<SymbolId> = self
            .transitions
            .iter()
            .filter_map(|t| match t.label {
                Label::Symbol(g) => Some(g),
                Label::Epsilon => None,
            })
            .collect();
        symbols.sort();
        symbols.dedup();
        let mut out = BTreeSet::new();
        for (q, p, phase) in self.initial_states() {
            let mut frontier = vec![(Vec::new(), self.close(&BTreeSet::from([q])))];
            for depth in 0..=max_len {
                let mut next = Vec::new();
                for (word, set) in frontier {
                    if set.iter().any(|&s| self.is_final(s)) {
                        out.insert(Configuration::new(p, word.clone(), phase));
                    }
                    if depth == max_len {
                        continue;
                    }
                    for &g in &symbols {
                        let after = self.read(&set, g);
                        if !after.is_empty() {
                            let mut w = word.clone();
                            w.push(g);
                            next.push((w, after));
                        }
                    }
                }
                frontier = next;
            }
        }
        out
    }

    /// States from which a final state can be reached.
    pub fn productive_states(&self) -> Vec<bool> {
        let mut rev: Vec<Vec<AutStateId>> = vec![Vec::new(); self.states.len()];
        for t in &self.transitions {
            rev[t.to.index()].push(t.from);
        }
        let mut live = self.finals.clone();
        let mut stack: Vec<AutStateId> = self.finals().collect();
        while let Some(s) = stack.pop() {
            for &f in &rev[s.index()] {
                if !live[f.index()] {
                    live[f.index()] = true;
                    stack.push(f);
                }
            }
        }
        live
    }

    /// True when some configuration with control point `p` is accepted.
    pub fn accepts_some_at(&self, p: StateId) -> bool {
        let live = self.productive_states();
        self.initial_states()
            .any(|(q, s, _)| s == p && live[q.index()])
    }

    /// An automaton accepting exactly `configs`: one chain of plain states
    /// per configuration, all ending in a single shared final state.
    pub fn from_configs<'a>(configs: impl IntoIterator<Item = &'a Configuration>) -> Self {
        let mut aut = PAutomaton::new();
        let mut counter = 0;
        let mut fresh = |aut: &mut PAutomaton| {
            counter += 1;
            aut.add_fresh_plain(&format!("s{counter}"))
        };
        let mut shared_final = None;
        for c in configs {
            let mut q = aut.add_initial(c.state, c.phase);
            if c.stack.is_empty() {
                aut.set_final(q);
                continue;
            }
            let last = c.stack.len() - 1;
            for (i, &g) in c.stack.iter().enumerate() {
                let next = if i == last {
                    *shared_final.get_or_insert_with(|| {
                        let f = fresh(&mut aut);
                        aut.set_final(f);
                        f
                    })
                } else {
                    fresh(&mut aut)
                };
                aut.add_transition(q, Label::Symbol(g), next);
                q = next;
            }
        }
        aut
    }

    /// Removes states that are unreachable from an initial state or cannot
    /// reach a final state; initial states are always kept.
    pub fn trim(&self) -> PAutomaton {
        self.restrict(|_| true)
    }

    /// Copy keeping only the initial states selected by `keep` and the
    /// part of the automaton that is useful from them. Unproductive initial
    /// states are kept so that the set of `(p, theta)` pairs survives.
    pub fn restrict(&self, keep: impl Fn(&AutState) -> bool) -> PAutomaton {
        let live = self.productive_states();
        let mut reach = vec![false; self.states.len()];
        let mut stack: Vec<AutStateId> = self
            .initial_states()
            .map(|(q, ..)| q)
            .filter(|q| keep(self.state(*q)))
            .collect();
        for q in &stack {
            reach[q.index()] = true;
        }
        while let Some(s) = stack.pop() {
            for &(_, t) in &self.out[s.index()] {
                if live[t.index()] && !reach[t.index()] {
                    reach[t.index()] = true;
                    stack.push(t);
                }
            }
        }
        let mut out = PAutomaton::new();
        let mut map = HashMap::new();
        for q in self.state_ids() {
            if reach[q.index()] {
                let id = out.add_state(self.state(q).clone());
                if self.is_final(q) {
                    out.set_final(id);
                }
                map.insert(q, id);
            }
        }
        for t in &self.transitions {
            if let (Some(&a), Some(&b)) = (map.get(&t.from), map.get(&t.to)) {
                if live[t.to.index()] {
                    out.add_transition(a, t.label, b);
                }
            }
        }
        out
    }

    /// Rewrites every state and label; transitions for which `label`
    /// returns `None` are dropped.
    pub fn map(
        &self,
        mut state: impl FnMut(&AutState) -> AutState,
        mut label: impl FnMut(Label) -> Option<Label>,
    ) -> PAutomaton {
        let mut out = PAutomaton::new();
        let ids: Vec<AutStateId> = self
            .states
            .iter()
            .map(|s| out.add_state(state(s)))
            .collect();
        for q in self.state_ids() {
            if self.is_final(q) {
                out.set_final(ids[q.index()]);
            }
        }
        for t in &self.transitions {
            if let Some(l) = label(t.label) {
                out.add_transition(ids[t.from.index()], l, ids[t.to.index()]);
            }
        }
        out
    }

    /// Rough heap footprint, used for memory budgets.
    pub fn heap_bytes(&self) -> usize {
        use std::mem::size_of;
        self.states.len() * (2 * size_of::<AutState>() + 48)
            + self.transitions.len() * (3 * size_of::<Transition>() + 16)
    }

    /// Human-readable name of a state, as used by the text format.
    pub fn state_name(&self, smpds: &Smpds, id: AutStateId) -> String {
        text::state_name(smpds, self.state(id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn chain() -> (Smpds, Configuration, PAutomaton) {
        let mut m = Smpds::new();
        m.add_pds_rule("r", "p0", "g0", "p0", &[]).unwrap();
        let th0 = m.all_rules_phase();
        let c = m.config("p0", &["g0", "g0"], th0).unwrap();
        let aut = PAutomaton::from_configs([&c]);
        (m, c, aut)
    }

    #[test]
    fn from_configs_builds_a_chain() {
        let (m, c, aut) = chain();
        assert_eq!(aut.num_states(), 3);
        assert_eq!(aut.num_transitions(), 2);
        assert!(aut.accepts(&c));
        let short = Configuration::new(c.state, vec![c.stack[0]], c.phase);
        assert!(!aut.accepts(&short));
        let q0 = aut.initial(c.state, c.phase).unwrap();
        let s1 = aut.id_of(&AutState::Plain("s1".into())).unwrap();
        assert_eq!(aut.reach_states(q0, &c.stack[..1]), BTreeSet::from([s1]));
        assert_eq!(aut.enumerate(2), BTreeSet::from([c]));
        assert!(!aut.has_epsilon() && !aut.has_transition_into_initial());
        let f = aut.finals().collect::<Vec<_>>();
        assert_eq!(aut.state_name(&m, f[0]), "s2");
    }

    #[test]
    fn empty_set_has_empty_language() {
        let aut = PAutomaton::from_configs([]);
        assert_eq!(aut.num_states(), 0);
        assert!(aut.enumerate(4).is_empty());
    }

    #[test]
    fn shared_initial_state() {
        let m = fixtures::example_one();
        let th0 = m.phase_by_name("th0").unwrap();
        let a = m.config("p1", &["g1"], th0).unwrap();
        let b = m.config("p1", &["g2", "g3"], th0).unwrap();
        let aut = PAutomaton::from_configs([&a, &b]);
        assert_eq!(aut.initial_states().count(), 1);
        assert_eq!(aut.enumerate(3), BTreeSet::from([a, b]));
    }

    #[test]
    fn empty_stack_configuration() {
        let m = fixtures::example_one();
        let th0 = m.phase_by_name("th0").unwrap();
        let c = m.config("p1", &[], th0).unwrap();
        let aut = PAutomaton::from_configs([&c]);
        assert!(aut.accepts(&c));
        assert_eq!(aut.enumerate(2).len(), 1);
    }

    #[test]
    fn epsilon_paths_are_followed() {
        let m = fixtures::example_one();
        let th0 = m.phase_by_name("th0").unwrap();
        let g1 = m.symbol_id("g1").unwrap();
        let mut aut = PAutomaton::new();
        let q = aut.add_initial(StateId(0), th0);
        let a = aut.add_fresh_plain("a");
        let b = aut.add_fresh_plain("b");
        aut.add_transition(a, Label::Symbol(g1), b);
        aut.set_final(b);
        let c = Configuration::new(StateId(0), vec![g1], th0);
        assert!(!aut.accepts(&c));
        aut.add_transition(q, Label::Epsilon, a);
        assert!(aut.accepts(&c));
        assert!(aut.reach_states(q, &[]).contains(&a));
    }

    #[test]
    fn trim_drops_useless_states() {
        let (_, c, mut aut) = chain();
        let dead = aut.add_fresh_plain("dead");
        let q0 = aut.initial(c.state, c.phase).unwrap();
        aut.add_transition(q0, Label::Symbol(c.stack[0]), dead);
        let trimmed = aut.trim();
        assert_eq!(trimmed.num_states(), 3);
        assert_eq!(trimmed.enumerate(3), aut.enumerate(3));
    }
}
