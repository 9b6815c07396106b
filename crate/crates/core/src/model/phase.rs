//! Interned rule sets.
//!
//! A phase is the set of rules currently enabled in a self-modifying
//! pushdown system. Saturation compares and hashes phases constantly, so
//! every distinct set is stored once in a process-wide table and handled
//! through a `Copy` handle. Two handles are equal iff their member sets are
//! equal.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, LazyLock, RwLock};

use super::RuleId;

/// Canonical bitset over rule ids; no trailing zero words.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PhaseSet {
    words: Box<[u64]>,
}

impl PhaseSet {
    fn from_words(mut words: Vec<u64>) -> Self {
        while words.last() == Some(&0) {
            words.pop();
        }
        PhaseSet {
            words: words.into_boxed_slice(),
        }
    }

    pub fn from_rules<I: IntoIterator<Item = RuleId>>(rules: I) -> Self {
        let mut words = Vec::new();
        for r in rules {
            let (w, b) = split(r);
            if words.len() <= w {
                words.resize(w + 1, 0);
            }
            words[w] |= 1 << b;
        }
        Self::from_words(words)
    }

    #[inline]
    pub fn contains(&self, r: RuleId) -> bool {
        let (w, b) = split(r);
        self.words.get(w).is_some_and(|word| word & (1 << b) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Members in increasing id order.
    pub fn iter(&self) -> impl Iterator<Item = RuleId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                Some(RuleId(i as u32 * 64 + b))
            })
        })
    }

    /// `(self \ {removed}) ∪ {added}`
    pub fn modified(&self, removed: RuleId, added: RuleId) -> PhaseSet {
        let mut words = self.words.to_vec();
        let (w, b) = split(removed);
        if let Some(word) = words.get_mut(w) {
            *word &= !(1 << b);
        }
        let (w, b) = split(added);
        if words.len() <= w {
            words.resize(w + 1, 0);
        }
        words[w] |= 1 << b;
        Self::from_words(words)
    }

    pub fn with(&self, r: RuleId) -> PhaseSet {
        self.modified(r, r)
    }

    pub fn without(&self, r: RuleId) -> PhaseSet {
        let mut words = self.words.to_vec();
        let (w, b) = split(r);
        if let Some(word) = words.get_mut(w) {
            *word &= !(1 << b);
        }
        Self::from_words(words)
    }

    pub fn union(&self, other: &PhaseSet) -> PhaseSet {
        let n = self.words.len().max(other.words.len());
        let words = (0..n)
            .map(|i| {
                self.words.get(i).copied().unwrap_or(0) | other.words.get(i).copied().unwrap_or(0)
            })
            .collect();
        Self::from_words(words)
    }

    pub fn difference(&self, other: &PhaseSet) -> PhaseSet {
        let words = self
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| w & !other.words.get(i).copied().unwrap_or(0))
            .collect();
        Self::from_words(words)
    }

    pub fn is_subset(&self, other: &PhaseSet) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    /// Largest member id plus one (0 for the empty set).
    pub fn bound(&self) -> u32 {
        match self.words.last() {
            None => 0,
            Some(&w) => (self.words.len() as u32 - 1) * 64 + (64 - w.leading_zeros()),
        }
    }
}

impl Ord for PhaseSet {
    /// Lexicographic on sorted member lists.
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for PhaseSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for PhaseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|r| r.0)).finish()
    }
}

#[inline]
fn split(r: RuleId) -> (usize, u32) {
    ((r.0 / 64) as usize, r.0 % 64)
}

#[derive(Default)]
struct Interner {
    sets: Vec<Arc<PhaseSet>>,
    ids: HashMap<Arc<PhaseSet>, u32>,
}

static INTERNER: LazyLock<RwLock<Interner>> = LazyLock::new(Default::default);

/// Handle to an interned [`PhaseSet`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u32);

impl Phase {
    pub fn intern(set: PhaseSet) -> Phase {
        if let Some(&id) = INTERNER.read().unwrap().ids.get(&set) {
            return Phase(id);
        }
        let mut table = INTERNER.write().unwrap();
        if let Some(&id) = table.ids.get(&set) {
            return Phase(id);
        }
        let id = table.sets.len() as u32;
        let set = Arc::new(set);
        table.sets.push(set.clone());
        table.ids.insert(set, id);
        Phase(id)
    }

    pub fn from_rules<I: IntoIterator<Item = RuleId>>(rules: I) -> Phase {
        Phase::intern(PhaseSet::from_rules(rules))
    }

    pub fn empty() -> Phase {
        Phase::intern(PhaseSet::default())
    }

    pub fn set(self) -> Arc<PhaseSet> {
        INTERNER.read().unwrap().sets[self.0 as usize].clone()
    }

    pub fn contains(self, r: RuleId) -> bool {
        INTERNER.read().unwrap().sets[self.0 as usize].contains(r)
    }

    pub fn members(self) -> Vec<RuleId> {
        self.set().iter().collect()
    }

    pub fn len(self) -> usize {
        self.set().len()
    }

    pub fn is_empty(self) -> bool {
        self.set().is_empty()
    }

    /// `(self \ {removed}) ∪ {added}`
    pub fn modified(self, removed: RuleId, added: RuleId) -> Phase {
        Phase::intern(self.set().modified(removed, added))
    }

    pub fn with(self, r: RuleId) -> Phase {
        Phase::intern(self.set().with(r))
    }

    pub fn without(self, r: RuleId) -> Phase {
        Phase::intern(self.set().without(r))
    }

    /// Raw interner index; stable for the lifetime of the process only.
    pub fn index(self) -> u32 {
        self.0
    }
}

impl Ord for Phase {
    /// Orders by content so that sorted output does not depend on
    /// interning order.
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.set().as_ref().cmp(other.set().as_ref())
    }
}

impl PartialOrd for Phase {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phase{:?}", self.set())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> Vec<RuleId> {
        v.iter().copied().map(RuleId).collect()
    }

    #[test]
    fn equal_sets_share_a_handle() {
        let a = Phase::from_rules(ids(&[3, 1, 2]));
        let b = Phase::from_rules(ids(&[1, 2, 3, 3]));
        assert_eq!(a, b);
        assert_ne!(a, Phase::from_rules(ids(&[1, 2])));
    }

    #[test]
    fn modified_is_remove_then_add() {
        let theta = Phase::from_rules(ids(&[0, 1, 70]));
        assert_eq!(
            theta.modified(RuleId(0), RuleId(2)).members(),
            ids(&[1, 2, 70])
        );
        // added already present: the phase shrinks by one
        assert_eq!(
            theta.modified(RuleId(0), RuleId(1)).members(),
            ids(&[1, 70])
        );
        // removed == added keeps the phase when the rule is present
        assert_eq!(theta.modified(RuleId(70), RuleId(70)), theta);
        // trailing words are trimmed so the result is canonical
        assert_eq!(
            theta.modified(RuleId(70), RuleId(1)),
            Phase::from_rules(ids(&[0, 1]))
        );
    }

    #[test]
    fn iteration_is_sorted() {
        let s = PhaseSet::from_rules(ids(&[130, 5, 64, 63, 0]));
        assert_eq!(s.iter().collect::<Vec<_>>(), ids(&[0, 5, 63, 64, 130]));
        assert_eq!(s.len(), 5);
        assert_eq!(s.bound(), 131);
    }

    #[test]
    fn order_is_by_content() {
        let a = Phase::from_rules(ids(&[1, 2]));
        let b = Phase::from_rules(ids(&[1, 3]));
        let c = Phase::from_rules(ids(&[1]));
        assert!(a < b);
        assert!(c < a);
    }
}
