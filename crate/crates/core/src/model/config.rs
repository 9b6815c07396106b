use std::cmp::Ordering;

use super::{Phase, StateId, SymbolId};

/// `(<state, stack>, phase)`; `stack[0]` is the top of the stack.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: StateId,
    pub stack: Vec<SymbolId>,
    pub phase: Phase,
}

impl Configuration {
    pub fn new(state: StateId, stack: Vec<SymbolId>, phase: Phase) -> Self {
        Configuration {
            state,
            stack,
            phase,
        }
    }

    pub fn top(&self) -> Option<SymbolId> {
        self.stack.first().copied()
    }
}

impl Ord for Configuration {
    fn cmp(&self, other: &Self) -> Ordering {
        self.state
            .cmp(&other.state)
            .then_with(|| self.stack.cmp(&other.stack))
            .then_with(|| self.phase.cmp(&other.phase))
    }
}

impl PartialOrd for Configuration {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
