//! The one-step transition relation and a bounded explicit-state explorer.

use std::collections::{BTreeSet, HashSet, VecDeque};

use super::{Configuration, Rule, Smpds};
use crate::error::{Error, Result};

impl Smpds {
    /// Checks that `c` only mentions declared states, symbols and rules.
    pub fn check_config(&self, c: &Configuration) -> Result<()> {
        if c.state.index() >= self.num_states() {
            return Err(Error::MalformedConfig(format!(
                "state {:?} undeclared",
                c.state
            )));
        }
        if let Some(s) = c.stack.iter().find(|s| s.index() >= self.num_symbols()) {
            return Err(Error::MalformedConfig(format!("symbol {s:?} undeclared")));
        }
        if c.phase.set().bound() as usize > self.num_rules() {
            return Err(Error::MalformedConfig(
                "phase mentions undeclared rules".into(),
            ));
        }
        Ok(())
    }

    /// All immediate successors of `c`.
    ///
    /// Self-modifying rules do not look at the stack, so they also fire on
    /// an empty stack.
    pub fn step(&self, c: &Configuration) -> Result<BTreeSet<Configuration>> {
        self.check_config(c)?;
        let mut out = Vec::new();
        self.successors(c, &mut out);
        Ok(out.into_iter().collect())
    }

    /// Unchecked successor generation; may push duplicates.
    pub(crate) fn successors(&self, c: &Configuration, out: &mut Vec<Configuration>) {
        let phase = c.phase.set();
        for r in phase.iter() {
            let Some(rule) = self.rule(r) else { continue };
            match rule {
                Rule::Pds(rule) => {
                    if rule.from != c.state || c.top() != Some(rule.symbol) {
                        continue;
                    }
                    let mut stack = Vec::with_capacity(rule.word.len() + c.stack.len() - 1);
                    stack.extend_from_slice(&rule.word);
                    stack.extend_from_slice(&c.stack[1..]);
                    out.push(Configuration::new(rule.to, stack, c.phase));
                }
                Rule::SelfMod(rule) => {
                    if rule.from != c.state || !phase.contains(rule.removed) {
                        continue;
                    }
                    let next = c.phase.modified(rule.removed, rule.added);
                    out.push(Configuration::new(rule.to, c.stack.clone(), next));
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundedReach {
    pub visited: HashSet<Configuration>,
    /// Set when a successor was dropped for exceeding the stack bound or
    /// the step budget ran out with unexplored configurations left.
    pub truncated: bool,
}

/// Breadth-first closure of [`Smpds::step`] from `c0`.
///
/// Configurations with more than `max_stack` symbols are discarded and at
/// most `max_steps` configurations are expanded.
pub fn bounded_reach(
    smpds: &Smpds,
    c0: &Configuration,
    max_stack: usize,
    max_steps: usize,
) -> Result<BoundedReach> {
    smpds.check_config(c0)?;
    if c0.stack.len() > max_stack {
        return Err(Error::Precondition(format!(
            "initial stack height {} exceeds bound {max_stack}",
            c0.stack.len()
        )));
    }
    let mut visited = HashSet::from([c0.clone()]);
    let mut queue = VecDeque::from([c0.clone()]);
    let mut truncated = false;
    let mut expanded = 0;
    let mut succ = Vec::new();
    while let Some(c) = queue.pop_front() {
        if expanded == max_steps {
            truncated = true;
            break;
        }
        expanded += 1;
        succ.clear();
        smpds.successors(&c, &mut succ);
        for next in succ.drain(..) {
            if next.stack.len() > max_stack {
                truncated = true;
            } else if !visited.contains(&next) {
                visited.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(BoundedReach { visited, truncated })
}
