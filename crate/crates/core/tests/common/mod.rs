//! Random systems and a brute-force reachability oracle, written against
//! the bare rule definitions rather than the library's own interpreter.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use smpds::model::{PdsRule, SelfModRule};
use smpds::{Configuration, Phase, Rule, RuleId, Smpds, StateId, SymbolId};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// |P| <= 4, |Γ| <= 4, |Δ| <= 8, |Δc| <= 3, right-hand sides up to three
/// symbols. Self-modifying rules may name any rule, themselves included.
pub fn random_system(rng: &mut StdRng) -> Smpds {
    let mut m = Smpds::new();
    let np = rng.random_range(1..=4);
    let ng = rng.random_range(1..=4);
    let nd = rng.random_range(1..=8);
    let nc = rng.random_range(0..=3);
    let states: Vec<StateId> = (0..np).map(|i| m.state(&format!("p{i}"))).collect();
    let symbols: Vec<SymbolId> = (0..ng).map(|i| m.symbol(&format!("g{i}"))).collect();
    for i in 0..nd {
        let len = match rng.random_range(0..10) {
            0..=2 => 0,
            3..=5 => 1,
            6..=8 => 2,
            _ => 3,
        };
        let rule = PdsRule {
            from: states[rng.random_range(0..np)],
            symbol: symbols[rng.random_range(0..ng)],
            to: states[rng.random_range(0..np)],
            word: (0..len).map(|_| symbols[rng.random_range(0..ng)]).collect(),
        };
        m.add_rule(&format!("r{i}"), Rule::Pds(rule)).unwrap();
    }
    let total = (nd + nc) as u32;
    for i in 0..nc {
        let rule = SelfModRule {
            from: states[rng.random_range(0..np)],
            removed: RuleId(rng.random_range(0..total)),
            added: RuleId(rng.random_range(0..total)),
            to: states[rng.random_range(0..np)],
        };
        m.add_rule(&format!("s{i}"), Rule::SelfMod(rule)).unwrap();
    }
    m
}

pub fn random_phase(rng: &mut StdRng, m: &Smpds) -> Phase {
    Phase::from_rules(
        (0..m.num_rules() as u32)
            .map(RuleId)
            .filter(|_| rng.random_bool(0.65)),
    )
}

pub fn random_config(rng: &mut StdRng, m: &Smpds, max_len: usize, phase: Phase) -> Configuration {
    let len = rng.random_range(0..=max_len);
    Configuration::new(
        StateId(rng.random_range(0..m.num_states() as u32)),
        (0..len)
            .map(|_| SymbolId(rng.random_range(0..m.num_symbols() as u32)))
            .collect(),
        phase,
    )
}

/// Successors straight from the definition of a step.
pub fn successors(m: &Smpds, c: &Configuration) -> Vec<Configuration> {
    let members: Vec<RuleId> = c.phase.members();
    let mut out = Vec::new();
    for &id in &members {
        match m.rule(id).unwrap() {
            Rule::Pds(r) => {
                if r.from == c.state && c.stack.first() == Some(&r.symbol) {
                    let mut stack = r.word.clone();
                    stack.extend_from_slice(&c.stack[1..]);
                    out.push(Configuration::new(r.to, stack, c.phase));
                }
            }
            Rule::SelfMod(r) => {
                if r.from == c.state && members.contains(&r.removed) {
                    let mut next: Vec<RuleId> = members
                        .iter()
                        .copied()
                        .filter(|&x| x != r.removed)
                        .collect();
                    next.push(r.added);
                    out.push(Configuration::new(
                        r.to,
                        c.stack.clone(),
                        Phase::from_rules(next),
                    ));
                }
            }
        }
    }
    out
}

pub struct Search {
    pub visited: HashSet<Configuration>,
    pub found: bool,
    /// Some successor was cut off by a bound, so absence is inconclusive.
    pub truncated: bool,
}

/// Breadth-first exploration from `starts`, stopping early once a
/// configuration satisfying `goal` is visited.
pub fn explore(
    m: &Smpds,
    starts: &[Configuration],
    max_stack: usize,
    max_steps: usize,
    goal: impl Fn(&Configuration) -> bool,
) -> Search {
    let mut visited: HashSet<Configuration> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut truncated = false;
    for s in starts {
        if visited.insert(s.clone()) {
            queue.push_back(s.clone());
        }
    }
    while let Some(c) = queue.pop_front() {
        if goal(&c) {
            return Search {
                visited,
                found: true,
                truncated,
            };
        }
        for n in successors(m, &c) {
            if n.stack.len() > max_stack {
                truncated = true;
                continue;
            }
            if visited.contains(&n) {
                continue;
            }
            if visited.len() >= max_steps {
                truncated = true;
                continue;
            }
            visited.insert(n.clone());
            queue.push_back(n);
        }
    }
    Search {
        visited,
        found: false,
        truncated,
    }
}

/// `Some(answer)` when the bounded search decides it.
pub fn decided(s: &Search) -> Option<bool> {
    if s.found {
        Some(true)
    } else if s.truncated {
        None
    } else {
        Some(false)
    }
}

/// A random run of up to `len` steps.
pub fn walk(rng: &mut StdRng, m: &Smpds, start: Configuration, len: usize) -> Vec<Configuration> {
    let mut path = vec![start];
    for _ in 0..len {
        let next = successors(m, path.last().unwrap());
        if next.is_empty() {
            break;
        }
        let n = next[rng.random_range(0..next.len())].clone();
        if n.stack.len() > 5 {
            break;
        }
        path.push(n);
    }
    path
}

/// A random system with a handful of configurations of interest: `seeds`
/// (sources for post*, targets for pre*) and `positives`, configurations
/// known to be related to the seeds by a run.
pub struct Case {
    pub m: Smpds,
    pub phase: Phase,
    /// End points of random runs: targets for pre*.
    pub targets: Vec<Configuration>,
    /// Start points of those runs: sources for post*.
    pub sources: Vec<Configuration>,
    pub runs: Vec<Vec<Configuration>>,
}

pub fn case(seed: u64, nonempty: bool) -> Case {
    let mut rng = rng(seed);
    let m = random_system(&mut rng);
    let phase = random_phase(&mut rng, &m);
    let n = rng.random_range(1..=3);
    let mut targets = Vec::new();
    let mut sources = Vec::new();
    let mut runs = Vec::new();
    let min = usize::from(nonempty);
    let mut attempts = 0;
    while runs.len() < n && attempts < 50 {
        attempts += 1;
        let start = random_config(&mut rng, &m, 3, phase);
        if start.stack.len() < min {
            continue;
        }
        let steps = rng.random_range(0..=6);
        let run = walk(&mut rng, &m, start, steps);
        if run.last().unwrap().stack.len() < min {
            continue;
        }
        sources.push(run[0].clone());
        targets.push(run.last().unwrap().clone());
        runs.push(run);
    }
    Case {
        m,
        phase,
        targets,
        sources,
        runs,
    }
}

/// Configurations to query: the runs' configurations plus random ones in
/// the phases seen along the runs and in fresh random phases.
pub fn samples(seed: u64, case: &Case, count: usize, nonempty: bool) -> Vec<Configuration> {
    let mut rng = rng(seed ^ 0xa5a5_a5a5);
    let mut phases: Vec<Phase> = case.runs.iter().flatten().map(|c| c.phase).collect();
    phases.sort();
    phases.dedup();
    let mut out: Vec<Configuration> = case.runs.iter().flatten().cloned().collect();
    while out.len() < count {
        let phase = if phases.is_empty() || rng.random_bool(0.2) {
            random_phase(&mut rng, &case.m)
        } else {
            phases[rng.random_range(0..phases.len())]
        };
        out.push(random_config(&mut rng, &case.m, 5, phase));
    }
    if nonempty {
        out.retain(|c| !c.stack.is_empty());
    }
    out.sort();
    out.dedup();
    out
}
