//! Random SM-PDS generation and the direct-versus-translation comparison.
//!
//! Rules are drawn uniformly: control points, stack symbols and
//! right-hand-side lengths (between 0 and `max_rhs_len`) are independent
//! uniform choices, and self-modifying rules pick the rule they remove and
//! the rule they add uniformly among the ordinary rules.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use crate::automaton::PAutomaton;
use crate::error::{Error, Result};
use crate::model::{normalize_push, Configuration, PdsRule, Phase, Rule, SelfModRule, Smpds};
use crate::prestar::prestar_with;
use crate::saturation::{Budget, SaturationOptions};
use crate::translate::{pds_prestar, prestar_phases, to_pds_with};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub num_states: usize,
    pub num_symbols: usize,
    pub num_rules: usize,
    pub num_smrules: usize,
    pub max_rhs_len: usize,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            num_states: 10,
            num_symbols: 5,
            num_rules: 10,
            num_smrules: 3,
            max_rhs_len: 2,
            seed: 0,
        }
    }
}

/// A system with states `p0..`, symbols `g0..`, rules `r0..` and
/// self-modifying rules `s0..`, a phase `init` holding every rule, and a
/// stack-depth-2 configuration in `init` (also stored in the system).
pub fn generate(params: &GenParams) -> Result<(Smpds, Configuration)> {
    if params.num_states == 0 || params.num_symbols == 0 || params.num_rules == 0 {
        return Err(Error::Params(
            "states, symbols and rules must all be at least 1".into(),
        ));
    }
    let mut rng = StdRng::seed_from_u64(params.seed);
    let mut m = Smpds::new();
    let states: Vec<_> = (0..params.num_states)
        .map(|i| m.state(&format!("p{i}")))
        .collect();
    let symbols: Vec<_> = (0..params.num_symbols)
        .map(|i| m.symbol(&format!("g{i}")))
        .collect();
    let state = |rng: &mut StdRng| states[rng.random_range(0..states.len())];
    let symbol = |rng: &mut StdRng| symbols[rng.random_range(0..symbols.len())];
    let mut delta = Vec::with_capacity(params.num_rules);
    for i in 0..params.num_rules {
        let len = rng.random_range(0..=params.max_rhs_len);
        let rule = PdsRule {
            from: state(&mut rng),
            symbol: symbol(&mut rng),
            to: state(&mut rng),
            word: (0..len).map(|_| symbol(&mut rng)).collect(),
        };
        delta.push(m.add_rule(&format!("r{i}"), Rule::Pds(rule))?);
    }
    for i in 0..params.num_smrules {
        let rule = SelfModRule {
            from: state(&mut rng),
            removed: delta[rng.random_range(0..delta.len())],
            added: delta[rng.random_range(0..delta.len())],
            to: state(&mut rng),
        };
        m.add_rule(&format!("s{i}"), Rule::SelfMod(rule))?;
    }
    let init = m.all_rules_phase();
    m.define_phase("init", init)?;
    let c = Configuration::new(
        state(&mut rng),
        vec![symbol(&mut rng), symbol(&mut rng)],
        init,
    );
    m.add_config(c.clone());
    Ok((m, c))
}

pub const CSV_HEADER: &str =
    "rules,smrules,direct_ms,direct_mb,pds_ms,pds_saturate_ms,total_ms,status";

/// One benchmark instance. Missing timings mean the path ran out of
/// budget, which `status` records.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub rules: usize,
    pub smrules: usize,
    pub direct_ms: Option<f64>,
    pub direct_mb: Option<f64>,
    /// Phase closure plus translation.
    pub pds_ms: Option<f64>,
    pub pds_saturate_ms: Option<f64>,
    pub total_ms: Option<f64>,
    /// `ok`, `mismatch`, or `direct_`/`pds_` followed by `timeout` or `memout`.
    pub status: String,
}

impl ReportRow {
    pub fn to_csv(&self) -> String {
        let f = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |v| format!("{v:.3}"));
        format!(
            "{},{},{},{},{},{},{},{}",
            self.rules,
            self.smrules,
            f(self.direct_ms),
            f(self.direct_mb),
            f(self.pds_ms),
            f(self.pds_saturate_ms),
            f(self.total_ms),
            self.status
        )
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn failure(prefix: &str, e: &Error) -> Option<String> {
    match e {
        Error::Timeout(_) => Some(format!("{prefix}_timeout")),
        Error::OutOfMemory(_) => Some(format!("{prefix}_memout")),
        _ => None,
    }
}

/// Runs pre* of the generated configuration both directly and through the
/// explicit PDS translation, each under `budget`, and compares membership
/// on sampled configurations when both finish.
pub fn run_comparison(params: &GenParams, budget: Budget) -> Result<ReportRow> {
    let (m, target) = generate(params)?;
    let aut = PAutomaton::from_configs([&target]);
    let mut row = ReportRow {
        rules: params.num_rules,
        smrules: params.num_smrules,
        direct_ms: None,
        direct_mb: None,
        pds_ms: None,
        pds_saturate_ms: None,
        total_ms: None,
        status: "ok".into(),
    };

    let opts = SaturationOptions {
        budget,
        ..SaturationOptions::default()
    };
    let direct = match prestar_with(&m, &aut, &opts) {
        Ok(s) => {
            row.direct_ms = Some(ms(s.stats.elapsed));
            row.direct_mb = Some(s.stats.peak_bytes as f64 / (1024.0 * 1024.0));
            Some(s.automaton)
        }
        Err(e) => {
            row.status = failure("direct", &e).ok_or(e)?;
            None
        }
    };

    let start = Instant::now();
    let normalized = normalize_push(&m);
    let lifted = normalized.lift_automaton(&aut);
    let seeds = BTreeSet::from([normalized.lift_phase(target.phase)]);
    // Each phase costs at least a bitset over all rules.
    let per_phase = normalized.smpds.num_rules() / 8 + 64;
    let limit = budget.memory_bytes.map_or(usize::MAX, |b| b / per_phase);
    let translated = prestar_phases(&normalized.smpds, &seeds, limit)
        .map_err(|_| Error::OutOfMemory(budget.memory_bytes.unwrap_or(0)))
        .and_then(|phases| {
            let left = Budget {
                time: budget.time.map(|t| t.saturating_sub(start.elapsed())),
                ..budget
            };
            to_pds_with(&normalized.smpds, &phases, left)
        });
    let pds = match translated {
        Ok(p) => p,
        Err(e) => {
            if row.status == "ok" {
                row.status = failure("pds", &e).ok_or(e)?;
            }
            return Ok(row);
        }
    };
    let translate_time = start.elapsed();
    row.pds_ms = Some(ms(translate_time));
    let left = Budget {
        time: budget.time.map(|t| t.saturating_sub(translate_time)),
        ..budget
    };
    let pre = match pds_prestar(&pds, &lifted, left) {
        Ok(s) => s,
        Err(e) => {
            if row.status == "ok" {
                row.status = failure("pds", &e).ok_or(e)?;
            }
            return Ok(row);
        }
    };
    row.pds_saturate_ms = Some(ms(pre.stats.elapsed));
    row.total_ms = Some(ms(start.elapsed()));

    if let Some(direct) = direct {
        let phases: Vec<Phase> = pds
            .controls()
            .iter()
            .map(|&(_, th)| normalized.project_phase(th))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut rng = StdRng::seed_from_u64(params.seed ^ 0x5eed);
        for _ in 0..200 {
            let c = Configuration::new(
                m.states().nth(rng.random_range(0..m.num_states())).unwrap(),
                (0..rng.random_range(0..=3))
                    .map(|_| {
                        m.symbols()
                            .nth(rng.random_range(0..m.num_symbols()))
                            .unwrap()
                    })
                    .collect(),
                phases[rng.random_range(0..phases.len())],
            );
            if direct.accepts(&c) != pre.automaton.accepts(&normalized.lift_config(&c)) {
                row.status = "mismatch".into();
                break;
            }
        }
    }
    Ok(row)
}
