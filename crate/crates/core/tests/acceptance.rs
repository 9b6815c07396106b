//! Acceptance criteria, one line of output each. Runs as a plain binary so
//! the lines show up in `cargo test` output.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{case, decided, explore, samples, Case};
use smpds::asm::{compile, parse_program, print_program, CompileOptions};
use smpds::automaton::{self, PAutomaton};
use smpds::bench::{run_comparison, GenParams};
use smpds::model::{normalize_push, text};
use smpds::poststar::{poststar, poststar_with};
use smpds::prestar::{prestar, prestar_with};
use smpds::saturation::{Budget, SaturationOptions};
use smpds::translate::{
    erase_self_modification, pds_poststar, pds_prestar, phase_closure, prestar_phases,
    symbolic_step, to_pds, to_symbolic_pds,
};
use smpds::{fixtures, Configuration, Phase};

const CORPUS: u64 = 200;
const MAX_STACK: usize = 6;
const MAX_STEPS: usize = 20_000;

pub const PROGRAMS: &[(&str, &str)] = &[
    (
        "push_to_jmp",
        include_str!("../fixtures/asm/push_to_jmp.sasm"),
    ),
    (
        "call_redirect",
        include_str!("../fixtures/asm/call_redirect.sasm"),
    ),
    (
        "late_return",
        include_str!("../fixtures/asm/late_return.sasm"),
    ),
    (
        "loop_patch",
        include_str!("../fixtures/asm/loop_patch.sasm"),
    ),
    ("chained", include_str!("../fixtures/asm/chained.sasm")),
    (
        "callee_patches_caller",
        include_str!("../fixtures/asm/callee_patches_caller.sasm"),
    ),
];

type Outcome = Result<String, String>;

fn corpus(nonempty: bool) -> impl Iterator<Item = (u64, Case)> {
    (0..CORPUS).map(move |s| (s, case(s, nonempty)))
}

fn example_replay() -> Outcome {
    let m = fixtures::example_one();
    let th0 = m.phase_by_name("th0").unwrap();
    let th1 = m.phase_by_name("th1").unwrap();
    let ids = |names: &[&str]| Phase::from_rules(names.iter().map(|n| m.rule_id(n).unwrap()));
    if th0 != ids(&["r1", "r2", "r'"]) || th1 != ids(&["r2", "r3", "r'"]) {
        return Err("phases differ from {r1,r2,r'} / {r2,r3,r'}".into());
    }
    let run = [
        m.config("p1", &["g1", "g1"], th0).unwrap(),
        m.config("p2", &["g2", "g1", "g1"], th0).unwrap(),
        m.config("p3", &["g1", "g1"], th0).unwrap(),
        m.config("p4", &["g1", "g1"], th1).unwrap(),
        m.config("p2", &["g2", "g3", "g1"], th1).unwrap(),
        m.config("p3", &["g3", "g1"], th1).unwrap(),
    ];
    for w in run.windows(2) {
        let next = m.step(&w[0]).map_err(|e| e.to_string())?;
        if next != BTreeSet::from([w[1].clone()]) {
            return Err(format!(
                "from {} expected only {}",
                m.display_config(&w[0]),
                m.display_config(&w[1])
            ));
        }
    }
    Ok("5 steps reproduced".into())
}

#[derive(Default)]
struct Tally {
    decided: usize,
    positive: usize,
    skipped: usize,
    mismatches: Vec<String>,
}

impl Tally {
    fn outcome(self, started: Instant, limit: Duration) -> Outcome {
        let elapsed = started.elapsed();
        let msg = format!(
            "{} systems, {} decided samples ({} reachable), {} inconclusive skipped, {:.1}s",
            CORPUS,
            self.decided,
            self.positive,
            self.skipped,
            elapsed.as_secs_f64()
        );
        if let Some(first) = self.mismatches.first() {
            Err(format!(
                "{} mismatches, first: {first}; {msg}",
                self.mismatches.len()
            ))
        } else if elapsed > limit {
            Err(format!("too slow; {msg}"))
        } else if self.decided == 0 {
            Err(format!("nothing decided; {msg}"))
        } else {
            Ok(msg)
        }
    }
}

fn prestar_vs_oracle() -> Outcome {
    let started = Instant::now();
    let mut t = Tally::default();
    for (seed, c) in corpus(false) {
        let pre =
            prestar(&c.m, &PAutomaton::from_configs(&c.targets)).map_err(|e| e.to_string())?;
        for s in samples(seed, &c, 40, false) {
            let search = explore(&c.m, std::slice::from_ref(&s), MAX_STACK, MAX_STEPS, |x| {
                c.targets.contains(x)
            });
            match decided(&search) {
                None => t.skipped += 1,
                Some(want) => {
                    t.decided += 1;
                    t.positive += usize::from(want);
                    if pre.accepts(&s) != want {
                        t.mismatches
                            .push(format!("seed {seed}: {}", c.m.display_config(&s)));
                    }
                }
            }
        }
    }
    t.outcome(started, Duration::from_secs(300))
}

fn poststar_vs_oracle() -> Outcome {
    let started = Instant::now();
    let mut t = Tally::default();
    for (seed, c) in corpus(false) {
        let post =
            poststar(&c.m, &PAutomaton::from_configs(&c.sources)).map_err(|e| e.to_string())?;
        let search = explore(&c.m, &c.sources, MAX_STACK, MAX_STEPS, |_| false);
        for s in samples(seed, &c, 40, false) {
            let want = if search.visited.contains(&s) {
                Some(true)
            } else if search.truncated {
                None
            } else {
                Some(false)
            };
            match want {
                None => t.skipped += 1,
                Some(want) => {
                    t.decided += 1;
                    t.positive += usize::from(want);
                    if post.accepts(&s) != want {
                        t.mismatches
                            .push(format!("seed {seed}: {}", c.m.display_config(&s)));
                    }
                }
            }
        }
    }
    t.outcome(started, Duration::from_secs(300))
}

fn single_steps() -> Outcome {
    let mut pairs = 0;
    for (seed, c) in corpus(true) {
        let spds = to_symbolic_pds(&c.m);
        let configs = samples(seed, &c, 120, true);
        let phases: BTreeSet<Phase> = configs.iter().map(|x| x.phase).collect();
        let pds = to_pds(&c.m, &phase_closure(&c.m, &phases)).map_err(|e| e.to_string())?;
        for x in &configs {
            let direct = c.m.step(x).map_err(|e| e.to_string())?;
            let oracle: BTreeSet<Configuration> = common::successors(&c.m, x).into_iter().collect();
            let explicit = pds.step(x);
            let symbolic = symbolic_step(&spds, x);
            if direct != oracle || direct != explicit || direct != symbolic {
                return Err(format!("seed {seed}: {} disagrees", c.m.display_config(x)));
            }
            pairs += 1;
        }
    }
    if pairs < 10_000 {
        return Err(format!("only {pairs} pairs sampled"));
    }
    Ok(format!("{pairs} (system, configuration) pairs agree"))
}

fn cross_path() -> Outcome {
    let mut compared = 0;
    for (seed, c) in corpus(true) {
        if c.targets.is_empty() {
            continue;
        }
        let n = normalize_push(&c.m);
        let err = |e: smpds::Error| format!("seed {seed}: {e}");

        let target = PAutomaton::from_configs(&c.targets);
        let direct_pre = prestar(&c.m, &target).map_err(err)?;
        let seeds: BTreeSet<Phase> = c.targets.iter().map(|t| n.lift_phase(t.phase)).collect();
        let phases = prestar_phases(&n.smpds, &seeds, usize::MAX).map_err(err)?;
        let pds = to_pds(&n.smpds, &phases).map_err(err)?;
        let pre = pds_prestar(&pds, &n.lift_automaton(&target), Budget::unlimited())
            .map_err(err)?
            .automaton;

        let source = PAutomaton::from_configs(&c.sources);
        let direct_post = poststar(&c.m, &source).map_err(err)?;
        let seeds: BTreeSet<Phase> = c.sources.iter().map(|t| n.lift_phase(t.phase)).collect();
        let pds = to_pds(&n.smpds, &phase_closure(&n.smpds, &seeds)).map_err(err)?;
        let post = pds_poststar(&pds, &n.lift_automaton(&source), Budget::unlimited())
            .map_err(err)?
            .automaton;

        for s in samples(seed, &c, 60, true) {
            let lifted = n.lift_config(&s);
            if direct_pre.accepts(&s) != pre.accepts(&lifted) {
                return Err(format!(
                    "seed {seed}: pre* differs on {}",
                    c.m.display_config(&s)
                ));
            }
            if direct_post.accepts(&s) != post.accepts(&lifted) {
                return Err(format!(
                    "seed {seed}: post* differs on {}",
                    c.m.display_config(&s)
                ));
            }
            compared += 1;
        }
    }
    Ok(format!(
        "{compared} sampled configurations agree for pre* and post*"
    ))
}

fn symbolic_size() -> Outcome {
    for (seed, c) in corpus(false) {
        let want = c.m.delta().count() + c.m.delta_c().count() * c.m.num_symbols();
        let got = to_symbolic_pds(&c.m).rules.len();
        if got != want {
            return Err(format!("seed {seed}: {got} rules, expected {want}"));
        }
    }
    Ok(format!("{CORPUS} systems match |Δ|+|Δc|·|Γ|"))
}

fn scaling_trend() -> Outcome {
    let params = GenParams {
        num_states: 100,
        num_symbols: 20,
        num_rules: 1009,
        num_smrules: 10,
        max_rhs_len: 2,
        seed: 1,
    };
    let budget = Budget {
        time: Some(Duration::from_secs(60)),
        memory_bytes: Some(1 << 30),
    };
    let row = run_comparison(&params, budget).map_err(|e| e.to_string())?;
    let csv = row.to_csv();
    let Some(direct) = row.direct_ms else {
        return Err(format!("direct path failed: {csv}"));
    };
    match (row.status.as_str(), row.total_ms) {
        ("pds_timeout" | "pds_memout", _) => Ok(format!("explicit path out of budget: {csv}")),
        ("ok", Some(total)) if total > 10.0 * direct => {
            Ok(format!("explicit/direct = {:.0}x: {csv}", total / direct))
        }
        _ => Err(format!("ordering not reproduced: {csv}")),
    }
}

fn hidden_blocks() -> Outcome {
    let mut table = Vec::new();
    for (name, src) in PROGRAMS {
        let err = |e: smpds::Error| format!("{name}: {e}");
        let prog = parse_program(src).map_err(err)?;
        let compiled = compile(&prog, CompileOptions::default()).map_err(err)?;
        let m = &compiled.smpds;
        let hidden = m
            .state_id("hidden")
            .ok_or(format!("{name}: no hidden label"))?;
        let start = m.configs()[0].clone();
        let post = poststar(m, &PAutomaton::from_configs([&start])).map_err(err)?;
        let with_selfmod = post.accepts_some_at(hidden);
        let oracle = explore(m, std::slice::from_ref(&start), 8, MAX_STEPS, |c| {
            c.state == hidden
        })
        .found;

        let erased = erase_self_modification(m, compiled.initial_phase()).map_err(err)?;
        let start = erased.configs()[0].clone();
        let post = poststar(&erased, &PAutomaton::from_configs([&start])).map_err(err)?;
        let without = post.accepts_some_at(hidden);

        let yn = |b: bool| if b { "Y" } else { "N" };
        if !with_selfmod || without || !oracle {
            return Err(format!(
                "{name}: SM-PDS {} (oracle {}), erased {}; expected Y/N",
                yn(with_selfmod),
                yn(oracle),
                yn(without)
            ));
        }
        table.push(format!("{name} Y/N"));
    }
    Ok(table.join(", "))
}

fn idempotence() -> Outcome {
    let opts = SaturationOptions {
        accept_saturated_input: true,
        ..SaturationOptions::default()
    };
    let mut runs = 0;
    for (seed, c) in corpus(false) {
        let err = |e: smpds::Error| format!("seed {seed}: {e}");
        let pre = prestar(&c.m, &PAutomaton::from_configs(&c.targets)).map_err(err)?;
        let again = prestar_with(&c.m, &pre, &opts).map_err(err)?;
        if again.stats.transitions_added != 0 {
            return Err(format!(
                "seed {seed}: pre* added {}",
                again.stats.transitions_added
            ));
        }
        let post = poststar(&c.m, &PAutomaton::from_configs(&c.sources)).map_err(err)?;
        let again = poststar_with(&c.m, &post, &opts).map_err(err)?;
        if again.stats.transitions_added != 0 {
            return Err(format!(
                "seed {seed}: post* added {}",
                again.stats.transitions_added
            ));
        }
        runs += 2;
    }
    Ok(format!("{runs} reruns added no transitions"))
}

fn round_trips() -> Outcome {
    let mut n = 0;
    let mut models = vec![fixtures::example_one()];
    models.extend(corpus(false).map(|(_, c)| {
        let mut m = c.m;
        m.define_phase("seed", c.phase).unwrap();
        for x in c.sources {
            m.add_config(x);
        }
        m
    }));
    for m in &models {
        let printed = text::print(m);
        let parsed = text::parse(&printed).map_err(|e| format!("{e}\n{printed}"))?;
        if &parsed != m || text::print(&parsed) != printed {
            return Err(format!("model round trip differs:\n{printed}"));
        }
        let start = PAutomaton::from_configs(m.configs());
        for aut in [
            poststar(m, &start).map_err(|e| e.to_string())?,
            prestar(m, &start).map_err(|e| e.to_string())?,
        ] {
            let printed = automaton::text::print(m, &aut);
            let parsed =
                automaton::text::parse(m, &printed).map_err(|e| format!("{e}\n{printed}"))?;
            if automaton::text::print(m, &parsed) != printed {
                return Err(format!("automaton round trip differs:\n{printed}"));
            }
        }
        n += 1;
    }
    for (name, src) in PROGRAMS {
        let p = parse_program(src).map_err(|e| format!("{name}: {e}"))?;
        if print_program(&p) != *src || parse_program(&print_program(&p)).unwrap() != p {
            return Err(format!("{name}: program round trip differs"));
        }
        n += 1;
    }
    Ok(format!("{n} models (with two automata each) and programs"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("example replay", example_replay),
        ("pre* vs bounded oracle", prestar_vs_oracle),
        ("post* vs bounded oracle", poststar_vs_oracle),
        ("single-step equivalence", single_steps),
        ("direct vs translation", cross_path),
        ("symbolic rule count", symbolic_size),
        ("scaling trend at 1009+10", scaling_trend),
        ("hidden blocks in assembly", hidden_blocks),
        ("fixpoint idempotence", idempotence),
        ("format round trips", round_trips),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
