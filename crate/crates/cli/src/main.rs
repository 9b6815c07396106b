use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use smpds::asm::{compile, parse_program, CompileOptions};
use smpds::automaton::{self, to_dot, PAutomaton};
use smpds::bench::{run_comparison, GenParams, CSV_HEADER};
use smpds::model::{self, Severity};
use smpds::poststar::poststar_with;
use smpds::prestar::prestar_with;
use smpds::saturation::{Budget, Saturation, SaturationOptions};
use smpds::translate::{phase_closure, to_pds, to_symbolic_pds};
use smpds::{Phase, Smpds};

#[derive(Parser)]
#[command(
    name = "smpds",
    version,
    about = "Reachability for self-modifying pushdown systems"
)]
struct Cli {
    /// Suppress warnings and informational output.
    #[arg(long, global = true)]
    quiet: bool,
    /// Print saturation statistics to standard error.
    #[arg(long, global = true)]
    stats: bool,
    /// Seed for the random generator used by `bench`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model and report diagnostics.
    Validate { model: PathBuf },
    /// Backward reachability: configurations that can reach the target set.
    Prestar {
        #[command(flatten)]
        input: Input,
        /// Target automaton.
        #[arg(long, conflicts_with = "config")]
        target: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Forward reachability: configurations reachable from the source set.
    Poststar {
        #[command(flatten)]
        input: Input,
        /// Source automaton.
        #[arg(long, conflicts_with = "config")]
        source: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Translate into an ordinary or a symbolic pushdown system.
    Translate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        /// Phase the explicit translation starts from (default: the first
        /// configuration's phase, else the first named phase).
        #[arg(long)]
        seed_phase: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a self-modifying assembly program.
    Asm2smpds {
        program: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accept `selfmod` instructions that rewrite other `selfmod`s.
        #[arg(long)]
        allow_meta_selfmod: bool,
    },
    /// Membership of a configuration; exit status 0 for yes, 1 for no.
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        automaton: PathBuf,
        /// `state phase symbol...`, top of stack first.
        #[arg(long, allow_hyphen_values = true)]
        config: String,
    },
    /// List accepted configurations up to a stack length.
    Enumerate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        automaton: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
    },
    /// Compare direct pre* with the explicit translation on random systems.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    model: PathBuf,
    /// Start from these configurations instead of an automaton file
    /// (repeatable). Without either, the model's own configurations are used.
    #[arg(long)]
    config: Vec<String>,
    /// Accept an automaton that is already a saturation result.
    #[arg(long)]
    accept_saturated: bool,
}

#[derive(Args)]
struct Output {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write Graphviz instead of the automaton format.
    #[arg(long)]
    dot: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Pds,
    Sympds,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 10)]
    rules: usize,
    #[arg(long, default_value_t = 3)]
    smrules: usize,
    #[arg(long, default_value_t = 10)]
    states: usize,
    #[arg(long, default_value_t = 5)]
    symbols: usize,
    #[arg(long, default_value_t = 2)]
    max_rhs: usize,
    /// Number of instances; instance `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Seconds per path.
    #[arg(long, default_value_t = 60)]
    time_limit: u64,
    #[arg(long, default_value_t = 1024)]
    mem_limit_mb: usize,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_model(path: &Path) -> Result<Smpds> {
    model::text::parse(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_automaton(m: &Smpds, path: &Path) -> Result<PAutomaton> {
    automaton::text::parse(m, &read(path)?).with_context(|| format!("in {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn start_set(m: &Smpds, input: &Input, file: Option<&Path>) -> Result<PAutomaton> {
    if let Some(f) = file {
        return load_automaton(m, f);
    }
    let configs = if input.config.is_empty() {
        if m.configs().is_empty() {
            bail!("no automaton, --config or model configuration given");
        }
        m.configs().to_vec()
    } else {
        input
            .config
            .iter()
            .map(|c| {
                m.parse_config(c)
                    .with_context(|| format!("in --config `{c}`"))
            })
            .collect::<Result<_>>()?
    };
    Ok(PAutomaton::from_configs(&configs))
}

fn saturate(
    cli: &Cli,
    input: &Input,
    file: Option<&Path>,
    output: &Output,
    engine: fn(&Smpds, &PAutomaton, &SaturationOptions) -> smpds::Result<Saturation>,
) -> Result<ExitCode> {
    let m = load_model(&input.model)?;
    let aut = start_set(&m, input, file)?;
    let opts = SaturationOptions {
        accept_saturated_input: input.accept_saturated,
        budget: Budget::unlimited(),
    };
    let sat = engine(&m, &aut, &opts)?;
    if cli.stats {
        eprintln!(
            "transitions added: {}, phases materialized: {}, time: {:.3} ms",
            sat.stats.transitions_added,
            sat.stats.phases_materialized,
            sat.stats.elapsed.as_secs_f64() * 1e3
        );
    }
    let text = if output.dot {
        to_dot(&m, &sat.automaton)
    } else {
        automaton::text::print(&m, &sat.automaton)
    };
    emit(output.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn seed_phase(m: &Smpds, name: Option<&str>) -> Result<Phase> {
    if let Some(n) = name {
        return Ok(m.resolve_phase(n)?);
    }
    m.configs()
        .first()
        .map(|c| c.phase)
        .or_else(|| m.named_phases().first().map(|(_, p)| *p))
        .context("no --seed-phase given and the model names no phase")
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Validate { model } => {
            let m = load_model(model)?;
            let report = m.validate();
            for d in &report.diagnostics {
                if d.severity == Severity::Error || !cli.quiet {
                    let tag = match d.severity {
                        Severity::Error => "error",
                        Severity::Warning => "warning",
                    };
                    println!("{tag}: {}", d.message);
                }
            }
            if !cli.quiet {
                println!(
                    "{} states, {} symbols, {} rules ({} self-modifying)",
                    m.num_states(),
                    m.num_symbols(),
                    m.num_rules(),
                    m.delta_c().count()
                );
            }
            Ok(if report.has_errors() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Prestar {
            input,
            target,
            output,
        } => saturate(cli, input, target.as_deref(), output, prestar_with),
        Command::Poststar {
            input,
            source,
            output,
        } => saturate(cli, input, source.as_deref(), output, poststar_with),
        Command::Translate {
            model,
            to,
            seed_phase: seed,
            out,
        } => {
            let m = load_model(model)?;
            let text = match to {
                Target::Pds => {
                    let seed = seed_phase(&m, seed.as_deref())?;
                    let phases = phase_closure(&m, &BTreeSet::from([seed]));
                    to_pds(&m, &phases)?.to_text(&m)
                }
                Target::Sympds => to_symbolic_pds(&m).to_text(&m),
            };
            emit(out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Asm2smpds {
            program,
            out,
            allow_meta_selfmod,
        } => {
            let prog = parse_program(&read(program)?)
                .with_context(|| format!("in {}", program.display()))?;
            let compiled = compile(
                &prog,
                CompileOptions {
                    allow_meta_selfmod: *allow_meta_selfmod,
                },
            )?;
            emit(out.as_deref(), &model::text::print(&compiled.smpds))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            model,
            automaton,
            config,
        } => {
            let m = load_model(model)?;
            let aut = load_automaton(&m, automaton)?;
            let c = m.parse_config(config)?;
            if aut.accepts(&c) {
                println!("Yes");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("No");
                Ok(ExitCode::from(1))
            }
        }
        Command::Enumerate {
            model,
            automaton,
            max_len,
        } => {
            let m = load_model(model)?;
            let aut = load_automaton(&m, automaton)?;
            for c in aut.enumerate(*max_len) {
                println!("{}", model::text::config_body(&m, &c));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench(b) => {
            let budget = Budget {
                time: Some(Duration::from_secs(b.time_limit)),
                memory_bytes: Some(b.mem_limit_mb * 1024 * 1024),
            };
            println!("{CSV_HEADER}");
            for i in 0..b.count {
                let params = GenParams {
                    num_states: b.states,
                    num_symbols: b.symbols,
                    num_rules: b.rules,
                    num_smrules: b.smrules,
                    max_rhs_len: b.max_rhs,
                    seed: cli.seed.wrapping_add(i),
                };
                println!("{}", run_comparison(&params, budget)?.to_csv());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
