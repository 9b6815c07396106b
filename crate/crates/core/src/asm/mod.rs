//! A small self-modifying assembly language and its compilation into an
//! SM-PDS.
//!
//! ```text
//! entry main
//! main: selfmod l3 -> jmp hidden
//! l2:   push 1
//! l3:   push 0b
//! l4:   jmp done
//! hidden: nop
//! done: ret
//! ```
//!
//! Every instruction carries a label, which doubles as its control point.
//! Execution falls through to the next line; the last instruction falls
//! through to `__exit`.
//!
//! The stack always holds a marker symbol `_top` above the program's own
//! data, so each instruction compiles to a single rule reading `_top`
//! (plus shared helper rules for `pop` and `ret`, which must look below the
//! marker). That is what makes `selfmod` a plain rule swap.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{text::tokenize, Phase, Rule, RuleId, SelfModRule, Smpds};

pub const EXIT: &str = "__exit";
pub const TOP: &str = "_top";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instr {
    Push(String),
    Pop,
    Jmp(String),
    Call(String),
    Ret,
    Nop,
    /// Replaces the instruction at `target` by `replacement`.
    SelfMod {
        target: String,
        replacement: Box<Instr>,
    },
}

impl Instr {
    pub fn arity(&self) -> usize {
        match self {
            Instr::Pop | Instr::Ret | Instr::Nop => 0,
            Instr::Push(_) | Instr::Jmp(_) | Instr::Call(_) => 1,
            Instr::SelfMod { .. } => 2,
        }
    }

    fn labels(&self) -> Vec<&str> {
        match self {
            Instr::Jmp(l) | Instr::Call(l) => vec![l],
            Instr::SelfMod {
                target,
                replacement,
            } => {
                let mut v = vec![target.as_str()];
                v.extend(replacement.labels());
                v
            }
            _ => vec![],
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Push(v) => write!(f, "push {v}"),
            Instr::Pop => f.write_str("pop"),
            Instr::Jmp(l) => write!(f, "jmp {l}"),
            Instr::Call(l) => write!(f, "call {l}"),
            Instr::Ret => f.write_str("ret"),
            Instr::Nop => f.write_str("nop"),
            Instr::SelfMod {
                target,
                replacement,
            } => write!(f, "selfmod {target} -> {replacement}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub entry: String,
    /// In program order.
    pub instructions: Vec<(String, Instr)>,
}

impl Program {
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.instructions.iter().position(|(l, _)| l == label)
    }

    pub fn get(&self, label: &str) -> Option<&Instr> {
        self.index_of(label).map(|i| &self.instructions[i].1)
    }

    /// Fall-through successor of the instruction at `i`.
    pub fn next_label(&self, i: usize) -> &str {
        self.instructions
            .get(i + 1)
            .map_or(EXIT, |(l, _)| l.as_str())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "entry {}", self.entry)?;
        for (l, i) in &self.instructions {
            writeln!(f, "{l}: {i}")?;
        }
        Ok(())
    }
}

fn is_label(tok: &str) -> bool {
    crate::model::text::is_name(tok) && !tok.contains('.') && tok != EXIT && tok != "->"
}

fn is_value(tok: &str) -> bool {
    crate::model::text::is_name(tok)
}

fn parse_instr(line: usize, toks: &[String]) -> Result<Instr> {
    let err = |m: String| Error::parse(line, m);
    let (op, args) = toks
        .split_first()
        .ok_or_else(|| err("missing opcode".into()))?;
    let want = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(err(format!(
                "`{op}` takes {n} operand(s), found {}",
                args.len()
            )))
        }
    };
    let label = |t: &String| {
        if is_label(t) {
            Ok(t.clone())
        } else {
            Err(err(format!("invalid label `{t}`")))
        }
    };
    Ok(match op.as_str() {
        "push" => {
            want(1)?;
            if !is_value(&args[0]) {
                return Err(err(format!("invalid value `{}`", args[0])));
            }
            Instr::Push(args[0].clone())
        }
        "pop" => want(0).map(|_| Instr::Pop)?,
        "ret" => want(0).map(|_| Instr::Ret)?,
        "nop" => want(0).map(|_| Instr::Nop)?,
        "jmp" => {
            want(1)?;
            Instr::Jmp(label(&args[0])?)
        }
        "call" => {
            want(1)?;
            Instr::Call(label(&args[0])?)
        }
        "selfmod" => {
            if args.len() < 3 || args[1] != "->" {
                return Err(err("expected `selfmod <label> -> <instruction>`".into()));
            }
            Instr::SelfMod {
                target: label(&args[0])?,
                replacement: Box::new(parse_instr(line, &args[2..])?),
            }
        }
        other => return Err(err(format!("unknown opcode `{other}`"))),
    })
}

/// Parses and checks a program: labels are unique and resolve, and every
/// `selfmod` replacement has the operand count of the instruction it
/// replaces.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut entry: Option<(usize, String)> = None;
    let mut instructions = Vec::new();
    let mut lines = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(raw);
        let Some(head) = toks.first() else { continue };
        if head == "entry" {
            if entry.is_some() {
                return Err(Error::parse(line, "duplicate entry"));
            }
            match &toks[1..] {
                [l] if is_label(l) => entry = Some((line, l.clone())),
                _ => return Err(Error::parse(line, "expected `entry <label>`")),
            }
            continue;
        }
        if toks.get(1).map(String::as_str) != Some(":") {
            return Err(Error::parse(line, "expected `<label>: <instruction>`"));
        }
        if !is_label(head) {
            return Err(Error::parse(line, format!("invalid label `{head}`")));
        }
        if !seen.insert(head.clone()) {
            return Err(Error::parse(line, format!("duplicate label `{head}`")));
        }
        instructions.push((head.clone(), parse_instr(line, &toks[2..])?));
        lines.push(line);
    }
    let Some((entry_line, entry)) = entry else {
        return Err(Error::Invalid("no entry".into()));
    };
    if !seen.contains(&entry) {
        return Err(Error::parse(
            entry_line,
            format!("unresolved label `{entry}`"),
        ));
    }
    let prog = Program {
        entry,
        instructions,
    };
    for ((_, instr), &line) in prog.instructions.iter().zip(&lines) {
        for l in instr.labels() {
            if !seen.contains(l) {
                return Err(Error::parse(line, format!("unresolved label `{l}`")));
            }
        }
        let mut cur = instr;
        while let Instr::SelfMod {
            target,
            replacement,
        } = cur
        {
            let old = prog.get(target).expect("resolved");
            if old.arity() != replacement.arity() {
                return Err(Error::parse(
                    line,
                    format!(
                        "`{replacement}` has {} operand(s) but `{old}` at {target} has {}",
                        replacement.arity(),
                        old.arity()
                    ),
                ));
            }
            cur = replacement;
        }
    }
    Ok(prog)
}

pub fn print_program(prog: &Program) -> String {
    prog.to_string()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CompileOptions {
    /// Accept `selfmod` instructions whose target is itself a `selfmod`.
    pub allow_meta_selfmod: bool,
}

#[derive(Debug, Clone)]
pub struct Compiled {
    /// Carries a phase `init` with the rules of the unmodified program and
    /// the entry configuration `<entry, _top>`.
    pub smpds: Smpds,
    /// The rule each label's instruction compiles to.
    pub rules: BTreeMap<String, RuleId>,
}

impl Compiled {
    pub fn initial_phase(&self) -> Phase {
        self.smpds
            .phase_by_name("init")
            .expect("compiled systems define init")
    }
}

struct Compiler<'a> {
    prog: &'a Program,
    m: Smpds,
    /// Rules of the unmodified program, in the initial phase.
    init: Vec<RuleId>,
    helpers_done: HashSet<String>,
    rets: Vec<String>,
    counter: HashMap<String, usize>,
}

impl<'a> Compiler<'a> {
    fn pds(&mut self, name: &str, from: &str, symbol: &str, to: &str, word: &[&str]) -> RuleId {
        let name = self.m.fresh_rule_name(name);
        self.m
            .add_pds_rule(&name, from, symbol, to, word)
            .expect("fresh rule name")
    }

    /// Helper rules shared by every `pop` or `ret` compiled at `at`.
    fn helper(&mut self, at: &str, instr: &Instr, next: &str) {
        let key = match instr {
            Instr::Pop => format!("{at}.pop"),
            Instr::Ret => format!("{at}.ret"),
            _ => return,
        };
        if !self.helpers_done.insert(key.clone()) {
            return;
        }
        if matches!(instr, Instr::Pop) {
            // Dropping the marker leaves the popped cell on top; any symbol
            // may be there.
            let symbols: Vec<String> = self
                .m
                .symbols()
                .map(|g| self.m.symbol_name(g).to_owned())
                .collect();
            for g in symbols {
                let r = self.pds(&format!("{key}.{g}"), &key, &g, next, &[TOP]);
                self.init.push(r);
            }
        } else {
            let rets: Vec<String> = self.rets.clone();
            for site in rets {
                let g = format!("ret.{site}");
                let r = self.pds(&format!("{key}.{site}"), &key, &g, &site, &[TOP]);
                self.init.push(r);
            }
        }
    }

    fn rule_for(&mut self, at: &str, instr: &Instr, name: &str) -> RuleId {
        let i = self.prog.index_of(at).expect("resolved");
        let next = self.prog.next_label(i).to_owned();
        self.helper(at, instr, &next);
        match instr {
            Instr::Push(v) => self.pds(name, at, TOP, &next, &[TOP, &format!("val.{v}")]),
            Instr::Pop => self.pds(name, at, TOP, &format!("{at}.pop"), &[]),
            Instr::Jmp(l) => self.pds(name, at, TOP, l, &[TOP]),
            Instr::Call(l) => self.pds(name, at, TOP, l, &[TOP, &format!("ret.{next}")]),
            Instr::Ret => self.pds(name, at, TOP, &format!("{at}.ret"), &[]),
            Instr::Nop => self.pds(name, at, TOP, &next, &[TOP]),
            Instr::SelfMod {
                target,
                replacement,
            } => {
                let removed = self.m.rule_id(target).expect("targets compile first");
                let k = self.counter.entry(target.clone()).or_insert(0);
                *k += 1;
                let alt = format!("{target}.alt{k}");
                let added = self.rule_for(target, replacement, &alt);
                let name = self.m.fresh_rule_name(name);
                let rule = Rule::SelfMod(SelfModRule {
                    from: self.m.state(at),
                    removed,
                    added,
                    to: self.m.state(&next),
                });
                self.m.add_rule(&name, rule).expect("fresh rule name")
            }
        }
    }
}

/// Compiles `prog`. Rule `L` is the instruction at label `L`; replacement
/// instructions introduced by `selfmod` are named `L.altK` and are outside
/// the initial phase.
pub fn compile(prog: &Program, opts: CompileOptions) -> Result<Compiled> {
    for (at, instr) in &prog.instructions {
        if let Instr::SelfMod { target, .. } = instr {
            let old = prog
                .get(target)
                .ok_or_else(|| Error::Invalid(format!("unresolved label `{target}`")))?;
            if matches!(old, Instr::SelfMod { .. }) && !opts.allow_meta_selfmod {
                return Err(Error::Invalid(format!(
                    "`selfmod` at {at} targets the `selfmod` at {target}"
                )));
            }
        }
    }
    let mut c = Compiler {
        prog,
        m: Smpds::new(),
        init: Vec::new(),
        helpers_done: HashSet::new(),
        rets: Vec::new(),
        counter: HashMap::new(),
    };
    // Declare the alphabet up front so that `pop` helpers cover it.
    for (l, _) in &prog.instructions {
        c.m.state(l);
    }
    c.m.state(EXIT);
    c.m.symbol(TOP);
    let mut stack: Vec<&Instr> = prog.instructions.iter().map(|(_, i)| i).collect();
    while let Some(i) = stack.pop() {
        match i {
            Instr::Push(v) => {
                c.m.symbol(&format!("val.{v}"));
            }
            Instr::SelfMod { replacement, .. } => stack.push(replacement),
            _ => {}
        }
    }
    for (i, (_, instr)) in prog.instructions.iter().enumerate() {
        let mut cur = instr;
        loop {
            if let Instr::Call(_) = cur {
                let site = prog.next_label(i).to_owned();
                if !c.rets.contains(&site) {
                    c.rets.push(site.clone());
                    c.m.symbol(&format!("ret.{site}"));
                }
            }
            match cur {
                Instr::SelfMod { replacement, .. } => cur = replacement,
                _ => break,
            }
        }
    }
    // Non-self-modifying instructions first, so that selfmod targets exist.
    let mut rules = BTreeMap::new();
    let order = prog
        .instructions
        .iter()
        .filter(|(_, i)| !matches!(i, Instr::SelfMod { .. }))
        .chain(
            prog.instructions
                .iter()
                .filter(|(_, i)| matches!(i, Instr::SelfMod { .. })),
        );
    let mut pending: Vec<(&String, &Instr)> = order.map(|(l, i)| (l, i)).collect();
    // Meta-selfmods need their target compiled first.
    while !pending.is_empty() {
        let before = pending.len();
        let mut rest = Vec::new();
        for (l, i) in pending {
            let ready = match i {
                Instr::SelfMod { target, .. } => c.m.rule_id(target).is_some(),
                _ => true,
            };
            if ready {
                let r = c.rule_for(l, i, l);
                c.init.push(r);
                rules.insert(l.clone(), r);
            } else {
                rest.push((l, i));
            }
        }
        if rest.len() == before {
            return Err(Error::Invalid("cyclic selfmod targets".into()));
        }
        pending = rest;
    }
    let init = Phase::from_rules(c.init.iter().copied());
    c.m.define_phase("init", init)?;
    let entry = c.m.config(&prog.entry, &[TOP], init)?;
    c.m.add_config(entry);
    Ok(Compiled { smpds: c.m, rules })
}
