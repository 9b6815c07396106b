use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const EXAMPLE: &str = include_str!("../../core/fixtures/example1.smpds");

fn smpds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smpds"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let p = self.path(name);
        fs::write(&p, contents).unwrap();
        p.to_str().unwrap().to_owned()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_after_poststar() {
    let d = Dir::new();
    let model = d.file("m.smpds", EXAMPLE);
    let out = d.path("post.aut");
    let o = smpds(&["poststar", "--model", &model, "--out", s(&out)]);
    assert!(o.status.success(), "{o:?}");

    let yes = smpds(&[
        "check",
        "--model",
        &model,
        "--automaton",
        s(&out),
        "--config",
        "p3 th1 g3 g1",
    ]);
    assert_eq!(yes.status.code(), Some(0));
    assert_eq!(stdout(&yes), "Yes\n");

    let no = smpds(&[
        "check",
        "--model",
        &model,
        "--automaton",
        s(&out),
        "--config",
        "p3 th1 g3 g3",
    ]);
    assert_eq!(no.status.code(), Some(1));
    assert_eq!(stdout(&no), "No\n");

    let missing = smpds(&[
        "check",
        "--model",
        &model,
        "--automaton",
        "/nonexistent.aut",
        "--config",
        "p3 th1",
    ]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("cannot read"));
}

#[test]
fn prestar_from_explicit_targets_with_stats() {
    let d = Dir::new();
    let model = d.file("m.smpds", EXAMPLE);
    let o = smpds(&[
        "--stats",
        "prestar",
        "--model",
        &model,
        "--config",
        "p3 th1 g3 g1",
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("transitions added: "));
    let aut = d.file("pre.aut", &stdout(&o));
    let c = smpds(&[
        "check",
        "--model",
        &model,
        "--automaton",
        &aut,
        "--config",
        "p1 th0 g1 g1",
    ]);
    assert_eq!(c.status.code(), Some(0));
}

#[test]
fn outputs_are_deterministic() {
    let d = Dir::new();
    let model = d.file("m.smpds", EXAMPLE);
    for args in [
        vec!["poststar", "--model", &model],
        vec!["prestar", "--model", &model, "--config", "p2 th1 g2 g3 g1"],
        vec!["poststar", "--model", &model, "--dot"],
        vec!["translate", "--model", &model, "--to", "pds"],
        vec!["translate", "--model", &model, "--to", "sympds"],
    ] {
        let a = smpds(&args);
        let b = smpds(&args);
        assert!(a.status.success(), "{args:?}: {a:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn validate_reports() {
    let d = Dir::new();
    let good = d.file("m.smpds", EXAMPLE);
    let o = smpds(&["validate", &good]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("4 rules (1 self-modifying)"));

    let bad = d.file("bad.smpds", "rule r: p a -> p\nsmrule s: p (r -> nope) p\n");
    let o = smpds(&["validate", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));

    let warn = d.file("w.smpds", "rule r: p a -> p a a a\n");
    let o = smpds(&["validate", &warn]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("warning"));
    let o = smpds(&["--quiet", "validate", &warn]);
    assert_eq!(stdout(&o), "");
}

#[test]
fn translate_names_paired_states() {
    let d = Dir::new();
    let model = d.file("m.smpds", EXAMPLE);
    let o = smpds(&[
        "translate",
        "--model",
        &model,
        "--to",
        "pds",
        "--seed-phase",
        "th0",
    ]);
    let text = stdout(&o);
    assert!(text.contains("p3@th0 g1 -> p4@th1 g1"), "{text}");
    let o = smpds(&["translate", "--model", &model, "--to", "sympds"]);
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn asm_pipeline_reaches_the_hidden_block() {
    let d = Dir::new();
    let prog = d.file(
        "p.sasm",
        "entry main\nmain: selfmod l3 -> jmp hidden\nl2: push 1\nl3: push 0b\nl4: jmp done\nhidden: nop\ndone: nop\n",
    );
    let model = d.path("p.smpds");
    let o = smpds(&["asm2smpds", &prog, "--out", s(&model)]);
    assert!(o.status.success(), "{o:?}");
    let post = d.path("post.aut");
    let o = smpds(&["poststar", "--model", s(&model), "--out", s(&post)]);
    assert!(o.status.success(), "{o:?}");
    let o = smpds(&[
        "enumerate",
        "--model",
        s(&model),
        "--automaton",
        s(&post),
        "--max-len",
        "2",
    ]);
    assert!(
        stdout(&o).lines().any(|l| l.starts_with("hidden ")),
        "{}",
        stdout(&o)
    );

    let bad = d.file("bad.sasm", "entry a\na: frobnicate\n");
    let o = smpds(&["asm2smpds", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn bench_prints_csv() {
    let o = smpds(&[
        "--seed",
        "4",
        "bench",
        "--rules",
        "10",
        "--smrules",
        "3",
        "--count",
        "2",
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(
        lines[0],
        "rules,smrules,direct_ms,direct_mb,pds_ms,pds_saturate_ms,total_ms,status"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1..]
        .iter()
        .all(|l| l.starts_with("10,3,") && l.ends_with(",ok")));
}
