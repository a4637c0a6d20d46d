//! The `pbisim` binary end to end: outputs, exit codes and generated
//! manifests.

mod common;

use std::io::Write;
use std::process::{Command, Stdio};

use common::{code, corpus, corpus_files, pbisim, scratch, stdout};
use pbisim_cli::gen::{Expected, Manifest};
use pbisim_core::format::write_ppda;
use pbisim_core::random::{random_finite_vpda, rng};

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&pbisim(&["--help"])), 0);
    assert_eq!(code(&pbisim(&["frobnicate"])), 3);
    assert_eq!(code(&pbisim(&["check"])), 3);
}

#[test]
fn validate_accepts_the_corpus() {
    for f in corpus_files() {
        let o = pbisim(&["validate", path(&f)]);
        assert_eq!(code(&o), 0, "{}", f.display());
    }
    let o = pbisim(&["validate", path(&corpus("example46.ppda"))]);
    assert!(stdout(&o).contains("vpda: true"));
}

#[test]
fn input_errors_exit_3() {
    let dir = scratch("input_errors");
    let bad = dir.join("bad.plts");
    std::fs::write(&bad, "plts\nstates: s\nactions: a\ns -a-> 1/2 s\n").unwrap();
    assert_eq!(code(&pbisim(&["validate", path(&bad)])), 3);
    assert_eq!(code(&pbisim(&["validate", path(&dir.join("missing.plts"))])), 3);
    let fig2 = corpus("fig2.plts");
    assert_eq!(code(&pbisim(&["check", path(&fig2), "s", "nowhere"])), 3);
    let ex21 = corpus("example21.ppda");
    assert_eq!(code(&pbisim(&["check", path(&ex21), "p W", "r X"])), 3);
    assert_eq!(code(&pbisim(&["check", path(&ex21), "p X", "r X", "--method", "vpda"])), 3);
    assert_eq!(code(&pbisim(&["norms", path(&ex21)])), 3);
}

#[test]
fn check_verdicts_and_exit_codes() {
    let fig2 = corpus("fig2.plts");
    let o = pbisim(&["check", path(&fig2), "s", "u"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("not-bisimilar (n = 2)\nmethod: finite\n"), "{}", stdout(&o));
    let o = pbisim(&["check", path(&fig2), "t1", "t2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("bisimilar\n"));
    let o = pbisim(&["check", path(&fig2), "s", "u", "--method", "bounded", "--n", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).starts_with("unknown (method limitation)"));

    let ex21 = corpus("example21.ppda");
    let o = pbisim(&["check", path(&ex21), "pXZ", "rX", "--method", "bounded", "--n", "6"]);
    assert_eq!(code(&o), 2);
    let o = pbisim(&["check", path(&ex21), "pXZ", "rX", "--method", "finite", "--budget", "50"]);
    assert_eq!(code(&o), 4);

    let ex46 = corpus("example46.ppda");
    let o = pbisim(&["check", path(&ex46), "pX", "p'X", "--method", "vpda"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("method: vpda"));
    let o = pbisim(&["check", path(&ex46), "pX", "p'X", "--budget", "500"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("method: vpda"), "{}", stdout(&o));
}

#[test]
fn size_guard_exits_4() {
    let dir = scratch("guard");
    let inst = random_finite_vpda(&mut rng(9), 6, 2, 80);
    let file = dir.join("big.ppda");
    std::fs::write(&file, write_ppda(&inst.machine)).unwrap();
    let (l, r) = (inst.machine.config_name(&inst.left), inst.machine.config_name(&inst.right));
    let o = pbisim(&["check", path(&file), &l, &r, "--method", "vpda"]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    // Auto settles it on the finite reachable part instead.
    let o = pbisim(&["check", path(&file), &l, &r]);
    assert!(matches!(code(&o), 0 | 1));
    assert!(stdout(&o).contains("method: finite"));
}

#[test]
fn classes_norms_and_reduce() {
    let o = pbisim(&["classes", path(&corpus("fig2.plts"))]);
    assert_eq!(stdout(&o), "{s}\n{t1, t2}\n{u}\n");
    let o = pbisim(&["norms", path(&corpus("example21_bpa.ppda"))]);
    assert_eq!(code(&o), 0);
    let rows: Vec<Vec<String>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect();
    assert!(rows.contains(&vec!["Y".to_string(), "3".into(), "9".into()]));
    let o = pbisim(&["reduce", path(&corpus("fig2.plts"))]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("plts\n"));
    let o = pbisim(&["reduce", path(&corpus("example42.ppda")), "--mode", "state"]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&pbisim(&["reduce", path(&corpus("fig2.plts")), "--mode", "stack"])), 3);
}

fn check_manifest(dir: &std::path::Path, name: &str) -> usize {
    let text = std::fs::read_to_string(dir.join(format!("{name}.manifest.json"))).unwrap();
    let m: Manifest = serde_json::from_str(&text).unwrap();
    let inst = dir.join(&m.instance);
    for c in &m.checks {
        // The nonempty corpus automaton is told apart at depth 11.
        let o = pbisim(&["check", path(&inst), &c.left, &c.right, "--n", "16", "--budget", "5000"]);
        let want = match c.expected {
            Expected::Bisimilar => 0,
            Expected::NotBisimilar => 1,
        };
        let got = code(&o);
        let msg = format!("{name}: {} vs {} ({})\n{}", c.left, c.right, c.provenance, stdout(&o));
        if c.provenance.contains("language") {
            // Emptiness is the undecidable direction: check may only fail
            // to answer, never contradict.
            assert!(got == want || got == 2, "{msg}");
        } else {
            assert_eq!(got, want, "{msg}");
        }
        assert!(!c.provenance.is_empty());
    }
    m.checks.len()
}

#[test]
fn generated_manifests_hold() {
    let dir = scratch("gen");
    let d = path(&dir);
    let ex53 = corpus("example53.afa");
    assert_eq!(code(&pbisim(&["gen", "afa", "--input", path(&ex53), "--out", d, "--name", "e53"])), 0);
    assert_eq!(check_manifest(&dir, "e53"), 3 * 5 + 1);
    for seed in 0..3 {
        let s = seed.to_string();
        assert_eq!(code(&pbisim(&["gen", "afa", "--seed", &s, "--max-n", "3", "--out", d])), 0);
        check_manifest(&dir, &format!("afa-{seed}"));
        assert_eq!(code(&pbisim(&["gen", "game", "--seed", &s, "--out", d])), 0);
        check_manifest(&dir, &format!("game-{seed}"));
        for kind in ["and", "or"] {
            assert_eq!(code(&pbisim(&["gen", "gadget", "--kind", kind, "--seed", &s, "--out", d])), 0);
            check_manifest(&dir, &format!("{kind}-{seed}"));
        }
    }
}

fn play(args: &[&str], input: &str) -> (i32, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pbisim"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    (code(&o), stdout(&o))
}

#[test]
fn terminal_play() {
    let fig2 = corpus("fig2.plts");
    // The engine attacks and wins whatever the human answers.
    let (c, out) = play(&["play", path(&fig2), "s", "u", "--side", "defender", "--horizon", "2"], &"0\n".repeat(20));
    assert_eq!(c, 0);
    assert!(out.contains("attacker plays"));
    assert!(out.trim_end().ends_with("attacker wins"), "{out}");
    // Against bisimilar states the engine defends to the horizon.
    let (c, out) = play(&["play", path(&fig2), "t1", "t2", "--side", "attacker", "--horizon", "2"], &"x\n0\n".repeat(20));
    assert_eq!(c, 0);
    assert!(out.contains("enter a number"));
    assert!(out.trim_end().ends_with("defender survives the horizon"), "{out}");
    let (c, out) = play(&["play", path(&fig2), "s", "u", "--side", "attacker", "--horizon", "3"], "");
    assert_eq!(c, 0);
    assert!(out.contains("play abandoned"));
    let ex21 = corpus("example21.ppda");
    let (c, out) = play(&["play", path(&ex21), "pXZ", "rX", "--side", "attacker", "--horizon", "2"], &"0\n".repeat(30));
    assert_eq!(c, 0);
    assert!(out.trim_end().ends_with("defender wins") || out.trim_end().ends_with("defender survives the horizon"), "{out}");
}
