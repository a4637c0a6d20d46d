//! Acceptance suite: runs every primary criterion and prints one PASS/FAIL
//! line per criterion. Exits nonzero when any criterion fails.

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use pbisim_cli::args::Method;
use pbisim_cli::check::{check, Verdict};
use pbisim_cli::model::Model;
use pbisim_core::bpa::{congruence_check, norms, CongruenceReport, Norm};
use pbisim_core::format::{parse_config, parse_plts, parse_ppda, write_plts, write_ppda};
use pbisim_core::gadgets::{afa_to_poca, game_to_pvpda, prime, solve_reach_game_finite, AfaOp, OneLetterAfa, Player, ReachGame};
use pbisim_core::game::{attacker_wins_within, strategy_is_winning, Game};
use pbisim_core::machines::ActionClass;
use pbisim_core::oca::{CounterConfig, FilterVerdict, IncBound, Poca};
use pbisim_core::random::{
    all_afas, random_bpa, random_finite_vpda, random_plts, random_poca, random_reach_game, rng, PltsParams,
};
use pbisim_core::reduction::{ActionOrigin, FreshOrigin, StateOrigin};
use pbisim_core::system::explore;
use pbisim_core::vpda::{force_long, vpda_decide, HeadPair};
use pbisim_core::{
    bisim_finite, bounded_equiv, full_equiv_finite, lift_plts, lift_ppda_stack, sim_n, Config, Oracle, Partition, Plts,
    PltsBuilder, Ppda, Stack, StateId, SymbolId,
};
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap()
}

fn fig2() -> Plts {
    parse_plts(&corpus("fig2.plts")).unwrap()
}

fn ppda(name: &str) -> Ppda {
    parse_ppda(&corpus(name)).unwrap()
}

fn names(p: &Partition, l: &Plts) -> BTreeSet<BTreeSet<String>> {
    p.blocks()
        .iter()
        .map(|b| b.iter().map(|&s| l.state_name(s).to_string()).collect())
        .collect()
}

// Four-state example: classes and the first two approximants.
fn fig2_goldens() -> Outcome {
    let l = fig2();
    let id = |n: &str| l.state_id(n).unwrap();
    let expected: BTreeSet<BTreeSet<String>> = [vec!["s"], vec!["t1", "t2"], vec!["u"]]
        .iter()
        .map(|g| g.iter().map(|s| s.to_string()).collect())
        .collect();
    ensure!(names(&bisim_finite(&l), &l) == expected, "classes differ");
    ensure!(sim_n(&l, 1).same_block(id("s"), id("u")), "sim_1 splits s, u");
    ensure!(!sim_n(&l, 2).same_block(id("s"), id("u")), "sim_2 merges s, u");
    ensure!(bounded_equiv(&l, &id("s"), &id("u"), 1) && !bounded_equiv(&l, &id("s"), &id("u"), 2), "oracle disagrees");
    Ok("classes {s},{t1,t2},{u}; s ~_1 u, s !~_2 u".into())
}

// ~_n on L equals ~_3n on the lift.
fn lift_master_property() -> Outcome {
    let mut r = rng(2024);
    let mut pairs = 0usize;
    for i in 0..500 {
        let p = PltsParams {
            states: 1 + r.gen_range(0..7),
            actions: 1 + r.gen_range(0..3),
            max_support: 3,
            ..PltsParams::default()
        };
        let l = random_plts(&mut r, &p);
        let lifted = lift_plts(&l);
        for n in 0..=4 {
            let o = Oracle::new(&l);
            let q = sim_n(&lifted.plts, 3 * n);
            for s in l.states() {
                for t in l.states() {
                    pairs += 1;
                    ensure!(
                        o.equiv(&s, &t, n) == q.same_block(s, t),
                        "system {i}, {} vs {} at n = {n}:\n{}",
                        l.state_name(s),
                        l.state_name(t),
                        write_plts(&l)
                    );
                }
            }
        }
    }
    Ok(format!("500 systems, {pairs} pair/level checks, 0 failures"))
}

fn canonical_state(l: &Plts, o: &StateOrigin) -> String {
    match o {
        StateOrigin::Original(s) => l.state_name(*s).to_string(),
        StateOrigin::Dist(d) => {
            let mut parts: Vec<String> = d.entries().iter().map(|(s, w)| format!("{w} {}", l.state_name(*s))).collect();
            parts.sort();
            format!("({})", parts.join(" + "))
        }
        StateOrigin::Subset(t) => {
            let mut parts: Vec<&str> = t.iter().map(|s| l.state_name(*s)).collect();
            parts.sort();
            format!("{{{}}}", parts.join(","))
        }
    }
}

// The lifted four-state example, edge by edge.
fn fig3_golden() -> Outcome {
    let l = fig2();
    let lifted = lift_plts(&l);
    let lp = &lifted.plts;
    let name = |s: StateId| canonical_state(&l, &lifted.state_origin[s.index()]);
    let label = |a: pbisim_core::ActionId| match &lifted.action_origin[a.index()] {
        ActionOrigin::Original(a) => l.action_name(*a).to_string(),
        ActionOrigin::Prob(rho) => rho.to_string(),
        ActionOrigin::Hash => "#".to_string(),
    };
    let mut actual = BTreeSet::new();
    for t in lp.transitions() {
        ensure!(t.target.is_dirac(), "lifted transition is not Dirac");
        actual.insert((name(t.source), label(t.action), name(*t.target.support().next().unwrap())));
    }
    let (d1, d2, dt1, dt2) = ("(1/2 t1 + 1/2 u)", "(1/3 t1 + 2/3 t2)", "(1 t1)", "(1 t2)");
    let all = ["1/3", "1/2", "2/3", "1"];
    let mut expected = BTreeSet::new();
    let mut add = |a: &str, l: &str, b: &str| {
        expected.insert((a.to_string(), l.to_string(), b.to_string()));
    };
    for (a, l, b) in [("s", "b", d1), ("s", "a", d2), ("u", "b", d2), ("u", "a", dt1), ("t2", "a", dt1), ("t2", "a", dt2), ("t1", "a", dt2)] {
        add(a, l, b);
    }
    let prob_edges: [(&str, &[&str], &str); 8] = [
        (d1, &all, "{t1,u}"),
        (d1, &all[..2], "{u}"),
        (d1, &all[..2], "{t1}"),
        (d2, &all[..1], "{t1}"),
        (d2, &all[..3], "{t2}"),
        (d2, &all, "{t1,t2}"),
        (dt1, &all, "{t1}"),
        (dt2, &all, "{t2}"),
    ];
    for (d, rhos, t) in prob_edges {
        for rho in rhos {
            add(d, rho, t);
        }
    }
    for (t, members) in [("{t1,u}", &["t1", "u"][..]), ("{u}", &["u"]), ("{t1}", &["t1"]), ("{t2}", &["t2"]), ("{t1,t2}", &["t1", "t2"])] {
        for m in members {
            add(t, "#", m);
        }
    }
    ensure!(actual == expected, "edge sets differ: {:?}", actual.symmetric_difference(&expected).collect::<Vec<_>>());
    ensure!(lp.num_states() == 13, "{} states", lp.num_states());
    let (s, u) = (l.state_id("s").unwrap(), l.state_id("u").unwrap());
    ensure!(sim_n(lp, 3).same_block(s, u), "s !~_3 u in the lift");
    ensure!(!sim_n(lp, 4).same_block(s, u), "s ~_4 u in the lift");
    Ok(format!("{} edges, 13 states; s ~_3 u, s !~_4 u", actual.len()))
}

fn canonical_symbol(m: &Ppda, origin: &[Option<FreshOrigin>], x: SymbolId, lifted: &Ppda) -> String {
    match &origin[x.index()] {
        None => lifted.symbol_name(x).to_string(),
        Some(FreshOrigin::Dist(d)) => {
            let mut parts: Vec<String> = d.entries().iter().map(|(t, w)| format!("{w} {}", m.head_target_name(t))).collect();
            parts.sort();
            format!("<{}>", parts.join(" + "))
        }
        Some(FreshOrigin::Subset(t)) => {
            let mut parts: Vec<String> = t.iter().map(|t| m.head_target_name(t)).collect();
            parts.sort();
            format!("<{{{}}}>", parts.join(","))
        }
    }
}

// Stack lift of the two-control example, rule by rule.
fn fig5_rules() -> Outcome {
    let m = ppda("example42.ppda");
    let lifted = lift_ppda_stack(&m).map_err(|e| e.to_string())?;
    let lp = &lifted.ppda;
    ensure!(lp.controls() == m.controls(), "control states changed");
    let sym = |x| canonical_symbol(&m, &lifted.symbol_origin, x, lp);
    let mut actual = BTreeSet::new();
    for rule in lp.rules() {
        ensure!(rule.target.is_dirac(), "lifted rule is not Dirac");
        let (t, _) = &rule.target.entries()[0];
        let push: Vec<String> = t.push.iter().map(|&x| sym(x)).collect();
        let text = format!(
            "{} {} -{}-> {} {}",
            lp.control_name(rule.control),
            sym(rule.symbol),
            lp.action_name(rule.action),
            lp.control_name(t.control),
            push.join(" ")
        );
        actual.insert(text.trim_end().to_string());
    }
    let (da, db, dc, dd) = ("<1/3 q + 2/3 pYX>", "<1/3 p + 2/3 pX>", "<1 qY>", "<1 pXY>");
    let mut expected: BTreeSet<String> = [
        format!("p X -a-> p {da}"),
        format!("q Y -a-> p {db}"),
        format!("p Y -b-> p {dc}"),
        format!("q Y -a-> p {dd}"),
    ]
    .into_iter()
    .collect();
    let rho_rules: [(&str, &str, &[&str]); 8] = [
        (da, "<{pYX,q}>", &["1", "2/3", "1/3"]),
        (da, "<{q}>", &["1/3"]),
        (da, "<{pYX}>", &["2/3", "1/3"]),
        (db, "<{p,pX}>", &["1", "2/3", "1/3"]),
        (db, "<{p}>", &["1/3"]),
        (db, "<{pX}>", &["2/3", "1/3"]),
        (dc, "<{qY}>", &["1", "2/3", "1/3"]),
        (dd, "<{pXY}>", &["1", "2/3", "1/3"]),
    ];
    for (d, t, rhos) in rho_rules {
        for rho in rhos {
            expected.insert(format!("p {d} -{rho}-> p {t}"));
        }
    }
    for (t, targets) in [
        ("<{pYX,q}>", &["q", "p Y X"][..]),
        ("<{q}>", &["q"]),
        ("<{pYX}>", &["p Y X"]),
        ("<{p,pX}>", &["p", "p X"]),
        ("<{p}>", &["p"]),
        ("<{pX}>", &["p X"]),
        ("<{qY}>", &["q Y"]),
        ("<{pXY}>", &["p X Y"]),
    ] {
        for target in targets {
            expected.insert(format!("p {t} -#-> {target}"));
        }
    }
    ensure!(actual.len() == lp.rules().len(), "duplicate rules");
    ensure!(actual == expected, "rule sets differ: {:?}", actual.symmetric_difference(&expected).collect::<Vec<_>>());
    Ok(format!("{} rules, set-equal", actual.len()))
}

/// The declared bisimulation classes of the three-control example.
fn declared_class(m: &Ppda, c: &Config) -> Option<(bool, usize)> {
    let word: Vec<&str> = c.stack.to_vec().iter().rev().map(|&x| m.symbol_name(x)).collect();
    let xs = |w: &[&str]| w.iter().all(|s| *s == "X" || *s == "X'");
    match (m.control_name(c.control), word.as_slice()) {
        ("p", [w @ .., "Z"]) if w.iter().all(|s| *s == "X") => Some((false, w.len())),
        ("q", [w @ .., "Z"]) if w.len() >= 2 && w.iter().all(|s| *s == "X") => Some((true, w.len() - 1)),
        ("r", w) if xs(w) => Some((false, w.len())),
        ("r", ["Y", w @ ..]) if !w.is_empty() && xs(w) => Some((true, w.len())),
        _ => None,
    }
}

fn example21() -> Outcome {
    let m = ppda("example21.ppda");
    let cfg = |s: &str| parse_config(&m, s).unwrap();
    for n in 0..=6 {
        ensure!(bounded_equiv(&m, &cfg("pXZ"), &cfg("rX"), n), "pXZ !~_{n} rX");
    }
    let depth = 7;
    let roots: Vec<Config> = ["pXZ", "rX", "pXXZ", "rXX", "rX'X", "qXXZ", "rYX'"].iter().map(|s| cfg(s)).collect();
    let f = m.reachable_fragment(&roots, depth, 200_000).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for n in 1..=4 {
        let p = sim_n(&f.plts, n);
        let usable: Vec<usize> = (0..f.states.len()).filter(|&i| f.levels[i] + n <= depth).collect();
        for &i in &usable {
            for &j in usable.iter().filter(|&&j| j > i) {
                let (ci, cj) = (&f.states[i], &f.states[j]);
                if let (Some(a), Some(b)) = (declared_class(&m, ci), declared_class(&m, cj)) {
                    if a == b {
                        checked += 1;
                        ensure!(
                            p.same_block(StateId(i as u32), StateId(j as u32)),
                            "{} vs {} at n = {n}",
                            m.config_name(ci),
                            m.config_name(cj)
                        );
                    }
                }
            }
        }
    }
    ensure!(checked >= 40, "only {checked} related pairs");
    Ok(format!("pXZ ~_n rX for n <= 6; {checked} declared-class pairs respected"))
}

fn pvpda() -> Outcome {
    let m = ppda("example46.ppda");
    let c = |s: &str| m.control_id(s).unwrap();
    let x = m.symbol_id("X").unwrap();
    let hp = HeadPair::new(c("p"), x, c("p'"), x);
    let target: BTreeSet<_> = [(c("q"), c("q'"))].into_iter().collect();
    ensure!(force_long(&m, hp, &target).map_err(|e| e.to_string())?, "(pX,p'X) does not force {{(q,q')}}");
    ensure!(force_long(&m, hp, &BTreeSet::new()).map_err(|e| e.to_string())?, "(pX,p'X) does not force the empty set");
    let (px, ppx) = (parse_config(&m, "pX").unwrap(), parse_config(&m, "p'X").unwrap());
    ensure!(!vpda_decide(&m, &px, &ppx).map_err(|e| e.to_string())?, "pX ~ p'X claimed");

    let mut r = rng(46);
    let mut negatives = 0;
    for i in 0..200 {
        let inst = random_finite_vpda(&mut r, 2 + i % 3, 2, 80);
        let m = &inst.machine;
        let verdict = vpda_decide(m, &inst.left, &inst.right).map_err(|e| e.to_string())?;
        let truth = full_equiv_finite(m, &inst.left, &inst.right, 10_000).map_err(|e| e.to_string())?;
        ensure!(verdict == truth, "instance {i} disagrees:\n{}", write_ppda(m));
        negatives += usize::from(!verdict);
    }
    Ok(format!("worked example reproduced; 200 instances, 0 disagreements ({negatives} negative)"))
}

fn disjoint_union(a: &Plts, b: &Plts) -> (Plts, u32) {
    let mut out = PltsBuilder::new();
    for s in a.states() {
        out.state(&format!("L.{}", a.state_name(s)));
    }
    let off = a.num_states() as u32;
    for s in b.states() {
        out.state(&format!("R.{}", b.state_name(s)));
    }
    for (l, shift) in [(a, 0), (b, off)] {
        for t in l.transitions() {
            let act = out.action(l.action_name(t.action));
            out.transition(StateId(t.source.0 + shift), act, t.target.map(|s| StateId(s.0 + shift)));
        }
    }
    (out.build(), off)
}

fn counter_config(m: &Ppda, c: CounterConfig) -> Config {
    let roles = m.require_oca().unwrap();
    let mut s = Stack::empty();
    s.push(roles.z);
    s.push_run(roles.i, c.counter);
    Config::new(c.control, s)
}

fn brute_inc(p: &Poca<'_>, max_counter: u64) -> BTreeSet<CounterConfig> {
    let m = p.machine();
    let k = p.k();
    let mut out = BTreeSet::new();
    for q in m.control_ids() {
        for c in 0..=max_counter {
            let cc = CounterConfig::new(q, c);
            let f = m.reachable_fragment(&[counter_config(m, cc)], k, 1_000_000).unwrap();
            let (u, off) = disjoint_union(&f.plts, p.underlying());
            let part = sim_n(&u, k);
            let root = f.id(&counter_config(m, cc)).unwrap();
            if !p.underlying().states().any(|s| part.same_block(root, StateId(s.0 + off))) {
                out.insert(cc);
            }
        }
    }
    out
}

fn poca() -> Outcome {
    let mut r = rng(21);
    let machines: Vec<Ppda> = (0..100).map(|i| random_poca(&mut r, 1 + i % 4, 1 + i % 2)).collect();
    let mut confirmed = 0;
    for (i, m) in machines.iter().enumerate() {
        let p = Poca::new(m).map_err(|e| e.to_string())?;
        let k = p.k() as u64;
        ensure!(p.inc_set(IncBound::Tight) == brute_inc(&p, k + 2), "INC differs on machine {i}:\n{}", write_ppda(m));

        let u = p.underlying();
        let full = bisim_finite(u);
        ensure!(sim_n(u, p.k().saturating_sub(1)) == full, "machine {i}: no stabilization at k - 1");

        let o = Oracle::new(m);
        let configs: Vec<CounterConfig> = m.control_ids().flat_map(|q| (0..=k + 2).map(move |c| CounterConfig::new(q, c))).collect();
        for (j, &a) in configs.iter().enumerate() {
            for &b in &configs[j..] {
                if let FilterVerdict::NotBisimilar { .. } = p.not_bisim_filter(a, b, 8) {
                    let level = o.distinguishing_level(&counter_config(m, a), &counter_config(m, b), 30);
                    ensure!(level.is_some(), "machine {i}: filter verdict {a:?} vs {b:?} unconfirmed");
                    confirmed += 1;
                }
            }
        }
    }
    Ok(format!("INC exact on 100 machines; {confirmed} filter verdicts confirmed; stabilization at k - 1"))
}

fn random_word<R: Rng>(r: &mut R, syms: &[SymbolId]) -> Vec<SymbolId> {
    let len = r.gen_range(0..=3);
    (0..len).map(|_| *syms.choose(r).unwrap()).collect()
}

fn pbpa() -> Outcome {
    let m = ppda("example21_bpa.ppda");
    let t = norms(&m).map_err(|e| e.to_string())?;
    for (s, n) in [("X", 1u32), ("X'", 1), ("Y", 3)] {
        ensure!(*t.norm(m.symbol_id(s).unwrap()) == Norm::Finite(n.into()), "norm of {s}");
    }
    let mut r = rng(33);
    let mut nontrivial = 0;
    for i in 0..1000 {
        let m = random_bpa(&mut r, 2 + i % 2, 1 + i % 2, 2);
        let syms: Vec<SymbolId> = m.symbol_ids().collect();
        let alpha = random_word(&mut r, &syms);
        let alpha2 = if r.gen_bool(0.3) { alpha.clone() } else { random_word(&mut r, &syms) };
        let beta = random_word(&mut r, &syms);
        let beta2 = if r.gen_bool(0.3) { beta.clone() } else { random_word(&mut r, &syms) };
        let n = r.gen_range(0..=3);
        match congruence_check(&m, &alpha, &alpha2, &beta, &beta2, n).map_err(|e| e.to_string())? {
            CongruenceReport::Checked {
                left_premise,
                right_premise,
                holds,
                ..
            } => {
                ensure!(holds, "trial {i} fails");
                if left_premise && right_premise && (alpha != alpha2 || beta != beta2) && n > 0 {
                    nontrivial += 1;
                }
            }
            CongruenceReport::Skipped { reason } => return Err(format!("trial {i} skipped: {reason}")),
        }
    }
    Ok(format!("norms X=1, X'=1, Y=3; 1000 congruence trials ({nontrivial} with both premises), 0 failures"))
}

fn accepts(afa: &OneLetterAfa, q: usize, n: u64) -> bool {
    if n == 0 {
        return afa.accepting[q];
    }
    let (op, a, b) = afa.delta[q];
    match op {
        AfaOp::And => accepts(afa, a, n - 1) && accepts(afa, b, n - 1),
        AfaOp::Or => accepts(afa, a, n - 1) || accepts(afa, b, n - 1),
    }
}

fn afa_reduction() -> Outcome {
    let mut count = 0;
    for states in 1..=3 {
        for afa in all_afas(states) {
            let red = afa_to_poca(&afa).map_err(|e| e.to_string())?;
            let mut roots = Vec::new();
            for q in &afa.states {
                for n in 0..=4 {
                    roots.push(red.config(q, n).unwrap());
                    roots.push(red.config(&prime(q), n).unwrap());
                }
            }
            let f = explore(&red.machine, &roots, None, 200_000).map_err(|e| e.to_string())?;
            let p = bisim_finite(&f.plts);
            for (qi, q) in afa.states.iter().enumerate() {
                for n in 0..=4 {
                    let a = f.id(&red.config(q, n).unwrap()).unwrap();
                    let b = f.id(&red.config(&prime(q), n).unwrap()).unwrap();
                    ensure!(p.same_block(a, b) != accepts(&afa, qi, n), "{q} at n = {n}:\n{afa}");
                }
            }
            count += 1;
        }
    }
    let afa = OneLetterAfa::parse(&corpus("example53.afa")).map_err(|e| e.to_string())?;
    let red = afa_to_poca(&afa).map_err(|e| e.to_string())?;
    let eq = |q: &str, n: u64| full_equiv_finite(&red.machine, &red.config(q, n).unwrap(), &red.config(&prime(q), n).unwrap(), 10_000).unwrap();
    ensure!(eq("q1", 0), "q1Z !~ q1'Z");
    ensure!(!eq("q2", 0), "q2Z ~ q2'Z");
    ensure!(!eq("q1", 1), "q1IZ ~ q1'IZ");
    ensure!(eq("q0", 1), "q0IZ !~ q0'IZ");
    Ok(format!("{count} automata exhaustively, n <= 4; worked example facts reproduced"))
}

fn naive_winner(g: &ReachGame) -> Player {
    let f = explore(&g.pda, std::slice::from_ref(&g.initial), None, 10_000).unwrap();
    let succ: Vec<Vec<usize>> = f
        .states
        .iter()
        .map(|c| g.pda.step(c).iter().flat_map(|(_, d)| d.support().map(|t| f.id(t).unwrap().index()).collect::<Vec<_>>()).collect())
        .collect();
    let mut win = vec![false; f.states.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..win.len() {
            let now = succ[i].is_empty()
                || if g.player1[f.states[i].control.index()] {
                    succ[i].iter().any(|&j| win[j])
                } else {
                    succ[i].iter().all(|&j| win[j])
                };
            if now && !win[i] {
                win[i] = true;
                changed = true;
            }
        }
    }
    if win[f.id(&g.initial).unwrap().index()] {
        Player::Player1
    } else {
        Player::Player0
    }
}

fn game_reduction() -> Outcome {
    let mut r = rng(53);
    let mut wins = [0usize; 2];
    for i in 0..100 {
        let g = random_reach_game(&mut r, 2 + i % 3, 1 + i % 2, 60);
        let winner = solve_reach_game_finite(&g, 1000).map_err(|e| e.to_string())?;
        ensure!(winner == naive_winner(&g), "game {i}: attractor disagrees with fixpoint");
        let red = game_to_pvpda(&g).map_err(|e| e.to_string())?;
        let m = &red.machine;
        let rep = m.classify();
        ensure!(rep.vpda && rep.fully_probabilistic, "game {i}: {rep}");
        let classes: Vec<ActionClass> = m.action_ids().map(|a| m.action_class(a).unwrap()).collect();
        for c in [ActionClass::Return, ActionClass::Internal, ActionClass::Call] {
            ensure!(classes.iter().filter(|&&x| x == c).count() == 1, "game {i}: class sizes {classes:?}");
        }
        let bisimilar = full_equiv_finite(m, &red.left, &red.right, 100_000).map_err(|e| e.to_string())?;
        ensure!(bisimilar == (winner == Player::Player0), "game {i}: verdict differs from the winner");
        wins[(winner == Player::Player0) as usize] += 1;
    }
    Ok(format!("100 games ({} won by player 0), all verdicts match", wins[1]))
}

fn game_solver() -> Outcome {
    let mut g = rng(1);
    let mut strategies = 0;
    for i in 0..60 {
        let p = PltsParams {
            states: 1 + i % 6,
            actions: 1 + i % 2,
            max_support: 3,
            ..PltsParams::default()
        };
        let l = random_plts(&mut g, &p);
        let game = Game::new(Arc::new(l.clone()));
        for n in 0..=4 {
            let part = sim_n(&l, n);
            for s in l.states() {
                for t in l.states() {
                    let (wins, strategy) = attacker_wins_within(&l, s, t, n);
                    ensure!(wins == !part.same_block(s, t), "system {i}: {} vs {} at n = {n}", l.state_name(s), l.state_name(t));
                    ensure!(wins == strategy.is_some(), "strategy missing");
                    if let Some(st) = strategy {
                        ensure!(strategy_is_winning(&game, s, t, &st), "system {i}: strategy loses");
                        strategies += 1;
                    }
                }
            }
        }
    }
    Ok(format!("60 systems, n <= 4; {strategies} strategies win against every Defender play"))
}

fn verdict_of(model: &Model, l: &str, r: &str, method: Method, n: Option<usize>) -> Result<Verdict, String> {
    check(model, l, r, method, n, 20_000).map(|rep| rep.verdict).map_err(|e| e.to_string())
}

fn cli() -> Outcome {
    // Round trip over the corpus.
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    for f in &files {
        let m = Model::load(f).map_err(|e| e.to_string())?;
        let text = match &m {
            Model::Plts(l) => write_plts(l),
            Model::Ppda(p) => write_ppda(p),
            Model::Afa(a) => a.to_string(),
        };
        let again = Model::parse(&text).map_err(|e| format!("{}: {e}", f.display()))?;
        let same = match (&m, &again) {
            (Model::Plts(a), Model::Plts(b)) => a == b,
            (Model::Ppda(a), Model::Ppda(b)) => a == b,
            (Model::Afa(a), Model::Afa(b)) => a == b,
            _ => false,
        };
        ensure!(same, "{} does not round-trip", f.display());
    }

    // Exit codes through the binary.
    let bin = env!("CARGO_BIN_EXE_pbisim");
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    let file = |n: &str| corpus_dir().join(n).to_string_lossy().into_owned();
    let cases: [(Vec<String>, i32); 6] = [
        (vec!["check".into(), file("fig2.plts"), "t1".into(), "t2".into()], 0),
        (vec!["check".into(), file("fig2.plts"), "s".into(), "u".into()], 1),
        (vec!["check".into(), file("example21.ppda"), "pXZ".into(), "rX".into(), "--method".into(), "bounded".into(), "--n".into(), "4".into()], 2),
        (vec!["check".into(), file("fig2.plts"), "s".into(), "zz".into()], 3),
        (vec!["check".into(), file("example21.ppda"), "pXZ".into(), "rX".into(), "--method".into(), "finite".into(), "--budget".into(), "20".into()], 4),
        (vec!["validate".into(), file("example42.ppda")], 0),
    ];
    for (args, want) in &cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        ensure!(run(&args) == Some(*want), "{args:?} exited {:?}, expected {want}", run(&args));
    }

    // Auto against the per-method procedures.
    let mut compared = 0;
    let mut r = rng(12);
    for _ in 0..40 {
        let l = random_plts(&mut r, &PltsParams { states: 5, ..PltsParams::default() });
        let model = Model::Plts(l.clone());
        let full = bisim_finite(&l);
        for s in l.states() {
            for t in l.states() {
                let (a, b) = (l.state_name(s), l.state_name(t));
                let auto = verdict_of(&model, a, b, Method::Auto, None)?;
                ensure!(auto == verdict_of(&model, a, b, Method::Finite, None)?, "plts auto vs finite");
                ensure!(matches!(auto, Verdict::Bisimilar) == full.same_block(s, t), "plts auto vs refinement");
                if let Verdict::NotBisimilar { level: Some(k) } = auto {
                    ensure!(
                        verdict_of(&model, a, b, Method::Bounded, Some(k))? == auto,
                        "plts auto level vs bounded"
                    );
                }
                compared += 1;
            }
        }
    }
    for i in 0..30 {
        let inst = random_finite_vpda(&mut r, 2 + i % 3, 2, 80);
        let (a, b) = (inst.machine.config_name(&inst.left), inst.machine.config_name(&inst.right));
        let model = Model::Ppda(inst.machine);
        let auto = verdict_of(&model, &a, &b, Method::Auto, None)?;
        let vpda = verdict_of(&model, &a, &b, Method::Vpda, None)?;
        let finite = verdict_of(&model, &a, &b, Method::Finite, None)?;
        let same = |x: &Verdict, y: &Verdict| matches!(x, Verdict::Bisimilar) == matches!(y, Verdict::Bisimilar);
        ensure!(same(&auto, &vpda) && same(&auto, &finite), "vpda instance {i}: auto {auto:?}, vpda {vpda:?}, finite {finite:?}");
        compared += 1;
    }
    let ex46 = Model::Ppda(ppda("example46.ppda"));
    ensure!(
        verdict_of(&ex46, "pX", "p'X", Method::Auto, None)? == verdict_of(&ex46, "pX", "p'X", Method::Vpda, None)?,
        "infinite vpda: auto vs vpda"
    );
    let oca = ppda("example21_oca.ppda");
    let model = Model::Ppda(oca.clone());
    for (a, b) in [("p X^5 Z", "q X^3 Z"), ("p X Z", "q X X Z"), ("p Z", "q Z")] {
        let auto = verdict_of(&model, a, b, Method::Auto, Some(8))?;
        let filt = verdict_of(&model, a, b, Method::OcaFilter, None)?;
        let bounded = verdict_of(&model, a, b, Method::Bounded, Some(8))?;
        let expected = if matches!(filt, Verdict::NotBisimilar { .. }) { filt } else { bounded };
        ensure!(
            matches!(auto, Verdict::NotBisimilar { .. }) == matches!(expected, Verdict::NotBisimilar { .. }),
            "oca {a} vs {b}: auto {auto:?}"
        );
        compared += 1;
    }
    Ok(format!("{} corpus files round-trip; {} exit codes; {compared} auto comparisons", files.len(), cases.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("four-state pLTS goldens", fig2_goldens),
        ("lift master property", lift_master_property),
        ("lifted four-state pLTS golden", fig3_golden),
        ("stack lift rule set", fig5_rules),
        ("three-control pPDA bounded equivalence and classes", example21),
        ("pvPDA decision procedure", pvpda),
        ("pOCA INC, filter and stabilization", poca),
        ("pBPA norms and congruence", pbpa),
        ("AFA to pOCA reduction", afa_reduction),
        ("reachability game to pvPDA reduction", game_reduction),
        ("game/solver agreement and strategies", game_solver),
        ("CLI round trip, exit codes and auto", cli),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let total = Instant::now();
    let mut timings = HashMap::new();
    for (name, f) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        timings.insert(name, secs);
        match result {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} ({secs:.1}s)");
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        timings.len() - failed,
        timings.len(),
        total.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
