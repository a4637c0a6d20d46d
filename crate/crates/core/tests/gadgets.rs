//! The AND/OR gadgets on random systems and both reductions checked
//! against their source problems.

mod common;

use common::corpus;
use pbisim_core::gadgets::{
    afa_to_poca, and_gadget, AfaOp, game_to_pvpda, or_gadget, prime, solve_reach_game_finite, OneLetterAfa, Player, ReachGame,
};
use pbisim_core::machines::ActionClass;
use pbisim_core::random::{all_afas, random_afa, random_plts, random_reach_game, rng, PltsParams};
use pbisim_core::system::explore;
use pbisim_core::{bisim_finite, full_equiv_finite, Config, PltsBuilder, StateId};
use rand::Rng;

#[test]
fn gadgets_on_random_systems() {
    let mut r = rng(51);
    let mut seen = [[0usize; 2]; 2];
    for trial in 0..1000 {
        let base = random_plts(
            &mut r,
            &PltsParams {
                states: 3 + trial % 4,
                actions: 1,
                max_support: 2,
                density: 0.8,
                nondeterministic: false,
            },
        );
        let classes = bisim_finite(&base);
        let k = base.num_states() as u32;
        let pick = |r: &mut rand_chacha::ChaCha8Rng| StateId(r.gen_range(0..k));
        let (t1, t2) = (pick(&mut r), pick(&mut r));
        // Reusing a state makes the equivalent case common enough.
        let t1p = if r.gen_bool(0.5) { t1 } else { pick(&mut r) };
        let t2p = if r.gen_bool(0.5) { t2 } else { pick(&mut r) };
        let eq = |x: StateId, y: StateId| classes.same_block(x, y);

        let mut b = PltsBuilder::from_plts(&base);
        let a = b.action("a");
        let and = r.gen_bool(0.5);
        let (s, s2) = (b.fresh_state("s").unwrap(), b.fresh_state("s_prime").unwrap());
        let expected = if and {
            if eq(t1, t2p) {
                continue;
            }
            and_gadget(&mut b, a, s, s2, t1, t1p, t2, t2p);
            eq(t1, t1p) && eq(t2, t2p)
        } else {
            or_gadget(&mut b, a, s, s2, t1, t1p, t2, t2p, "g").unwrap();
            eq(t1, t1p) || eq(t2, t2p)
        };
        let l = b.build();
        let got = bisim_finite(&l).same_block(s, s2);
        assert_eq!(got, expected, "trial {trial}");
        seen[and as usize][expected as usize] += 1;
    }
    assert!(seen.iter().flatten().all(|&c| c > 20), "{seen:?}");
}

/// Acceptance of the word of length `n` from `q`, by direct recursion.
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

/// Checks `qI^nZ ~ q_prime I^nZ ⇔ ¬Acc(q, n)` for all states and `n <= max`.
fn check_afa(afa: &OneLetterAfa, max: u64) -> Result<(), String> {
    let red = afa_to_poca(afa).map_err(|e| e.to_string())?;
    let mut roots: Vec<Config> = Vec::new();
    for q in &afa.states {
        for n in 0..=max {
            roots.push(red.config(q, n).unwrap());
            roots.push(red.config(&prime(q), n).unwrap());
        }
    }
    let f = explore(&red.machine, &roots, None, 200_000).map_err(|e| e.to_string())?;
    let p = bisim_finite(&f.plts);
    for (qi, q) in afa.states.iter().enumerate() {
        for n in 0..=max {
            let a = f.id(&red.config(q, n).unwrap()).unwrap();
            let b = f.id(&red.config(&prime(q), n).unwrap()).unwrap();
            if p.same_block(a, b) == accepts(afa, qi, n) {
                return Err(format!("{q} at n = {n}:\n{afa}"));
            }
        }
    }
    Ok(())
}

#[test]
fn afa_reduction_on_all_small_automata() {
    let mut count = 0;
    for states in 1..=3 {
        for afa in all_afas(states) {
            check_afa(&afa, 4).unwrap();
            count += 1;
        }
    }
    assert!(count > 1000, "{count}");
}

#[test]
fn afa_reduction_on_random_automata() {
    let mut r = rng(52);
    for i in 0..40 {
        check_afa(&random_afa(&mut r, 4 + i % 3), 5).unwrap();
    }
}

#[test]
fn example53_facts() {
    let afa = OneLetterAfa::parse(&corpus("example53.afa")).unwrap();
    let red = afa_to_poca(&afa).unwrap();
    let m = &red.machine;
    let eq = |q: &str, n: u64| {
        full_equiv_finite(m, &red.config(q, n).unwrap(), &red.config(&prime(q), n).unwrap(), 10_000).unwrap()
    };
    assert!(eq("q1", 0));
    assert!(!eq("q2", 0));
    assert!(!eq("q1", 1));
    assert!(eq("q0", 1));
    let rep = m.classify();
    assert!(rep.fully_probabilistic && rep.unary && rep.is_oca(), "{rep}");
}

/// Player 1's winning region by naive fixpoint iteration over the explicit
/// configuration graph.
fn naive_winner(g: &ReachGame) -> Player {
    let f = explore(&g.pda, std::slice::from_ref(&g.initial), None, 10_000).unwrap();
    let succ: Vec<Vec<usize>> = f
        .states
        .iter()
        .map(|c| {
            g.pda
                .step(c)
                .iter()
                .flat_map(|(_, d)| d.support().map(|t| f.id(t).unwrap().index()).collect::<Vec<_>>())
                .collect()
        })
        .collect();
    let mut win = vec![false; f.states.len()];
    loop {
        let mut changed = false;
        for i in 0..win.len() {
            if win[i] {
                continue;
            }
            let p1 = g.player1[f.states[i].control.index()];
            let now = succ[i].is_empty()
                || if p1 {
                    succ[i].iter().any(|&j| win[j])
                } else {
                    succ[i].iter().all(|&j| win[j])
                };
            if now {
                win[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if win[f.id(&g.initial).unwrap().index()] {
        Player::Player1
    } else {
        Player::Player0
    }
}

#[test]
fn game_reduction_matches_the_attractor() {
    let mut r = rng(53);
    let mut wins = [0usize; 2];
    for i in 0..100 {
        let g = random_reach_game(&mut r, 2 + i % 3, 1 + i % 2, 60);
        let winner = solve_reach_game_finite(&g, 1000).unwrap();
        assert_eq!(winner, naive_winner(&g));
        let red = game_to_pvpda(&g).unwrap();
        let m = &red.machine;
        let rep = m.classify();
        assert!(rep.vpda && rep.fully_probabilistic, "{rep}");
        let classes: Vec<ActionClass> = m.action_ids().map(|a| m.action_class(a).unwrap()).collect();
        assert_eq!(classes.len(), 3);
        for c in [ActionClass::Return, ActionClass::Internal, ActionClass::Call] {
            assert_eq!(classes.iter().filter(|&&x| x == c).count(), 1);
        }
        let bisimilar = full_equiv_finite(m, &red.left, &red.right, 100_000).unwrap();
        assert_eq!(bisimilar, winner == Player::Player0, "game {i}");
        wins[(winner == Player::Player0) as usize] += 1;
    }
    assert!(wins.iter().all(|&w| w >= 10), "{wins:?}");
}
