//! Seeded random instance generators for tests, benchmarks and `gen`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::Dist;
use crate::gadgets::{AfaOp, OneLetterAfa, ReachGame};
use crate::machines::{ActionClass, Config, ControlId, HeadTarget, Ppda, PpdaBuilder, Stack, SymbolId};
use crate::plts::{Plts, PltsBuilder, StateId};
use crate::rational::Rational;
use crate::system::explore;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A distribution over the given items with small integer weights.
/// Repeated items merge.
pub fn random_dist<S: Ord + Clone, R: Rng>(rng: &mut R, items: Vec<S>) -> Dist<S> {
    let weights: Vec<i64> = items.iter().map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    Dist::new(
        items
            .into_iter()
            .zip(weights)
            .map(|(s, w)| (s, Rational::new(w, total))),
    )
    .expect("weights are positive and normalized")
}

#[derive(Clone, Debug)]
pub struct PltsParams {
    pub states: usize,
    pub actions: usize,
    pub max_support: usize,
    /// Chance that a given state has some transition under a given action.
    pub density: f64,
    /// Allow a second distribution for the same state and action.
    pub nondeterministic: bool,
}

impl Default for PltsParams {
    fn default() -> Self {
        PltsParams {
            states: 6,
            actions: 2,
            max_support: 3,
            density: 0.6,
            nondeterministic: true,
        }
    }
}

pub fn random_plts<R: Rng>(rng: &mut R, p: &PltsParams) -> Plts {
    let mut b = PltsBuilder::new();
    let states: Vec<StateId> = (0..p.states).map(|i| b.state(&format!("s{i}"))).collect();
    let actions: Vec<_> = (0..p.actions)
        .map(|i| b.action(&((b'a' + i as u8) as char).to_string()))
        .collect();
    for &s in &states {
        for &a in &actions {
            if !rng.gen_bool(p.density) {
                continue;
            }
            let count = if p.nondeterministic && rng.gen_bool(0.3) { 2 } else { 1 };
            for _ in 0..count {
                let k = rng.gen_range(1..=p.max_support.max(1));
                let targets = (0..k).map(|_| *states.choose(rng).unwrap()).collect();
                b.transition(s, a, random_dist(rng, targets));
            }
        }
    }
    b.build()
}

fn word<R: Rng>(rng: &mut R, syms: &[SymbolId], len: usize) -> Vec<SymbolId> {
    (0..len).map(|_| *syms.choose(rng).unwrap()).collect()
}

/// A pBPA in which every symbol enables at least one action. Targets are
/// biased towards short words so most symbols are normed.
pub fn random_bpa<R: Rng>(rng: &mut R, symbols: usize, actions: usize, max_support: usize) -> Ppda {
    let mut b = PpdaBuilder::new();
    let r = b.control("r");
    let syms: Vec<SymbolId> = (0..symbols).map(|i| b.symbol(&format!("X{i}"))).collect();
    let acts: Vec<_> = (0..actions)
        .map(|i| b.action(&((b'a' + i as u8) as char).to_string()))
        .collect();
    for &x in &syms {
        let mut used = acts.clone();
        used.shuffle(rng);
        let n = rng.gen_range(1..=acts.len());
        for &a in &used[..n] {
            let k = rng.gen_range(1..=max_support.max(1));
            let targets = (0..k)
                .map(|_| {
                    let len = *[0, 0, 1, 2].choose(rng).unwrap();
                    HeadTarget::new(r, word(rng, &syms, len))
                })
                .collect();
            b.rule(r, x, a, random_dist(rng, targets)).expect("valid rule");
        }
    }
    b.build()
}

/// A pOCA with stack symbols `I` and `Z`.
pub fn random_poca<R: Rng>(rng: &mut R, controls: usize, actions: usize) -> Ppda {
    let mut b = PpdaBuilder::new();
    let qs: Vec<ControlId> = (0..controls).map(|i| b.control(&format!("p{i}"))).collect();
    let i = b.symbol("I");
    let z = b.symbol("Z");
    let acts: Vec<_> = (0..actions)
        .map(|k| b.action(&((b'a' + k as u8) as char).to_string()))
        .collect();
    for &q in &qs {
        for (x, shapes) in [(i, vec![vec![], vec![i], vec![i, i]]), (z, vec![vec![z], vec![i, z]])] {
            for &a in &acts {
                if !rng.gen_bool(0.7) {
                    continue;
                }
                let k = rng.gen_range(1..=3);
                let targets = (0..k)
                    .map(|_| HeadTarget::new(*qs.choose(rng).unwrap(), shapes.choose(rng).unwrap().clone()))
                    .collect();
                b.rule(q, x, a, random_dist(rng, targets)).expect("valid rule");
            }
        }
    }
    b.build()
}

#[derive(Clone, Debug)]
pub struct VpdaInstance {
    pub machine: Ppda,
    pub left: Config,
    pub right: Config,
}

/// A pvPDA with one action per class and two configurations whose joint
/// reachable part has at most `budget` states. Generated by rejection.
pub fn random_finite_vpda<R: Rng>(rng: &mut R, controls: usize, symbols: usize, budget: usize) -> VpdaInstance {
    loop {
        let mut b = PpdaBuilder::new();
        let qs: Vec<ControlId> = (0..controls).map(|i| b.control(&format!("q{i}"))).collect();
        let syms: Vec<SymbolId> = (0..symbols).map(|i| b.symbol(&format!("X{i}"))).collect();
        let acts = [b.action("r"), b.action("i"), b.action("c")];
        b.set_classes(vec![ActionClass::Return, ActionClass::Internal, ActionClass::Call])
            .expect("three actions");
        for &q in &qs {
            for &x in &syms {
                for (k, &a) in acts.iter().enumerate() {
                    let p = [0.5, 0.5, 0.25][k];
                    if !rng.gen_bool(p) {
                        continue;
                    }
                    let n = rng.gen_range(1..=2);
                    let targets = (0..n)
                        .map(|_| HeadTarget::new(*qs.choose(rng).unwrap(), word(rng, &syms, k)))
                        .collect();
                    b.rule(q, x, a, random_dist(rng, targets)).expect("valid rule");
                }
            }
        }
        let m = b.build();
        let config = |rng: &mut R| {
            let len = rng.gen_range(1..=2);
            Config::new(*qs.choose(rng).unwrap(), Stack::from_top_first(&word(rng, &syms, len)))
        };
        let left = config(rng);
        let right = if rng.gen_bool(0.3) {
            Config::new(*qs.choose(rng).unwrap(), left.stack.clone())
        } else {
            config(rng)
        };
        if explore(&m, &[left.clone(), right.clone()], None, budget).is_ok() {
            return VpdaInstance { machine: m, left, right };
        }
    }
}

pub fn random_afa<R: Rng>(rng: &mut R, states: usize) -> OneLetterAfa {
    let names = (0..states).map(|i| format!("q{i}")).collect();
    let delta = (0..states)
        .map(|_| {
            let op = if rng.gen_bool(0.5) { AfaOp::And } else { AfaOp::Or };
            (op, rng.gen_range(0..states), rng.gen_range(0..states))
        })
        .collect();
    let accepting = (0..states).map(|_| rng.gen_bool(0.4)).collect();
    OneLetterAfa::new(names, delta, 0, accepting).expect("well-formed")
}

/// Every automaton with `states` states up to renaming and operand order,
/// with initial state `q0`.
pub fn all_afas(states: usize) -> Vec<OneLetterAfa> {
    let pairs: Vec<(usize, usize)> = (0..states).flat_map(|a| (a..states).map(move |b| (a, b))).collect();
    let choices: Vec<(AfaOp, usize, usize)> = [AfaOp::And, AfaOp::Or]
        .into_iter()
        .flat_map(|op| pairs.iter().map(move |&(a, b)| (op, a, b)))
        .collect();
    let perms = permutations(states);
    let key = |delta: &[(AfaOp, usize, usize)], acc: &[bool], perm: &[usize]| {
        // Relabel state i as perm[i] and read off a canonical vector.
        let mut d = vec![(0u8, 0usize, 0usize, false); states];
        for (i, &(op, a, b)) in delta.iter().enumerate() {
            let (x, y) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
            d[perm[i]] = (op as u8, x, y, acc[i]);
        }
        d
    };
    let total = choices.len().pow(states as u32) << states;
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let acc: Vec<bool> = (0..states)
            .map(|_| {
                let bit = c & 1 == 1;
                c >>= 1;
                bit
            })
            .collect();
        let delta: Vec<_> = (0..states)
            .map(|_| {
                let ch = choices[c % choices.len()];
                c /= choices.len();
                ch
            })
            .collect();
        let own = key(&delta, &acc, &perms[0]);
        if perms[1..].iter().any(|p| key(&delta, &acc, p) < own) {
            continue;
        }
        let names = (0..states).map(|i| format!("q{i}")).collect();
        out.push(OneLetterAfa::new(names, delta, 0, acc).expect("well-formed"));
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    // Identity first.
    out.sort();
    out
}

/// A reachability game whose reachable configuration graph has at most
/// `budget` states and never empties the stack. Generated by rejection.
pub fn random_reach_game<R: Rng>(rng: &mut R, controls: usize, symbols: usize, budget: usize) -> ReachGame {
    loop {
        let mut b = PpdaBuilder::new();
        let qs: Vec<ControlId> = (0..controls).map(|i| b.control(&format!("p{i}"))).collect();
        let syms: Vec<SymbolId> = (0..symbols).map(|i| b.symbol(&format!("X{i}"))).collect();
        let a = b.action("a");
        for &q in &qs {
            for &x in &syms {
                let roll: f64 = rng.gen();
                let lens: Vec<usize> = if roll < 0.2 {
                    vec![]
                } else if roll < 0.55 {
                    vec![*[0, 1, 1, 2].choose(rng).unwrap()]
                } else {
                    vec![1, 1]
                };
                for len in lens {
                    let t = HeadTarget::new(*qs.choose(rng).unwrap(), word(rng, &syms, len));
                    // A duplicate rule would merge; the game then has one rule.
                    let _ = b.rule(q, x, a, Dist::dirac(t));
                }
            }
        }
        let m = b.build();
        let owners = (0..controls).map(|_| rng.gen_bool(0.5)).collect();
        let init = Config::new(qs[0], Stack::from_top_first(&[syms[0]]));
        let Ok(frag) = explore(&m, std::slice::from_ref(&init), None, budget) else {
            continue;
        };
        if frag.states.iter().any(|c| c.stack.is_empty()) {
            continue;
        }
        if let Ok(g) = ReachGame::new(m, owners, init) {
            return g;
        }
    }
}
