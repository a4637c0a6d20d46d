//! Instance generators with known answers: the AND/OR gadgets, the
//! reduction from one-letter alternating automata to fully probabilistic
//! unary pOCA, and the reduction from pushdown reachability games to fully
//! probabilistic pvPDA.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::machines::{ActionClass, Config, ControlId, HeadTarget, Ppda, PpdaBuilder, Stack, SymbolId};
use crate::plts::{ActionId, PltsBuilder, StateId};
use crate::rational::Rational;
use crate::system::explore;

fn half() -> Rational {
    Rational::new(1, 2)
}

fn uniform<S: Ord + Clone>(a: S, b: S) -> Dist<S> {
    Dist::new([(a, half()), (b, half())]).expect("two halves sum to one")
}

/// Wires `s -a-> t1 | t2` and `s' -a-> t1' | t2'`. The caller guarantees
/// `t1 ≁ t2'`; then `s ~ s'` iff `t1 ~ t1'` and `t2 ~ t2'`.
#[allow(clippy::too_many_arguments)]
pub fn and_gadget(
    b: &mut PltsBuilder,
    a: ActionId,
    s: StateId,
    s2: StateId,
    t1: StateId,
    t1p: StateId,
    t2: StateId,
    t2p: StateId,
) {
    b.transition(s, a, uniform(t1, t2));
    b.transition(s2, a, uniform(t1p, t2p));
}

/// Wires the four intermediate states `u12, u1'2', u12', u1'2` (named after
/// `s`) so that `s ~ s'` iff `t1 ~ t1'` or `t2 ~ t2'`. Returns them in
/// that order.
#[allow(clippy::too_many_arguments)]
pub fn or_gadget(
    b: &mut PltsBuilder,
    a: ActionId,
    s: StateId,
    s2: StateId,
    t1: StateId,
    t1p: StateId,
    t2: StateId,
    t2p: StateId,
    prefix: &str,
) -> Result<[StateId; 4]> {
    let u12 = b.fresh_state(&format!("{prefix}_u12"))?;
    let u1p2p = b.fresh_state(&format!("{prefix}_u1p2p"))?;
    let u12p = b.fresh_state(&format!("{prefix}_u12p"))?;
    let u1p2 = b.fresh_state(&format!("{prefix}_u1p2"))?;
    b.transition(s, a, uniform(u12, u1p2p));
    b.transition(s2, a, uniform(u12p, u1p2));
    b.transition(u12, a, uniform(t1, t2));
    b.transition(u1p2p, a, uniform(t1p, t2p));
    b.transition(u12p, a, uniform(t1, t2p));
    b.transition(u1p2, a, uniform(t1p, t2));
    Ok([u12, u1p2p, u12p, u1p2])
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AfaOp {
    And,
    Or,
}

/// A one-letter alternating finite automaton.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct OneLetterAfa {
    pub states: Vec<String>,
    /// `delta[q] = (op, q1, q2)`.
    pub delta: Vec<(AfaOp, usize, usize)>,
    pub initial: usize,
    pub accepting: Vec<bool>,
}

impl OneLetterAfa {
    pub fn new(states: Vec<String>, delta: Vec<(AfaOp, usize, usize)>, initial: usize, accepting: Vec<bool>) -> Result<Self> {
        let n = states.len();
        if n == 0 || delta.len() != n || accepting.len() != n || initial >= n {
            return Err(Error::invalid("automaton needs one transition and one acceptance flag per state"));
        }
        if delta.iter().any(|&(_, a, b)| a >= n || b >= n) {
            return Err(Error::invalid("transition refers to an unknown state"));
        }
        let mut seen = HashSet::new();
        if !states.iter().all(|s| seen.insert(s.as_str())) {
            return Err(Error::invalid("duplicate state name"));
        }
        Ok(OneLetterAfa {
            states,
            delta,
            initial,
            accepting,
        })
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    /// `acc[n][q]` for `n <= max`.
    pub fn acc_table(&self, max: usize) -> Vec<Vec<bool>> {
        let mut rows = vec![self.accepting.clone()];
        for _ in 0..max {
            let prev = rows.last().unwrap();
            let next = self
                .delta
                .iter()
                .map(|&(op, a, b)| match op {
                    AfaOp::And => prev[a] && prev[b],
                    AfaOp::Or => prev[a] || prev[b],
                })
                .collect();
            rows.push(next);
        }
        rows
    }

    /// Does the automaton started in `q` accept the word of length `n`?
    pub fn acc(&self, q: usize, n: usize) -> bool {
        self.acc_table(n)[n][q]
    }

    /// Parses
    ///
    /// ```text
    /// afa
    /// states: q0 q1 q2
    /// initial: q0
    /// accepting: q2
    /// q0 = q1 & q2
    /// q1 = q1 | q2
    /// q2 = q1 | q1
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let syntax = |line: usize, message: String| Error::Syntax {
            at: crate::error::Location { line, column: 1 },
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split("//").next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, "afa")) => {}
            Some((n, _)) => return Err(syntax(n, "expected header `afa`".into())),
            None => return Err(syntax(1, "empty input".into())),
        }
        let mut states: Vec<String> = Vec::new();
        let mut initial = None;
        let mut accepting_names: Vec<(usize, String)> = Vec::new();
        let mut delta_lines: Vec<(usize, String, AfaOp, String, String)> = Vec::new();
        for (n, l) in lines {
            if let Some(rest) = l.strip_prefix("states:") {
                states = rest.split_whitespace().map(String::from).collect();
            } else if let Some(rest) = l.strip_prefix("initial:") {
                initial = Some((n, rest.trim().to_string()));
            } else if let Some(rest) = l.strip_prefix("accepting:") {
                accepting_names.extend(rest.split_whitespace().map(|s| (n, s.to_string())));
            } else {
                let toks: Vec<&str> = l.split_whitespace().collect();
                match toks.as_slice() {
                    [q, "=", a, op, b] if *op == "&" || *op == "|" => {
                        let op = if *op == "&" { AfaOp::And } else { AfaOp::Or };
                        delta_lines.push((n, q.to_string(), op, a.to_string(), b.to_string()));
                    }
                    _ => return Err(syntax(n, format!("cannot read `{l}`"))),
                }
            }
        }
        let idx = |n: usize, s: &str| {
            states.iter().position(|x| x == s).ok_or(Error::UnknownSymbol {
                at: crate::error::Location { line: n, column: 1 },
                kind: "state",
                name: s.to_string(),
            })
        };
        let mut delta = vec![None; states.len()];
        for (n, q, op, a, b) in &delta_lines {
            delta[idx(*n, q)?] = Some((*op, idx(*n, a)?, idx(*n, b)?));
        }
        let mut accepting = vec![false; states.len()];
        for (n, s) in &accepting_names {
            accepting[idx(*n, s)?] = true;
        }
        let (n, init) = initial.ok_or_else(|| syntax(1, "missing `initial:` line".into()))?;
        let initial = idx(n, &init)?;
        let delta = delta
            .into_iter()
            .enumerate()
            .map(|(i, d)| d.ok_or_else(|| Error::invalid(format!("state {} has no transition", states[i]))))
            .collect::<Result<Vec<_>>>()?;
        OneLetterAfa::new(states, delta, initial, accepting)
    }
}

impl fmt::Display for OneLetterAfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "afa")?;
        writeln!(f, "states: {}", self.states.join(" "))?;
        writeln!(f, "initial: {}", self.states[self.initial])?;
        let acc: Vec<&str> = self
            .states
            .iter()
            .zip(&self.accepting)
            .filter(|(_, &a)| a)
            .map(|(s, _)| s.as_str())
            .collect();
        writeln!(f, "accepting: {}", acc.join(" "))?;
        for (q, &(op, a, b)) in self.delta.iter().enumerate() {
            let op = if op == AfaOp::And { "&" } else { "|" };
            writeln!(f, "{} = {} {op} {}", self.states[q], self.states[a], self.states[b])?;
        }
        Ok(())
    }
}

pub fn prime(name: &str) -> String {
    format!("{name}_prime")
}

/// The pOCA built from an automaton, with its distinguished configurations.
#[derive(Clone, Debug)]
pub struct AfaReduction {
    pub machine: Ppda,
    pub left: Config,
    pub right: Config,
}

impl AfaReduction {
    /// `q I^n Z` for an automaton state or any control name.
    pub fn config(&self, control: &str, n: u64) -> Option<Config> {
        let m = &self.machine;
        let q = m.control_id(control)?;
        let mut stack = Stack::empty();
        stack.push(m.symbol_id("Z")?);
        stack.push_run(m.symbol_id("I")?, n);
        Some(Config::new(q, stack))
    }
}

/// Builds the unary fully probabilistic pOCA with
/// `q I^n Z ~ q_prime I^n Z` iff the automaton rejects `n` from `q`, and
/// `p0 I Z ~ p0_prime I Z` iff it accepts no word from its initial state.
pub fn afa_to_poca(afa: &OneLetterAfa) -> Result<AfaReduction> {
    let reserved = ["p0", "p0_prime", "r", "s1", "s2"];
    if afa.states.iter().any(|s| reserved.contains(&s.as_str()) || afa.state_index(&prime(s)).is_some()) {
        return Err(Error::invalid("automaton state names clash with the fixed controls or primed copies"));
    }
    let mut b = PpdaBuilder::new();
    let p0 = b.control("p0");
    let p0p = b.control("p0_prime");
    let r = b.control("r");
    let q: Vec<ControlId> = afa.states.iter().map(|s| b.control(s)).collect();
    let qp: Vec<ControlId> = afa.states.iter().map(|s| b.control(&prime(s))).collect();
    let i = b.symbol("I");
    let z = b.symbol("Z");
    let a = b.action("a");
    let t = |c: ControlId, w: &[SymbolId]| HeadTarget::new(c, w.to_vec());
    let needs_s = afa.delta.iter().any(|&(op, _, _)| op == AfaOp::Or);
    let (s1, s2) = if needs_s {
        let s1 = b.control("s1");
        let s2 = b.control("s2");
        b.rule(s1, i, a, uniform(t(s1, &[i]), t(r, &[])))?;
        b.rule(
            s2,
            i,
            a,
            Dist::new([(t(s2, &[i]), Rational::new(2, 5)), (t(r, &[]), Rational::new(3, 5))])?,
        )?;
        (Some(s1), Some(s2))
    } else {
        (None, None)
    };
    for (k, name) in afa.states.iter().enumerate() {
        if afa.accepting[k] {
            b.rule(q[k], z, a, Dist::dirac(t(r, &[z])))?;
        }
        let (op, k1, k2) = afa.delta[k];
        match op {
            // AND-gadget: ¬Acc(q, n+1) iff ¬Acc(q1, n) and ¬Acc(q2, n).
            AfaOp::Or => {
                let (s1, s2) = (s1.unwrap(), s2.unwrap());
                let r1 = b.control(&format!("{name}_r1"));
                let r2 = b.control(&format!("{name}_r2"));
                let r1p = b.control(&format!("{name}_r1_prime"));
                let r2p = b.control(&format!("{name}_r2_prime"));
                b.rule(q[k], i, a, uniform(t(r1, &[i]), t(r2, &[i])))?;
                b.rule(qp[k], i, a, uniform(t(r1p, &[i]), t(r2p, &[i])))?;
                b.rule(r1, i, a, uniform(t(q[k1], &[]), t(s1, &[i])))?;
                b.rule(r2, i, a, uniform(t(q[k2], &[]), t(s2, &[i])))?;
                b.rule(r1p, i, a, uniform(t(qp[k1], &[]), t(s1, &[i])))?;
                b.rule(r2p, i, a, uniform(t(qp[k2], &[]), t(s2, &[i])))?;
            }
            // OR-gadget: ¬Acc(q, n+1) iff ¬Acc(q1, n) or ¬Acc(q2, n).
            AfaOp::And => {
                let u12 = b.control(&format!("{name}_u12"));
                let u1p2p = b.control(&format!("{name}_u1p2p"));
                let u12p = b.control(&format!("{name}_u12p"));
                let u1p2 = b.control(&format!("{name}_u1p2"));
                b.rule(q[k], i, a, uniform(t(u12, &[i]), t(u1p2p, &[i])))?;
                b.rule(qp[k], i, a, uniform(t(u12p, &[i]), t(u1p2, &[i])))?;
                b.rule(u12, i, a, uniform(t(q[k1], &[]), t(q[k2], &[])))?;
                b.rule(u1p2p, i, a, uniform(t(qp[k1], &[]), t(qp[k2], &[])))?;
                b.rule(u12p, i, a, uniform(t(q[k1], &[]), t(qp[k2], &[])))?;
                b.rule(u1p2, i, a, uniform(t(qp[k1], &[]), t(q[k2], &[])))?;
            }
        }
    }
    let third = Rational::new(1, 3);
    let q0 = afa.initial;
    for (p, q0c) in [(p0, q[q0]), (p0p, qp[q0])] {
        b.rule(
            p,
            i,
            a,
            Dist::new([
                (t(p, &[i, i]), third.clone()),
                (t(q0c, &[]), third.clone()),
                (t(r, &[i]), third.clone()),
            ])?,
        )?;
    }
    let machine = b.build();
    let one = |c: ControlId| Config::new(c, Stack::from_top_first(&[i, z]));
    Ok(AfaReduction {
        left: one(p0),
        right: one(p0p),
        machine,
    })
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
pub enum Player {
    Player0,
    Player1,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Player0 => "player 0",
            Player::Player1 => "player 1",
        })
    }
}

/// A reachability game on a unary pushdown process: Player 1 wants to reach
/// a configuration without successors.
#[derive(Clone, Debug)]
pub struct ReachGame {
    pub pda: Ppda,
    /// Controls owned by Player 1.
    pub player1: Vec<bool>,
    pub initial: Config,
}

impl ReachGame {
    /// Checks the shape restrictions: unary, Dirac rules, at most two rules
    /// per head and two-rule heads pushing exactly one symbol each.
    pub fn new(pda: Ppda, player1: Vec<bool>, initial: Config) -> Result<Self> {
        if player1.len() != pda.controls().len() {
            return Err(Error::invalid("one owner flag per control state is required"));
        }
        if pda.actions().len() > 1 {
            return Err(Error::invalid("reachability games use a single action"));
        }
        if initial.stack.len() != 1 {
            return Err(Error::invalid("the initial configuration must be a head pX"));
        }
        for q in pda.control_ids() {
            for x in pda.symbol_ids() {
                let rules = pda.rules_for(q, x);
                if rules.iter().any(|r| !r.target.is_dirac()) {
                    return Err(Error::invalid("reachability game rules must be Dirac"));
                }
                if rules.len() > 2 {
                    return Err(Error::invalid(format!(
                        "head {}{} has {} rules, at most two allowed",
                        pda.control_name(q),
                        pda.symbol_name(x),
                        rules.len()
                    )));
                }
                if rules.len() == 2 && rules.iter().any(|r| r.target.entries()[0].0.push.len() != 1) {
                    return Err(Error::invalid("a head with two rules must push exactly one symbol in each"));
                }
            }
        }
        Ok(ReachGame { pda, player1, initial })
    }

    fn successors(&self, c: &Config) -> Vec<Config> {
        self.pda
            .step(c)
            .into_iter()
            .map(|(_, d)| d.entries()[0].0.clone())
            .collect()
    }
}

/// Winner of the game by backward induction over the explicit reachable
/// configuration graph. Fails when the graph exceeds `budget` or an empty
/// stack is reachable.
pub fn solve_reach_game_finite(g: &ReachGame, budget: usize) -> Result<Player> {
    let frag = explore(&g.pda, std::slice::from_ref(&g.initial), None, budget)?;
    if frag.states.iter().any(|c| c.stack.is_empty()) {
        return Err(Error::invalid("an empty-stack configuration is reachable"));
    }
    let n = frag.states.len();
    let succ: Vec<Vec<usize>> = frag
        .states
        .iter()
        .map(|c| {
            g.successors(c)
                .iter()
                .map(|d| frag.id(d).expect("fragment is closed").index())
                .collect()
        })
        .collect();
    let mut preds = vec![Vec::new(); n];
    for (i, s) in succ.iter().enumerate() {
        for &j in s {
            preds[j].push(i);
        }
    }
    // Player 1's attractor of the dead configurations.
    let mut attr = vec![false; n];
    let mut missing: Vec<usize> = succ.iter().map(|s| s.len()).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| succ[i].is_empty()).collect();
    for &i in &queue {
        attr[i] = true;
    }
    while let Some(j) = queue.pop_front() {
        for &i in &preds[j] {
            if attr[i] {
                continue;
            }
            missing[i] -= 1;
            let owner1 = g.player1[frag.states[i].control.index()];
            if owner1 || missing[i] == 0 {
                attr[i] = true;
                queue.push_back(i);
            }
        }
    }
    let root = frag.id(&g.initial).unwrap().index();
    Ok(if attr[root] { Player::Player1 } else { Player::Player0 })
}

#[derive(Clone, Debug)]
pub struct GameReduction {
    pub machine: Ppda,
    pub left: Config,
    pub right: Config,
}

/// Builds the fully probabilistic pvPDA with one return, one internal and
/// one call action in which `p0X0 ~ p0_prime X0` iff Player 0 wins.
pub fn game_to_pvpda(g: &ReachGame) -> Result<GameReduction> {
    let d = &g.pda;
    let mut b = PpdaBuilder::new();
    let ar = b.action("ar");
    let ai = b.action("ai");
    let ac = b.action("ac");
    b.set_classes(vec![ActionClass::Return, ActionClass::Internal, ActionClass::Call])?;
    if d.controls().iter().any(|n| n == "z" || d.control_id(&prime(n)).is_some()) {
        return Err(Error::invalid("control names clash with their primed copies or z"));
    }
    let orig: Vec<ControlId> = d.controls().iter().map(|n| b.control(n)).collect();
    let copy: Vec<ControlId> = d.controls().iter().map(|n| b.control(&prime(n))).collect();
    let z = b.control("z");
    let syms: Vec<SymbolId> = d.symbols().iter().map(|n| b.symbol(n)).collect();
    let class_action = |len: usize| match len {
        0 => ar,
        1 => ai,
        _ => ac,
    };
    let map_t = |side: &[ControlId], t: &HeadTarget| {
        HeadTarget::new(side[t.control.index()], t.push.iter().map(|y| syms[y.index()]).collect())
    };
    for p in d.control_ids() {
        for x in d.symbol_ids() {
            let (pi, xi) = (p.index(), syms[x.index()]);
            let rules = d.rules_for(p, x);
            let head = format!("{}{}", d.control_name(p), d.symbol_name(x));
            match rules {
                [] => {
                    b.rule(orig[pi], xi, ai, Dist::dirac(HeadTarget::new(orig[pi], vec![xi])))?;
                    b.rule(copy[pi], xi, ai, Dist::dirac(HeadTarget::new(z, vec![xi])))?;
                }
                [r] => {
                    let t = &r.target.entries()[0].0;
                    let a = class_action(t.push.len());
                    b.rule(orig[pi], xi, a, Dist::dirac(map_t(&orig, t)))?;
                    b.rule(copy[pi], xi, a, Dist::dirac(map_t(&copy, t)))?;
                }
                [r1, r2] => {
                    let t1 = &r1.target.entries()[0].0;
                    let t2 = &r2.target.entries()[0].0;
                    let (l1, l1p) = (map_t(&orig, t1), map_t(&copy, t1));
                    let (l2, l2p) = (map_t(&orig, t2), map_t(&copy, t2));
                    let here = |c: ControlId| HeadTarget::new(c, vec![xi]);
                    if g.player1[pi] {
                        let f1 = b.control(&format!("{head}_and1"));
                        let f1p = b.control(&format!("{head}_and1_prime"));
                        let f2 = b.control(&format!("{head}_and2"));
                        let f2p = b.control(&format!("{head}_and2_prime"));
                        b.rule(orig[pi], xi, ai, uniform(here(f1), here(f2)))?;
                        b.rule(copy[pi], xi, ai, uniform(here(f1p), here(f2p)))?;
                        b.rule(f1, xi, ai, Dist::dirac(l1))?;
                        b.rule(f1p, xi, ai, Dist::dirac(l1p))?;
                        b.rule(f2, xi, ai, uniform(l2, here(z)))?;
                        b.rule(f2p, xi, ai, uniform(l2p, here(z)))?;
                    } else {
                        let u12 = b.control(&format!("{head}_or_u12"));
                        let u1p2p = b.control(&format!("{head}_or_u1p2p"));
                        let u12p = b.control(&format!("{head}_or_u12p"));
                        let u1p2 = b.control(&format!("{head}_or_u1p2"));
                        b.rule(orig[pi], xi, ai, uniform(here(u12), here(u1p2p)))?;
                        b.rule(copy[pi], xi, ai, uniform(here(u12p), here(u1p2)))?;
                        b.rule(u12, xi, ai, uniform(l1.clone(), l2.clone()))?;
                        b.rule(u1p2p, xi, ai, uniform(l1p.clone(), l2p.clone()))?;
                        b.rule(u12p, xi, ai, uniform(l1, l2p))?;
                        b.rule(u1p2, xi, ai, uniform(l1p, l2))?;
                    }
                }
                _ => unreachable!("checked by ReachGame::new"),
            }
        }
    }
    let machine = b.build();
    let x0 = g.initial.stack.top().unwrap();
    let c = g.initial.control.index();
    Ok(GameReduction {
        left: Config::new(orig[c], Stack::from_top_first(&[syms[x0.index()]])),
        right: Config::new(copy[c], Stack::from_top_first(&[syms[x0.index()]])),
        machine,
    })
}

/// Reads the owner flags from names: controls listed in `player1` belong to
/// Player 1.
pub fn owners(pda: &Ppda, player1: &[&str]) -> Result<Vec<bool>> {
    let mut v = vec![false; pda.controls().len()];
    for name in player1 {
        let q = pda
            .control_id(name)
            .ok_or_else(|| Error::invalid(format!("unknown control state {name}")))?;
        v[q.index()] = true;
    }
    Ok(v)
}
