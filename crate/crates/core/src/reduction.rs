//! From probabilistic to nondeterministic systems: every distribution and
//! every nonempty subset of its support becomes a state, so that one
//! probabilistic step `s -a-> d` turns into three standard steps
//! `s -a-> d -ρ-> T -#-> s'`.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::machines::{ControlId, HeadTarget, Ppda, PpdaBuilder, SymbolId};
use crate::plts::{ActionId, Plts, PltsBuilder, StateId};
use crate::rational::Rational;

pub const HASH_ACTION: &str = "#";

/// Supports larger than this are refused outright; they would produce over
/// a million subset states for a single distribution.
pub const MAX_SUPPORT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StateOrigin {
    Original(StateId),
    Dist(Dist<StateId>),
    Subset(Vec<StateId>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ActionOrigin {
    Original(ActionId),
    Prob(Rational),
    Hash,
}

#[derive(Clone, Debug)]
pub struct LiftedPlts {
    pub plts: Plts,
    pub state_origin: Vec<StateOrigin>,
    pub action_origin: Vec<ActionOrigin>,
    /// The relevant numbers, ascending.
    pub numbers: Vec<Rational>,
}

impl LiftedPlts {
    /// The lifted state standing for an original state. Originals keep
    /// their ids.
    pub fn original(&self, s: StateId) -> StateId {
        s
    }

    /// Comment lines describing the tags, for annotated output.
    pub fn annotations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, o) in self.state_origin.iter().enumerate() {
            let kind = match o {
                StateOrigin::Original(_) => continue,
                StateOrigin::Dist(_) => "distribution",
                StateOrigin::Subset(_) => "subset",
            };
            out.push(format!("{kind} state {}", self.plts.state_name(StateId(i as u32))));
        }
        let probs: Vec<String> = self.numbers.iter().map(|r| r.to_string()).collect();
        out.push(format!("probability actions: {}", probs.join(" ")));
        out
    }
}

/// Nonempty subsets of `0..k` as bitmasks, smallest masks first.
fn subsets(k: usize) -> impl Iterator<Item = u32> {
    1..(1u32 << k)
}

fn members<T: Clone>(items: &[T], mask: u32) -> Vec<T> {
    items
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, x)| x.clone())
        .collect()
}

fn mask_mass<T>(entries: &[(T, Rational)], mask: u32) -> Rational {
    entries
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, (_, w))| w)
        .sum()
}

/// The relevant numbers `d(T)` over the given distributions, ascending.
pub fn relevant_numbers<'a, T: 'a>(dists: impl IntoIterator<Item = &'a Dist<T>>) -> Vec<Rational> {
    let mut w = BTreeSet::new();
    for d in dists {
        for mask in subsets(d.len()) {
            w.insert(mask_mass(d.entries(), mask));
        }
    }
    w.into_iter().collect()
}

/// Number of states a lift would add: the sum of `2^|supp(d)|` over the
/// distinct relevant distributions, saturating.
pub fn lift_size_estimate<'a, T: 'a + Ord>(dists: impl IntoIterator<Item = &'a Dist<T>>) -> usize {
    let mut seen = BTreeSet::new();
    let mut total: usize = 0;
    for d in dists {
        if seen.insert(d) {
            let add = if d.len() >= usize::BITS as usize - 1 {
                usize::MAX
            } else {
                1usize << d.len()
            };
            total = total.saturating_add(add);
        }
    }
    total
}

fn check_supports<'a, T: 'a>(dists: impl IntoIterator<Item = &'a Dist<T>>) -> Result<()> {
    for d in dists {
        if d.len() > MAX_SUPPORT {
            return Err(Error::SizeGuard {
                what: "distribution support",
                limit: MAX_SUPPORT,
                actual: d.len(),
            });
        }
    }
    Ok(())
}

fn unique_name(taken: &mut HashSet<String>, base: String) -> String {
    let mut name = base;
    while !taken.insert(name.clone()) {
        name.push('\'');
    }
    name
}

/// The standard LTS `L'` of a finite pLTS `L`, refusing inputs whose
/// estimated size exceeds `cap`.
pub fn lift_plts_checked(l: &Plts, cap: usize) -> Result<LiftedPlts> {
    let dists = l.transitions().iter().map(|t| &t.target);
    check_supports(dists.clone())?;
    let estimate = lift_size_estimate(dists);
    if estimate > cap {
        return Err(Error::SizeGuard {
            what: "lifted system",
            limit: cap,
            actual: estimate,
        });
    }
    Ok(lift_plts(l))
}

/// The standard LTS `L'` of a finite pLTS `L`. Original states keep their
/// ids and names. Equal distributions share one state, and so do equal
/// subsets arising from different distributions.
pub fn lift_plts(l: &Plts) -> LiftedPlts {
    let numbers = relevant_numbers(l.transitions().iter().map(|t| &t.target));
    lift_plts_with_numbers(l, numbers)
}

/// As [`lift_plts`] but with a given, ascending set of probability actions.
/// Useful when `l` is a fragment of a larger system whose relevant numbers
/// it does not all exhibit.
pub fn lift_plts_with_numbers(l: &Plts, numbers: Vec<Rational>) -> LiftedPlts {
    let mut b = PltsBuilder::new();
    let mut taken: HashSet<String> = HashSet::new();
    let mut state_origin = Vec::new();
    for s in l.states() {
        b.state(l.state_name(s));
        taken.insert(l.state_name(s).to_string());
        state_origin.push(StateOrigin::Original(s));
    }
    let mut action_origin = Vec::new();
    for a in l.actions() {
        b.action(l.action_name(a));
        action_origin.push(ActionOrigin::Original(a));
    }
    let prob_actions: Vec<ActionId> = numbers
        .iter()
        .map(|r| {
            action_origin.push(ActionOrigin::Prob(r.clone()));
            b.action(&r.to_string())
        })
        .collect();
    let hash = b.action(HASH_ACTION);
    action_origin.push(ActionOrigin::Hash);

    let mut dist_states: HashMap<Dist<StateId>, StateId> = HashMap::new();
    let mut dist_order = Vec::new();
    for t in l.transitions() {
        let id = *dist_states.entry(t.target.clone()).or_insert_with(|| {
            let body: Vec<String> = t
                .target
                .entries()
                .iter()
                .map(|(s, w)| format!("{w}:{}", l.state_name(*s)))
                .collect();
            let name = unique_name(&mut taken, format!("[{}]", body.join(",")));
            state_origin.push(StateOrigin::Dist(t.target.clone()));
            dist_order.push(t.target.clone());
            b.state(&name)
        });
        b.transition(t.source, t.action, Dist::dirac(id));
    }

    let mut subset_states: HashMap<Vec<StateId>, StateId> = HashMap::new();
    let mut subset_order = Vec::new();
    for d in &dist_order {
        let did = dist_states[d];
        let support: Vec<StateId> = d.support().copied().collect();
        for mask in subsets(support.len()) {
            let set = members(&support, mask);
            let mass = mask_mass(d.entries(), mask);
            let tid = *subset_states.entry(set.clone()).or_insert_with(|| {
                let names: Vec<&str> = set.iter().map(|s| l.state_name(*s)).collect();
                let name = unique_name(&mut taken, format!("{{{}}}", names.join(",")));
                state_origin.push(StateOrigin::Subset(set.clone()));
                subset_order.push(set.clone());
                b.state(&name)
            });
            for (rho, &act) in numbers.iter().zip(&prob_actions) {
                if *rho <= mass {
                    b.transition(did, act, Dist::dirac(tid));
                }
            }
        }
    }
    for set in &subset_order {
        let tid = subset_states[set];
        for &s in set {
            b.transition(tid, hash, Dist::dirac(s));
        }
    }
    LiftedPlts {
        plts: b.build(),
        state_origin,
        action_origin,
        numbers,
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LiftMode {
    /// Fresh symbols `<d>`, `<T>` on the stack, one shared control state.
    Stack,
    /// Fresh control states `<d>`, `<T>`, the stack top kept in place.
    Control,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FreshOrigin {
    Dist(Dist<HeadTarget>),
    Subset(Vec<HeadTarget>),
}

#[derive(Clone, Debug)]
pub struct LiftedPpda {
    pub ppda: Ppda,
    pub mode: LiftMode,
    /// Per stack symbol: `None` for an original symbol.
    pub symbol_origin: Vec<Option<FreshOrigin>>,
    /// Per control state: `None` for an original control state.
    pub control_origin: Vec<Option<FreshOrigin>>,
    pub action_origin: Vec<ActionOrigin>,
    pub numbers: Vec<Rational>,
}

impl LiftedPpda {
    pub fn annotations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let describe = |o: &FreshOrigin| match o {
            FreshOrigin::Dist(_) => "distribution",
            FreshOrigin::Subset(_) => "subset",
        };
        for (i, o) in self.symbol_origin.iter().enumerate() {
            if let Some(o) = o {
                out.push(format!("{} symbol {}", describe(o), self.ppda.symbol_name(SymbolId(i as u32))));
            }
        }
        for (i, o) in self.control_origin.iter().enumerate() {
            if let Some(o) = o {
                out.push(format!("{} control {}", describe(o), self.ppda.control_name(ControlId(i as u32))));
            }
        }
        let probs: Vec<String> = self.numbers.iter().map(|r| r.to_string()).collect();
        out.push(format!("probability actions: {}", probs.join(" ")));
        out
    }
}

fn dist_label(m: &Ppda, d: &Dist<HeadTarget>) -> String {
    let body: Vec<String> = d
        .entries()
        .iter()
        .map(|(t, w)| format!("{w}:{}", m.head_target_name(t)))
        .collect();
    format!("<{}>", body.join(","))
}

fn subset_label(m: &Ppda, set: &[HeadTarget]) -> String {
    let body: Vec<String> = set.iter().map(|t| m.head_target_name(t)).collect();
    format!("<{{{}}}>", body.join(","))
}

/// `Δ'`: the stack version of the lift. The first control state plays the
/// role of the shared state `q0`.
pub fn lift_ppda_stack(m: &Ppda) -> Result<LiftedPpda> {
    lift_ppda(m, LiftMode::Stack)
}

/// `Δ'_c`: the control-state version of the lift.
pub fn lift_ppda_state(m: &Ppda) -> Result<LiftedPpda> {
    lift_ppda(m, LiftMode::Control)
}

fn lift_ppda(m: &Ppda, mode: LiftMode) -> Result<LiftedPpda> {
    if m.controls().is_empty() {
        return Err(Error::invalid("machine has no control states"));
    }
    check_supports(m.rules().iter().map(|r| &r.target))?;
    let numbers = relevant_numbers(m.rules().iter().map(|r| &r.target));

    let mut b = PpdaBuilder::new();
    let mut taken_controls: HashSet<String> = m.controls().iter().cloned().collect();
    let mut taken_symbols: HashSet<String> = m.symbols().iter().cloned().collect();
    for q in m.controls() {
        b.control(q);
    }
    for x in m.symbols() {
        b.symbol(x);
    }
    let mut action_origin = Vec::new();
    for a in m.action_ids() {
        b.action(m.action_name(a));
        action_origin.push(ActionOrigin::Original(a));
    }
    let prob_actions: Vec<ActionId> = numbers
        .iter()
        .map(|r| {
            action_origin.push(ActionOrigin::Prob(r.clone()));
            b.action(&r.to_string())
        })
        .collect();
    let hash = b.action(HASH_ACTION);
    action_origin.push(ActionOrigin::Hash);

    let mut symbol_origin: Vec<Option<FreshOrigin>> = vec![None; m.symbols().len()];
    let mut control_origin: Vec<Option<FreshOrigin>> = vec![None; m.controls().len()];

    // Fresh names are allocated in order of first use so the output is
    // stable. `heads` records, per distribution and subset, the original
    // stack symbols they are used with (only needed for the control version).
    let mut dist_ids: HashMap<Dist<HeadTarget>, u32> = HashMap::new();
    let mut dists: Vec<(Dist<HeadTarget>, BTreeSet<SymbolId>)> = Vec::new();
    for r in m.rules() {
        let k = *dist_ids.entry(r.target.clone()).or_insert_with(|| {
            dists.push((r.target.clone(), BTreeSet::new()));
            dists.len() as u32 - 1
        });
        dists[k as usize].1.insert(r.symbol);
    }
    let mut subset_ids: HashMap<Vec<HeadTarget>, usize> = HashMap::new();
    let mut sets: Vec<(Vec<HeadTarget>, BTreeSet<SymbolId>)> = Vec::new();
    for (d, heads) in &dists {
        let support: Vec<HeadTarget> = d.support().cloned().collect();
        for mask in subsets(support.len()) {
            let set = members(&support, mask);
            let k = *subset_ids.entry(set.clone()).or_insert_with(|| {
                sets.push((set, BTreeSet::new()));
                sets.len() - 1
            });
            sets[k].1.extend(heads.iter().copied());
        }
    }

    // Allocate the fresh names.
    let mut dist_fresh = Vec::new();
    for (d, _) in &dists {
        let label = dist_label(m, d);
        let id = match mode {
            LiftMode::Stack => {
                let name = unique_name(&mut taken_symbols, label);
                symbol_origin.push(Some(FreshOrigin::Dist(d.clone())));
                b.symbol(&name).0
            }
            LiftMode::Control => {
                let name = unique_name(&mut taken_controls, label);
                control_origin.push(Some(FreshOrigin::Dist(d.clone())));
                b.control(&name).0
            }
        };
        dist_fresh.push(id);
    }
    let mut set_fresh = Vec::new();
    for (set, _) in &sets {
        let label = subset_label(m, set);
        let id = match mode {
            LiftMode::Stack => {
                let name = unique_name(&mut taken_symbols, label);
                symbol_origin.push(Some(FreshOrigin::Subset(set.clone())));
                b.symbol(&name).0
            }
            LiftMode::Control => {
                let name = unique_name(&mut taken_controls, label);
                control_origin.push(Some(FreshOrigin::Subset(set.clone())));
                b.control(&name).0
            }
        };
        set_fresh.push(id);
    }

    let q0 = ControlId(0);
    let dirac = |t: HeadTarget| Dist::dirac(t);

    // qX -a-> q0<d>   or   qX -a-> <d>X
    for r in m.rules() {
        let f = dist_fresh[dist_ids[&r.target] as usize];
        let target = match mode {
            LiftMode::Stack => HeadTarget::new(q0, vec![SymbolId(f)]),
            LiftMode::Control => HeadTarget::new(ControlId(f), vec![r.symbol]),
        };
        b.rule(r.control, r.symbol, r.action, dirac(target))?;
    }
    // q0<d> -ρ-> q0<T>   or   <d>X -ρ-> <T>X
    for (k, (d, heads)) in dists.iter().enumerate() {
        let support: Vec<HeadTarget> = d.support().cloned().collect();
        for mask in subsets(support.len()) {
            let set = members(&support, mask);
            let mass = mask_mass(d.entries(), mask);
            let t = set_fresh[subset_ids[&set]];
            for (rho, &act) in numbers.iter().zip(&prob_actions) {
                if *rho > mass {
                    continue;
                }
                match mode {
                    LiftMode::Stack => b.rule(
                        q0,
                        SymbolId(dist_fresh[k]),
                        act,
                        dirac(HeadTarget::new(q0, vec![SymbolId(t)])),
                    )?,
                    LiftMode::Control => {
                        for &x in heads {
                            b.rule(
                                ControlId(dist_fresh[k]),
                                x,
                                act,
                                dirac(HeadTarget::new(ControlId(t), vec![x])),
                            )?;
                        }
                    }
                }
            }
        }
    }
    // q0<T> -#-> pα   or   <T>X -#-> pα
    for (k, (set, heads)) in sets.iter().enumerate() {
        for target in set {
            match mode {
                LiftMode::Stack => {
                    b.rule(q0, SymbolId(set_fresh[k]), hash, dirac(target.clone()))?
                }
                LiftMode::Control => {
                    for &x in heads {
                        b.rule(ControlId(set_fresh[k]), x, hash, dirac(target.clone()))?;
                    }
                }
            }
        }
    }
    Ok(LiftedPpda {
        ppda: b.build(),
        mode,
        symbol_origin,
        control_origin,
        action_origin,
        numbers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_transitions_adds_nothing() {
        let mut b = PltsBuilder::new();
        b.state("x");
        b.action("a");
        let l = b.build();
        let lifted = lift_plts(&l);
        assert_eq!(lifted.plts.num_states(), 1);
        assert!(lifted.plts.transitions().is_empty());
        assert!(lifted.numbers.is_empty());
    }

    #[test]
    fn single_dirac_transition_gives_a_three_step_path() {
        let mut b = PltsBuilder::new();
        let s = b.state("s");
        let t = b.state("t");
        let a = b.action("a");
        b.transition(s, a, Dist::dirac(t));
        let lifted = lift_plts(&b.build());
        let p = &lifted.plts;
        assert_eq!(lifted.numbers, vec![Rational::one()]);
        assert_eq!(p.action_names(), &["a", "1", "#"]);
        assert_eq!(p.state_names(), &["s", "t", "[1:t]", "{t}"]);
        let names: Vec<String> = p
            .transitions()
            .iter()
            .map(|t| {
                format!(
                    "{}-{}->{}",
                    p.state_name(t.source),
                    p.action_name(t.action),
                    p.state_name(*t.target.support().next().unwrap())
                )
            })
            .collect();
        assert_eq!(names, vec!["s-a->[1:t]", "[1:t]-1->{t}", "{t}-#->t"]);
        assert!(p.is_standard());
    }

    #[test]
    fn estimate_and_guard() {
        let d = Dist::new((0..3).map(|i| (i, Rational::new(1, 3)))).unwrap();
        assert_eq!(lift_size_estimate([&d, &d]), 8);
        let mut b = PltsBuilder::new();
        let s = b.state("s");
        let a = b.action("a");
        let t: Vec<_> = (0..3).map(|i| b.state(&format!("t{i}"))).collect();
        b.transition(s, a, Dist::new(t.iter().map(|&x| (x, Rational::new(1, 3)))).unwrap());
        let l = b.build();
        assert!(lift_plts_checked(&l, 7).unwrap_err().is_resource_guard());
        assert!(lift_plts_checked(&l, 8).is_ok());
    }
}
