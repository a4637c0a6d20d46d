//! Bisimilarity of probabilistic visibly pushdown automata.
//!
//! `(pX, qY) ⊢_a Out` says that in one protocol round from the heads
//! `pX`, `qY`, opening with an `a`-transition, Attacker either wins or forces
//! the outcome into `Out`. The least relation `⊢*` closes this under return,
//! internal and call steps; a configuration pair is then decided by the sets
//! `A(α, β) = {(p, q) | pα ≁ qβ}` built from the bottom of the stacks up.
//!
//! `⊢*` is kept as, for each head pair, the antichain of minimal targets
//! `Out ⊆ Q×Q` (a target is a `u128` bitset, so `|Q| <= 11`).

use std::collections::{BTreeSet, HashMap};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::machines::{ActionClass, Config, ControlId, HeadTarget, Ppda, SymbolId};
use crate::plts::ActionId;
use crate::reduction::MAX_SUPPORT;

/// Hard ceiling from the bitset width.
pub const MAX_CONTROLS: usize = 11;

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct HeadPair {
    pub left: (ControlId, SymbolId),
    pub right: (ControlId, SymbolId),
}

impl HeadPair {
    pub fn new(p: ControlId, x: SymbolId, q: ControlId, y: SymbolId) -> Self {
        HeadPair {
            left: (p, x),
            right: (q, y),
        }
    }
}

pub type OutcomePair = (HeadTarget, HeadTarget);

/// A set of outcome pairs, all with the stack length of `kind`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OutcomeSet {
    pub kind: ActionClass,
    pub pairs: BTreeSet<OutcomePair>,
}

impl OutcomeSet {
    pub fn new(kind: ActionClass, pairs: impl IntoIterator<Item = OutcomePair>) -> Result<Self> {
        let pairs: BTreeSet<OutcomePair> = pairs.into_iter().collect();
        for (l, r) in &pairs {
            if l.push.len() != kind.push_len() || r.push.len() != kind.push_len() {
                return Err(Error::invalid(format!(
                    "outcome pairs of a {} set must push {} symbols",
                    kind.name(),
                    kind.push_len()
                )));
            }
        }
        Ok(OutcomeSet { kind, pairs })
    }
}

type Family = Vec<BTreeSet<OutcomePair>>;

fn minimize_sets(mut f: Family) -> Family {
    f.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    f.dedup();
    let mut out: Family = Vec::new();
    for s in f {
        if !out.iter().any(|k| k.is_subset(&s)) {
            out.push(s);
        }
    }
    out
}

fn product_sets(f: &Family, g: &Family) -> Family {
    let mut out = Vec::with_capacity(f.len() * g.len());
    for a in f {
        for b in g {
            out.push(a.union(b).cloned().collect());
        }
    }
    minimize_sets(out)
}

fn subsets_with_mass(d: &Dist<HeadTarget>) -> Vec<(Vec<HeadTarget>, crate::Rational)> {
    let k = d.len();
    (1u32..(1 << k))
        .map(|mask| {
            let mut set = Vec::new();
            let mut mass = crate::Rational::zero();
            for (i, (s, w)) in d.entries().iter().enumerate() {
                if mask & (1 << i) != 0 {
                    set.push(s.clone());
                    mass += w;
                }
            }
            (set, mass)
        })
        .collect()
}

/// Minimal outcome sets Attacker can force from the distribution pair once
/// the transitions are fixed (steps 2 and 3 of a round).
fn dist_family(left: &Dist<HeadTarget>, right: &Dist<HeadTarget>) -> Family {
    let (ls, rs) = (subsets_with_mass(left), subsets_with_mass(right));
    let mut out = Vec::new();
    for (chosen, other, chosen_left) in [(&ls, &rs, true), (&rs, &ls, false)] {
        for (t, rho) in chosen {
            let mut acc: Family = vec![BTreeSet::new()];
            for (u, mass) in other {
                if mass < rho {
                    continue;
                }
                let (tl, tr) = if chosen_left { (t, u) } else { (u, t) };
                acc = product_sets(&acc, &pick_family(tl, tr));
            }
            out.extend(acc);
        }
    }
    minimize_sets(out)
}

fn pick_family(tl: &[HeadTarget], tr: &[HeadTarget]) -> Family {
    let mut out = Vec::new();
    for x in tl {
        out.push(tr.iter().map(|y| (x.clone(), y.clone())).collect());
    }
    for y in tr {
        out.push(tl.iter().map(|x| (x.clone(), y.clone())).collect());
    }
    minimize_sets(out)
}

/// Minimal `Out` with `hp ⊢_a Out`.
fn force_family(m: &Ppda, hp: HeadPair, a: ActionId) -> Family {
    let with_a = |(q, x): (ControlId, SymbolId)| -> Vec<&Dist<HeadTarget>> {
        m.rules_for(q, x)
            .iter()
            .filter(|r| r.action == a)
            .map(|r| &r.target)
            .collect()
    };
    let (lt, rt) = (with_a(hp.left), with_a(hp.right));
    let mut out = Vec::new();
    for (attack, answers, attack_left) in [(&lt, &rt, true), (&rt, &lt, false)] {
        for d in attack {
            let mut acc: Family = vec![BTreeSet::new()];
            for e in answers {
                let fam = if attack_left { dist_family(d, e) } else { dist_family(e, d) };
                acc = product_sets(&acc, &fam);
            }
            out.extend(acc);
        }
    }
    minimize_sets(out)
}

fn check_heads(m: &Ppda, hp: HeadPair) -> Result<()> {
    for (q, x) in [hp.left, hp.right] {
        if q.index() >= m.controls().len() || x.index() >= m.symbols().len() {
            return Err(Error::invalid("head pair refers to an unknown control state or symbol"));
        }
    }
    Ok(())
}

/// `hp ⊢_a out`, decided by playing one round restricted to action `a`.
pub fn force_a(m: &Ppda, hp: HeadPair, a: ActionId, out: &OutcomeSet) -> Result<bool> {
    let classes = m.require_vpda()?;
    check_heads(m, hp)?;
    let class = *classes
        .get(a.index())
        .ok_or_else(|| Error::invalid("unknown action"))?;
    if class != out.kind {
        return Err(Error::ActionClassMismatch {
            action: m.action_name(a).to_string(),
            expected: class.name(),
            actual: out.kind.name(),
        });
    }
    Ok(force_family(m, hp, a).iter().any(|s| s.is_subset(&out.pairs)))
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, Default)]
pub enum IterationOrder {
    /// Head pairs in index order, updated in place.
    #[default]
    Forward,
    /// Reverse index order, each pass computed from the previous one.
    ReverseJacobi,
}

#[derive(Clone, Debug)]
pub struct VpdaOptions {
    /// Refuse machines with more control states than this.
    pub max_controls: usize,
    /// Refuse to keep antichains larger than this.
    pub max_family: usize,
    pub order: IterationOrder,
}

impl Default for VpdaOptions {
    fn default() -> Self {
        VpdaOptions {
            max_controls: 5,
            max_family: 50_000,
            order: IterationOrder::Forward,
        }
    }
}

fn minimize_bits(mut f: Vec<u128>) -> Vec<u128> {
    f.sort_by_key(|s| (s.count_ones(), *s));
    f.dedup();
    let mut out: Vec<u128> = Vec::new();
    for s in f {
        if !out.iter().any(|k| k & !s == 0) {
            out.push(s);
        }
    }
    out
}

/// The relation `⊢*`, as minimal targets per head pair.
pub struct ForceTable<'a> {
    m: &'a Ppda,
    nq: usize,
    ns: usize,
    minimal: Vec<Vec<u128>>,
    passes: usize,
    max_family: usize,
}

enum Step {
    Return(Vec<u128>),
    /// Families over head pairs reached by internal moves.
    Internal(Vec<Vec<usize>>),
    /// Families over `(head pair of the top symbols, second symbols)`.
    Call(Vec<Vec<(usize, SymbolId, SymbolId)>>),
}

impl<'a> ForceTable<'a> {
    pub fn compute(m: &'a Ppda, opts: &VpdaOptions) -> Result<Self> {
        let classes = m.require_vpda()?.to_vec();
        let nq = m.controls().len();
        let limit = opts.max_controls.min(MAX_CONTROLS);
        if nq > limit {
            return Err(Error::SizeGuard {
                what: "control states",
                limit,
                actual: nq,
            });
        }
        for r in m.rules() {
            if r.target.len() > MAX_SUPPORT {
                return Err(Error::SizeGuard {
                    what: "support size",
                    limit: MAX_SUPPORT,
                    actual: r.target.len(),
                });
            }
        }
        let ns = m.symbols().len();
        let mut t = ForceTable {
            m,
            nq,
            ns,
            minimal: vec![Vec::new(); (nq * ns) * (nq * ns)],
            passes: 0,
            max_family: opts.max_family,
        };
        let steps = t.one_round_steps(&classes)?;
        t.fixpoint(&steps, opts.order)?;
        Ok(t)
    }

    fn head_index(&self, q: ControlId, x: SymbolId) -> usize {
        q.index() * self.ns + x.index()
    }

    fn pair_index(&self, hp: HeadPair) -> usize {
        self.head_index(hp.left.0, hp.left.1) * self.nq * self.ns + self.head_index(hp.right.0, hp.right.1)
    }

    fn bit(&self, p: ControlId, q: ControlId) -> u128 {
        1u128 << (p.index() * self.nq + q.index())
    }

    fn head_pairs(&self) -> Vec<HeadPair> {
        let mut v = Vec::with_capacity(self.minimal.len());
        for p in self.m.control_ids() {
            for x in self.m.symbol_ids() {
                for q in self.m.control_ids() {
                    for y in self.m.symbol_ids() {
                        v.push(HeadPair::new(p, x, q, y));
                    }
                }
            }
        }
        v
    }

    fn one_round_steps(&self, classes: &[ActionClass]) -> Result<Vec<Vec<Step>>> {
        let mut all = Vec::with_capacity(self.minimal.len());
        for hp in self.head_pairs() {
            let mut steps = Vec::new();
            for a in self.m.action_ids() {
                let fam = force_family(self.m, hp, a);
                if fam.is_empty() {
                    continue;
                }
                if fam.len() > self.max_family {
                    return Err(Error::SizeGuard {
                        what: "one-round outcome family",
                        limit: self.max_family,
                        actual: fam.len(),
                    });
                }
                steps.push(match classes[a.index()] {
                    ActionClass::Return => Step::Return(minimize_bits(
                        fam.iter()
                            .map(|s| s.iter().fold(0, |acc, (l, r)| acc | self.bit(l.control, r.control)))
                            .collect(),
                    )),
                    ActionClass::Internal => Step::Internal(
                        fam.iter()
                            .map(|s| {
                                s.iter()
                                    .map(|(l, r)| {
                                        self.pair_index(HeadPair::new(l.control, l.push[0], r.control, r.push[0]))
                                    })
                                    .collect()
                            })
                            .collect(),
                    ),
                    ActionClass::Call => Step::Call(
                        fam.iter()
                            .map(|s| {
                                s.iter()
                                    .map(|(l, r)| {
                                        (
                                            self.pair_index(HeadPair::new(l.control, l.push[0], r.control, r.push[0])),
                                            l.push[1],
                                            r.push[1],
                                        )
                                    })
                                    .collect()
                            })
                            .collect(),
                    ),
                });
            }
            all.push(steps);
        }
        Ok(all)
    }

    fn product_bits(&self, f: &[u128], g: &[u128]) -> Result<Vec<u128>> {
        let mut out = Vec::with_capacity(f.len() * g.len());
        for a in f {
            for b in g {
                out.push(a | b);
            }
        }
        let out = minimize_bits(out);
        if out.len() > self.max_family {
            return Err(Error::SizeGuard {
                what: "target antichain",
                limit: self.max_family,
                actual: out.len(),
            });
        }
        Ok(out)
    }

    fn bits(&self, set: u128) -> impl Iterator<Item = (ControlId, ControlId)> + '_ {
        let nq = self.nq;
        (0..nq * nq)
            .filter(move |i| set & (1u128 << i) != 0)
            .map(move |i| (ControlId((i / nq) as u32), ControlId((i % nq) as u32)))
    }

    fn derive(&self, steps: &[Step], cur: &[Vec<u128>]) -> Result<Vec<u128>> {
        let mut out = Vec::new();
        for step in steps {
            match step {
                Step::Return(f) => out.extend(f.iter().copied()),
                Step::Internal(f) => {
                    for out1 in f {
                        let mut acc = vec![0u128];
                        for &h in out1 {
                            acc = self.product_bits(&acc, &cur[h])?;
                            if acc.is_empty() {
                                break;
                            }
                        }
                        out.extend(acc);
                    }
                }
                Step::Call(f) => {
                    for out1 in f {
                        let mut acc = vec![0u128];
                        for &(h, x2, y2) in out1 {
                            // Targets reachable by first draining the top pair
                            // into some Out', then the second pair from each
                            // (p'', q'') in it.
                            let mut via = Vec::new();
                            for &mid in &cur[h] {
                                let mut inner = vec![0u128];
                                for (p2, q2) in self.bits(mid) {
                                    let h2 = self.pair_index(HeadPair::new(p2, x2, q2, y2));
                                    inner = self.product_bits(&inner, &cur[h2])?;
                                    if inner.is_empty() {
                                        break;
                                    }
                                }
                                via.extend(inner);
                            }
                            acc = self.product_bits(&acc, &minimize_bits(via))?;
                            if acc.is_empty() {
                                break;
                            }
                        }
                        out.extend(acc);
                    }
                }
            }
        }
        Ok(out)
    }

    fn fixpoint(&mut self, steps: &[Vec<Step>], order: IterationOrder) -> Result<()> {
        let n = self.minimal.len();
        loop {
            self.passes += 1;
            let mut changed = false;
            match order {
                IterationOrder::Forward => {
                    for h in 0..n {
                        let mut fam = self.derive(&steps[h], &self.minimal)?;
                        fam.extend(self.minimal[h].iter().copied());
                        let fam = minimize_bits(fam);
                        if fam != self.minimal[h] {
                            self.minimal[h] = fam;
                            changed = true;
                        }
                    }
                }
                IterationOrder::ReverseJacobi => {
                    let prev = self.minimal.clone();
                    for h in (0..n).rev() {
                        let mut fam = self.derive(&steps[h], &prev)?;
                        fam.extend(prev[h].iter().copied());
                        let fam = minimize_bits(fam);
                        if fam != prev[h] {
                            self.minimal[h] = fam;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Number of full passes until nothing changed (the last pass included).
    pub fn passes(&self) -> usize {
        self.passes
    }

    /// Minimal targets of `hp`, each as a sorted set of control pairs.
    pub fn minimal_targets(&self, hp: HeadPair) -> Vec<BTreeSet<(ControlId, ControlId)>> {
        self.minimal[self.pair_index(hp)]
            .iter()
            .map(|&s| self.bits(s).collect())
            .collect()
    }

    /// `hp ⊢* target`.
    pub fn force_long(&self, hp: HeadPair, target: &BTreeSet<(ControlId, ControlId)>) -> bool {
        let t = target.iter().fold(0u128, |acc, &(p, q)| acc | self.bit(p, q));
        self.minimal[self.pair_index(hp)].iter().any(|&s| s & !t == 0)
    }

    fn enabled_any(&self, q: ControlId, x: SymbolId) -> bool {
        !self.m.rules_for(q, x).is_empty()
    }

    fn step_a(&self, x: SymbolId, y: SymbolId, below: u128) -> u128 {
        let mut out = 0;
        for p in self.m.control_ids() {
            for q in self.m.control_ids() {
                let h = self.pair_index(HeadPair::new(p, x, q, y));
                if self.minimal[h].iter().any(|&s| s & !below == 0) {
                    out |= self.bit(p, q);
                }
            }
        }
        out
    }

    /// `A(α, β)` as control pairs, for stacks given bottom-up as runs.
    fn a_set(&self, alpha: &crate::machines::Stack, beta: &crate::machines::Stack) -> u128 {
        let (la, lb) = (alpha.len(), beta.len());
        let (short, long, short_is_left) = if la <= lb { (la, lb, true) } else { (lb, la, false) };
        // Runs top first, cut into aligned segments of equal symbol pairs.
        let mut ra: Vec<(SymbolId, u64)> = alpha.runs_top_first().collect();
        let mut rb: Vec<(SymbolId, u64)> = beta.runs_top_first().collect();
        ra.reverse();
        rb.reverse();
        let mut segs: Vec<(SymbolId, SymbolId, u64)> = Vec::new();
        let (mut i, mut j) = (ra.len(), rb.len());
        let (mut ca, mut cb) = (0u64, 0u64);
        let mut left = short;
        while left > 0 {
            if ca == 0 {
                i -= 1;
                ca = ra[i].1;
            }
            if cb == 0 {
                j -= 1;
                cb = rb[j].1;
            }
            let k = ca.min(cb).min(left);
            segs.push((ra[i].0, rb[j].0, k));
            ca -= k;
            cb -= k;
            left -= k;
        }
        let mut a = 0u128;
        if long > short {
            // The first unmatched symbol of the longer stack.
            let next = if short_is_left {
                if cb > 0 { rb[j].0 } else { rb[j - 1].0 }
            } else if ca > 0 {
                ra[i].0
            } else {
                ra[i - 1].0
            };
            for p in self.m.control_ids() {
                for q in self.m.control_ids() {
                    let live = if short_is_left { self.enabled_any(q, next) } else { self.enabled_any(p, next) };
                    if live {
                        a |= self.bit(p, q);
                    }
                }
            }
        }
        for &(x, y, len) in segs.iter().rev() {
            a = self.repeat(x, y, len, a);
        }
        a
    }

    fn repeat(&self, x: SymbolId, y: SymbolId, len: u64, mut a: u128) -> u128 {
        let mut seen: HashMap<u128, u64> = HashMap::new();
        let mut k = 0u64;
        while k < len {
            if let Some(&first) = seen.get(&a) {
                let cycle = k - first;
                let rest = (len - k) % cycle;
                for _ in 0..rest {
                    a = self.step_a(x, y, a);
                }
                return a;
            }
            seen.insert(a, k);
            a = self.step_a(x, y, a);
            k += 1;
        }
        a
    }

    /// The pairs `(p, q)` with `pα ≁ qβ`.
    pub fn not_bisimilar_controls(&self, alpha: &crate::machines::Stack, beta: &crate::machines::Stack) -> BTreeSet<(ControlId, ControlId)> {
        self.bits(self.a_set(alpha, beta)).collect()
    }

    pub fn decide(&self, c1: &Config, c2: &Config) -> Result<bool> {
        for c in [c1, c2] {
            if c.control.index() >= self.nq || c.stack.runs_top_first().any(|(x, _)| x.index() >= self.ns) {
                return Err(Error::invalid("configuration does not belong to the machine"));
            }
        }
        let a = self.a_set(&c1.stack, &c2.stack);
        Ok(a & self.bit(c1.control, c2.control) == 0)
    }
}

/// `hp ⊢* target`.
pub fn force_long(m: &Ppda, hp: HeadPair, target: &BTreeSet<(ControlId, ControlId)>) -> Result<bool> {
    check_heads(m, hp)?;
    Ok(ForceTable::compute(m, &VpdaOptions::default())?.force_long(hp, target))
}

/// Decides `c1 ∼ c2`.
pub fn vpda_decide(m: &Ppda, c1: &Config, c2: &Config) -> Result<bool> {
    ForceTable::compute(m, &VpdaOptions::default())?.decide(c1, c2)
}
