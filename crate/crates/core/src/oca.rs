//! Probabilistic one-counter automata: the underlying finite system with an
//! always-positive counter, the incompatible set INC, macrostep distances to
//! INC, and the non-bisimilarity filter built on them.
//!
//! Distances are counted in macrosteps; one macrostep is three transitions
//! of the lifted system, so lifted distances are three times larger.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::dist::Dist;
use crate::error::Result;
use crate::machines::{Config, ControlId, OcaRoles, Ppda, Stack};
use crate::oracle::Oracle;
use crate::plts::{Plts, PltsBuilder, StateId};
use crate::system::{Side, Union};

/// A configuration `pI^mZ`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub struct CounterConfig {
    pub control: ControlId,
    pub counter: u64,
}

impl CounterConfig {
    pub fn new(control: ControlId, counter: u64) -> Self {
        CounterConfig { control, counter }
    }
}

/// Which counter bound INC membership is tested up to. `Tight` uses `k`,
/// `Conservative` the larger `3k`; both give the same set.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Default)]
pub enum IncBound {
    #[default]
    Tight,
    Conservative,
}

/// Macrostep distance to INC.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistInc {
    Finite(u64),
    /// No path was found with the counter kept below the search limit.
    /// `exhausted` means the search ran out of configurations before
    /// reaching the limit, so no path exists at all.
    Infinite { cap: u64, exhausted: bool },
    /// A path of this length exists, but a shorter one might leave the
    /// searched region.
    AtMost(u64),
}

impl DistInc {
    pub fn is_certain_infinite(&self) -> bool {
        matches!(self, DistInc::Infinite { exhausted: true, .. })
    }
}

impl fmt::Display for DistInc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistInc::Finite(n) => write!(f, "{n}"),
            DistInc::Infinite { exhausted: true, .. } => write!(f, "ω"),
            DistInc::Infinite { cap, .. } => write!(f, "ω? (none within cap {cap})"),
            DistInc::AtMost(n) => write!(f, "≤{n}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FilterVerdict {
    NotBisimilar { left: DistInc, right: DistInc },
    Unknown { left: DistInc, right: DistInc },
}

/// A pOCA together with its counter roles.
pub struct Poca<'a> {
    m: &'a Ppda,
    roles: OcaRoles,
    underlying: Plts,
}

impl<'a> Poca<'a> {
    pub fn new(m: &'a Ppda) -> Result<Self> {
        let roles = m.require_oca()?;
        let underlying = build_underlying(m, roles);
        Ok(Poca { m, roles, underlying })
    }

    pub fn machine(&self) -> &Ppda {
        self.m
    }

    pub fn roles(&self) -> OcaRoles {
        self.roles
    }

    /// `k = |Q|`.
    pub fn k(&self) -> usize {
        self.m.controls().len()
    }

    /// The underlying pLTS over the control states; state `i` is control `i`.
    pub fn underlying(&self) -> &Plts {
        &self.underlying
    }

    pub fn config(&self, c: CounterConfig) -> Config {
        let mut stack = Stack::empty();
        stack.push(self.roles.z);
        stack.push_run(self.roles.i, c.counter);
        Config::new(c.control, stack)
    }

    /// Reads `pI^mZ` back; other configurations give `None`.
    pub fn counter_config(&self, c: &Config) -> Option<CounterConfig> {
        let runs: Vec<_> = c.stack.runs_top_first().collect();
        match runs.as_slice() {
            [(z, 1)] if *z == self.roles.z => Some(CounterConfig::new(c.control, 0)),
            [(i, m), (z, 1)] if *i == self.roles.i && *z == self.roles.z => Some(CounterConfig::new(c.control, *m)),
            _ => None,
        }
    }

    fn union(&self) -> Union<&Ppda, &Plts> {
        Union::new(self.m, &self.underlying)
    }

    /// Membership in INC: `pI^mZ ≁_k q` for every control `q` of the
    /// underlying system.
    fn incompatible(&self, oracle: &Oracle<'_, Union<&Ppda, &Plts>>, c: CounterConfig) -> bool {
        let k = self.k();
        let left = Side::Left(self.config(c));
        self.m
            .control_ids()
            .all(|q| !oracle.equiv(&left, &Side::Right(StateId(q.0)), k))
    }

    /// INC, computed over counters below the chosen bound.
    pub fn inc_set(&self, bound: IncBound) -> BTreeSet<CounterConfig> {
        let k = self.k() as u64;
        let limit = match bound {
            IncBound::Tight => k,
            IncBound::Conservative => 3 * k,
        };
        let u = self.union();
        let oracle = Oracle::new(&u);
        let mut out = BTreeSet::new();
        for p in self.m.control_ids() {
            for m in 0..limit {
                let c = CounterConfig::new(p, m);
                if self.incompatible(&oracle, c) {
                    out.insert(c);
                }
            }
        }
        out
    }

    /// Macrostep successors of `c`.
    pub fn macrosteps(&self, c: CounterConfig) -> BTreeSet<CounterConfig> {
        let top = if c.counter == 0 { self.roles.z } else { self.roles.i };
        let mut out = BTreeSet::new();
        for r in self.m.rules_for(c.control, top) {
            for t in r.target.support() {
                let pushed = t.push.iter().filter(|&&x| x == self.roles.i).count() as u64;
                let counter = if c.counter == 0 { pushed } else { c.counter - 1 + pushed };
                out.insert(CounterConfig::new(t.control, counter));
            }
        }
        out
    }

    /// Shortest macrostep distance from `c` to INC. The counter is kept at
    /// most `max(m, 3k) + cap` during the search.
    pub fn dist_inc(&self, inc: &BTreeSet<CounterConfig>, c: CounterConfig, cap: u64) -> DistInc {
        let k = self.k() as u64;
        let limit = c.counter.max(3 * k).saturating_add(cap);
        let mut seen: HashMap<CounterConfig, u64> = HashMap::new();
        let mut queue = VecDeque::new();
        seen.insert(c, 0);
        queue.push_back(c);
        let mut clipped = false;
        let mut found = None;
        while let Some(x) = queue.pop_front() {
            let d = seen[&x];
            if inc.contains(&x) {
                found = Some(d);
                break;
            }
            for y in self.macrosteps(x) {
                if y.counter > limit {
                    clipped = true;
                    continue;
                }
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(y) {
                    e.insert(d + 1);
                    queue.push_back(y);
                }
            }
        }
        match found {
            // A path leaving the region climbs above `limit` and comes back
            // below `k`, which takes at least this many macrosteps.
            Some(d) if !clipped || d <= (limit + 1 - c.counter) + (limit + 2).saturating_sub(k) => DistInc::Finite(d),
            Some(d) => DistInc::AtMost(d),
            None => DistInc::Infinite { cap, exhausted: !clipped },
        }
    }

    /// Never claims bisimilarity: answers `NotBisimilar` only when the two
    /// distances certainly differ.
    pub fn not_bisim_filter(&self, c1: CounterConfig, c2: CounterConfig, cap: u64) -> FilterVerdict {
        let inc = self.inc_set(IncBound::Tight);
        let left = self.dist_inc(&inc, c1, cap);
        let right = self.dist_inc(&inc, c2, cap);
        let differ = match (left, right) {
            (DistInc::Finite(a), DistInc::Finite(b)) => a != b,
            (DistInc::Finite(_), r) => r.is_certain_infinite(),
            (l, DistInc::Finite(_)) => l.is_certain_infinite(),
            _ => false,
        };
        if differ {
            FilterVerdict::NotBisimilar { left, right }
        } else {
            FilterVerdict::Unknown { left, right }
        }
    }
}

fn build_underlying(m: &Ppda, roles: OcaRoles) -> Plts {
    let mut b = PltsBuilder::new();
    for q in m.control_ids() {
        b.state(m.control_name(q));
    }
    for a in m.action_ids() {
        b.action(m.action_name(a));
    }
    for r in m.rules() {
        if r.symbol != roles.i {
            continue;
        }
        let d: Dist<StateId> = r.target.map(|t| StateId(t.control.0));
        b.transition(StateId(r.control.0), r.action, d);
    }
    b.build()
}

pub fn underlying(m: &Ppda) -> Result<Plts> {
    Ok(Poca::new(m)?.underlying)
}

pub fn inc_set(m: &Ppda) -> Result<BTreeSet<CounterConfig>> {
    Ok(Poca::new(m)?.inc_set(IncBound::Tight))
}

pub fn dist_inc(m: &Ppda, c: CounterConfig, cap: u64) -> Result<DistInc> {
    let p = Poca::new(m)?;
    let inc = p.inc_set(IncBound::Tight);
    Ok(p.dist_inc(&inc, c, cap))
}

pub fn not_bisim_filter(m: &Ppda, c1: CounterConfig, c2: CounterConfig, cap: u64) -> Result<FilterVerdict> {
    Ok(Poca::new(m)?.not_bisim_filter(c1, c2, cap))
}
