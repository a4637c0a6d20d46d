//! Brute-force ground truth: `~_n` straight from its inductive definition,
//! and full bisimilarity on finite reachable parts.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::bisim::bisim_finite;
use crate::dist::Dist;
use crate::error::Result;
use crate::plts::ActionId;
use crate::rational::Rational;
use crate::system::{explore, ProbSystem};

type Succ<S> = Arc<Vec<(ActionId, Dist<S>)>>;

/// Memoized evaluator of `s ~_n t` over one system. The tables are shared
/// between queries, so asking for many pairs on one oracle is cheap.
pub struct Oracle<'a, T: ProbSystem> {
    sys: &'a T,
    memo: RwLock<HashMap<(T::State, T::State, usize), bool>>,
    succ: RwLock<HashMap<T::State, Succ<T::State>>>,
}

impl<'a, T: ProbSystem> Oracle<'a, T> {
    pub fn new(sys: &'a T) -> Self {
        Oracle {
            sys,
            memo: RwLock::new(HashMap::new()),
            succ: RwLock::new(HashMap::new()),
        }
    }

    pub fn system(&self) -> &T {
        self.sys
    }

    pub fn successors(&self, s: &T::State) -> Succ<T::State> {
        if let Some(v) = self.succ.read().unwrap().get(s) {
            return v.clone();
        }
        let v = Arc::new(self.sys.successors(s));
        self.succ.write().unwrap().insert(s.clone(), v.clone());
        v
    }

    /// `s ~_n t`.
    pub fn equiv(&self, s: &T::State, t: &T::State, n: usize) -> bool {
        if n == 0 || s == t {
            return true;
        }
        let key = if s <= t {
            (s.clone(), t.clone(), n)
        } else {
            (t.clone(), s.clone(), n)
        };
        if let Some(&v) = self.memo.read().unwrap().get(&key) {
            return v;
        }
        let v = self.compute(s, t, n);
        self.memo.write().unwrap().insert(key, v);
        v
    }

    fn compute(&self, s: &T::State, t: &T::State, n: usize) -> bool {
        let ss = self.successors(s);
        let ts = self.successors(t);
        let enabled = |v: &[(ActionId, Dist<T::State>)]| {
            let mut a: Vec<ActionId> = v.iter().map(|(a, _)| *a).collect();
            a.sort();
            a.dedup();
            a
        };
        if enabled(&ss) != enabled(&ts) {
            return false;
        }
        let matched = |from: &[(ActionId, Dist<T::State>)], to: &[(ActionId, Dist<T::State>)]| {
            from.iter().all(|(a, d)| {
                to.iter()
                    .any(|(b, e)| a == b && self.dist_equiv(d, e, n - 1))
            })
        };
        matched(&ss, &ts) && matched(&ts, &ss)
    }

    /// `d` and `e` agree on every `~_n` class.
    pub fn dist_equiv(&self, d: &Dist<T::State>, e: &Dist<T::State>, n: usize) -> bool {
        if n == 0 || d == e {
            return true;
        }
        let mut reps: Vec<(T::State, Rational, Rational)> = Vec::new();
        let mut add = |s: &T::State, w: &Rational, left: bool| {
            let slot = match reps.iter().position(|(r, _, _)| self.equiv(s, r, n)) {
                Some(i) => i,
                None => {
                    reps.push((s.clone(), Rational::zero(), Rational::zero()));
                    reps.len() - 1
                }
            };
            if left {
                reps[slot].1 += w;
            } else {
                reps[slot].2 += w;
            }
        };
        for (s, w) in d.entries() {
            add(s, w, true);
        }
        for (s, w) in e.entries() {
            add(s, w, false);
        }
        reps.iter().all(|(_, a, b)| a == b)
    }

    /// Least `n <= max` with `s` and `t` not `~_n`-equivalent.
    pub fn distinguishing_level(&self, s: &T::State, t: &T::State, max: usize) -> Option<usize> {
        (1..=max).find(|&n| !self.equiv(s, t, n))
    }
}

pub fn bounded_equiv<T: ProbSystem>(sys: &T, s: &T::State, t: &T::State, n: usize) -> bool {
    Oracle::new(sys).equiv(s, t, n)
}

/// Full bisimilarity, valid when everything reachable from `s` and `t` fits
/// in `budget` states; otherwise a budget error.
pub fn full_equiv_finite<T: ProbSystem>(
    sys: &T,
    s: &T::State,
    t: &T::State,
    budget: usize,
) -> Result<bool> {
    let frag = explore(sys, &[s.clone(), t.clone()], None, budget)?;
    let p = bisim_finite(&frag.plts);
    Ok(p.same_block(frag.roots[0], frag.roots[1]))
}
