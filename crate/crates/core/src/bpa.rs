//! Norms of pBPA stack symbols and the congruence property of `~_n`.
//!
//! Norms are counted in macrosteps of the probabilistic system. In the
//! lifted system every macrostep is three transitions, so the lifted norm
//! is exactly three times larger.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::machines::{Config, ControlId, HeadTarget, Ppda, Stack, SymbolId};
use crate::oracle::Oracle;
use crate::plts::ActionId;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Norm {
    Finite(BigUint),
    Unnormed,
}

impl Norm {
    pub fn finite(&self) -> Option<&BigUint> {
        match self {
            Norm::Finite(n) => Some(n),
            Norm::Unnormed => None,
        }
    }

    /// The same norm measured in the lifted system.
    pub fn lifted(&self) -> Norm {
        match self {
            Norm::Finite(n) => Norm::Finite(n * 3u32),
            Norm::Unnormed => Norm::Unnormed,
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Finite(n) => write!(f, "{n}"),
            Norm::Unnormed => write!(f, "ω"),
        }
    }
}

impl Serialize for Norm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Norm of every stack symbol, with the rule and target realising it.
#[derive(Clone, Debug)]
pub struct NormTable {
    norms: Vec<Norm>,
    /// For normed symbols: (rule index, target) of a shortest first step.
    best: Vec<Option<(usize, HeadTarget)>>,
}

impl NormTable {
    pub fn norm(&self, x: SymbolId) -> &Norm {
        &self.norms[x.index()]
    }

    pub fn norms(&self) -> &[Norm] {
        &self.norms
    }

    /// Norm of a word; `Unnormed` if any symbol is.
    pub fn word_norm(&self, word: &[SymbolId]) -> Norm {
        let mut total = BigUint::from(0u32);
        for x in word {
            match self.norm(*x) {
                Norm::Finite(n) => total += n,
                Norm::Unnormed => return Norm::Unnormed,
            }
        }
        Norm::Finite(total)
    }

    /// A shortest run emptying the stack `x`, as `(action, target)` steps
    /// applied to the top symbol. `None` if unnormed or longer than `max_len`.
    pub fn witness(&self, m: &Ppda, x: SymbolId, max_len: usize) -> Option<Vec<(ActionId, HeadTarget)>> {
        let n = self.norm(x).finite()?;
        if *n > BigUint::from(max_len) {
            return None;
        }
        let mut stack = vec![x];
        let mut out = Vec::new();
        while let Some(top) = stack.pop() {
            let (ri, t) = self.best[top.index()].clone()?;
            out.push((m.rules()[ri].action, t.clone()));
            stack.extend(t.push.iter().rev());
        }
        Some(out)
    }

    pub fn rows<'a>(&'a self, m: &'a Ppda) -> impl Iterator<Item = (&'a str, &'a Norm, Norm)> + 'a {
        m.symbol_ids()
            .map(move |x| (m.symbol_name(x), self.norm(x), self.norm(x).lifted()))
    }
}

/// Norms by a Dijkstra-style least fixpoint: a symbol is settled once every
/// symbol of some target of its rules is settled, smallest value first.
pub fn norms(m: &Ppda) -> Result<NormTable> {
    m.require_bpa()?;
    let ns = m.symbols().len();
    let mut norms: Vec<Option<BigUint>> = vec![None; ns];
    let mut best: Vec<Option<(usize, HeadTarget)>> = vec![None; ns];
    let mut heap: BinaryHeap<Reverse<(BigUint, usize, usize, usize)>> = BinaryHeap::new();
    let consider = |heap: &mut BinaryHeap<_>, norms: &[Option<BigUint>], ri: usize, ti: usize| {
        let r = &m.rules()[ri];
        let t = &r.target.entries()[ti].0;
        let mut v = BigUint::from(1u32);
        for y in &t.push {
            match &norms[y.index()] {
                Some(n) => v += n,
                None => return,
            }
        }
        heap.push(Reverse((v, r.symbol.index(), ri, ti)));
    };
    for ri in 0..m.rules().len() {
        for ti in 0..m.rules()[ri].target.len() {
            consider(&mut heap, &norms, ri, ti);
        }
    }
    while let Some(Reverse((v, x, ri, ti))) = heap.pop() {
        if norms[x].is_some() {
            continue;
        }
        norms[x] = Some(v);
        best[x] = Some((ri, m.rules()[ri].target.entries()[ti].0.clone()));
        // Targets mentioning x may have become computable.
        for (rj, r) in m.rules().iter().enumerate() {
            if norms[r.symbol.index()].is_some() {
                continue;
            }
            for (tj, (t, _)) in r.target.entries().iter().enumerate() {
                if t.push.iter().any(|y| y.index() == x) {
                    consider(&mut heap, &norms, rj, tj);
                }
            }
        }
    }
    Ok(NormTable {
        norms: norms
            .into_iter()
            .map(|n| n.map_or(Norm::Unnormed, Norm::Finite))
            .collect(),
        best,
    })
}

/// Checks that the table satisfies `‖X‖ = 1 + min ‖γ‖` over targets `γ`
/// of rules of `X`, and that unnormed symbols have no all-normed target.
pub fn verify_fixpoint(m: &Ppda, t: &NormTable) -> bool {
    m.symbol_ids().all(|x| {
        let candidates: Vec<BigUint> = m
            .rules()
            .iter()
            .filter(|r| r.symbol == x)
            .flat_map(|r| r.target.support())
            .filter_map(|g| t.word_norm(&g.push).finite().map(|n| n + 1u32))
            .collect();
        match t.norm(x) {
            Norm::Finite(n) => candidates.iter().min() == Some(n),
            Norm::Unnormed => candidates.is_empty(),
        }
    })
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum CongruenceReport {
    /// Some stack symbol enables no action, so the property is not claimed.
    Skipped { reason: String },
    Checked {
        left_premise: bool,
        right_premise: bool,
        conclusion: bool,
        holds: bool,
    },
}

fn bpa_config(word: &[SymbolId]) -> Config {
    Config::new(ControlId(0), Stack::from_top_first(word))
}

/// Evaluates `α ~_n α′ ∧ β ~_n β′ ⇒ αβ ~_n α′β′` with the oracle.
pub fn congruence_check(
    m: &Ppda,
    alpha: &[SymbolId],
    alpha2: &[SymbolId],
    beta: &[SymbolId],
    beta2: &[SymbolId],
    n: usize,
) -> Result<CongruenceReport> {
    m.require_bpa()?;
    let ns = m.symbols().len();
    if [alpha, alpha2, beta, beta2].iter().any(|w| w.iter().any(|x| x.index() >= ns)) {
        return Err(Error::invalid("word uses an unknown stack symbol"));
    }
    if let Some(x) = m.symbol_ids().find(|&x| m.enabled(ControlId(0), x).is_empty()) {
        return Ok(CongruenceReport::Skipped {
            reason: format!("stack symbol {} enables no action", m.symbol_name(x)),
        });
    }
    let o = Oracle::new(m);
    let eq = |u: &[SymbolId], v: &[SymbolId]| o.equiv(&bpa_config(u), &bpa_config(v), n);
    let cat = |u: &[SymbolId], v: &[SymbolId]| [u, v].concat();
    let left_premise = eq(alpha, alpha2);
    let right_premise = eq(beta, beta2);
    let conclusion = eq(&cat(alpha, beta), &cat(alpha2, beta2));
    Ok(CongruenceReport::Checked {
        left_premise,
        right_premise,
        conclusion,
        holds: !(left_premise && right_premise) || conclusion,
    })
}
