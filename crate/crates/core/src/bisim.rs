//! Partition refinement for probabilistic bisimilarity on finite systems.

use std::collections::{BTreeMap, BTreeSet};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::plts::{ActionId, Plts, StateId};
use crate::rational::Rational;

/// Mass that `d` assigns to each block of `p`, as a sorted vector.
fn block_masses(d: &Dist<StateId>, p: &Partition) -> Result<Vec<(usize, Rational)>> {
    let mut mass: BTreeMap<usize, Rational> = BTreeMap::new();
    for (s, w) in d.entries() {
        let b = p
            .block_of(*s)
            .ok_or_else(|| Error::invalid(format!("state {s:?} not covered by the partition")))?;
        *mass.entry(b).or_insert_with(Rational::zero) += w;
    }
    Ok(mass.into_iter().collect())
}

/// `d1(E) == d2(E)` for every block `E` of `p`.
pub fn dist_equiv(d1: &Dist<StateId>, d2: &Dist<StateId>, p: &Partition) -> Result<bool> {
    Ok(block_masses(d1, p)? == block_masses(d2, p)?)
}

type Signature = (usize, BTreeSet<(ActionId, Vec<(usize, Rational)>)>);

fn signature(plts: &Plts, s: StateId, p: &Partition) -> Result<Signature> {
    let block = p
        .block_of(s)
        .ok_or_else(|| Error::invalid(format!("state {s:?} not covered by the partition")))?;
    let mut moves = BTreeSet::new();
    for t in plts.outgoing(s) {
        moves.insert((t.action, block_masses(&t.target, p)?));
    }
    Ok((block, moves))
}

/// One round of refinement: `s` and `t` stay together iff they were together
/// in `p` and each one's transitions can be matched by the other's with
/// distributions that agree on the blocks of `p`.
pub fn refine_step(plts: &Plts, p: &Partition) -> Result<Partition> {
    if p.num_states() != plts.num_states() {
        return Err(Error::invalid(format!(
            "partition covers {} states, system has {}",
            p.num_states(),
            plts.num_states()
        )));
    }
    let sigs = plts
        .states()
        .map(|s| signature(plts, s, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(Partition::from_labels(&sigs))
}

/// The partition of `~_n`.
pub fn sim_n(plts: &Plts, n: usize) -> Partition {
    let mut p = Partition::trivial(plts.num_states());
    for _ in 0..n {
        let next = refine_step(plts, &p).expect("partition matches the system");
        if next == p {
            break;
        }
        p = next;
    }
    p
}

/// The bisimilarity partition together with the number of refinement rounds
/// that actually changed something.
pub fn bisim_finite_rounds(plts: &Plts) -> (Partition, usize) {
    let mut p = Partition::trivial(plts.num_states());
    let mut rounds = 0;
    loop {
        let next = refine_step(plts, &p).expect("partition matches the system");
        if next == p {
            return (p, rounds);
        }
        p = next;
        rounds += 1;
    }
}

pub fn bisim_finite(plts: &Plts) -> Partition {
    bisim_finite_rounds(plts).0
}

/// Checks the transfer property of `p` directly: related states match each
/// other's transitions up to `p`. A bisimilarity partition always passes.
pub fn is_bisimulation(plts: &Plts, p: &Partition) -> bool {
    let matched = |s: StateId, t: StateId| {
        plts.outgoing(s).iter().all(|m| {
            plts.outgoing(t).iter().any(|n| {
                n.action == m.action && dist_equiv(&m.target, &n.target, p).unwrap_or(false)
            })
        })
    };
    p.blocks().iter().all(|block| {
        block
            .iter()
            .all(|&s| block.iter().all(|&t| matched(s, t)))
    })
}
