#![allow(dead_code)]

use std::path::PathBuf;

use pbisim_core::format::{parse_plts, parse_ppda};
use pbisim_core::{Dist, Plts, PltsBuilder, Ppda, StateId};

pub fn corpus(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn fig2() -> Plts {
    parse_plts(&corpus("fig2.plts")).unwrap()
}

pub fn ppda(name: &str) -> Ppda {
    parse_ppda(&corpus(name)).unwrap()
}

pub fn ids(l: &Plts, names: &[&str]) -> Vec<StateId> {
    names.iter().map(|n| l.state_id(n).unwrap()).collect()
}

/// Both systems side by side, actions identified by name. Returns the
/// offset of the second system's states.
pub fn disjoint_union(a: &Plts, b: &Plts) -> (Plts, u32) {
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

pub fn dirac(s: StateId) -> Dist<StateId> {
    Dist::dirac(s)
}
