//! A common view of explicit and generated systems, and bounded exploration
//! of their reachable part.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::machines::{Config, Ppda};
use crate::plts::{ActionId, Plts, PltsBuilder, StateId};

/// Anything that generates a (possibly infinite) image-finite pLTS.
pub trait ProbSystem: Sync {
    type State: Clone + Eq + Hash + Ord + Debug + Send + Sync;

    fn action_names(&self) -> Vec<String>;

    fn successors(&self, s: &Self::State) -> Vec<(ActionId, Dist<Self::State>)>;

    fn label(&self, s: &Self::State) -> String;
}

impl ProbSystem for Plts {
    type State = StateId;

    fn action_names(&self) -> Vec<String> {
        Plts::action_names(self).to_vec()
    }

    fn successors(&self, s: &StateId) -> Vec<(ActionId, Dist<StateId>)> {
        self.outgoing(*s)
            .iter()
            .map(|t| (t.action, t.target.clone()))
            .collect()
    }

    fn label(&self, s: &StateId) -> String {
        self.state_name(*s).to_string()
    }
}

impl ProbSystem for Ppda {
    type State = Config;

    fn action_names(&self) -> Vec<String> {
        self.actions().to_vec()
    }

    fn successors(&self, s: &Config) -> Vec<(ActionId, Dist<Config>)> {
        self.step(s)
    }

    fn label(&self, s: &Config) -> String {
        self.config_name(s)
    }
}

impl<T: ProbSystem> ProbSystem for &T {
    type State = T::State;

    fn action_names(&self) -> Vec<String> {
        (*self).action_names()
    }

    fn successors(&self, s: &Self::State) -> Vec<(ActionId, Dist<Self::State>)> {
        (*self).successors(s)
    }

    fn label(&self, s: &Self::State) -> String {
        (*self).label(s)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Side<A, B> {
    Left(A),
    Right(B),
}

/// Disjoint union of two systems. Actions are identified by name, so a
/// state of one side can be compared with a state of the other.
pub struct Union<A, B> {
    left: A,
    right: B,
    names: Vec<String>,
    right_map: Vec<ActionId>,
}

impl<A: ProbSystem, B: ProbSystem> Union<A, B> {
    pub fn new(left: A, right: B) -> Self {
        let mut names = left.action_names();
        let mut index: HashMap<String, ActionId> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), ActionId(i as u32)))
            .collect();
        let right_map = right
            .action_names()
            .into_iter()
            .map(|n| {
                *index.entry(n.clone()).or_insert_with(|| {
                    names.push(n);
                    ActionId(names.len() as u32 - 1)
                })
            })
            .collect();
        Union {
            left,
            right,
            names,
            right_map,
        }
    }

    pub fn left(&self) -> &A {
        &self.left
    }

    pub fn right(&self) -> &B {
        &self.right
    }
}

impl<A: ProbSystem, B: ProbSystem> ProbSystem for Union<A, B> {
    type State = Side<A::State, B::State>;

    fn action_names(&self) -> Vec<String> {
        self.names.clone()
    }

    fn successors(&self, s: &Self::State) -> Vec<(ActionId, Dist<Self::State>)> {
        match s {
            Side::Left(x) => self
                .left
                .successors(x)
                .into_iter()
                .map(|(a, d)| (a, d.map(|y| Side::Left(y.clone()))))
                .collect(),
            Side::Right(x) => self
                .right
                .successors(x)
                .into_iter()
                .map(|(a, d)| (self.right_map[a.index()], d.map(|y| Side::Right(y.clone()))))
                .collect(),
        }
    }

    fn label(&self, s: &Self::State) -> String {
        match s {
            Side::Left(x) => self.left.label(x),
            Side::Right(x) => self.right.label(x),
        }
    }
}

/// An explicit piece of a system: every state reachable from the roots in
/// at most `depth` steps. States at level `depth` form the frontier and
/// have their outgoing transitions omitted.
#[derive(Clone, Debug)]
pub struct Fragment<S> {
    pub plts: Plts,
    pub states: Vec<S>,
    pub levels: Vec<usize>,
    pub frontier: Vec<StateId>,
    pub roots: Vec<StateId>,
    pub depth: Option<usize>,
    lookup: HashMap<S, StateId>,
}

impl<S: Clone + Eq + Hash> Fragment<S> {
    pub fn id(&self, s: &S) -> Option<StateId> {
        self.lookup.get(s).copied()
    }

    pub fn state(&self, id: StateId) -> &S {
        &self.states[id.index()]
    }

    /// True when no state had its transitions cut off.
    pub fn is_complete(&self) -> bool {
        self.frontier.iter().all(|&s| self.plts.is_dead(s)) && self.depth.is_none()
    }
}

/// Breadth-first exploration from `roots`. With `depth == None` the whole
/// reachable part is materialized. Fails once more than `budget` states
/// would be needed.
pub fn explore<T: ProbSystem>(
    sys: &T,
    roots: &[T::State],
    depth: Option<usize>,
    budget: usize,
) -> Result<Fragment<T::State>> {
    let mut b = PltsBuilder::new();
    for name in sys.action_names() {
        b.action(&name);
    }
    let mut states: Vec<T::State> = Vec::new();
    let mut levels = Vec::new();
    let mut lookup: HashMap<T::State, StateId> = HashMap::new();
    let mut used_names: HashSet<String> = HashSet::new();
    let mut queue = VecDeque::new();

    let mut intern = |s: &T::State,
                      level: usize,
                      b: &mut PltsBuilder,
                      states: &mut Vec<T::State>,
                      levels: &mut Vec<usize>,
                      queue: &mut VecDeque<StateId>|
     -> Result<StateId> {
        if let Some(&id) = lookup.get(s) {
            return Ok(id);
        }
        if states.len() >= budget {
            return Err(Error::BudgetExceeded {
                explored: states.len() + 1,
                budget,
            });
        }
        let base = sys.label(s);
        let mut name = base.clone();
        let mut k = 1;
        while !used_names.insert(name.clone()) {
            k += 1;
            name = format!("{base}~{k}");
        }
        let id = b.fresh_state(&name)?;
        lookup.insert(s.clone(), id);
        states.push(s.clone());
        levels.push(level);
        queue.push_back(id);
        Ok(id)
    };

    let mut root_ids = Vec::new();
    for r in roots {
        root_ids.push(intern(r, 0, &mut b, &mut states, &mut levels, &mut queue)?);
    }
    let mut frontier = Vec::new();
    while let Some(id) = queue.pop_front() {
        let level = levels[id.index()];
        if depth.is_some_and(|d| level >= d) {
            frontier.push(id);
            continue;
        }
        let s = states[id.index()].clone();
        for (a, d) in sys.successors(&s) {
            let mut entries = Vec::with_capacity(d.len());
            for (t, w) in d.entries() {
                let tid = intern(t, level + 1, &mut b, &mut states, &mut levels, &mut queue)?;
                entries.push((tid, w.clone()));
            }
            b.transition(id, a, Dist::new(entries).expect("relabelled distribution"));
        }
    }
    drop(intern);
    frontier.sort();
    Ok(Fragment {
        plts: b.build(),
        states,
        levels,
        frontier,
        roots: root_ids,
        depth,
        lookup,
    })
}
