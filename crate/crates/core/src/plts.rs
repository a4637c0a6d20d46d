//! Explicit finite probabilistic labelled transition systems.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub u32);

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Debug for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: StateId,
    pub action: ActionId,
    pub target: Dist<StateId>,
}

/// A finite pLTS. States and actions keep the order in which they were
/// declared; transitions are grouped by source, in declaration order within
/// each group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plts {
    state_names: Vec<String>,
    action_names: Vec<String>,
    transitions: Vec<Transition>,
    outgoing: Vec<Range<usize>>,
    state_lookup: HashMap<String, StateId>,
    action_lookup: HashMap<String, ActionId>,
}

impl Plts {
    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.state_names.len() as u32).map(StateId)
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> + '_ {
        (0..self.action_names.len() as u32).map(ActionId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s.index()]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.action_names[a.index()]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_lookup.get(name).copied()
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.action_lookup.get(name).copied()
    }

    /// Like [`Plts::state_id`] but with an error naming the missing state.
    pub fn require_state(&self, name: &str) -> Result<StateId> {
        self.state_id(name)
            .ok_or_else(|| Error::invalid(format!("unknown state `{name}`")))
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn outgoing(&self, s: StateId) -> &[Transition] {
        &self.transitions[self.outgoing[s.index()].clone()]
    }

    /// Actions enabled in `s`, sorted and without repetition.
    pub fn enabled(&self, s: StateId) -> Vec<ActionId> {
        let mut acts: Vec<ActionId> = self.outgoing(s).iter().map(|t| t.action).collect();
        acts.sort();
        acts.dedup();
        acts
    }

    pub fn is_dead(&self, s: StateId) -> bool {
        self.outgoing[s.index()].is_empty()
    }

    /// At most one distribution per state and action.
    pub fn is_fully_probabilistic(&self) -> bool {
        let mut seen = HashSet::new();
        self.transitions
            .iter()
            .all(|t| seen.insert((t.source, t.action)))
    }

    /// Every distribution is a point mass.
    pub fn is_standard(&self) -> bool {
        self.transitions.iter().all(|t| t.target.is_dirac())
    }

    pub fn contains(&self, s: StateId) -> bool {
        s.index() < self.state_names.len()
    }
}

#[derive(Default, Clone, Debug)]
pub struct PltsBuilder {
    state_names: Vec<String>,
    action_names: Vec<String>,
    state_lookup: HashMap<String, StateId>,
    action_lookup: HashMap<String, ActionId>,
    transitions: Vec<Transition>,
    seen: HashSet<Transition>,
}

impl PltsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// A builder holding everything in `l`, to extend it.
    pub fn from_plts(l: &Plts) -> Self {
        let mut b = Self::new();
        for s in l.states() {
            b.state(l.state_name(s));
        }
        for a in l.actions() {
            b.action(l.action_name(a));
        }
        for t in l.transitions() {
            b.transition(t.source, t.action, t.target.clone());
        }
        b
    }

    /// Returns the state called `name`, declaring it if necessary.
    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(&id) = self.state_lookup.get(name) {
            return id;
        }
        let id = StateId(self.state_names.len() as u32);
        self.state_names.push(name.to_string());
        self.state_lookup.insert(name.to_string(), id);
        id
    }

    /// Declares a state that must not exist yet.
    pub fn fresh_state(&mut self, name: &str) -> Result<StateId> {
        if self.state_lookup.contains_key(name) {
            return Err(Error::invalid(format!("state `{name}` declared twice")));
        }
        Ok(self.state(name))
    }

    pub fn action(&mut self, name: &str) -> ActionId {
        if let Some(&id) = self.action_lookup.get(name) {
            return id;
        }
        let id = ActionId(self.action_names.len() as u32);
        self.action_names.push(name.to_string());
        self.action_lookup.insert(name.to_string(), id);
        id
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_lookup.get(name).copied()
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    /// Adds `source -action-> target`; an identical transition is ignored.
    pub fn transition(&mut self, source: StateId, action: ActionId, target: Dist<StateId>) {
        assert!(source.index() < self.state_names.len(), "unknown source");
        assert!(action.index() < self.action_names.len(), "unknown action");
        assert!(
            target.support().all(|s| s.index() < self.state_names.len()),
            "unknown target state"
        );
        let t = Transition {
            source,
            action,
            target,
        };
        if self.seen.insert(t.clone()) {
            self.transitions.push(t);
        }
    }

    pub fn build(self) -> Plts {
        let mut transitions = self.transitions;
        transitions.sort_by_key(|t| t.source);
        let mut outgoing = Vec::with_capacity(self.state_names.len());
        let mut i = 0;
        for s in 0..self.state_names.len() as u32 {
            let start = i;
            while i < transitions.len() && transitions[i].source == StateId(s) {
                i += 1;
            }
            outgoing.push(start..i);
        }
        Plts {
            state_names: self.state_names,
            action_names: self.action_names,
            transitions,
            outgoing,
            state_lookup: self.state_lookup,
            action_lookup: self.action_lookup,
        }
    }
}
