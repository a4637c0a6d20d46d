//! Probabilistic pushdown automata and the pLTS they generate.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::plts::ActionId;

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ControlId(pub u32);

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolId(pub u32);

impl ControlId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionClass {
    Return,
    Internal,
    Call,
}

impl ActionClass {
    /// Length of the pushed word this class requires.
    pub fn push_len(self) -> usize {
        match self {
            ActionClass::Return => 0,
            ActionClass::Internal => 1,
            ActionClass::Call => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionClass::Return => "return",
            ActionClass::Internal => "internal",
            ActionClass::Call => "call",
        }
    }
}

/// Right-hand side element `pα` of a rule, with `α` written top first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct HeadTarget {
    pub control: ControlId,
    pub push: Vec<SymbolId>,
}

impl HeadTarget {
    pub fn new(control: ControlId, push: Vec<SymbolId>) -> Self {
        HeadTarget { control, push }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Rule {
    pub control: ControlId,
    pub symbol: SymbolId,
    pub action: ActionId,
    pub target: Dist<HeadTarget>,
}

/// A stack, run-length encoded from the bottom up so that long counters
/// such as `I^(2^40)` stay small.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Stack {
    runs: Vec<(SymbolId, u64)>,
}

impl Stack {
    pub fn empty() -> Self {
        Stack::default()
    }

    /// Builds a stack from a word written top first.
    pub fn from_top_first(word: &[SymbolId]) -> Self {
        let mut s = Stack::empty();
        s.push_word(word);
        s
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn len(&self) -> u64 {
        self.runs.iter().map(|(_, n)| n).sum()
    }

    pub fn top(&self) -> Option<SymbolId> {
        self.runs.last().map(|(x, _)| *x)
    }

    /// Runs from the top down, as `(symbol, multiplicity)`.
    pub fn runs_top_first(&self) -> impl Iterator<Item = (SymbolId, u64)> + '_ {
        self.runs.iter().rev().copied()
    }

    pub fn push_run(&mut self, x: SymbolId, n: u64) {
        if n == 0 {
            return;
        }
        match self.runs.last_mut() {
            Some((y, m)) if *y == x => *m += n,
            _ => self.runs.push((x, n)),
        }
    }

    pub fn push(&mut self, x: SymbolId) {
        self.push_run(x, 1);
    }

    /// Pushes `word` so that its first symbol ends up on top.
    pub fn push_word(&mut self, word: &[SymbolId]) {
        for &x in word.iter().rev() {
            self.push(x);
        }
    }

    pub fn pop(&mut self) -> Option<SymbolId> {
        let (x, n) = self.runs.last_mut()?;
        let x = *x;
        *n -= 1;
        if *n == 0 {
            self.runs.pop();
        }
        Some(x)
    }

    /// The whole stack, top first. Only sensible for short stacks.
    pub fn to_vec(&self) -> Vec<SymbolId> {
        let mut out = Vec::new();
        for (x, n) in self.runs_top_first() {
            out.extend(std::iter::repeat(x).take(n as usize));
        }
        out
    }

    /// Appends `other` underneath this stack.
    pub fn concat_below(&self, other: &Stack) -> Stack {
        let mut out = other.clone();
        for &(x, n) in &self.runs {
            out.push_run(x, n);
        }
        out
    }
}

/// A configuration `qβ`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Config {
    pub control: ControlId,
    pub stack: Stack,
}

impl Config {
    pub fn new(control: ControlId, stack: Stack) -> Self {
        Config { control, stack }
    }

    /// Head `(q, X)` when the stack is nonempty.
    pub fn head(&self) -> Option<(ControlId, SymbolId)> {
        self.stack.top().map(|x| (self.control, x))
    }
}

#[derive(Clone, Debug)]
pub struct Ppda {
    controls: Vec<String>,
    symbols: Vec<String>,
    actions: Vec<String>,
    classes: Option<Vec<ActionClass>>,
    rules: Vec<Rule>,
    heads: Vec<Range<usize>>,
    control_lookup: HashMap<String, ControlId>,
    symbol_lookup: HashMap<String, SymbolId>,
    action_lookup: HashMap<String, ActionId>,
}

impl PartialEq for Ppda {
    fn eq(&self, other: &Self) -> bool {
        self.controls == other.controls
            && self.symbols == other.symbols
            && self.actions == other.actions
            && self.classes == other.classes
            && self.rules == other.rules
    }
}

impl Eq for Ppda {}

impl Ppda {
    pub fn controls(&self) -> &[String] {
        &self.controls
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn control_ids(&self) -> impl Iterator<Item = ControlId> {
        (0..self.controls.len() as u32).map(ControlId)
    }

    pub fn symbol_ids(&self) -> impl Iterator<Item = SymbolId> {
        (0..self.symbols.len() as u32).map(SymbolId)
    }

    pub fn action_ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.actions.len() as u32).map(ActionId)
    }

    pub fn control_name(&self, q: ControlId) -> &str {
        &self.controls[q.index()]
    }

    pub fn symbol_name(&self, x: SymbolId) -> &str {
        &self.symbols[x.index()]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a.index()]
    }

    pub fn control_id(&self, name: &str) -> Option<ControlId> {
        self.control_lookup.get(name).copied()
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.symbol_lookup.get(name).copied()
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.action_lookup.get(name).copied()
    }

    pub fn action_classes(&self) -> Option<&[ActionClass]> {
        self.classes.as_deref()
    }

    pub fn action_class(&self, a: ActionId) -> Option<ActionClass> {
        self.classes.as_ref().map(|c| c[a.index()])
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Rules with head `qX`, in declaration order.
    pub fn rules_for(&self, q: ControlId, x: SymbolId) -> &[Rule] {
        let i = q.index() * self.symbols.len() + x.index();
        &self.rules[self.heads[i].clone()]
    }

    /// Actions enabled by head `qX`, sorted.
    pub fn enabled(&self, q: ControlId, x: SymbolId) -> Vec<ActionId> {
        let mut acts: Vec<ActionId> = self.rules_for(q, x).iter().map(|r| r.action).collect();
        acts.sort();
        acts.dedup();
        acts
    }

    /// The transitions of `c` in the generated pLTS, one per rule with the
    /// head of `c`. Configurations with an empty stack are dead.
    pub fn step(&self, c: &Config) -> Vec<(ActionId, Dist<Config>)> {
        let Some((q, x)) = c.head() else {
            return Vec::new();
        };
        let mut rest = c.stack.clone();
        rest.pop();
        self.rules_for(q, x)
            .iter()
            .map(|r| {
                let d = r.target.map(|t| {
                    let mut stack = rest.clone();
                    stack.push_word(&t.push);
                    Config::new(t.control, stack)
                });
                (r.action, d)
            })
            .collect()
    }

    /// Display form of a configuration: the control name followed by the
    /// stack symbols, top first, with long runs abbreviated as `X^k`.
    pub fn config_name(&self, c: &Config) -> String {
        let mut out = self.control_name(c.control).to_string();
        for (x, n) in c.stack.runs_top_first() {
            let name = self.symbol_name(x);
            if n >= 4 {
                out.push_str(&format!("{name}^{n}"));
            } else {
                for _ in 0..n {
                    out.push_str(name);
                }
            }
        }
        out
    }

    pub fn head_target_name(&self, t: &HeadTarget) -> String {
        let mut out = self.control_name(t.control).to_string();
        for &x in &t.push {
            out.push_str(self.symbol_name(x));
        }
        out
    }

    pub fn classify(&self) -> SubclassReport {
        classify(self)
    }

    pub fn require_bpa(&self) -> Result<()> {
        if self.controls.len() == 1 {
            Ok(())
        } else {
            Err(Error::NotInClass {
                class: "pBPA",
                reason: format!("{} control states, expected exactly one", self.controls.len()),
            })
        }
    }

    pub fn require_oca(&self) -> Result<OcaRoles> {
        let report = self.classify();
        report.oca.ok_or_else(|| Error::NotInClass {
            class: "pOCA",
            reason: report.reasons("oca"),
        })
    }

    pub fn require_vpda(&self) -> Result<&[ActionClass]> {
        let Some(classes) = self.classes.as_deref() else {
            return Err(Error::NotInClass {
                class: "pvPDA",
                reason: "no return/internal/call partition of the actions was declared".into(),
            });
        };
        let report = self.classify();
        if report.vpda {
            Ok(classes)
        } else {
            Err(Error::NotInClass {
                class: "pvPDA",
                reason: report.reasons("vpda"),
            })
        }
    }

    /// The sub-machine on the given control states and stack symbols. Rules
    /// whose head lies inside are kept; such a rule must not leave the
    /// restriction.
    pub fn restrict(&self, controls: &[&str], symbols: &[&str]) -> Result<Ppda> {
        let mut b = PpdaBuilder::new();
        let mut cmap = HashMap::new();
        let mut smap = HashMap::new();
        for name in controls {
            let old = self
                .control_id(name)
                .ok_or_else(|| Error::invalid(format!("unknown control state `{name}`")))?;
            cmap.insert(old, b.control(name));
        }
        for name in symbols {
            let old = self
                .symbol_id(name)
                .ok_or_else(|| Error::invalid(format!("unknown stack symbol `{name}`")))?;
            smap.insert(old, b.symbol(name));
        }
        for a in &self.actions {
            b.action(a);
        }
        if let Some(classes) = &self.classes {
            b.set_classes(classes.clone())?;
        }
        for r in &self.rules {
            let (Some(&q), Some(&x)) = (cmap.get(&r.control), smap.get(&r.symbol)) else {
                continue;
            };
            let mut entries = Vec::new();
            for (t, w) in r.target.entries() {
                let p = cmap.get(&t.control);
                let push: Option<Vec<SymbolId>> =
                    t.push.iter().map(|y| smap.get(y).copied()).collect();
                match (p, push) {
                    (Some(&p), Some(push)) => entries.push((HeadTarget::new(p, push), w.clone())),
                    _ => {
                        return Err(Error::invalid(format!(
                            "rule for head {}{} leaves the restriction via {}",
                            self.control_name(r.control),
                            self.symbol_name(r.symbol),
                            self.head_target_name(t)
                        )))
                    }
                }
            }
            b.rule(q, x, r.action, Dist::new(entries)?)?;
        }
        Ok(b.build())
    }
}

#[derive(Default, Clone, Debug)]
pub struct PpdaBuilder {
    controls: Vec<String>,
    symbols: Vec<String>,
    actions: Vec<String>,
    classes: Option<Vec<ActionClass>>,
    rules: Vec<Rule>,
    seen: HashSet<Rule>,
    control_lookup: HashMap<String, ControlId>,
    symbol_lookup: HashMap<String, SymbolId>,
    action_lookup: HashMap<String, ActionId>,
}

impl PpdaBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn control(&mut self, name: &str) -> ControlId {
        if let Some(&id) = self.control_lookup.get(name) {
            return id;
        }
        let id = ControlId(self.controls.len() as u32);
        self.controls.push(name.to_string());
        self.control_lookup.insert(name.to_string(), id);
        id
    }

    pub fn symbol(&mut self, name: &str) -> SymbolId {
        if let Some(&id) = self.symbol_lookup.get(name) {
            return id;
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(name.to_string());
        self.symbol_lookup.insert(name.to_string(), id);
        id
    }

    pub fn action(&mut self, name: &str) -> ActionId {
        if let Some(&id) = self.action_lookup.get(name) {
            return id;
        }
        let id = ActionId(self.actions.len() as u32);
        self.actions.push(name.to_string());
        self.action_lookup.insert(name.to_string(), id);
        id
    }

    pub fn has_control(&self, name: &str) -> bool {
        self.control_lookup.contains_key(name)
    }

    pub fn has_symbol(&self, name: &str) -> bool {
        self.symbol_lookup.contains_key(name)
    }

    pub fn control_id(&self, name: &str) -> Option<ControlId> {
        self.control_lookup.get(name).copied()
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.symbol_lookup.get(name).copied()
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    /// Declares the return/internal/call class of every action declared so
    /// far, in declaration order.
    pub fn set_classes(&mut self, classes: Vec<ActionClass>) -> Result<()> {
        if classes.len() != self.actions.len() {
            return Err(Error::invalid(format!(
                "{} action classes for {} actions",
                classes.len(),
                self.actions.len()
            )));
        }
        self.classes = Some(classes);
        Ok(())
    }

    /// Adds a rule; a repeated identical rule is ignored.
    pub fn rule(
        &mut self,
        control: ControlId,
        symbol: SymbolId,
        action: ActionId,
        target: Dist<HeadTarget>,
    ) -> Result<()> {
        if control.index() >= self.controls.len()
            || symbol.index() >= self.symbols.len()
            || action.index() >= self.actions.len()
        {
            return Err(Error::invalid("rule refers to an undeclared name"));
        }
        for t in target.support() {
            if t.push.len() > 2 {
                return Err(Error::invalid(format!(
                    "rule for head {}{} pushes {} symbols, at most 2 allowed",
                    self.controls[control.index()],
                    self.symbols[symbol.index()],
                    t.push.len()
                )));
            }
            if t.control.index() >= self.controls.len()
                || t.push.iter().any(|y| y.index() >= self.symbols.len())
            {
                return Err(Error::invalid("rule target refers to an undeclared name"));
            }
        }
        let r = Rule {
            control,
            symbol,
            action,
            target,
        };
        if self.seen.insert(r.clone()) {
            self.rules.push(r);
        }
        Ok(())
    }

    pub fn build(self) -> Ppda {
        let mut rules = self.rules;
        rules.sort_by_key(|r| (r.control, r.symbol));
        let nsym = self.symbols.len();
        let mut heads = Vec::with_capacity(self.controls.len() * nsym);
        let mut i = 0;
        for q in 0..self.controls.len() as u32 {
            for x in 0..nsym as u32 {
                let start = i;
                while i < rules.len()
                    && rules[i].control == ControlId(q)
                    && rules[i].symbol == SymbolId(x)
                {
                    i += 1;
                }
                heads.push(start..i);
            }
        }
        let mut classes = self.classes;
        if let Some(c) = &mut classes {
            // actions declared after the partition default to internal
            c.resize(self.actions.len(), ActionClass::Internal);
        }
        Ppda {
            controls: self.controls,
            symbols: self.symbols,
            actions: self.actions,
            classes,
            rules,
            heads,
            control_lookup: self.control_lookup,
            symbol_lookup: self.symbol_lookup,
            action_lookup: self.action_lookup,
        }
    }
}

/// Which stack symbol plays the counter unit `I` and which the bottom
/// marker `Z`.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
pub struct OcaRoles {
    pub i: SymbolId,
    pub z: SymbolId,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Diagnostic {
    pub class: &'static str,
    pub rule: Option<usize>,
    pub message: String,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct SubclassReport {
    pub fully_probabilistic: bool,
    pub standard: bool,
    pub unary: bool,
    pub bpa: bool,
    pub oca: Option<OcaRoles>,
    pub vpda: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl SubclassReport {
    pub fn is_oca(&self) -> bool {
        self.oca.is_some()
    }

    fn reasons(&self, class: &str) -> String {
        let msgs: Vec<&str> = self
            .diagnostics
            .iter()
            .filter(|d| d.class == class)
            .map(|d| d.message.as_str())
            .collect();
        if msgs.is_empty() {
            "no reason recorded".into()
        } else {
            msgs.join("; ")
        }
    }
}

fn rule_text(m: &Ppda, r: &Rule) -> String {
    let rhs: Vec<String> = r
        .target
        .entries()
        .iter()
        .map(|(t, w)| format!("{w} {}", m.head_target_name(t)))
        .collect();
    format!(
        "{}{} -{}-> {}",
        m.control_name(r.control),
        m.symbol_name(r.symbol),
        m.action_name(r.action),
        rhs.join(" + ")
    )
}

/// Checks the counter discipline for a given role assignment and returns
/// the first violation.
fn oca_violation(m: &Ppda, roles: OcaRoles) -> Option<(usize, String)> {
    let (i, z) = (roles.i, roles.z);
    for (k, r) in m.rules.iter().enumerate() {
        for t in r.target.support() {
            let ok = if r.symbol == i {
                t.push.iter().all(|&y| y == i)
            } else {
                matches!(t.push.as_slice(), [y] if *y == z)
                    || matches!(t.push.as_slice(), [y, w] if *y == i && *w == z)
            };
            if !ok {
                return Some((k, format!("rule `{}` breaks the counter discipline", rule_text(m, r))));
            }
        }
    }
    None
}

fn classify(m: &Ppda) -> SubclassReport {
    let mut diagnostics = Vec::new();

    let mut seen = HashSet::new();
    let mut fully_probabilistic = true;
    for (k, r) in m.rules.iter().enumerate() {
        if !seen.insert((r.control, r.symbol, r.action)) {
            fully_probabilistic = false;
            diagnostics.push(Diagnostic {
                class: "fully_probabilistic",
                rule: Some(k),
                message: format!("second distribution for head and action in `{}`", rule_text(m, r)),
            });
        }
    }

    let mut standard = true;
    for (k, r) in m.rules.iter().enumerate() {
        if !r.target.is_dirac() {
            standard = false;
            diagnostics.push(Diagnostic {
                class: "standard",
                rule: Some(k),
                message: format!("`{}` is not a point mass", rule_text(m, r)),
            });
            break;
        }
    }

    let bpa = m.controls.len() == 1;
    if !bpa {
        diagnostics.push(Diagnostic {
            class: "bpa",
            rule: None,
            message: format!("{} control states", m.controls.len()),
        });
    }

    let oca = if m.symbols.len() != 2 {
        diagnostics.push(Diagnostic {
            class: "oca",
            rule: None,
            message: format!("{} stack symbols, a counter needs exactly two", m.symbols.len()),
        });
        None
    } else {
        let a = OcaRoles {
            i: SymbolId(0),
            z: SymbolId(1),
        };
        let b = OcaRoles {
            i: SymbolId(1),
            z: SymbolId(0),
        };
        // Prefer the assignment whose bottom marker is literally called Z.
        let order = if m.symbols[0] == "Z" { [b, a] } else { [a, b] };
        let mut found = None;
        let mut first_violation = None;
        for roles in order {
            match oca_violation(m, roles) {
                None => {
                    found = Some(roles);
                    break;
                }
                Some(v) => {
                    first_violation.get_or_insert(v);
                }
            }
        }
        if found.is_none() {
            let (k, message) = first_violation.expect("some assignment failed");
            diagnostics.push(Diagnostic {
                class: "oca",
                rule: Some(k),
                message,
            });
        }
        found
    };

    let vpda = match &m.classes {
        None => {
            diagnostics.push(Diagnostic {
                class: "vpda",
                rule: None,
                message: "no return/internal/call partition declared".into(),
            });
            false
        }
        Some(classes) => {
            let mut ok = true;
            for (k, r) in m.rules.iter().enumerate() {
                let class = classes[r.action.index()];
                if r.target.support().any(|t| t.push.len() != class.push_len()) {
                    ok = false;
                    diagnostics.push(Diagnostic {
                        class: "vpda",
                        rule: Some(k),
                        message: format!(
                            "`{}` uses {} action `{}` but pushes the wrong number of symbols",
                            rule_text(m, r),
                            class.name(),
                            m.action_name(r.action)
                        ),
                    });
                }
            }
            ok
        }
    };

    SubclassReport {
        fully_probabilistic,
        standard,
        unary: m.actions.len() == 1,
        bpa,
        oca,
        vpda,
        diagnostics,
    }
}

impl fmt::Display for SubclassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "fully_probabilistic: {}", self.fully_probabilistic)?;
        writeln!(f, "standard: {}", self.standard)?;
        writeln!(f, "unary: {}", self.unary)?;
        writeln!(f, "bpa: {}", self.bpa)?;
        writeln!(f, "oca: {}", self.oca.is_some())?;
        writeln!(f, "vpda: {}", self.vpda)?;
        for d in &self.diagnostics {
            writeln!(f, "  [{}] {}", d.class, d.message)?;
        }
        Ok(())
    }
}

impl Ppda {
    /// Every configuration reachable from `roots` within `depth` steps, as an
    /// explicit pLTS. Fails once more than `budget` configurations are needed.
    pub fn reachable_fragment(
        &self,
        roots: &[Config],
        depth: usize,
        budget: usize,
    ) -> Result<crate::system::Fragment<Config>> {
        crate::system::explore(self, roots, Some(depth), budget)
    }
}
