//! The probabilistic bisimulation game. One round runs from a pair of
//! states through three exchanges:
//!
//! 1. Attacker picks a transition of either state, Defender answers with an
//!    equally labelled transition of the other.
//! 2. Attacker picks a nonempty subset of one support, Defender a subset of
//!    the other support carrying at least as much probability.
//! 3. Attacker picks an element of one subset, Defender one of the other.
//!
//! Attacker wins when Defender cannot answer in step 1. A pair of dead
//! states ends the play in Defender's favour.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::plts::{ActionId, Plts, StateId};
use crate::rational::Rational;

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Attacker,
    Defender,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Attacker => Role::Defender,
            Role::Defender => Role::Attacker,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GamePosition {
    Pair {
        left: StateId,
        right: StateId,
    },
    DefTrans {
        attacked: Side,
        action: ActionId,
        chosen: Dist<StateId>,
        other: StateId,
    },
    DistPair {
        left: Dist<StateId>,
        right: Dist<StateId>,
    },
    DefSubset {
        chosen_side: Side,
        subset: Vec<StateId>,
        other: Dist<StateId>,
        rho: Rational,
    },
    SetPair {
        left: Vec<StateId>,
        right: Vec<StateId>,
    },
    DefPick {
        chosen_side: Side,
        state: StateId,
        other: Vec<StateId>,
    },
}

impl GamePosition {
    pub fn pair(left: StateId, right: StateId) -> Self {
        GamePosition::Pair { left, right }
    }

    pub fn owner(&self) -> Role {
        match self {
            GamePosition::Pair { .. } | GamePosition::DistPair { .. } | GamePosition::SetPair { .. } => {
                Role::Attacker
            }
            _ => Role::Defender,
        }
    }
}

/// Moves are ordered lexicographically by variant, then side, action and
/// target; the engine breaks ties by this order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Move {
    Transition {
        side: Side,
        action: ActionId,
        target: Dist<StateId>,
    },
    Respond {
        target: Dist<StateId>,
    },
    Subset {
        side: Side,
        subset: Vec<StateId>,
    },
    MatchSubset {
        subset: Vec<StateId>,
    },
    Pick {
        side: Side,
        state: StateId,
    },
    PickResponse {
        state: StateId,
    },
}

fn nonempty_subsets(d: &Dist<StateId>) -> Vec<(Vec<StateId>, Rational)> {
    let support: Vec<StateId> = d.support().copied().collect();
    let k = support.len();
    (1u32..(1 << k))
        .map(|mask| {
            let mut set = Vec::new();
            let mut mass = Rational::zero();
            for (i, (s, w)) in d.entries().iter().enumerate() {
                if mask & (1 << i) != 0 {
                    set.push(*s);
                    mass += w;
                }
            }
            (set, mass)
        })
        .collect()
}

/// Where a play currently stands.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Defender could not answer a transition.
    AttackerWins,
    /// Both states are dead.
    DefenderWins,
    /// The round budget ran out without an Attacker win.
    DefenderSurvives,
}

/// Game rules and a memoized solver over one finite pLTS.
pub struct Game {
    plts: Arc<Plts>,
    memo: RwLock<HashMap<(GamePosition, usize), bool>>,
}

impl Game {
    pub fn new(plts: Arc<Plts>) -> Self {
        Game {
            plts,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn plts(&self) -> &Plts {
        &self.plts
    }

    /// All legal moves at `pos`, sorted. Empty at a pair of dead states and
    /// where Defender cannot answer a transition.
    pub fn legal_moves(&self, pos: &GamePosition) -> Vec<Move> {
        let l = &*self.plts;
        let mut moves = match pos {
            GamePosition::Pair { left, right } => {
                let mut v = Vec::new();
                for (side, s) in [(Side::Left, *left), (Side::Right, *right)] {
                    for t in l.outgoing(s) {
                        v.push(Move::Transition {
                            side,
                            action: t.action,
                            target: t.target.clone(),
                        });
                    }
                }
                v
            }
            GamePosition::DefTrans { action, other, .. } => l
                .outgoing(*other)
                .iter()
                .filter(|t| t.action == *action)
                .map(|t| Move::Respond {
                    target: t.target.clone(),
                })
                .collect(),
            GamePosition::DistPair { left, right } => {
                let mut v = Vec::new();
                for (side, d) in [(Side::Left, left), (Side::Right, right)] {
                    for (subset, _) in nonempty_subsets(d) {
                        v.push(Move::Subset { side, subset });
                    }
                }
                v
            }
            GamePosition::DefSubset { other, rho, .. } => nonempty_subsets(other)
                .into_iter()
                .filter(|(_, mass)| mass >= rho)
                .map(|(subset, _)| Move::MatchSubset { subset })
                .collect(),
            GamePosition::SetPair { left, right } => {
                let mut v = Vec::new();
                for (side, set) in [(Side::Left, left), (Side::Right, right)] {
                    for &state in set {
                        v.push(Move::Pick { side, state });
                    }
                }
                v
            }
            GamePosition::DefPick { other, .. } => other
                .iter()
                .map(|&state| Move::PickResponse { state })
                .collect(),
        };
        moves.sort();
        moves.dedup();
        moves
    }

    /// The position after `mv`, and whether it starts a new round. Does not
    /// check legality.
    pub fn apply(&self, pos: &GamePosition, mv: &Move) -> Option<(GamePosition, bool)> {
        let next = match (pos, mv) {
            (GamePosition::Pair { left, right }, Move::Transition { side, action, target }) => {
                let other = if *side == Side::Left { *right } else { *left };
                GamePosition::DefTrans {
                    attacked: *side,
                    action: *action,
                    chosen: target.clone(),
                    other,
                }
            }
            (GamePosition::DefTrans { attacked, chosen, .. }, Move::Respond { target }) => {
                let (left, right) = match attacked {
                    Side::Left => (chosen.clone(), target.clone()),
                    Side::Right => (target.clone(), chosen.clone()),
                };
                GamePosition::DistPair { left, right }
            }
            (GamePosition::DistPair { left, right }, Move::Subset { side, subset }) => {
                let (chosen, other) = match side {
                    Side::Left => (left, right),
                    Side::Right => (right, left),
                };
                let rho = chosen.mass(|s| subset.binary_search(s).is_ok());
                GamePosition::DefSubset {
                    chosen_side: *side,
                    subset: subset.clone(),
                    other: other.clone(),
                    rho,
                }
            }
            (GamePosition::DefSubset { chosen_side, subset, .. }, Move::MatchSubset { subset: reply }) => {
                let (left, right) = match chosen_side {
                    Side::Left => (subset.clone(), reply.clone()),
                    Side::Right => (reply.clone(), subset.clone()),
                };
                GamePosition::SetPair { left, right }
            }
            (GamePosition::SetPair { left, right }, Move::Pick { side, state }) => {
                let other = match side {
                    Side::Left => right.clone(),
                    Side::Right => left.clone(),
                };
                GamePosition::DefPick {
                    chosen_side: *side,
                    state: *state,
                    other,
                }
            }
            (GamePosition::DefPick { chosen_side, state, .. }, Move::PickResponse { state: reply }) => {
                let (left, right) = match chosen_side {
                    Side::Left => (*state, *reply),
                    Side::Right => (*reply, *state),
                };
                return Some((GamePosition::Pair { left, right }, true));
            }
            _ => return None,
        };
        Some((next, false))
    }

    /// The outcome if the play has ended at `pos` with `rounds_left` rounds
    /// to go.
    pub fn terminal(&self, pos: &GamePosition, rounds_left: usize) -> Option<Outcome> {
        match pos {
            GamePosition::Pair { left, right } => {
                if self.plts.is_dead(*left) && self.plts.is_dead(*right) {
                    Some(Outcome::DefenderWins)
                } else if rounds_left == 0 {
                    Some(Outcome::DefenderSurvives)
                } else {
                    None
                }
            }
            GamePosition::DefTrans { .. } if self.legal_moves(pos).is_empty() => Some(Outcome::AttackerWins),
            _ => None,
        }
    }

    /// Can Attacker force a win from `pos` before `rounds_left` rounds
    /// (counting the current one) are used up?
    pub fn wins(&self, pos: &GamePosition, rounds_left: usize) -> bool {
        if rounds_left == 0 {
            return false;
        }
        let key = (pos.clone(), rounds_left);
        if let Some(&v) = self.memo.read().unwrap().get(&key) {
            return v;
        }
        let moves = self.legal_moves(pos);
        let step = |mv: &Move| {
            let (next, new_round) = self.apply(pos, mv).expect("legal move applies");
            self.wins(&next, if new_round { rounds_left - 1 } else { rounds_left })
        };
        let v = match pos.owner() {
            Role::Attacker => moves.iter().any(step),
            Role::Defender => {
                if moves.is_empty() {
                    matches!(pos, GamePosition::DefTrans { .. })
                } else {
                    moves.iter().all(step)
                }
            }
        };
        self.memo.write().unwrap().insert(key, v);
        v
    }

    /// Least `k <= max` with `wins(pos, k)`.
    pub fn rank(&self, pos: &GamePosition, max: usize) -> Option<usize> {
        (0..=max).find(|&k| self.wins(pos, k))
    }

    fn rounds_after(&self, pos: &GamePosition, mv: &Move, rounds_left: usize) -> (GamePosition, usize) {
        let (next, new_round) = self.apply(pos, mv).expect("legal move applies");
        (next, if new_round { rounds_left - 1 } else { rounds_left })
    }

    /// The engine's choice at `pos`. Attacker picks a fastest winning move
    /// when one exists; Defender picks a move that survives, or else the one
    /// that delays defeat longest. Remaining ties go to the least move.
    pub fn best_move(&self, pos: &GamePosition, rounds_left: usize) -> Option<Move> {
        let moves = self.legal_moves(pos);
        if moves.is_empty() || self.terminal(pos, rounds_left).is_some() {
            return None;
        }
        let scored = moves.into_iter().map(|mv| {
            let (next, k) = self.rounds_after(pos, &mv, rounds_left);
            // Rounds the attacker still needs from `next`; None = never.
            let need = self.rank(&next, k);
            (need, mv)
        });
        match pos.owner() {
            Role::Attacker => scored
                .min_by(|(a, m1), (b, m2)| match (a, b) {
                    (Some(x), Some(y)) => x.cmp(y).then(m1.cmp(m2)),
                    (Some(_), None) => std::cmp::Ordering::Less,
                    (None, Some(_)) => std::cmp::Ordering::Greater,
                    (None, None) => m1.cmp(m2),
                })
                .map(|(_, m)| m),
            Role::Defender => scored
                .min_by(|(a, m1), (b, m2)| match (a, b) {
                    (None, None) => m1.cmp(m2),
                    (None, Some(_)) => std::cmp::Ordering::Less,
                    (Some(_), None) => std::cmp::Ordering::Greater,
                    (Some(x), Some(y)) => y.cmp(x).then(m1.cmp(m2)),
                })
                .map(|(_, m)| m),
        }
    }

    /// Decides whether Attacker wins from `(s, t)` within `n` rounds, and if
    /// so returns a winning strategy.
    pub fn attacker_wins_within(&self, s: StateId, t: StateId, n: usize) -> (bool, Option<Strategy>) {
        let root = GamePosition::pair(s, t);
        if !self.wins(&root, n) {
            return (false, None);
        }
        let mut entries: HashMap<(GamePosition, usize), Move> = HashMap::new();
        let mut stack = vec![(root, n)];
        while let Some((pos, k)) = stack.pop() {
            if self.terminal(&pos, k).is_some() {
                continue;
            }
            match pos.owner() {
                Role::Attacker => {
                    if entries.contains_key(&(pos.clone(), k)) {
                        continue;
                    }
                    let mv = self.best_move(&pos, k).expect("winning position has a move");
                    let (next, k2) = self.rounds_after(&pos, &mv, k);
                    debug_assert!(self.wins(&next, k2));
                    entries.insert((pos, k), mv);
                    stack.push((next, k2));
                }
                Role::Defender => {
                    for mv in self.legal_moves(&pos) {
                        stack.push(self.rounds_after(&pos, &mv, k));
                    }
                }
            }
        }
        let mut entries: Vec<StrategyEntry> = entries
            .into_iter()
            .map(|((position, rounds_left), mv)| StrategyEntry {
                position,
                rounds_left,
                mv,
            })
            .collect();
        entries.sort_by(|a, b| b.rounds_left.cmp(&a.rounds_left).then_with(|| a.mv.cmp(&b.mv)));
        (true, Some(Strategy { horizon: n, entries }))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StrategyEntry {
    pub position: GamePosition,
    pub rounds_left: usize,
    #[serde(rename = "move")]
    pub mv: Move,
}

/// Attacker moves for every Attacker position reachable under the
/// strategy, annotated with the rounds remaining there.
#[derive(Clone, Debug, Serialize)]
pub struct Strategy {
    pub horizon: usize,
    pub entries: Vec<StrategyEntry>,
}

impl Strategy {
    pub fn lookup(&self, pos: &GamePosition, rounds_left: usize) -> Option<&Move> {
        self.entries
            .iter()
            .find(|e| e.rounds_left == rounds_left && &e.position == pos)
            .map(|e| &e.mv)
    }
}

/// `s ≁_n t` decided through the game, with a strategy as evidence.
pub fn attacker_wins_within(plts: &Plts, s: StateId, t: StateId, n: usize) -> (bool, Option<Strategy>) {
    Game::new(Arc::new(plts.clone())).attacker_wins_within(s, t, n)
}

/// Plays `strategy` against every Defender reply and reports whether each
/// play ends in an Attacker win within the horizon.
pub fn strategy_is_winning(game: &Game, s: StateId, t: StateId, strategy: &Strategy) -> bool {
    fn go(game: &Game, strategy: &Strategy, pos: GamePosition, k: usize) -> bool {
        match game.terminal(&pos, k) {
            Some(Outcome::AttackerWins) => return true,
            Some(_) => return false,
            None => {}
        }
        match pos.owner() {
            Role::Attacker => {
                let Some(mv) = strategy.lookup(&pos, k) else {
                    return false;
                };
                if !game.legal_moves(&pos).contains(mv) {
                    return false;
                }
                let (next, k2) = game.rounds_after(&pos, mv, k);
                go(game, strategy, next, k2)
            }
            Role::Defender => game.legal_moves(&pos).into_iter().all(|mv| {
                let (next, k2) = game.rounds_after(&pos, &mv, k);
                go(game, strategy, next, k2)
            }),
        }
    }
    go(game, strategy, GamePosition::pair(s, t), strategy.horizon)
}

/// The ordinary bisimulation game on a standard LTS, played directly on
/// Dirac transitions: does Attacker win from `(s, t)` within `n` rounds?
pub fn standard_attacker_wins(plts: &Plts, s: StateId, t: StateId, n: usize) -> bool {
    fn succ(l: &Plts, s: StateId) -> Vec<(ActionId, StateId)> {
        l.outgoing(s)
            .iter()
            .map(|t| {
                assert!(t.target.is_dirac(), "standard game needs Dirac transitions");
                (t.action, *t.target.support().next().unwrap())
            })
            .collect()
    }
    fn go(l: &Plts, s: StateId, t: StateId, n: usize, memo: &mut HashMap<(StateId, StateId, usize), bool>) -> bool {
        if n == 0 {
            return false;
        }
        if let Some(&v) = memo.get(&(s, t, n)) {
            return v;
        }
        let (ss, ts) = (succ(l, s), succ(l, t));
        let attack = |from: &[(ActionId, StateId)], to: &[(ActionId, StateId)], flip: bool, memo: &mut HashMap<_, _>| {
            from.iter().any(|&(a, x)| {
                to.iter().filter(|(b, _)| *b == a).all(|&(_, y)| {
                    let (l2, r2) = if flip { (y, x) } else { (x, y) };
                    go(l, l2, r2, n - 1, memo)
                })
            })
        };
        let v = attack(&ss, &ts, false, memo) || attack(&ts, &ss, true, memo);
        memo.insert((s, t, n), v);
        v
    }
    go(plts, s, t, n, &mut HashMap::new())
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("no session with id {0}")]
    NotFound(u64),
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("the game is over")]
    GameOver,
    #[error("invalid session request: {0}")]
    BadRequest(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct HistoryEntry {
    pub actor: Role,
    pub position: GamePosition,
    pub rounds_played: usize,
    #[serde(rename = "move")]
    pub mv: Move,
}

#[derive(Clone, Debug, Serialize)]
pub struct SessionView {
    pub id: u64,
    pub human: Role,
    pub horizon: usize,
    pub position: GamePosition,
    pub to_move: Role,
    /// Completed protocol rounds.
    pub rounds_played: usize,
    /// The same count in rounds of the lifted standard game.
    pub lifted_rounds_played: usize,
    pub rounds_left: usize,
    pub legal_moves: Vec<Move>,
    pub history: Vec<HistoryEntry>,
    pub outcome: Option<Outcome>,
    pub state_names: Vec<String>,
    pub action_names: Vec<String>,
}

pub struct Session {
    id: u64,
    game: Game,
    human: Role,
    horizon: usize,
    position: GamePosition,
    rounds_left: usize,
    history: Vec<HistoryEntry>,
}

impl Session {
    pub fn new(id: u64, plts: Arc<Plts>, left: StateId, right: StateId, human: Role, horizon: usize) -> Result<Self, SessionError> {
        if !plts.contains(left) || !plts.contains(right) {
            return Err(SessionError::BadRequest("unknown start state".into()));
        }
        let mut s = Session {
            id,
            game: Game::new(plts),
            human,
            horizon,
            position: GamePosition::pair(left, right),
            rounds_left: horizon,
            history: Vec::new(),
        };
        s.engine_turns();
        Ok(s)
    }

    fn outcome(&self) -> Option<Outcome> {
        self.game.terminal(&self.position, self.rounds_left)
    }

    fn push(&mut self, actor: Role, mv: Move) {
        let (next, new_round) = self.game.apply(&self.position, &mv).expect("legal move applies");
        self.history.push(HistoryEntry {
            actor,
            position: self.position.clone(),
            rounds_played: self.horizon - self.rounds_left,
            mv,
        });
        self.position = next;
        if new_round {
            self.rounds_left -= 1;
        }
    }

    fn engine_turns(&mut self) {
        while self.outcome().is_none() && self.position.owner() != self.human {
            match self.game.best_move(&self.position, self.rounds_left) {
                Some(mv) => self.push(self.human.other(), mv),
                None => break,
            }
        }
    }

    pub fn play(&mut self, mv: Move) -> Result<(), SessionError> {
        if self.outcome().is_some() {
            return Err(SessionError::GameOver);
        }
        if self.position.owner() != self.human {
            return Err(SessionError::IllegalMove("it is not your turn".into()));
        }
        let legal = self.game.legal_moves(&self.position);
        if !legal.contains(&mv) {
            return Err(SessionError::IllegalMove(explain_illegal(&self.game, &self.position, &mv)));
        }
        self.push(self.human, mv);
        self.engine_turns();
        Ok(())
    }

    pub fn view(&self) -> SessionView {
        let outcome = self.outcome();
        let rounds_played = self.horizon - self.rounds_left;
        SessionView {
            id: self.id,
            human: self.human,
            horizon: self.horizon,
            position: self.position.clone(),
            to_move: self.position.owner(),
            rounds_played,
            lifted_rounds_played: 3 * rounds_played,
            rounds_left: self.rounds_left,
            legal_moves: if outcome.is_some() {
                Vec::new()
            } else {
                self.game.legal_moves(&self.position)
            },
            history: self.history.clone(),
            outcome,
            state_names: self.game.plts().state_names().to_vec(),
            action_names: self.game.plts().action_names().to_vec(),
        }
    }
}

fn explain_illegal(game: &Game, pos: &GamePosition, mv: &Move) -> String {
    let l = game.plts();
    match (pos, mv) {
        (GamePosition::DefSubset { other, rho, .. }, Move::MatchSubset { subset }) => {
            if subset.iter().any(|s| other.prob(s).is_zero()) {
                "the subset must lie inside the support of the other distribution".into()
            } else {
                let mass = other.mass(|s| subset.contains(s));
                format!("the subset carries probability {mass}, at least {rho} is required")
            }
        }
        (GamePosition::DefTrans { action, .. }, Move::Respond { .. }) => format!(
            "the answer must be an `{}`-transition of the other state",
            l.action_name(*action)
        ),
        (GamePosition::DistPair { .. }, Move::Subset { .. }) => {
            "the subset must be a nonempty, sorted subset of the chosen support".into()
        }
        _ => {
            let kind = match pos {
                GamePosition::Pair { .. } => "a transition",
                GamePosition::DefTrans { .. } => "a response transition",
                GamePosition::DistPair { .. } => "a subset",
                GamePosition::DefSubset { .. } => "a matching subset",
                GamePosition::SetPair { .. } => "an element pick",
                GamePosition::DefPick { .. } => "an element response",
            };
            format!("this position expects {kind} that appears among the legal moves")
        }
    }
}

/// Concurrent store of independent sessions; moves within one session are
/// serialized by its mutex.
#[derive(Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<u64, Arc<Mutex<Session>>>>,
    next: AtomicU64,
}

impl SessionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_session(
        &self,
        plts: Arc<Plts>,
        left: StateId,
        right: StateId,
        human: Role,
        horizon: usize,
    ) -> Result<SessionView, SessionError> {
        let id = self.next.fetch_add(1, Ordering::Relaxed) + 1;
        let session = Session::new(id, plts, left, right, human, horizon)?;
        let view = session.view();
        self.sessions
            .write()
            .unwrap()
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(view)
    }

    fn get(&self, id: u64) -> Result<Arc<Mutex<Session>>, SessionError> {
        self.sessions
            .read()
            .unwrap()
            .get(&id)
            .cloned()
            .ok_or(SessionError::NotFound(id))
    }

    pub fn session_state(&self, id: u64) -> Result<SessionView, SessionError> {
        Ok(self.get(id)?.lock().unwrap().view())
    }

    pub fn play_move(&self, id: u64, mv: Move) -> Result<SessionView, SessionError> {
        let session = self.get(id)?;
        let mut s = session.lock().unwrap();
        s.play(mv)?;
        Ok(s.view())
    }
}
