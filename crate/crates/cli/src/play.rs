//! Terminal play of the bisimulation game, and the arenas shared with the
//! HTTP sessions.

use std::io::{BufRead, Write};
use std::sync::Arc;

use pbisim_core::game::{GamePosition, Move, Outcome, Role, Session, Side};
use pbisim_core::system::explore;
use pbisim_core::{Dist, Plts, StateId};

use crate::model::{plts_state, ppda_config, Model};
use crate::{CliError, Exit};

/// A finite pLTS with the two start states of a play. For a pPDA this is
/// the unfolding from both configurations, deep enough for `horizon` rounds.
#[derive(Clone, Debug)]
pub struct Arena {
    pub plts: Arc<Plts>,
    pub left: StateId,
    pub right: StateId,
}

impl Arena {
    pub fn new(model: &Model, left: &str, right: &str, horizon: usize, budget: usize) -> Result<Arena, CliError> {
        match model {
            Model::Plts(l) => Ok(Arena {
                left: plts_state(l, left)?,
                right: plts_state(l, right)?,
                plts: Arc::new(l.clone()),
            }),
            Model::Ppda(m) => {
                let c1 = ppda_config(m, left)?;
                let c2 = ppda_config(m, right)?;
                let f = explore(m, &[c1, c2], Some(horizon + 1), budget)?;
                Ok(Arena {
                    left: f.roots[0],
                    right: f.roots[1],
                    plts: Arc::new(f.plts),
                })
            }
            Model::Afa(_) => Err(CliError::usage("games are played on .plts or .ppda models")),
        }
    }
}

pub fn dist_text(l: &Plts, d: &Dist<StateId>) -> String {
    if d.is_dirac() {
        return l.state_name(d.entries()[0].0).to_string();
    }
    d.entries()
        .iter()
        .map(|(s, w)| format!("{w} {}", l.state_name(*s)))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn set_text(l: &Plts, s: &[StateId]) -> String {
    let names: Vec<&str> = s.iter().map(|&x| l.state_name(x)).collect();
    format!("{{{}}}", names.join(", "))
}

fn side_text(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
    }
}

pub fn position_text(l: &Plts, p: &GamePosition) -> String {
    match p {
        GamePosition::Pair { left, right } => format!("({}, {})", l.state_name(*left), l.state_name(*right)),
        GamePosition::DefTrans {
            attacked,
            action,
            chosen,
            other,
        } => format!(
            "attacker played -{}-> {} on the {} side; defender answers from {}",
            l.action_name(*action),
            dist_text(l, chosen),
            side_text(*attacked),
            l.state_name(*other)
        ),
        GamePosition::DistPair { left, right } => format!("({}, {})", dist_text(l, left), dist_text(l, right)),
        GamePosition::DefSubset {
            chosen_side,
            subset,
            other,
            rho,
        } => format!(
            "attacker chose {} on the {} side; defender must match {} with mass >= {rho}",
            set_text(l, subset),
            side_text(*chosen_side),
            dist_text(l, other)
        ),
        GamePosition::SetPair { left, right } => format!("({}, {})", set_text(l, left), set_text(l, right)),
        GamePosition::DefPick {
            chosen_side,
            state,
            other,
        } => format!(
            "attacker picked {} on the {} side; defender picks from {}",
            l.state_name(*state),
            side_text(*chosen_side),
            set_text(l, other)
        ),
    }
}

pub fn move_text(l: &Plts, m: &Move) -> String {
    match m {
        Move::Transition { side, action, target } => {
            format!("{}: -{}-> {}", side_text(*side), l.action_name(*action), dist_text(l, target))
        }
        Move::Respond { target } => format!("respond with {}", dist_text(l, target)),
        Move::Subset { side, subset } => format!("{}: choose {}", side_text(*side), set_text(l, subset)),
        Move::MatchSubset { subset } => format!("match with {}", set_text(l, subset)),
        Move::Pick { side, state } => format!("{}: pick {}", side_text(*side), l.state_name(*state)),
        Move::PickResponse { state } => format!("pick {}", l.state_name(*state)),
    }
}

fn role_text(r: Role) -> &'static str {
    match r {
        Role::Attacker => "attacker",
        Role::Defender => "defender",
    }
}

/// Reads one move index per line from `input` until the play ends or the
/// input is exhausted.
pub fn play(arena: &Arena, human: Role, horizon: usize, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<Exit, CliError> {
    let l = arena.plts.clone();
    let mut session = Session::new(0, l.clone(), arena.left, arena.right, human, horizon)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let mut printed = 0;
    let mut line = String::new();
    loop {
        let view = session.view();
        for h in &view.history[printed..] {
            if h.actor != human {
                writeln!(out, "{} plays {}", role_text(h.actor), move_text(&l, &h.mv))?;
            }
        }
        printed = view.history.len();
        writeln!(out, "round {} of {}: {}", view.rounds_played + 1, horizon, position_text(&l, &view.position))?;
        if let Some(o) = view.outcome {
            let text = match o {
                Outcome::AttackerWins => "attacker wins",
                Outcome::DefenderWins => "defender wins",
                Outcome::DefenderSurvives => "defender survives the horizon",
            };
            writeln!(out, "{text}")?;
            return Ok(Exit::Success);
        }
        for (i, m) in view.legal_moves.iter().enumerate() {
            writeln!(out, "  [{i}] {}", move_text(&l, m))?;
        }
        loop {
            write!(out, "{}> ", role_text(human))?;
            out.flush()?;
            line.clear();
            if input.read_line(&mut line)? == 0 {
                writeln!(out)?;
                writeln!(out, "input ended, play abandoned")?;
                return Ok(Exit::Success);
            }
            match line.trim().parse::<usize>().ok().and_then(|i| view.legal_moves.get(i)) {
                Some(m) => {
                    session.play(m.clone()).map_err(|e| CliError::usage(e.to_string()))?;
                    break;
                }
                None => writeln!(out, "enter a number between 0 and {}", view.legal_moves.len().saturating_sub(1))?,
            }
        }
    }
}
