//! Simulated play-outs under script policies.

use crate::engine::{Action, GameState, UnitId};
use crate::rng::GameRng;
use crate::scripts::{script_action, ScriptId};

use super::budget::FmBudget;

/// Chooses the script for each action one side takes during a play-out.
pub trait Policy {
    fn next_script(&mut self, unit: UnitId) -> ScriptId;

    /// Called after an action chosen by this policy was executed.
    fn executed(&mut self) {}
}

/// The same script for every unit.
#[derive(Clone, Copy, Debug)]
pub struct FixedScript(pub ScriptId);

impl Policy for FixedScript {
    fn next_script(&mut self, _unit: UnitId) -> ScriptId {
        self.0
    }
}

/// How far a play-out runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Horizon {
    /// Stop after this many actions of the searching side. Opponent turns in
    /// between are played in full.
    Actions(usize),
    /// Stop when the searching side is about to start its n-th next turn.
    Turns(usize),
}

#[derive(Clone, Debug)]
pub struct Rollout {
    pub state: GameState,
    /// First action of the searching side and the script that produced it.
    pub first: Option<(Action, ScriptId)>,
    pub own_actions: usize,
}

/// Plays forward from `start` with `own` choosing scripts for the side to move
/// and `opponent` for the other side. Stops at a terminal state, the horizon,
/// or when the budget runs out; the reached state is returned either way.
pub fn rollout(
    start: &GameState,
    own: &mut dyn Policy,
    opponent: &mut dyn Policy,
    horizon: Horizon,
    budget: &mut FmBudget,
    rng: &mut GameRng,
) -> Rollout {
    let me = start.current_player();
    let start_turn = start.turn();
    let mut state = start.clone();
    let mut first = None;
    let mut own_actions = 0;
    loop {
        if state.is_terminal() || budget.exhausted() {
            break;
        }
        let p = state.current_player();
        let done = match horizon {
            Horizon::Actions(n) => own_actions >= n,
            Horizon::Turns(n) => p == me && state.turn() >= start_turn + n as u32,
        };
        if done {
            break;
        }
        let (action, script) = match state.next_acting_unit() {
            Some(unit) => {
                let policy: &mut dyn Policy = if p == me { &mut *own } else { &mut *opponent };
                let script = policy.next_script(unit);
                let action = script_action(script, &state, unit, rng).unwrap_or(Action::EndTurn);
                (action, Some(script))
            }
            None => (Action::EndTurn, None),
        };
        let executed = match budget.apply(&mut state, &action) {
            Ok(applied) => applied,
            Err(_) => budget.apply(&mut state, &Action::EndTurn).unwrap_or(false),
        };
        if !executed {
            break;
        }
        if p == me {
            if let Some(script) = script {
                own.executed();
                own_actions += 1;
                if first.is_none() {
                    first = Some((action, script));
                }
            }
        } else if script.is_some() {
            opponent.executed();
        }
    }
    Rollout {
        state,
        first,
        own_actions,
    }
}
