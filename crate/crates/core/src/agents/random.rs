use rand::seq::SliceRandom;

use crate::engine::{Action, GameState};
use crate::rng::GameRng;

use super::{Agent, AgentKind, Decision};

/// Uniform over every legal action of every unit that can still act.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomAgent;

impl Agent for RandomAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::Random
    }

    fn decide(&mut self, state: &GameState, _budget: u64, rng: &mut GameRng) -> Decision {
        let actions = state.all_legal_actions();
        Decision::plain(actions.choose(rng).copied().unwrap_or(Action::EndTurn))
    }
}
