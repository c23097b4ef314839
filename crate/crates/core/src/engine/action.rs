use std::fmt;

use serde::{Deserialize, Serialize};

use super::grid::Pos;
use super::unit::UnitId;

/// A command for the forward model. Every variant except `EndTurn` names the
/// acting unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "verb", rename_all = "snake_case")]
pub enum Action {
    Move { unit: UnitId, to: Pos },
    Attack { unit: UnitId, target: UnitId },
    Heal { unit: UnitId, target: UnitId },
    Push { unit: UnitId, target: UnitId },
    EndTurn,
}

impl Action {
    pub fn actor(&self) -> Option<UnitId> {
        match *self {
            Action::Move { unit, .. }
            | Action::Attack { unit, .. }
            | Action::Heal { unit, .. }
            | Action::Push { unit, .. } => Some(unit),
            Action::EndTurn => None,
        }
    }

    pub fn target_unit(&self) -> Option<UnitId> {
        match *self {
            Action::Attack { target, .. } | Action::Heal { target, .. } | Action::Push { target, .. } => {
                Some(target)
            }
            _ => None,
        }
    }

    pub fn is_end_turn(&self) -> bool {
        matches!(self, Action::EndTurn)
    }

    pub fn is_ability(&self) -> bool {
        matches!(self, Action::Heal { .. } | Action::Push { .. })
    }

    /// Sort rank of the verb: move, attack, heal, push, end turn.
    pub fn verb_rank(&self) -> u8 {
        match self {
            Action::Move { .. } => 0,
            Action::Attack { .. } => 1,
            Action::Heal { .. } => 2,
            Action::Push { .. } => 3,
            Action::EndTurn => 4,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Move { unit, to } => write!(f, "move u{unit} -> {to}"),
            Action::Attack { unit, target } => write!(f, "attack u{unit} -> u{target}"),
            Action::Heal { unit, target } => write!(f, "heal u{unit} -> u{target}"),
            Action::Push { unit, target } => write!(f, "push u{unit} -> u{target}"),
            Action::EndTurn => write!(f, "end turn"),
        }
    }
}
