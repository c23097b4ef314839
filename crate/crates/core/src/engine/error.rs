use thiserror::Error;

use super::action::Action;
use super::unit::UnitId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("unknown unit {0}")]
    UnknownUnit(UnitId),
    #[error("unit {0} does not belong to the current player")]
    NotCurrentPlayer(UnitId),
    #[error("unit {0} has no action points left")]
    NoActionPoints(UnitId),
    #[error("game is over; action {0} rejected")]
    Terminal(Action),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("illegal action {action}: {reason}")]
    Illegal { action: Action, reason: &'static str },
}
