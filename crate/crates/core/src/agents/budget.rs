use crate::engine::{Action, EngineError, GameState};

/// Counts forward-model advances against a per-decision limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FmBudget {
    limit: u64,
    used: u64,
}

impl FmBudget {
    pub fn new(limit: u64) -> FmBudget {
        FmBudget { limit, used: 0 }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.used
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.limit
    }

    /// Applies `action` in place if budget remains. Returns `Ok(false)` without
    /// touching the state when the budget is spent. Failed advances are not
    /// charged.
    pub fn apply(&mut self, state: &mut GameState, action: &Action) -> Result<bool, EngineError> {
        if self.exhausted() {
            return Ok(false);
        }
        state.apply(action)?;
        self.used += 1;
        Ok(true)
    }
}
