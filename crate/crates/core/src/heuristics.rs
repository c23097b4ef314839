//! State evaluation for the search agents: a material/health score (h1,
//! maximised) and the mean distance to the enemy (h2, minimised).

use serde::{Deserialize, Serialize};

use crate::engine::{GameState, Outcome, Player, Unit};

/// Weights of the combat score.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombatWeights {
    /// Per-unit existence bonus.
    pub alpha: f64,
    /// Score of a decided game; must exceed any material score.
    pub large: f64,
}

impl CombatWeights {
    pub const DEFAULT: CombatWeights = CombatWeights {
        alpha: 1.0,
        large: 1000.0,
    };
}

impl Default for CombatWeights {
    fn default() -> Self {
        CombatWeights::DEFAULT
    }
}

pub const LARGE: f64 = CombatWeights::DEFAULT.large;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub h1: f64,
    pub h2: f64,
}

impl ObjectiveVector {
    pub fn of(state: &GameState, player: Player) -> ObjectiveVector {
        ObjectiveVector {
            h1: combat_score(state, player),
            h2: mean_distance(state, player),
        }
    }

    /// Pareto dominance with h1 maximised and h2 minimised.
    pub fn dominates(&self, other: &ObjectiveVector) -> bool {
        self.h1 >= other.h1 && self.h2 <= other.h2 && (self.h1 > other.h1 || self.h2 < other.h2)
    }
}

pub fn combat_score(state: &GameState, player: Player) -> f64 {
    combat_score_with(state, player, CombatWeights::DEFAULT)
}

pub fn combat_score_with(state: &GameState, player: Player, w: CombatWeights) -> f64 {
    match state.outcome() {
        Outcome::Ongoing => {}
        Outcome::Draw => return 0.0,
        o if o.winner() == Some(player) => return w.large,
        _ => return -w.large,
    }
    let value = |u: &Unit| w.alpha + f64::from(u.health) / f64::from(u.max_health);
    state
        .units()
        .iter()
        .map(|u| if u.owner == player { value(u) } else { -value(u) })
        .sum()
}

/// Mean Chebyshev distance over all (own, enemy) unit pairs; 0 when either
/// side has no units.
pub fn mean_distance(state: &GameState, player: Player) -> f64 {
    let mut total = 0u64;
    let mut pairs = 0u64;
    for a in state.units_of(player) {
        for b in state.units_of(player.opponent()) {
            total += u64::from(a.pos.distance(b.pos));
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        total as f64 / pairs as f64
    }
}
