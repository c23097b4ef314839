use std::fmt;

use serde::{Deserialize, Serialize};

use super::grid::Pos;

pub type UnitId = u32;

/// One of the two seats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    P0,
    P1,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::P0, Player::P1];

    pub fn opponent(self) -> Player {
        match self {
            Player::P0 => Player::P1,
            Player::P1 => Player::P0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Player::P0 => 0,
            Player::P1 => 1,
        }
    }

    pub fn from_index(i: usize) -> Player {
        if i == 0 {
            Player::P0
        } else {
            Player::P1
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "player{}", self.index())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ability {
    Heal,
    Push,
}

/// Up to two abilities, kept in declaration order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct AbilitySet([Option<Ability>; 2]);

impl AbilitySet {
    pub const MAX: usize = 2;

    pub fn from_slice(abilities: &[Ability]) -> Option<AbilitySet> {
        if abilities.len() > Self::MAX {
            return None;
        }
        let mut slots = [None; 2];
        for (slot, a) in slots.iter_mut().zip(abilities) {
            *slot = Some(*a);
        }
        Some(AbilitySet(slots))
    }

    pub fn iter(&self) -> impl Iterator<Item = Ability> + '_ {
        self.0.iter().flatten().copied()
    }

    pub fn contains(&self, a: Ability) -> bool {
        self.0.contains(&Some(a))
    }

    pub fn is_empty(&self) -> bool {
        self.0[0].is_none()
    }
}

/// A unit on the board. Stats are copied from its type at spawn time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Unit {
    pub id: UnitId,
    pub owner: Player,
    /// Index into the rule set's unit-kind table.
    pub kind: u16,
    pub pos: Pos,
    pub health: u32,
    pub max_health: u32,
    pub attack_damage: u32,
    pub movement_range: u32,
    pub attack_range: u32,
    pub vision_range: u32,
    pub abilities: AbilitySet,
    pub is_king: bool,
    pub action_points: u32,
}

impl Unit {
    pub fn damage(&self) -> u32 {
        self.max_health - self.health
    }

    pub fn can_attack(&self) -> bool {
        self.attack_damage > 0
    }
}
