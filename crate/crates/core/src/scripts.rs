//! The six portfolio scripts. A script maps an observed state and one of the
//! current player's units to a single legal action.
//!
//! Ties are resolved by lowest target id, then row-major tile order, so every
//! non-fallback branch is independent of the random stream.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Ability, Action, EngineError, GameState, Pos, TileKind, Unit, UnitId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("unit {0} has no legal action")]
    NoLegalAction(UnitId),
    #[error("unknown script code {0}")]
    UnknownCode(u8),
    #[error("unknown script name `{0}`")]
    UnknownName(String),
    #[error("a portfolio needs at least one script")]
    EmptyPortfolio,
    #[error("script {0} appears twice in the portfolio")]
    Duplicate(ScriptId),
}

/// Stable codes 0-5 used in genomes, logs and CSV exports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
#[repr(u8)]
pub enum ScriptId {
    AttackClosest = 0,
    AttackWeakest = 1,
    RunAway = 2,
    RunToFriends = 3,
    UseSpecialAbility = 4,
    Random = 5,
}

impl ScriptId {
    pub const COUNT: usize = 6;
    pub const ALL: [ScriptId; 6] = [
        ScriptId::AttackClosest,
        ScriptId::AttackWeakest,
        ScriptId::RunAway,
        ScriptId::RunToFriends,
        ScriptId::UseSpecialAbility,
        ScriptId::Random,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<ScriptId, ScriptError> {
        ScriptId::ALL
            .get(code as usize)
            .copied()
            .ok_or(ScriptError::UnknownCode(code))
    }

    pub fn name(self) -> &'static str {
        match self {
            ScriptId::AttackClosest => "attack_closest",
            ScriptId::AttackWeakest => "attack_weakest",
            ScriptId::RunAway => "run_away",
            ScriptId::RunToFriends => "run_to_friends",
            ScriptId::UseSpecialAbility => "use_special_ability",
            ScriptId::Random => "random",
        }
    }

    /// Short axis label.
    pub fn abbreviation(self) -> &'static str {
        match self {
            ScriptId::AttackClosest => "AC",
            ScriptId::AttackWeakest => "AW",
            ScriptId::RunAway => "RA",
            ScriptId::RunToFriends => "RF",
            ScriptId::UseSpecialAbility => "UA",
            ScriptId::Random => "RND",
        }
    }
}

impl TryFrom<u8> for ScriptId {
    type Error = ScriptError;

    fn try_from(code: u8) -> Result<Self, Self::Error> {
        ScriptId::from_code(code)
    }
}

impl From<ScriptId> for u8 {
    fn from(s: ScriptId) -> u8 {
        s.code()
    }
}

impl fmt::Display for ScriptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScriptId {
    type Err = ScriptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(code) = s.parse::<u8>() {
            return ScriptId::from_code(code);
        }
        ScriptId::ALL
            .into_iter()
            .find(|id| id.name() == s || id.abbreviation().eq_ignore_ascii_case(s))
            .ok_or_else(|| ScriptError::UnknownName(s.to_owned()))
    }
}

/// Non-empty set of scripts in canonical code order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<ScriptId>", into = "Vec<ScriptId>")]
pub struct Portfolio(Vec<ScriptId>);

impl Portfolio {
    /// Sorts into canonical order; rejects empty lists and duplicates.
    pub fn new(mut scripts: Vec<ScriptId>) -> Result<Portfolio, ScriptError> {
        if scripts.is_empty() {
            return Err(ScriptError::EmptyPortfolio);
        }
        scripts.sort();
        if let Some(w) = scripts.windows(2).find(|w| w[0] == w[1]) {
            return Err(ScriptError::Duplicate(w[0]));
        }
        Ok(Portfolio(scripts))
    }

    pub fn full() -> Portfolio {
        Portfolio(ScriptId::ALL.to_vec())
    }

    pub fn single(script: ScriptId) -> Portfolio {
        Portfolio(vec![script])
    }

    pub fn from_mask(mask: [bool; ScriptId::COUNT]) -> Result<Portfolio, ScriptError> {
        Portfolio::new(
            ScriptId::ALL
                .into_iter()
                .zip(mask)
                .filter_map(|(s, on)| on.then_some(s))
                .collect(),
        )
    }

    pub fn mask(&self) -> [bool; ScriptId::COUNT] {
        let mut m = [false; ScriptId::COUNT];
        for s in &self.0 {
            m[s.code() as usize] = true;
        }
        m
    }

    pub fn scripts(&self) -> &[ScriptId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, s: ScriptId) -> bool {
        self.0.binary_search(&s).is_ok()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ScriptId {
        self.0[rng.gen_range(0..self.0.len())]
    }

    /// `preferred` when it is in the portfolio, otherwise the first script.
    pub fn pick_or_first(&self, preferred: ScriptId) -> ScriptId {
        if self.contains(preferred) {
            preferred
        } else {
            self.0[0]
        }
    }
}

impl TryFrom<Vec<ScriptId>> for Portfolio {
    type Error = ScriptError;

    fn try_from(v: Vec<ScriptId>) -> Result<Self, Self::Error> {
        Portfolio::new(v)
    }
}

impl From<Portfolio> for Vec<ScriptId> {
    fn from(p: Portfolio) -> Self {
        p.0
    }
}

/// The action `script` picks for `unit` in `state`. Only the fallback branches
/// consume `rng`.
pub fn script_action<R: Rng + ?Sized>(
    script: ScriptId,
    state: &GameState,
    unit: UnitId,
    rng: &mut R,
) -> Result<Action, ScriptError> {
    let actions = state.legal_actions(unit)?;
    if actions.is_empty() {
        return Err(ScriptError::NoLegalAction(unit));
    }
    let u = *state.unit(unit).expect("legal_actions checked the unit");
    let chosen = match script {
        ScriptId::AttackClosest => attack_or_approach(state, &u, &actions, |e| (u.pos.distance(e.pos), e.id)),
        ScriptId::AttackWeakest => attack_or_approach(state, &u, &actions, |e| (e.health, e.id)),
        ScriptId::RunAway => {
            let enemies: Vec<Pos> = state.units().iter().filter(|e| e.owner != u.owner).map(|e| e.pos).collect();
            if enemies.is_empty() {
                None
            } else {
                best_move(&u, &actions, |p| -(summed_distance(p, &enemies) as i64))
            }
        }
        ScriptId::RunToFriends => {
            let friends: Vec<Pos> = state
                .units_of(u.owner)
                .filter(|f| f.id != u.id)
                .map(|f| f.pos)
                .collect();
            if friends.is_empty() {
                None
            } else {
                best_move(&u, &actions, |p| summed_distance(p, &friends) as i64)
            }
        }
        ScriptId::UseSpecialAbility => special_ability(state, &u, &actions),
        ScriptId::Random => None,
    };
    Ok(chosen.unwrap_or_else(|| *actions.choose(rng).expect("non-empty")))
}

fn summed_distance(p: Pos, others: &[Pos]) -> u32 {
    others.iter().map(|&o| p.distance(o)).sum()
}

/// Attack the enemy in range minimising `key`; otherwise walk toward the enemy
/// minimising `key` overall. `None` when no enemy is known or no move helps.
fn attack_or_approach<K: Ord>(
    state: &GameState,
    u: &Unit,
    actions: &[Action],
    key: impl Fn(&Unit) -> K,
) -> Option<Action> {
    let attack = actions
        .iter()
        .filter_map(|a| match a {
            Action::Attack { target, .. } => state.unit(*target).map(|t| (key(t), *a)),
            _ => None,
        })
        .min_by(|a, b| a.0.cmp(&b.0))
        .map(|(_, a)| a);
    if attack.is_some() {
        return attack;
    }
    let goal = state
        .units()
        .iter()
        .filter(|e| e.owner != u.owner)
        .min_by_key(|e| key(e))?;
    best_move(u, actions, |p| p.distance(goal.pos) as i64)
}

/// Move minimising `cost`, only if it strictly beats staying put. Moves arrive
/// in row-major order, so the first minimum wins ties.
fn best_move(u: &Unit, actions: &[Action], cost: impl Fn(Pos) -> i64) -> Option<Action> {
    let here = cost(u.pos);
    let mut best: Option<(i64, Action)> = None;
    for a in actions {
        if let Action::Move { to, .. } = *a {
            let c = cost(to);
            if c < here && best.is_none_or(|(bc, _)| c < bc) {
                best = Some((c, *a));
            }
        }
    }
    best.map(|(_, a)| a)
}

fn special_ability(state: &GameState, u: &Unit, actions: &[Action]) -> Option<Action> {
    for ability in u.abilities.iter() {
        let pick = match ability {
            Ability::Heal => actions
                .iter()
                .filter_map(|a| match a {
                    Action::Heal { target, .. } => state.unit(*target).map(|t| (t.damage(), t.id, *a)),
                    _ => None,
                })
                .filter(|&(dmg, _, _)| dmg > 0)
                .min_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)))
                .map(|(_, _, a)| a),
            Ability::Push => actions
                .iter()
                .filter_map(|a| match a {
                    Action::Push { target, .. } => {
                        let t = state.unit(*target)?;
                        if t.owner == u.owner {
                            return None;
                        }
                        let lands = state.map().tile(GameState::push_destination(u.pos, t.pos));
                        Some((lands != TileKind::Hole, t.id, *a))
                    }
                    _ => None,
                })
                .min_by_key(|&(no_kill, id, _)| (no_kill, id))
                .map(|(_, _, a)| a),
        };
        if pick.is_some() {
            return pick;
        }
    }
    None
}
