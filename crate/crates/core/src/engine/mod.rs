//! Grid-based, turn-based, multi-action game core.
//!
//! A [`GameState`] is an immutable-by-convention snapshot: [`GameState::advance`]
//! and [`GameState::end_turn`] return successors and never touch their input.
//! [`GameState::apply`] is the in-place variant used inside rollouts, where the
//! caller already owns a private copy. Both validate the whole action before
//! mutating anything.

mod action;
mod error;
mod grid;
mod unit;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use action::Action;
pub use error::EngineError;
pub use grid::{GridMap, Pos, TileKind};
pub use unit::{Ability, AbilitySet, Player, Unit, UnitId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WinRule {
    /// A player without a living king loses.
    KingDeath,
    /// A player without living units loses.
    LastSideStanding,
}

/// Effect applied once per round, after both players have ended their turn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoundEffect {
    None,
    Decay { amount: u32 },
}

/// Static rule set of a game mode. Shared between all states of a match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rules {
    pub name: String,
    pub map: GridMap,
    pub unit_kinds: Vec<String>,
    pub action_points: u32,
    pub turn_limit: u32,
    pub win_rule: WinRule,
    pub round_effect: RoundEffect,
    pub heal_amount: u32,
    pub push_enabled: bool,
    pub fog_enabled: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ongoing,
    WinPlayer0,
    WinPlayer1,
    Draw,
}

impl Outcome {
    pub fn is_terminal(self) -> bool {
        self != Outcome::Ongoing
    }

    pub fn winner(self) -> Option<Player> {
        match self {
            Outcome::WinPlayer0 => Some(Player::P0),
            Outcome::WinPlayer1 => Some(Player::P1),
            _ => None,
        }
    }

    pub fn win_for(p: Player) -> Outcome {
        match p {
            Player::P0 => Outcome::WinPlayer0,
            Player::P1 => Outcome::WinPlayer1,
        }
    }

    /// Same result with the seats exchanged.
    pub fn swapped(self) -> Outcome {
        match self {
            Outcome::WinPlayer0 => Outcome::WinPlayer1,
            Outcome::WinPlayer1 => Outcome::WinPlayer0,
            o => o,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GameState {
    rules: Arc<Rules>,
    /// Living units, sorted by id.
    units: Vec<Unit>,
    current_player: Player,
    first_player: Player,
    turn: u32,
    status: Outcome,
}

impl PartialEq for GameState {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.rules, &other.rules) || self.rules == other.rules)
            && self.units == other.units
            && self.current_player == other.current_player
            && self.first_player == other.first_player
            && self.turn == other.turn
            && self.status == other.status
    }
}

impl GameState {
    /// Fresh state at turn 0: `first_player` moves, its units get the per-turn
    /// allowance and the other side's action points are zeroed.
    pub fn new(rules: Arc<Rules>, mut units: Vec<Unit>, first_player: Player) -> Result<GameState, EngineError> {
        for u in &mut units {
            u.action_points = if u.owner == first_player { rules.action_points } else { 0 };
        }
        GameState::from_parts(rules, units, first_player, first_player, 0)
    }

    /// Builds a state from explicit parts, keeping unit action points as given.
    pub fn from_parts(
        rules: Arc<Rules>,
        mut units: Vec<Unit>,
        current_player: Player,
        first_player: Player,
        turn: u32,
    ) -> Result<GameState, EngineError> {
        units.sort_by_key(|u| u.id);
        for (i, u) in units.iter().enumerate() {
            if i > 0 && units[i - 1].id == u.id {
                return Err(EngineError::InvalidState(format!("duplicate unit id {}", u.id)));
            }
            if u.health == 0 || u.health > u.max_health {
                return Err(EngineError::InvalidState(format!(
                    "unit {} has health {} of {}",
                    u.id, u.health, u.max_health
                )));
            }
            if !rules.map.tile(u.pos).is_walkable() {
                return Err(EngineError::InvalidState(format!("unit {} stands on {:?}", u.id, rules.map.tile(u.pos))));
            }
            if units[..i].iter().any(|o| o.pos == u.pos) {
                return Err(EngineError::InvalidState(format!("two units on tile {}", u.pos)));
            }
            if u.kind as usize >= rules.unit_kinds.len() {
                return Err(EngineError::InvalidState(format!("unit {} has unknown kind {}", u.id, u.kind)));
            }
        }
        let mut state = GameState {
            rules,
            units,
            current_player,
            first_player,
            turn,
            status: Outcome::Ongoing,
        };
        state.status = state.evaluate_status();
        Ok(state)
    }

    pub fn rules(&self) -> &Rules {
        &self.rules
    }

    pub fn shared_rules(&self) -> &Arc<Rules> {
        &self.rules
    }

    pub fn map(&self) -> &GridMap {
        &self.rules.map
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn unit(&self, id: UnitId) -> Option<&Unit> {
        self.units
            .binary_search_by_key(&id, |u| u.id)
            .ok()
            .map(|i| &self.units[i])
    }

    pub fn units_of(&self, player: Player) -> impl Iterator<Item = &Unit> + '_ {
        self.units.iter().filter(move |u| u.owner == player)
    }

    pub fn unit_at(&self, p: Pos) -> Option<&Unit> {
        self.units.iter().find(|u| u.pos == p)
    }

    pub fn is_free(&self, p: Pos) -> bool {
        self.rules.map.tile(p).is_walkable() && self.unit_at(p).is_none()
    }

    pub fn current_player(&self) -> Player {
        self.current_player
    }

    pub fn first_player(&self) -> Player {
        self.first_player
    }

    pub fn turn(&self) -> u32 {
        self.turn
    }

    pub fn outcome(&self) -> Outcome {
        self.status
    }

    pub fn is_terminal(&self) -> bool {
        self.status.is_terminal()
    }

    /// Sum of action points left for `player`.
    pub fn action_points_of(&self, player: Player) -> u32 {
        self.units_of(player).map(|u| u.action_points).sum()
    }

    fn evaluate_status(&self) -> Outcome {
        let alive = |p: Player| match self.rules.win_rule {
            WinRule::KingDeath => self.units.iter().any(|u| u.owner == p && u.is_king),
            WinRule::LastSideStanding => self.units.iter().any(|u| u.owner == p),
        };
        match (alive(Player::P0), alive(Player::P1)) {
            (true, true) if self.turn >= self.rules.turn_limit => Outcome::Draw,
            (true, true) => Outcome::Ongoing,
            (true, false) => Outcome::WinPlayer0,
            (false, true) => Outcome::WinPlayer1,
            (false, false) => Outcome::Draw,
        }
    }

    /// Where a unit standing on `target` ends up when pushed from `from`:
    /// one tile along the dominant axis of `from -> target`, ties toward x.
    pub fn push_destination(from: Pos, target: Pos) -> Pos {
        let dx = target.x - from.x;
        let dy = target.y - from.y;
        if dx.abs() >= dy.abs() {
            target.offset(dx.signum(), 0)
        } else {
            target.offset(0, dy.signum())
        }
    }

    fn push_lands_ok(&self, from: Pos, target: Pos) -> bool {
        let dest = Self::push_destination(from, target);
        match self.rules.map.tile(dest) {
            TileKind::Hole => true,
            TileKind::Plain => self.unit_at(dest).is_none(),
            TileKind::Impassable => false,
        }
    }

    fn heal_usable(&self, u: &Unit) -> bool {
        u.abilities.contains(Ability::Heal) && self.rules.heal_amount > 0
    }

    fn push_usable(&self, u: &Unit) -> bool {
        u.abilities.contains(Ability::Push) && self.rules.push_enabled
    }

    /// Tiles the unit can move to this action.
    pub fn reachable_tiles(&self, u: &Unit) -> Vec<Pos> {
        let near: Vec<Pos> = self
            .units
            .iter()
            .filter(|o| o.pos.distance(u.pos) <= u.movement_range)
            .map(|o| o.pos)
            .collect();
        self.rules.map.reachable(u.pos, u.movement_range, |p| near.contains(&p))
    }

    /// Whether `u` could execute at least one action right now, ignoring whose
    /// turn it is. Cheaper than building the full action list.
    pub fn unit_has_action(&self, u: &Unit) -> bool {
        if u.action_points == 0 {
            return false;
        }
        if u.movement_range > 0 && u.pos.neighbours().any(|n| self.is_free(n)) {
            return true;
        }
        if u.can_attack()
            && self
                .units
                .iter()
                .any(|e| e.owner != u.owner && u.pos.distance(e.pos) <= u.attack_range)
        {
            return true;
        }
        if self.heal_usable(u) {
            // self-heal is always available
            return true;
        }
        self.push_usable(u)
            && self
                .units
                .iter()
                .any(|t| t.id != u.id && u.pos.distance(t.pos) == 1 && self.push_lands_ok(u.pos, t.pos))
    }

    pub fn player_can_act(&self, player: Player) -> bool {
        self.units_of(player).any(|u| self.unit_has_action(u))
    }

    /// Lowest-id unit of the current player that can still act.
    pub fn next_acting_unit(&self) -> Option<UnitId> {
        if self.is_terminal() {
            return None;
        }
        self.units_of(self.current_player)
            .find(|u| self.unit_has_action(u))
            .map(|u| u.id)
    }

    /// All units of the current player that can still act, by ascending id.
    pub fn acting_units(&self) -> Vec<UnitId> {
        if self.is_terminal() {
            return Vec::new();
        }
        self.units_of(self.current_player)
            .filter(|u| self.unit_has_action(u))
            .map(|u| u.id)
            .collect()
    }

    fn checked_actor(&self, id: UnitId) -> Result<&Unit, EngineError> {
        let u = self.unit(id).ok_or(EngineError::UnknownUnit(id))?;
        if u.owner != self.current_player {
            return Err(EngineError::NotCurrentPlayer(id));
        }
        Ok(u)
    }

    /// Every legal non-end-turn action of a unit, ordered by verb, then target
    /// position (row-major), then target id. Empty when the game is over or the
    /// unit has no action points.
    pub fn legal_actions(&self, id: UnitId) -> Result<Vec<Action>, EngineError> {
        if self.is_terminal() {
            return self.unit(id).map(|_| Vec::new()).ok_or(EngineError::UnknownUnit(id));
        }
        let u = *self.checked_actor(id)?;
        let mut out = Vec::new();
        self.extend_legal_actions(&u, &mut out);
        Ok(out)
    }

    fn extend_legal_actions(&self, u: &Unit, out: &mut Vec<Action>) {
        if u.action_points == 0 {
            return;
        }
        let id = u.id;
        out.extend(
            self.reachable_tiles(u)
                .into_iter()
                .map(|to| Action::Move { unit: id, to }),
        );
        let mut targets: Vec<&Unit> = Vec::new();
        let by_pos = |a: &&Unit, b: &&Unit| (a.pos, a.id).cmp(&(b.pos, b.id));
        if u.can_attack() {
            targets.extend(
                self.units
                    .iter()
                    .filter(|e| e.owner != u.owner && u.pos.distance(e.pos) <= u.attack_range),
            );
            targets.sort_by(by_pos);
            out.extend(targets.iter().map(|e| Action::Attack { unit: id, target: e.id }));
        }
        if self.heal_usable(u) {
            targets.clear();
            targets.extend(
                self.units
                    .iter()
                    .filter(|f| f.owner == u.owner && u.pos.distance(f.pos) <= u.attack_range),
            );
            targets.sort_by(by_pos);
            out.extend(targets.iter().map(|f| Action::Heal { unit: id, target: f.id }));
        }
        if self.push_usable(u) {
            targets.clear();
            targets.extend(
                self.units
                    .iter()
                    .filter(|t| t.id != id && u.pos.distance(t.pos) == 1 && self.push_lands_ok(u.pos, t.pos)),
            );
            targets.sort_by(by_pos);
            out.extend(targets.iter().map(|t| Action::Push { unit: id, target: t.id }));
        }
    }

    /// Legal actions of every unit of the current player, concatenated by unit id.
    pub fn all_legal_actions(&self) -> Vec<Action> {
        let mut out = Vec::new();
        if self.is_terminal() {
            return out;
        }
        for u in self.units_of(self.current_player) {
            self.extend_legal_actions(u, &mut out);
        }
        out
    }

    /// Checks an action against the current state without mutating it.
    pub fn validate(&self, action: &Action) -> Result<(), EngineError> {
        if self.is_terminal() {
            return Err(EngineError::Terminal(*action));
        }
        let Some(id) = action.actor() else {
            return Ok(());
        };
        let u = self.checked_actor(id)?;
        if u.action_points == 0 {
            return Err(EngineError::NoActionPoints(id));
        }
        let illegal = |reason| EngineError::Illegal { action: *action, reason };
        match *action {
            Action::Move { to, .. } => {
                if !self.is_free(to) {
                    return Err(illegal("destination is not a free walkable tile"));
                }
                if u.pos.distance(to) > u.movement_range {
                    return Err(illegal("destination beyond movement range"));
                }
                if self.reachable_tiles(u).binary_search(&to).is_err() {
                    return Err(illegal("destination not reachable"));
                }
            }
            Action::Attack { target, .. } => {
                let t = self.unit(target).ok_or(EngineError::UnknownUnit(target))?;
                if !u.can_attack() {
                    return Err(illegal("unit cannot attack"));
                }
                if t.owner == u.owner {
                    return Err(illegal("cannot attack a friendly unit"));
                }
                if u.pos.distance(t.pos) > u.attack_range {
                    return Err(illegal("target out of attack range"));
                }
            }
            Action::Heal { target, .. } => {
                let t = self.unit(target).ok_or(EngineError::UnknownUnit(target))?;
                if !self.heal_usable(u) {
                    return Err(illegal("unit cannot heal"));
                }
                if t.owner != u.owner {
                    return Err(illegal("cannot heal an enemy unit"));
                }
                if u.pos.distance(t.pos) > u.attack_range {
                    return Err(illegal("target out of heal range"));
                }
            }
            Action::Push { target, .. } => {
                let t = self.unit(target).ok_or(EngineError::UnknownUnit(target))?;
                if !self.push_usable(u) {
                    return Err(illegal("unit cannot push"));
                }
                if t.id == u.id || u.pos.distance(t.pos) != 1 {
                    return Err(illegal("push target must be adjacent"));
                }
                if !self.push_lands_ok(u.pos, t.pos) {
                    return Err(illegal("push destination blocked"));
                }
            }
            Action::EndTurn => unreachable!(),
        }
        Ok(())
    }

    /// Forward model: the successor of `action`. Never mutates `self`.
    pub fn advance(&self, action: &Action) -> Result<GameState, EngineError> {
        self.validate(action)?;
        let mut next = self.clone();
        next.apply_validated(action);
        Ok(next)
    }

    /// In-place forward model. On error the state is left untouched.
    pub fn apply(&mut self, action: &Action) -> Result<(), EngineError> {
        self.validate(action)?;
        self.apply_validated(action);
        Ok(())
    }

    /// Ends the current player's turn.
    pub fn end_turn(&self) -> Result<GameState, EngineError> {
        self.advance(&Action::EndTurn)
    }

    fn index_of(&self, id: UnitId) -> usize {
        self.units.binary_search_by_key(&id, |u| u.id).expect("validated unit")
    }

    fn apply_validated(&mut self, action: &Action) {
        let Some(actor) = action.actor() else {
            self.end_turn_in_place();
            return;
        };
        let ai = self.index_of(actor);
        match *action {
            Action::Move { to, .. } => self.units[ai].pos = to,
            Action::Attack { target, .. } => {
                let dmg = self.units[ai].attack_damage;
                let ti = self.index_of(target);
                let t = &mut self.units[ti];
                t.health = t.health.saturating_sub(dmg);
            }
            Action::Heal { target, .. } => {
                let amount = self.rules.heal_amount;
                let ti = self.index_of(target);
                let t = &mut self.units[ti];
                t.health = (t.health + amount).min(t.max_health);
            }
            Action::Push { target, .. } => {
                let from = self.units[ai].pos;
                let ti = self.index_of(target);
                let dest = Self::push_destination(from, self.units[ti].pos);
                if self.rules.map.tile(dest) == TileKind::Hole {
                    self.units[ti].health = 0;
                } else {
                    self.units[ti].pos = dest;
                }
            }
            Action::EndTurn => unreachable!(),
        }
        self.units[ai].action_points -= 1;
        self.units.retain(|u| u.health > 0);
        self.status = self.evaluate_status();
        if !self.is_terminal() && !self.player_can_act(self.current_player) {
            self.end_turn_in_place();
        }
    }

    /// Passes control; closes the round after the second mover; applies round
    /// effects; skips players that cannot act at all.
    fn end_turn_in_place(&mut self) {
        loop {
            let ending = self.current_player;
            for u in self.units.iter_mut().filter(|u| u.owner == ending) {
                u.action_points = 0;
            }
            if ending != self.first_player {
                self.turn += 1;
                if let RoundEffect::Decay { amount } = self.rules.round_effect {
                    for u in &mut self.units {
                        u.health = u.health.saturating_sub(amount);
                    }
                    self.units.retain(|u| u.health > 0);
                }
            }
            self.status = self.evaluate_status();
            if self.is_terminal() {
                return;
            }
            self.current_player = ending.opponent();
            let allowance = self.rules.action_points;
            let incoming = self.current_player;
            for u in self.units.iter_mut().filter(|u| u.owner == incoming) {
                u.action_points = allowance;
            }
            if self.player_can_act(incoming) {
                return;
            }
        }
    }

    /// Redacted copy for `player`: enemy units outside every friendly unit's
    /// vision range are dropped. Identity when fog is disabled.
    pub fn observe(&self, player: Player) -> GameState {
        if !self.rules.fog_enabled {
            return self.clone();
        }
        let mut obs = self.clone();
        let own: Vec<(Pos, u32)> = self.units_of(player).map(|u| (u.pos, u.vision_range)).collect();
        obs.units
            .retain(|u| u.owner == player || own.iter().any(|&(p, r)| p.distance(u.pos) <= r));
        obs
    }

    /// The same position seen from the other seat: players exchanged and the map
    /// reflected across its horizontal mid-line.
    pub fn mirrored(&self) -> GameState {
        let map = self.rules.map.reflected();
        let units = self
            .units
            .iter()
            .map(|u| Unit {
                owner: u.owner.opponent(),
                pos: self.rules.map.reflect_pos(u.pos),
                ..*u
            })
            .collect();
        GameState {
            rules: Arc::new(Rules {
                map,
                ..(*self.rules).clone()
            }),
            units,
            current_player: self.current_player.opponent(),
            first_player: self.first_player.opponent(),
            turn: self.turn,
            status: self.status.swapped(),
        }
    }

    /// Mirror image of an action under [`GameState::mirrored`].
    pub fn mirror_action(&self, action: &Action) -> Action {
        match *action {
            Action::Move { unit, to } => Action::Move {
                unit,
                to: self.rules.map.reflect_pos(to),
            },
            a => a,
        }
    }
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    const OPEN3: [&str; 3] = ["...", "...", "..."];
    const OPEN6: [&str; 6] = ["......"; 6];

    #[test]
    fn center_unit_has_eight_moves() {
        let s = state(rules(&OPEN3), vec![unit(0, Player::P0, 1, 1), unit(1, Player::P1, 0, 0)]);
        // enemy occupies one neighbour in this layout, so use a bigger map
        let moves = s.legal_actions(0).unwrap();
        assert_eq!(moves.iter().filter(|a| matches!(a, Action::Move { .. })).count(), 7);

        let s = state(rules(&OPEN6), vec![unit(0, Player::P0, 1, 1), unit(1, Player::P1, 5, 5)]);
        let moves = s.legal_actions(0).unwrap();
        assert_eq!(moves.len(), 8);
        assert!(moves.iter().all(|a| matches!(a, Action::Move { .. })));
    }

    #[test]
    fn lone_unit_center_of_3x3() {
        // enemy on a separate map region is irrelevant: put it behind a wall row
        let s = state(
            rules(&["...", "...", "...", "###", "..."]),
            vec![unit(0, Player::P0, 1, 1), unit(1, Player::P1, 0, 4)],
        );
        assert_eq!(s.legal_actions(0).unwrap().len(), 8);
    }

    #[test]
    fn zero_action_points_gives_no_actions() {
        let mut u = unit(0, Player::P0, 1, 1);
        u.action_points = 0;
        let s = state(rules(&OPEN6), vec![u, unit(1, Player::P1, 5, 5), unit(2, Player::P0, 3, 3)]);
        assert!(s.legal_actions(0).unwrap().is_empty());
        assert_eq!(s.legal_actions(1), Err(EngineError::NotCurrentPlayer(1)));
    }

    #[test]
    fn unknown_unit_is_an_error() {
        let s = state(rules(&OPEN6), vec![unit(0, Player::P0, 1, 1), unit(1, Player::P1, 5, 5)]);
        assert_eq!(s.legal_actions(9), Err(EngineError::UnknownUnit(9)));
    }

    #[test]
    fn blocked_unit_next_to_enemy_has_one_attack() {
        let s = state(
            rules(&["###", "#.#", "#.#"]),
            vec![unit(0, Player::P0, 1, 1), unit(1, Player::P1, 1, 2)],
        );
        assert_eq!(s.legal_actions(0).unwrap(), vec![Action::Attack { unit: 0, target: 1 }]);
    }

    #[test]
    fn exact_kill_removes_target() {
        let mut e = unit(1, Player::P1, 2, 1);
        e.health = 5;
        let s = state(rules(&OPEN6), vec![unit(0, Player::P0, 1, 1), e, unit(2, Player::P1, 5, 5)]);
        let next = s.advance(&Action::Attack { unit: 0, target: 1 }).unwrap();
        assert!(next.unit(1).is_none());
        assert!(s.unit(1).is_some(), "input must not be mutated");
    }

    #[test]
    fn push_into_hole_kills() {
        let mut p = unit(0, Player::P0, 1, 1);
        p.abilities = AbilitySet::from_slice(&[Ability::Push]).unwrap();
        let s = state(
            rules(&["....", "...O", "...."]),
            vec![p, unit(1, Player::P1, 2, 1), unit(2, Player::P1, 0, 2)],
        );
        let a = Action::Push { unit: 0, target: 1 };
        assert!(s.legal_actions(0).unwrap().contains(&a));
        let next = s.advance(&a).unwrap();
        assert!(next.unit(1).is_none());
    }

    #[test]
    fn push_into_wall_or_unit_is_illegal() {
        let mut p = unit(0, Player::P0, 0, 0);
        p.abilities = AbilitySet::from_slice(&[Ability::Push]).unwrap();
        let s = state(
            rules(&["..#", "...", "..."]),
            vec![p, unit(1, Player::P1, 1, 0), unit(2, Player::P1, 0, 1), unit(3, Player::P1, 0, 2)],
        );
        let acts = s.legal_actions(0).unwrap();
        assert!(!acts.contains(&Action::Push { unit: 0, target: 1 }));
        assert!(!acts.contains(&Action::Push { unit: 0, target: 2 }));
        assert!(s.advance(&Action::Push { unit: 0, target: 1 }).is_err());
    }

    #[test]
    fn diagonal_push_resolves_along_x() {
        assert_eq!(GameState::push_destination(Pos::new(0, 0), Pos::new(1, 1)), Pos::new(2, 1));
        assert_eq!(GameState::push_destination(Pos::new(1, 1), Pos::new(1, 0)), Pos::new(1, -1));
    }

    #[test]
    fn heal_is_clamped() {
        let mut h = unit(0, Player::P0, 1, 1);
        h.abilities = AbilitySet::from_slice(&[Ability::Heal]).unwrap();
        let s = state(rules(&OPEN6), vec![h, unit(1, Player::P0, 2, 1), unit(2, Player::P1, 5, 5)]);
        let next = s.advance(&Action::Heal { unit: 0, target: 1 }).unwrap();
        assert_eq!(next.unit(1).unwrap().health, 10);
    }

    #[test]
    fn illegal_action_leaves_state_untouched() {
        let mut s = state(rules(&OPEN6), vec![unit(0, Player::P0, 1, 1), unit(1, Player::P1, 5, 5)]);
        let before = s.clone();
        assert!(s.apply(&Action::Attack { unit: 0, target: 1 }).is_err());
        assert!(s.apply(&Action::Move { unit: 0, to: Pos::new(3, 3) }).is_err());
        assert!(s.apply(&Action::Move { unit: 1, to: Pos::new(4, 4) }).is_err());
        assert_eq!(s, before);
    }

    #[test]
    fn end_turn_hands_over_and_counts_rounds() {
        let s = state(rules(&OPEN6), vec![unit(0, Player::P0, 1, 1), unit(1, Player::P1, 5, 5)]);
        let s1 = s.end_turn().unwrap();
        assert_eq!(s1.current_player(), Player::P1);
        assert_eq!(s1.turn(), 0);
        assert_eq!(s1.unit(1).unwrap().action_points, 1);
        assert_eq!(s1.unit(0).unwrap().action_points, 0);
        let s2 = s1.end_turn().unwrap();
        assert_eq!(s2.current_player(), Player::P0);
        assert_eq!(s2.turn(), 1);
    }

    #[test]
    fn decay_kills_at_round_end() {
        let mut r = rules(&OPEN6);
        r.round_effect = RoundEffect::Decay { amount: 5 };
        let mut a = unit(0, Player::P0, 1, 1);
        a.health = 5;
        let s = state(r, vec![a, unit(1, Player::P1, 5, 5), unit(2, Player::P0, 3, 3)]);
        let s = s.end_turn().unwrap().end_turn().unwrap();
        assert!(s.unit(0).is_none());
        assert_eq!(s.unit(1).unwrap().health, 5);
        assert_eq!(s.outcome(), Outcome::Ongoing);
    }

    #[test]
    fn simultaneous_decay_death_is_draw() {
        let mut r = rules(&OPEN6);
        r.round_effect = RoundEffect::Decay { amount: 5 };
        let mut a = unit(0, Player::P0, 1, 1);
        a.health = 5;
        let mut b = unit(1, Player::P1, 5, 5);
        b.health = 3;
        let s = state(r, vec![a, b]).end_turn().unwrap().end_turn().unwrap();
        assert_eq!(s.outcome(), Outcome::Draw);
        assert!(s.advance(&Action::EndTurn).is_err());
    }

    #[test]
    fn turn_limit_is_a_draw() {
        let mut r = rules(&OPEN6);
        r.turn_limit = 3;
        let mut s = state(r, vec![unit(0, Player::P0, 1, 1), unit(1, Player::P1, 5, 5)]);
        for _ in 0..6 {
            s = s.end_turn().unwrap();
        }
        assert_eq!(s.turn(), 3);
        assert_eq!(s.outcome(), Outcome::Draw);
        assert!(s.legal_actions(0).unwrap().is_empty());
        assert!(s.legal_actions(1).unwrap().is_empty());
    }

    #[test]
    fn king_death_loses() {
        let mut r = rules(&OPEN6);
        r.win_rule = WinRule::KingDeath;
        let mut k0 = unit(0, Player::P0, 0, 0);
        k0.is_king = true;
        let mut k1 = unit(1, Player::P1, 1, 0);
        k1.is_king = true;
        k1.health = 5;
        let s = state(r, vec![k0, k1, unit(2, Player::P1, 5, 5)]);
        assert_eq!(s.outcome(), Outcome::Ongoing);
        let s = s.advance(&Action::Attack { unit: 0, target: 1 }).unwrap();
        assert_eq!(s.outcome(), Outcome::WinPlayer0);
    }

    #[test]
    fn auto_end_turn_when_out_of_points() {
        let s = state(rules(&OPEN6), vec![unit(0, Player::P0, 1, 1), unit(1, Player::P1, 5, 5)]);
        let s = s.advance(&Action::Move { unit: 0, to: Pos::new(2, 2) }).unwrap();
        assert_eq!(s.current_player(), Player::P1);
    }

    #[test]
    fn fog_hides_far_enemies() {
        let mut r = rules(&["........"; 8]);
        r.fog_enabled = true;
        let s = state(
            r,
            vec![unit(0, Player::P0, 0, 0), unit(1, Player::P1, 3, 3), unit(2, Player::P1, 4, 0)],
        );
        let obs = s.observe(Player::P0);
        assert!(obs.unit(1).is_some(), "distance == vision range is visible");
        assert!(obs.unit(2).is_none(), "distance == vision range + 1 is hidden");
        assert_eq!(obs.units_of(Player::P0).count(), 1);
    }

    #[test]
    fn no_fog_is_identity() {
        let s = state(rules(&OPEN6), vec![unit(0, Player::P0, 0, 0), unit(1, Player::P1, 5, 5)]);
        assert_eq!(s.observe(Player::P0), s);
    }
}
