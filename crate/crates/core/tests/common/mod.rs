#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;

use portfolio_core::engine::{Action, AbilitySet, GameState, GridMap, Player, Pos, RoundEffect, Rules, Unit, UnitId, WinRule};
use portfolio_core::modes::Mode;
use portfolio_core::rng::GameRng;

pub fn rules(rows: &[&str]) -> Rules {
    Rules {
        name: "test".into(),
        map: GridMap::from_rows(rows).unwrap(),
        unit_kinds: vec!["soldier".into()],
        action_points: 1,
        turn_limit: 100,
        win_rule: WinRule::LastSideStanding,
        round_effect: RoundEffect::None,
        heal_amount: 10,
        push_enabled: true,
        fog_enabled: false,
    }
}

pub fn unit(id: UnitId, owner: Player, x: i32, y: i32) -> Unit {
    Unit {
        id,
        owner,
        kind: 0,
        pos: Pos::new(x, y),
        health: 10,
        max_health: 10,
        attack_damage: 5,
        movement_range: 1,
        attack_range: 1,
        vision_range: 3,
        abilities: AbilitySet::default(),
        is_king: false,
        action_points: 1,
    }
}

pub fn state(rules: Rules, units: Vec<Unit>) -> GameState {
    GameState::from_parts(Arc::new(rules), units, Player::P0, Player::P0, 0).unwrap()
}

/// Positions distinct, in bounds and walkable.
pub fn check_no_overlap(s: &GameState) -> Result<(), String> {
    let units = s.units();
    for (i, u) in units.iter().enumerate() {
        if !s.map().in_bounds(u.pos) || !s.map().tile(u.pos).is_walkable() {
            return Err(format!("unit {} on bad tile {}", u.id, u.pos));
        }
        if units[..i].iter().any(|o| o.pos == u.pos) {
            return Err(format!("two units on {}", u.pos));
        }
    }
    Ok(())
}

/// One executed action costs the actor exactly one action point and nobody
/// else anything, unless the turn passed. A fresh turn hands every unit of the
/// incoming player the full allowance.
pub fn check_action_points(before: &GameState, action: &Action, after: &GameState) -> Result<(), String> {
    let me = before.current_player();
    let same_turn = !after.is_terminal() && after.current_player() == me && after.turn() == before.turn();
    if let (Some(actor), true) = (action.actor(), same_turn) {
        for u in after.units_of(me) {
            let prev = before.unit(u.id).ok_or("unit appeared")?.action_points;
            let expected = if u.id == actor { prev - 1 } else { prev };
            if u.action_points != expected {
                return Err(format!("unit {} has {} points, expected {expected}", u.id, u.action_points));
            }
        }
        let consumed = before.action_points_of(me) - after.action_points_of(me);
        let lost: u32 = before
            .units_of(me)
            .filter(|u| after.unit(u.id).is_none())
            .map(|u| u.action_points)
            .sum();
        if consumed - lost != 1 {
            return Err(format!("{consumed} points consumed by one action"));
        }
    }
    if !after.is_terminal() && (after.current_player() != me || after.turn() != before.turn()) {
        let p = after.current_player();
        for u in after.units_of(p) {
            if u.action_points != after.rules().action_points {
                return Err(format!("fresh turn but unit {} has {} points", u.id, u.action_points));
            }
        }
        for u in after.units_of(p.opponent()) {
            if u.action_points != 0 {
                return Err(format!("waiting unit {} holds {} points", u.id, u.action_points));
            }
        }
    }
    Ok(())
}

/// No unit has an action and every action is rejected.
pub fn check_terminal(s: &GameState, probe: &[Action]) -> Result<(), String> {
    if !s.all_legal_actions().is_empty() {
        return Err("terminal state offers actions".into());
    }
    for u in s.units() {
        if !s.legal_actions(u.id).map_err(|e| e.to_string())?.is_empty() {
            return Err(format!("unit {} can act after the end", u.id));
        }
    }
    if s.advance(&Action::EndTurn).is_ok() {
        return Err("end turn accepted after the end".into());
    }
    if let Some(a) = probe.iter().find(|a| s.advance(a).is_ok()) {
        return Err(format!("{a} accepted after the end"));
    }
    Ok(())
}

/// Plays uniformly random legal actions to the end, checking the engine
/// invariants after each step. Returns the number of actions.
pub fn checked_random_playout(mode: &Mode, seed: u64, swapped: bool, rng: &mut GameRng) -> Result<usize, String> {
    let mut s = mode.initial_state(seed, swapped);
    check_no_overlap(&s)?;
    let mut steps = 0;
    let mut recent = Vec::new();
    while !s.is_terminal() {
        let actions = s.all_legal_actions();
        let a = if actions.is_empty() || rng.gen_ratio(1, 50) {
            Action::EndTurn
        } else {
            actions[rng.gen_range(0..actions.len())]
        };
        let next = s.advance(&a).map_err(|e| format!("legal action {a} rejected: {e}"))?;
        check_no_overlap(&next)?;
        check_action_points(&s, &a, &next)?;
        if next.turn() > s.rules().turn_limit {
            return Err("turn limit overrun".into());
        }
        recent = actions;
        s = next;
        steps += 1;
    }
    check_terminal(&s, &recent)?;
    Ok(steps)
}

/// Non-terminal states with a unit to act, sampled along random games of `mode`.
pub fn random_states(mode: &Mode, count: usize, rng: &mut GameRng) -> Vec<GameState> {
    let mut out = Vec::with_capacity(count);
    let mut seed = 1;
    while out.len() < count {
        let mut s = mode.initial_state(seed, seed % 2 == 0);
        seed += 1;
        let stop = rng.gen_range(0..60);
        for _ in 0..stop {
            if s.is_terminal() {
                break;
            }
            let actions = s.all_legal_actions();
            let a = if actions.is_empty() {
                Action::EndTurn
            } else {
                actions[rng.gen_range(0..actions.len())]
            };
            s = s.advance(&a).unwrap();
        }
        if !s.is_terminal() && s.next_acting_unit().is_some() {
            out.push(s);
        }
    }
    out
}

/// Separable test landscape: each dimension has one hidden target value and
/// fitness is the fraction of dimensions on target, so the optimum is the
/// target vector.
pub struct Separable {
    pub space: portfolio_core::ntbea::SearchSpace,
    pub target: Vec<usize>,
}

impl Separable {
    /// Dimension sizes of the PRHEA space: six parameters and six flags.
    pub const CARDINALITIES: [usize; 12] = [3, 10, 3, 3, 2, 2, 2, 2, 2, 2, 2, 2];

    pub fn new(seed: u64) -> Separable {
        use portfolio_core::agents::AgentKind;
        use portfolio_core::ntbea::{Dimension, SearchSpace};
        let mut rng = portfolio_core::rng::rng_from(seed);
        let dims: Vec<Dimension> = Self::CARDINALITIES
            .iter()
            .enumerate()
            .map(|(d, &k)| Dimension {
                name: format!("d{d}"),
                values: (0..k).map(|v| v as f64).collect(),
            })
            .collect();
        let target = Self::CARDINALITIES.iter().map(|&k| rng.gen_range(0..k)).collect();
        Separable {
            space: SearchSpace::custom(AgentKind::Prhea, dims),
            target,
        }
    }

    pub fn fitness(&self, point: &[usize]) -> f64 {
        let hits = point.iter().zip(&self.target).filter(|(a, b)| a == b).count();
        hits as f64 / point.len() as f64
    }

    pub fn optimum(&self) -> Vec<usize> {
        self.target.clone()
    }
}
