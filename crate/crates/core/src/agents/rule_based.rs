//! Hand-written opponents: a combat agent for the melee modes and a pusher
//! agent that plans pushes into holes.

use std::collections::HashSet;

use crate::engine::{Ability, Action, GameState, Player, Pos, TileKind, Unit};
use crate::rng::GameRng;

use super::{Agent, AgentKind, Decision};

/// Higher is stronger: max health, then attack damage.
fn strength(u: &Unit) -> (u32, u32) {
    (u.max_health, u.attack_damage)
}

/// Move among `actions` that minimises `cost`, only if it beats `here`. Ties
/// keep the first move in row-major order.
fn best_move(actions: &[Action], here: u32, cost: impl Fn(Pos) -> Option<u32>) -> Option<Action> {
    let mut best: Option<(u32, Action)> = None;
    for a in actions {
        if let Action::Move { to, .. } = *a {
            if let Some(c) = cost(to) {
                if c < here && best.is_none_or(|(b, _)| c < b) {
                    best = Some((c, *a));
                }
            }
        }
    }
    best.map(|(_, a)| a)
}

/// Walking distance to `goal` ignoring units, falling back to Chebyshev
/// distance where walls cut the goal off.
fn walking_cost(state: &GameState, goal: Pos) -> impl Fn(Pos) -> Option<u32> + '_ {
    let field = state.map().distance_field(goal, |_| false);
    move |p| field[state.map().index(p)].or(Some(p.distance(goal) + state.map().len() as u32))
}

fn nearest_enemy(state: &GameState, u: &Unit) -> Option<Unit> {
    state
        .units_of(u.owner.opponent())
        .min_by_key(|e| (u.pos.distance(e.pos), e.id))
        .copied()
}

fn approach(state: &GameState, u: &Unit, actions: &[Action], goal: Pos) -> Option<Action> {
    let cost = walking_cost(state, goal);
    let here = cost(u.pos).unwrap_or(u32::MAX);
    best_move(actions, here, cost)
}

/// Heals the strongest damaged ally in range, else attacks the most isolated
/// enemy in range (strongest first on ties), else walks toward the nearest
/// enemy. Units with nothing useful to do are skipped; with no unit left the
/// turn ends.
#[derive(Clone, Copy, Debug, Default)]
pub struct RuleCombat;

impl RuleCombat {
    fn unit_action(state: &GameState, u: &Unit) -> Option<Action> {
        let actions = state.legal_actions(u.id).ok()?;
        let heal = actions
            .iter()
            .filter_map(|a| match a {
                Action::Heal { target, .. } => state.unit(*target).filter(|t| t.damage() > 0).map(|t| (t, *a)),
                _ => None,
            })
            .min_by(|(a, _), (b, _)| strength(b).cmp(&strength(a)).then(a.id.cmp(&b.id)));
        if let Some((_, a)) = heal {
            return Some(a);
        }

        let escorts = |t: &Unit| {
            state
                .units_of(t.owner)
                .filter(|o| o.id != t.id && o.pos.distance(t.pos) == 1)
                .count()
        };
        let attack = actions
            .iter()
            .filter_map(|a| match a {
                Action::Attack { target, .. } => state.unit(*target).map(|t| (t, *a)),
                _ => None,
            })
            .min_by(|(a, _), (b, _)| {
                escorts(a)
                    .cmp(&escorts(b))
                    .then(strength(b).cmp(&strength(a)))
                    .then(a.id.cmp(&b.id))
            });
        if let Some((_, a)) = attack {
            return Some(a);
        }

        let goal = match nearest_enemy(state, u) {
            Some(e) => e.pos,
            None => Pos::new(state.map().width() / 2, state.map().height() / 2),
        };
        approach(state, u, &actions, goal)
    }
}

impl Agent for RuleCombat {
    fn kind(&self) -> AgentKind {
        AgentKind::RuleCombat
    }

    fn decide(&mut self, state: &GameState, _budget: u64, _rng: &mut GameRng) -> Decision {
        let action = state
            .acting_units()
            .into_iter()
            .filter_map(|id| state.unit(id).copied())
            .find_map(|u| Self::unit_action(state, &u))
            .unwrap_or(Action::EndTurn);
        Decision::plain(action)
    }
}

/// Tiles where a unit of `player` could be pushed into a hole by an enemy on
/// the enemy's next turn: an enemy pusher can reach a neighbouring tile with an
/// action to spare, and the push from there lands in a hole. Unit blocking is
/// ignored, so the set errs on the side of caution.
pub fn danger_tiles(state: &GameState, player: Player) -> HashSet<Pos> {
    let mut out = HashSet::new();
    let rules = state.rules();
    if !rules.push_enabled || rules.action_points == 0 {
        return out;
    }
    let map = state.map();
    let pushers: Vec<&Unit> = state
        .units_of(player.opponent())
        .filter(|e| e.abilities.contains(Ability::Push))
        .collect();
    for i in 0..map.len() {
        let t = map.pos_of(i);
        if !map.tile(t).is_walkable() {
            continue;
        }
        let threatened = t.neighbours().any(|n| {
            map.tile(GameState::push_destination(n, t)) == TileKind::Hole
                && pushers.iter().any(|e| {
                    let stance_ok = n == e.pos || (map.tile(n).is_walkable() && state.unit_at(n).is_none());
                    stance_ok && e.pos.distance(n) <= e.movement_range * (rules.action_points - 1)
                })
        });
        if threatened {
            out.insert(t);
        }
    }
    out
}

/// Plans the shortest move sequence to a stance from which an enemy can be
/// pushed into a hole and follows it; ties go to the shorter plan, then the
/// lower target id. Without a plan it approaches the nearest enemy over tiles
/// no enemy pusher can exploit next turn.
#[derive(Clone, Copy, Debug, Default)]
pub struct RulePusher;

/// A push plan: moves to `stance`, then push `target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Plan {
    actions: u32,
    target: u32,
    stance: Pos,
}

impl RulePusher {
    fn plan(state: &GameState, u: &Unit) -> Option<Plan> {
        let map = state.map();
        let blocked = |p: Pos| p != u.pos && state.unit_at(p).is_some();
        let from_me = map.distance_field(u.pos, blocked);
        let mut best: Option<Plan> = None;
        for e in state.units_of(u.owner.opponent()) {
            for stance in e.pos.neighbours() {
                if !map.in_bounds(stance) || map.tile(GameState::push_destination(stance, e.pos)) != TileKind::Hole {
                    continue;
                }
                let Some(steps) = from_me[map.index(stance)] else {
                    continue;
                };
                if stance != u.pos && (blocked(stance) || !map.tile(stance).is_walkable()) {
                    continue;
                }
                let moves = if steps == 0 { 0 } else { steps.div_ceil(u.movement_range.max(1)) };
                if steps > 0 && u.movement_range == 0 {
                    continue;
                }
                let plan = Plan {
                    actions: moves + 1,
                    target: e.id,
                    stance,
                };
                let key = |p: &Plan| (p.actions, p.target, p.stance);
                if best.is_none_or(|b| key(&plan) < key(&b)) {
                    best = Some(plan);
                }
            }
        }
        best
    }

    fn unit_action(state: &GameState, u: &Unit, danger: &HashSet<Pos>) -> Option<Action> {
        let actions = state.legal_actions(u.id).ok()?;
        if u.abilities.contains(Ability::Push) {
            if let Some(plan) = Self::plan(state, u) {
                if plan.stance == u.pos {
                    let push = Action::Push {
                        unit: u.id,
                        target: plan.target,
                    };
                    if actions.contains(&push) {
                        return Some(push);
                    }
                } else {
                    let blocked = |p: Pos| p != u.pos && state.unit_at(p).is_some();
                    let field = state.map().distance_field(plan.stance, blocked);
                    let here = field[state.map().index(u.pos)].unwrap_or(u32::MAX);
                    let step = best_move(&actions, here, |p| field[state.map().index(p)]);
                    if step.is_some() {
                        return step;
                    }
                }
            }
        }

        // fallback: approach without stepping onto exploitable tiles
        let goal = nearest_enemy(state, u)?.pos;
        let cost = walking_cost(state, goal);
        let here = cost(u.pos).unwrap_or(u32::MAX);
        let safe_cost = |p: Pos| if danger.contains(&p) { None } else { cost(p) };
        if danger.contains(&u.pos) {
            // any safe tile beats staying exposed
            best_move(&actions, u32::MAX, safe_cost)
        } else {
            best_move(&actions, here, safe_cost)
        }
    }
}

impl Agent for RulePusher {
    fn kind(&self) -> AgentKind {
        AgentKind::RulePusher
    }

    fn decide(&mut self, state: &GameState, _budget: u64, _rng: &mut GameRng) -> Decision {
        let danger = danger_tiles(state, state.current_player());
        let action = state
            .acting_units()
            .into_iter()
            .filter_map(|id| state.unit(id).copied())
            .find_map(|u| Self::unit_action(state, &u, &danger))
            .unwrap_or(Action::EndTurn);
        Decision::plain(action)
    }
}
