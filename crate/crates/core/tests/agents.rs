mod common;

use rand::Rng;

use portfolio_core::agents::genome::{ChangeEvent, ScriptAssignment, SequenceGenome, SparseGenome, SparsePolicy};
use portfolio_core::agents::rollout::{rollout, FixedScript, Horizon, Policy};
use portfolio_core::agents::{
    danger_tiles, Agent, AgentKind, AgentSpec, FmBudget, MoPrhea, Pgs, Poe, RuleCombat, RulePusher,
};
use portfolio_core::engine::{Ability, AbilitySet, Action, GameState, Player, Pos};
use portfolio_core::heuristics::{combat_score, CombatWeights};
use portfolio_core::modes::{BuiltinMode, Mode};
use portfolio_core::rng::rng_from;
use portfolio_core::scripts::{script_action, Portfolio, ScriptId};

use common::{rules, state, unit};

const OPEN5: [&str; 5] = ["....."; 5];

fn sample_states(per_mode: usize) -> Vec<GameState> {
    let mut rng = rng_from(404);
    BuiltinMode::ALL
        .iter()
        .flat_map(|&b| common::random_states(&Mode::builtin(b), per_mode, &mut rng))
        .collect()
}

/// One unit next to the last enemy, which a single attack kills.
fn finishing_blow() -> GameState {
    let mut weak = unit(2, Player::P1, 3, 2);
    weak.health = 5;
    state(rules(&OPEN5), vec![unit(1, Player::P0, 2, 2), weak])
}

#[test]
fn decisions_respect_the_budget_and_are_legal() {
    let states = sample_states(3);
    for kind in AgentKind::ALL {
        let mut agent = AgentSpec::preset(kind).build();
        for budget in [1, 7, 50, 1000] {
            for (i, s) in states.iter().enumerate() {
                let d = agent.decide(s, budget, &mut rng_from(i as u64));
                assert!(d.fm_calls <= budget, "{kind}: {} calls on budget {budget}", d.fm_calls);
                assert!(s.validate(&d.action).is_ok(), "{kind} chose illegal {}", d.action);
            }
        }
    }
}

#[test]
fn portfolio_agents_are_anytime() {
    let states = sample_states(3);
    for kind in AgentKind::PORTFOLIO {
        for s in &states {
            let mut agent = AgentSpec::preset(kind).build();
            let d = agent.decide(s, Portfolio::full().len() as u64, &mut rng_from(1));
            assert!(d.fitness.is_some(), "{kind} returned an unevaluated action");
            assert!(!d.action.is_end_turn());
            assert!(s.validate(&d.action).is_ok());
        }
    }
}

#[test]
fn single_script_pgs_plays_that_script() {
    let states = sample_states(4);
    for script in ScriptId::ALL {
        let spec = AgentSpec::preset(AgentKind::Pgs).with_portfolio(Portfolio::new(vec![script]).unwrap());
        let mut pgs = Pgs::new(spec.params, spec.portfolio);
        for (i, s) in states.iter().enumerate() {
            let mut rng = rng_from(i as u64);
            let nonce: u64 = rng.clone().gen();
            let acting = s.next_acting_unit().unwrap();
            let expected = script_action(script, s, acting, &mut rng_from(nonce)).unwrap();
            let d = pgs.decide(s, 1000, &mut rng);
            assert_eq!(d.action, expected, "{script:?}");
            assert_eq!(d.script, Some(script));
        }
    }
}

#[test]
fn pgs_finds_the_killing_script() {
    let s = finishing_blow();
    let spec = AgentSpec::preset(AgentKind::Pgs)
        .with_portfolio(Portfolio::new(vec![ScriptId::RunAway, ScriptId::AttackClosest]).unwrap());
    // one-turn horizon: running away cannot end the game in time
    let mut params = spec.params;
    params.individual_length = 1;
    params.initial_script = ScriptId::RunAway;
    let mut pgs = Pgs::new(params, spec.portfolio);
    for seed in 0..20 {
        let d = pgs.decide(&s, 1000, &mut rng_from(seed));
        assert_eq!(d.action, Action::Attack { unit: 1, target: 2 });
        assert_eq!(d.fitness, Some(CombatWeights::DEFAULT.large));
    }
}

#[test]
fn poe_converges_on_a_two_script_choice() {
    let s = finishing_blow();
    let spec = AgentSpec::preset(AgentKind::Poe)
        .with_portfolio(Portfolio::new(vec![ScriptId::RunAway, ScriptId::AttackClosest]).unwrap());
    let mut params = spec.params;
    params.population_size = 10;
    params.individual_length = 1;
    let mut hits = 0;
    for seed in 0..100 {
        let mut poe = Poe::new(params, spec.portfolio.clone());
        let (d, outcome) = poe.search(&s, 1000, &mut rng_from(seed));
        if d.action == (Action::Attack { unit: 1, target: 2 }) && outcome.generations <= 20 {
            hits += 1;
        }
    }
    assert!(hits >= 95, "converged in {hits}/100 runs");
}

#[test]
fn mo_prhea_picks_the_best_h1_of_its_front() {
    for (i, s) in sample_states(2).iter().enumerate() {
        let spec = AgentSpec::tuned(AgentKind::MoPrhea, BuiltinMode::Pushers);
        let mut agent = MoPrhea::new(spec.params, spec.portfolio);
        let (d, outcome) = agent.search(s, 500, &mut rng_from(i as u64));
        let best = outcome.best.expect("evaluated");
        let points: Vec<_> = outcome.population.iter().map(|e| e.fitness).collect();
        let front = &portfolio_core::agents::evolution::non_dominated_sort(&points)[0];
        let top = front.iter().map(|&j| points[j].h1).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best.fitness.h1, top);
        assert!(!points.iter().any(|p| p.dominates(&best.fitness)));
        assert_eq!(d.fitness, Some(best.fitness.h1));
        assert_eq!(d.action, best.first.0);
    }
}

#[test]
fn elitism_keeps_the_best_individual() {
    for (i, s) in sample_states(2).iter().enumerate() {
        let mut spec = AgentSpec::tuned(AgentKind::Prhea, BuiltinMode::Pushers);
        spec.params.population_size = 10;
        spec.params.elitism = true;
        let mut agent = portfolio_core::agents::Prhea::new(spec.params, spec.portfolio);
        let (_, outcome) = agent.search(s, 2000, &mut rng_from(i as u64));
        let best = outcome.best.expect("evaluated").fitness;
        let kept = outcome.population.iter().map(|e| e.fitness).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(kept, best);
    }
}

#[test]
fn sparse_changes_fire_after_their_tick_count() {
    let base = ScriptAssignment::uniform(&[1, 2], ScriptId::AttackClosest);
    let genome = SparseGenome {
        base,
        changes: vec![ChangeEvent {
            ticks: 2,
            unit: 2,
            script: ScriptId::RunAway,
        }],
    };
    let mut p = SparsePolicy::new(&genome, ScriptId::Random);
    assert_eq!(p.next_script(2), ScriptId::AttackClosest);
    p.executed();
    assert_eq!(p.next_script(2), ScriptId::AttackClosest);
    p.executed();
    assert_eq!(p.next_script(2), ScriptId::RunAway);
    assert_eq!(p.next_script(1), ScriptId::AttackClosest);
    assert_eq!(p.next_script(7), ScriptId::Random);
}

#[test]
fn shift_drops_the_executed_gene() {
    let portfolio = Portfolio::new(vec![ScriptId::Random, ScriptId::AttackWeakest]).unwrap();
    let mut g = SequenceGenome {
        genes: vec![ScriptId::RunAway, ScriptId::AttackClosest, ScriptId::UseSpecialAbility],
    };
    g.shift(&portfolio, &mut rng_from(3));
    assert_eq!(&g.genes[..2], &[ScriptId::AttackClosest, ScriptId::UseSpecialAbility]);
    assert!(portfolio.contains(g.genes[2]));
}

#[test]
fn rule_combat_heals_the_stronger_ally() {
    let mut healer = unit(1, Player::P0, 2, 2);
    healer.abilities = AbilitySet::from_slice(&[Ability::Heal]).unwrap();
    let mut small = unit(2, Player::P0, 1, 2);
    small.health = 2;
    let mut big = unit(3, Player::P0, 3, 2);
    big.max_health = 20;
    big.health = 15;
    let s = state(rules(&OPEN5), vec![healer, small, big, unit(4, Player::P1, 4, 4)]);
    let d = RuleCombat.decide(&s, 0, &mut rng_from(0));
    assert_eq!(d.action, Action::Heal { unit: 1, target: 3 });
}

#[test]
fn rule_combat_attacks_the_isolated_enemy() {
    let s = state(
        rules(&OPEN5),
        vec![
            unit(1, Player::P0, 2, 2),
            unit(2, Player::P1, 1, 2),
            unit(3, Player::P1, 1, 1),
            unit(4, Player::P1, 3, 2),
        ],
    );
    let d = RuleCombat.decide(&s, 0, &mut rng_from(0));
    assert_eq!(d.action, Action::Attack { unit: 1, target: 4 });
}

#[test]
fn rule_combat_walks_toward_the_enemy() {
    let s = state(rules(&OPEN5), vec![unit(1, Player::P0, 0, 0), unit(2, Player::P1, 4, 4)]);
    let d = RuleCombat.decide(&s, 0, &mut rng_from(0));
    assert_eq!(d.action, Action::Move { unit: 1, to: Pos::new(1, 1) });
}

fn pusher(id: u32, owner: Player, x: i32, y: i32) -> portfolio_core::engine::Unit {
    let mut u = unit(id, owner, x, y);
    u.abilities = AbilitySet::from_slice(&[Ability::Push]).unwrap();
    u
}

#[test]
fn rule_pusher_pushes_into_a_hole() {
    let map = [".....", ".....", "...O.", ".....", "....."];
    let s = state(rules(&map), vec![pusher(1, Player::P0, 1, 2), unit(2, Player::P1, 2, 2)]);
    let d = RulePusher.decide(&s, 0, &mut rng_from(0));
    assert_eq!(d.action, Action::Push { unit: 1, target: 2 });
    let after = s.advance(&d.action).unwrap();
    assert!(after.unit(2).is_none());
}

#[test]
fn rule_pusher_walks_to_its_stance() {
    let map = [".....", ".....", "...O.", ".....", "....."];
    let s = state(rules(&map), vec![pusher(1, Player::P0, 0, 2), unit(2, Player::P1, 2, 2)]);
    // diagonal pushes go along x, so (1, 1) is a stance too and sorts first
    let d = RulePusher.decide(&s, 0, &mut rng_from(0));
    assert_eq!(d.action, Action::Move { unit: 1, to: Pos::new(1, 1) });
    let mut s = s.advance(&d.action).unwrap();
    s = s.advance(&Action::EndTurn).unwrap();
    let d = RulePusher.decide(&s, 0, &mut rng_from(0));
    assert_eq!(d.action, Action::Push { unit: 1, target: 2 });
}

#[test]
fn rule_pusher_avoids_exploitable_tiles() {
    let map = [".....", ".....", ".O...", ".....", "....."];
    let mut r = rules(&map);
    r.action_points = 2;
    let mut me = unit(1, Player::P0, 2, 4);
    me.action_points = 2;
    let mut enemy = pusher(2, Player::P1, 1, 0);
    enemy.movement_range = 4;
    enemy.action_points = 0;
    let s = state(r, vec![me, enemy]);
    // (1, 3) can be pushed north into the hole from (1, 4)
    let danger = danger_tiles(&s, Player::P0);
    assert!(danger.contains(&Pos::new(1, 3)));
    assert!(!danger.contains(&Pos::new(2, 3)));
    let d = RulePusher.decide(&s, 0, &mut rng_from(0));
    assert_eq!(d.action, Action::Move { unit: 1, to: Pos::new(2, 3) });
}

#[test]
fn rollout_scores_a_won_game_as_large() {
    let s = finishing_blow();
    let r = rollout(
        &s,
        &mut FixedScript(ScriptId::AttackClosest),
        &mut FixedScript(ScriptId::AttackClosest),
        Horizon::Actions(1),
        &mut FmBudget::new(100),
        &mut rng_from(0),
    );
    assert_eq!(r.own_actions, 1);
    assert_eq!(combat_score(&r.state, Player::P0), CombatWeights::DEFAULT.large);
}

#[test]
fn zero_budget_rollout_scores_the_start() {
    for s in sample_states(2) {
        let r = rollout(
            &s,
            &mut FixedScript(ScriptId::Random),
            &mut FixedScript(ScriptId::Random),
            Horizon::Turns(3),
            &mut FmBudget::new(0),
            &mut rng_from(0),
        );
        assert_eq!(r.state, s);
        assert!(r.first.is_none());
    }
}

#[test]
fn random_rollouts_from_a_symmetric_start_average_zero() {
    // weak hits keep every game open, so h1 is material only
    let units = |first: Player| {
        let other = first.opponent();
        [(1, first, 1, 0), (2, first, 3, 0), (3, other, 1, 4), (4, other, 3, 4)]
            .map(|(id, owner, x, y)| {
                let mut u = unit(id, owner, x, y);
                u.attack_damage = 1;
                u
            })
            .to_vec()
    };
    let n = 1000;
    let mut total = 0.0;
    for (mover, seed) in [(Player::P0, 12), (Player::P1, 13)] {
        let s = GameState::from_parts(std::sync::Arc::new(rules(&OPEN5)), units(mover), mover, mover, 0).unwrap();
        let mut rng = rng_from(seed);
        for _ in 0..n {
            let r = rollout(
                &s,
                &mut FixedScript(ScriptId::Random),
                &mut FixedScript(ScriptId::Random),
                Horizon::Turns(8),
                &mut FmBudget::new(10_000),
                &mut rng,
            );
            assert!(!r.state.is_terminal());
            total += combat_score(&r.state, Player::P0);
        }
    }
    let mean = total / f64::from(2 * n);
    assert!(mean.abs() <= 0.1, "mean h1 {mean}");
}
