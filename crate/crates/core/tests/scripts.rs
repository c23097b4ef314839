mod common;

use proptest::prelude::*;

use portfolio_core::engine::{Ability, AbilitySet, Action, Player};
use portfolio_core::modes::{BuiltinMode, Mode};
use portfolio_core::rng::rng_from;
use portfolio_core::scripts::{script_action, Portfolio, ScriptError, ScriptId};

use common::{rules, state, unit};

const OPEN5: [&str; 5] = ["....."; 5];

#[test]
fn attack_closest_hits_the_adjacent_enemy() {
    let s = state(
        rules(&OPEN5),
        vec![unit(1, Player::P0, 2, 2), unit(2, Player::P1, 3, 2), unit(3, Player::P1, 0, 4)],
    );
    let a = script_action(ScriptId::AttackClosest, &s, 1, &mut rng_from(0)).unwrap();
    assert_eq!(a, Action::Attack { unit: 1, target: 2 });
}

#[test]
fn attack_weakest_prefers_low_health() {
    let mut weak = unit(2, Player::P1, 3, 2);
    weak.health = 3;
    let mut strong = unit(3, Player::P1, 1, 2);
    strong.health = 7;
    let s = state(rules(&OPEN5), vec![unit(1, Player::P0, 2, 2), weak, strong]);
    let a = script_action(ScriptId::AttackWeakest, &s, 1, &mut rng_from(0)).unwrap();
    assert_eq!(a, Action::Attack { unit: 1, target: 2 });
}

#[test]
fn cornered_run_away_acts_randomly_but_legally() {
    // no move gets further from the enemy
    let s = state(rules(&["..", ".."]), vec![unit(1, Player::P0, 0, 0), unit(2, Player::P1, 1, 1)]);
    let legal = s.legal_actions(1).unwrap();
    let mut seen = std::collections::HashSet::new();
    for seed in 0..50 {
        let a = script_action(ScriptId::RunAway, &s, 1, &mut rng_from(seed)).unwrap();
        assert!(legal.contains(&a));
        seen.insert(a);
    }
    assert!(seen.len() > 1, "fallback should depend on the rng");
}

#[test]
fn run_away_increases_distance() {
    let s = state(rules(&OPEN5), vec![unit(1, Player::P0, 2, 2), unit(2, Player::P1, 0, 0)]);
    let a = script_action(ScriptId::RunAway, &s, 1, &mut rng_from(0)).unwrap();
    // five tiles reach distance 3; the first in row-major order wins
    assert_eq!(a, Action::Move { unit: 1, to: portfolio_core::engine::Pos::new(3, 1) });
}

#[test]
fn special_ability_heals_the_damaged_ally() {
    let mut healer = unit(1, Player::P0, 2, 2);
    healer.abilities = AbilitySet::from_slice(&[Ability::Heal]).unwrap();
    let mut hurt = unit(2, Player::P0, 2, 3);
    hurt.health = 4;
    let s = state(rules(&OPEN5), vec![healer, hurt, unit(3, Player::P1, 4, 0)]);
    let a = script_action(ScriptId::UseSpecialAbility, &s, 1, &mut rng_from(0)).unwrap();
    assert_eq!(a, Action::Heal { unit: 1, target: 2 });
}

#[test]
fn special_ability_prefers_a_killing_push() {
    let mut pusher = unit(1, Player::P0, 1, 2);
    pusher.abilities = AbilitySet::from_slice(&[Ability::Push]).unwrap();
    let s = state(
        rules(&[".....", ".....", "....O", ".....", "....."]),
        vec![pusher, unit(2, Player::P1, 1, 1), unit(3, Player::P1, 2, 2)],
    );
    // no push kills here, so the lower id wins
    let a = script_action(ScriptId::UseSpecialAbility, &s, 1, &mut rng_from(0)).unwrap();
    assert_eq!(a, Action::Push { unit: 1, target: 2 });
    let s = state(
        rules(&[".....", ".....", "...O.", ".....", "....."]),
        vec![s.unit(1).copied().unwrap(), unit(2, Player::P1, 1, 1), unit(3, Player::P1, 2, 2)],
    );
    let a = script_action(ScriptId::UseSpecialAbility, &s, 1, &mut rng_from(0)).unwrap();
    assert_eq!(a, Action::Push { unit: 1, target: 3 });
}

#[test]
fn scripts_reject_units_that_cannot_act() {
    let mut tired = unit(1, Player::P0, 2, 2);
    tired.action_points = 0;
    let s = state(rules(&OPEN5), vec![tired, unit(2, Player::P0, 0, 0), unit(3, Player::P1, 4, 4)]);
    assert!(matches!(
        script_action(ScriptId::AttackClosest, &s, 1, &mut rng_from(0)),
        Err(ScriptError::NoLegalAction(1))
    ));
    assert!(script_action(ScriptId::AttackClosest, &s, 3, &mut rng_from(0)).is_err());
    assert!(script_action(ScriptId::AttackClosest, &s, 99, &mut rng_from(0)).is_err());
}

#[test]
fn script_codes_are_stable() {
    for (i, s) in ScriptId::ALL.iter().enumerate() {
        assert_eq!(s.code() as usize, i);
        assert_eq!(ScriptId::from_code(i as u8).unwrap(), *s);
        assert_eq!(s.abbreviation().parse::<ScriptId>().unwrap(), *s);
    }
    assert!(Portfolio::new(vec![]).is_err());
    assert!(Portfolio::new(vec![ScriptId::Random, ScriptId::Random]).is_err());
    let p = Portfolio::new(vec![ScriptId::Random, ScriptId::AttackClosest]).unwrap();
    assert_eq!(p.scripts(), &[ScriptId::AttackClosest, ScriptId::Random]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_script_returns_a_legal_non_end_turn_action(
        b in prop::sample::select(BuiltinMode::ALL.to_vec()),
        rseed: u64,
    ) {
        let mode = Mode::builtin(b);
        let mut rng = rng_from(rseed);
        for s in common::random_states(&mode, 4, &mut rng) {
            for id in s.acting_units() {
                let legal = s.legal_actions(id).unwrap();
                for script in ScriptId::ALL {
                    let a = script_action(script, &s, id, &mut rng).unwrap();
                    prop_assert!(!a.is_end_turn());
                    prop_assert!(legal.contains(&a), "{:?} gave {}", script, a);
                }
            }
        }
    }

    #[test]
    fn targeted_scripts_ignore_the_rng_when_an_enemy_is_in_range(rseed: u64, other: u64) {
        let mode = Mode::builtin(BuiltinMode::Kings);
        let mut rng = rng_from(rseed);
        for s in common::random_states(&mode, 4, &mut rng) {
            for id in s.acting_units() {
                let can_attack = s.legal_actions(id).unwrap().iter().any(|a| matches!(a, Action::Attack { .. }));
                if !can_attack {
                    continue;
                }
                for script in [ScriptId::AttackClosest, ScriptId::AttackWeakest] {
                    let a = script_action(script, &s, id, &mut rng_from(rseed)).unwrap();
                    let b = script_action(script, &s, id, &mut rng_from(other)).unwrap();
                    prop_assert_eq!(a, b);
                }
            }
        }
    }
}
