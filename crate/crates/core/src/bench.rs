//! Forward-model throughput measurement.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Action, GameState};
use crate::modes::Mode;
use crate::rng::{mix, rng_from, GameRng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FmBenchReport {
    pub calls: u64,
    pub games: u64,
    /// Time spent inside `advance` only.
    pub seconds: f64,
    pub calls_per_second: f64,
}

/// Plays a uniformly random game and returns every (state, action) pair on
/// its path.
pub fn random_trajectory(mode: &Mode, seed: u64, rng: &mut GameRng) -> Vec<(GameState, Action)> {
    let mut state = mode.initial_state(seed, false);
    let mut path = Vec::new();
    while !state.is_terminal() {
        let actions = state.all_legal_actions();
        let action = if actions.is_empty() {
            Action::EndTurn
        } else {
            actions[rng.gen_range(0..actions.len())]
        };
        let next = state.advance(&action).expect("legal action");
        path.push((state, action));
        state = next;
    }
    path
}

/// Times single-threaded `advance` calls on random game trajectories until
/// `duration` of advance time has accumulated. Picking the actions is not timed.
pub fn forward_model_throughput(mode: &Mode, duration: Duration, seed: u64) -> FmBenchReport {
    let mut rng = rng_from(seed);
    let mut calls = 0u64;
    let mut games = 0u64;
    let mut spent = Duration::ZERO;
    while spent < duration {
        let path = random_trajectory(mode, mix(seed, games), &mut rng);
        let start = Instant::now();
        for (state, action) in &path {
            std::hint::black_box(state.advance(action).expect("recorded action is legal"));
        }
        spent += start.elapsed();
        calls += path.len() as u64;
        games += 1;
    }
    let seconds = spent.as_secs_f64();
    FmBenchReport {
        calls,
        games,
        seconds,
        calls_per_second: calls as f64 / seconds.max(f64::MIN_POSITIVE),
    }
}
