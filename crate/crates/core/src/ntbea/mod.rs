//! N-tuple bandit evolutionary search over agent parameters and portfolio
//! composition.

mod model;
mod space;
mod tune;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{rng_from, GameRng};

pub use model::{LandscapeModel, TupleStats};
pub use space::{Dimension, SearchSpace};
pub use tune::{evaluate_point, tune, FitnessProtocol, PointFitness, TuneConfig, TuneResult, TunedEvaluation};

/// One index per dimension of a [`SearchSpace`].
pub type Point = Vec<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NtbeaConfig {
    /// Number of point evaluations.
    pub budget: u32,
    /// Exploration constant.
    pub c: f64,
    /// Added to tuple visit counts inside the exploration term.
    pub epsilon: f64,
    /// Mutated candidates scored by the model per iteration.
    pub neighbours: u32,
    /// Model every pair of dimensions as well as single dimensions and the
    /// full point.
    pub pairs: bool,
    pub seed: u64,
}

impl Default for NtbeaConfig {
    fn default() -> Self {
        NtbeaConfig {
            budget: 100,
            c: std::f64::consts::SQRT_2,
            epsilon: 0.5,
            neighbours: 50,
            pairs: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub point: Point,
    pub fitness: f64,
}

#[derive(Clone, Debug)]
pub struct NtbeaResult {
    /// Evaluated point with the highest model mean.
    pub best: Point,
    pub history: Vec<Evaluation>,
    pub model: LandscapeModel,
}

/// Copy of `point` with each dimension redrawn with probability 1/N and at
/// least one dimension changed. Redrawn values always differ from the old one.
fn mutate(space: &SearchSpace, point: &[usize], rng: &mut GameRng) -> Point {
    let n = space.dims().len();
    let forced = rng.gen_range(0..n);
    let mut out = point.to_vec();
    for (d, v) in out.iter_mut().enumerate() {
        let card = space.dims()[d].values.len();
        if card > 1 && (d == forced || rng.gen_bool(1.0 / n as f64)) {
            let r = rng.gen_range(0..card - 1);
            *v = if r >= *v { r + 1 } else { r };
        }
    }
    out
}

/// Runs the search. `evaluate` receives the point and its evaluation index and
/// returns a fitness to maximise; it is called exactly `cfg.budget` times.
pub fn ntbea_run(
    space: &SearchSpace,
    cfg: &NtbeaConfig,
    evaluate: &mut dyn FnMut(&[usize], u32) -> f64,
) -> NtbeaResult {
    assert!(cfg.budget >= 1, "NTBEA needs at least one evaluation");
    let mut rng = rng_from(cfg.seed);
    let mut model = LandscapeModel::with_pairs(space.dims().len(), cfg.pairs);
    let mut history: Vec<Evaluation> = Vec::with_capacity(cfg.budget as usize);
    let mut current = space.random_point(&mut rng);
    for i in 0..cfg.budget {
        let fitness = evaluate(&current, i);
        model.add(&current, fitness);
        history.push(Evaluation {
            point: current.clone(),
            fitness,
        });
        log::debug!("ntbea eval {i}: {current:?} -> {fitness}");
        if i + 1 == cfg.budget {
            break;
        }
        let mut best: Option<(f64, Point)> = None;
        for _ in 0..cfg.neighbours.max(1) {
            let cand = loop {
                let c = mutate(space, &current, &mut rng);
                if space.is_valid(&c) {
                    break c;
                }
            };
            let score = model.estimate(&cand, cfg.c, cfg.epsilon);
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, cand));
            }
        }
        current = best.expect("at least one neighbour").1;
    }

    let mut best: Option<(f64, &Point)> = None;
    for e in &history {
        let score = model.estimate(&e.point, 0.0, cfg.epsilon);
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, &e.point));
        }
    }
    let best = best.expect("budget >= 1").1.clone();
    NtbeaResult { best, history, model }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::AgentKind;

    #[test]
    fn mutation_changes_something_and_stays_in_bounds() {
        let space = SearchSpace::for_agent(AgentKind::SPrhea);
        let mut rng = rng_from(5);
        let p = space.random_point(&mut rng);
        for _ in 0..200 {
            let q = mutate(&space, &p, &mut rng);
            assert_ne!(p, q);
            for (d, &v) in q.iter().enumerate() {
                assert!(v < space.dims()[d].values.len());
            }
        }
    }

    #[test]
    fn budget_one_returns_the_initial_point() {
        let space = SearchSpace::for_agent(AgentKind::Pgs);
        let cfg = NtbeaConfig {
            budget: 1,
            seed: 9,
            ..NtbeaConfig::default()
        };
        let mut calls = 0;
        let r = ntbea_run(&space, &cfg, &mut |_, _| {
            calls += 1;
            1.0
        });
        assert_eq!(calls, 1);
        assert_eq!(r.best, space.random_point(&mut rng_from(9)));
    }
}
