//! Generational search shared by the evolutionary agents: a scalar genetic
//! algorithm and NSGA-II for the two-objective variant.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::Rng;

use crate::engine::Action;
use crate::heuristics::ObjectiveVector;
use crate::rng::GameRng;
use crate::scripts::ScriptId;

use super::budget::FmBudget;
use super::genome::{Genome, GenomeContext};

/// Generations in a row without a fresh evaluation before the search gives up
/// early (the reachable genomes have likely all been cached).
const IDLE_GENERATIONS: u32 = 256;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionParams {
    pub population_size: usize,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub elitism: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluated<G, F> {
    pub genome: G,
    pub fitness: F,
    pub first: (Action, ScriptId),
}

#[derive(Clone, Debug)]
pub struct SearchOutcome<G, F> {
    pub population: Vec<Evaluated<G, F>>,
    pub best: Option<Evaluated<G, F>>,
    pub generations: u32,
}

/// Fitness of a genome and the first action its play-out took; `None` once the
/// budget is spent.
pub type Scored<F> = Option<(F, (Action, ScriptId))>;

/// Memoises evaluations within one decision. Evaluations there are a pure
/// function of the genome, so a repeat costs no forward-model calls.
struct Evaluator<'e, G, F> {
    eval: &'e mut dyn FnMut(&G, &mut FmBudget) -> Scored<F>,
    cache: HashMap<G, (F, (Action, ScriptId))>,
    space: Option<u128>,
}

impl<G: Genome, F: Copy> Evaluator<'_, G, F> {
    /// Every genome of a finite space has been evaluated.
    fn covered(&self) -> bool {
        self.space.is_some_and(|n| self.cache.len() as u128 >= n)
    }

    fn evaluate(&mut self, genome: G, budget: &mut FmBudget) -> Option<Evaluated<G, F>> {
        if let Some(&(fitness, first)) = self.cache.get(&genome) {
            return Some(Evaluated { genome, fitness, first });
        }
        if budget.exhausted() {
            return None;
        }
        let (fitness, first) = (self.eval)(&genome, budget)?;
        self.cache.insert(genome.clone(), (fitness, first));
        Some(Evaluated { genome, fitness, first })
    }
}

fn tournament<'p, G>(pop: &'p [Evaluated<G, f64>], k: usize, rng: &mut GameRng) -> &'p Evaluated<G, f64> {
    let mut best = &pop[rng.gen_range(0..pop.len())];
    for _ in 1..k.max(1) {
        let c = &pop[rng.gen_range(0..pop.len())];
        if c.fitness > best.fitness {
            best = c;
        }
    }
    best
}

fn best_of<G: Clone>(pop: &[Evaluated<G, f64>]) -> Option<&Evaluated<G, f64>> {
    pop.iter()
        .fold(None, |acc: Option<&Evaluated<G, f64>>, e| match acc {
            Some(b) if b.fitness >= e.fitness => Some(b),
            _ => Some(e),
        })
}

/// Evolves `initial` to maximise a scalar fitness. A population of one runs as
/// a 1+1 hill climber that keeps the child when it is at least as good.
pub fn evolve_scalar<G: Genome>(
    initial: Vec<G>,
    params: &EvolutionParams,
    ctx: &GenomeContext,
    budget: &mut FmBudget,
    rng: &mut GameRng,
    eval: &mut dyn FnMut(&G, &mut FmBudget) -> Scored<f64>,
) -> SearchOutcome<G, f64> {
    let mut ev = Evaluator {
        eval,
        cache: HashMap::new(),
        space: G::space_size(ctx),
    };
    let mut best: Option<Evaluated<G, f64>> = None;
    let note = |e: &Evaluated<G, f64>, best: &mut Option<Evaluated<G, f64>>| {
        if best.as_ref().is_none_or(|b| e.fitness > b.fitness) {
            *best = Some(e.clone());
        }
    };

    let mut pop = Vec::with_capacity(params.population_size);
    for g in initial {
        match ev.evaluate(g, budget) {
            Some(e) => {
                note(&e, &mut best);
                pop.push(e);
            }
            None => break,
        }
    }
    let mut generations = 0;
    if pop.len() < params.population_size {
        return SearchOutcome {
            population: pop,
            best,
            generations,
        };
    }

    let mut idle = 0;
    while !budget.exhausted() && idle < IDLE_GENERATIONS && !ev.covered() {
        let used_before = budget.used();
        if params.population_size == 1 {
            let mut child = pop[0].genome.clone();
            child.mutate(ctx, params.mutation_rate, rng);
            if let Some(e) = ev.evaluate(child, budget) {
                note(&e, &mut best);
                if e.fitness >= pop[0].fitness {
                    pop[0] = e;
                }
            }
        } else {
            let mut next = Vec::with_capacity(params.population_size);
            if params.elitism {
                next.extend(best_of(&pop).cloned());
            }
            while next.len() < params.population_size {
                let a = tournament(&pop, params.tournament_size, rng);
                let b = tournament(&pop, params.tournament_size, rng);
                let mut child = a.genome.crossover(&b.genome, rng);
                child.mutate(ctx, params.mutation_rate, rng);
                match ev.evaluate(child, budget) {
                    Some(e) => {
                        note(&e, &mut best);
                        next.push(e);
                    }
                    None => break,
                }
            }
            if next.len() < params.population_size {
                // budget ran out mid-generation: top up with the best survivors
                pop.sort_by(|a, b| b.fitness.partial_cmp(&a.fitness).unwrap_or(Ordering::Equal));
                let missing = params.population_size - next.len();
                next.extend(pop.into_iter().take(missing));
            }
            pop = next;
        }
        generations += 1;
        idle = if budget.used() == used_before { idle + 1 } else { 0 };
    }
    SearchOutcome {
        population: pop,
        best,
        generations,
    }
}

/// Splits points into successive non-dominated fronts (h1 maximised, h2
/// minimised). Indices inside a front keep ascending order.
pub fn non_dominated_sort(points: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && points[i].dominates(&points[j]) {
                dominates[i].push(j);
                dominated_by[j] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of `front`, aligned with it. Boundary
/// points get infinity.
pub fn crowding_distance(points: &[ObjectiveVector], front: &[usize]) -> Vec<f64> {
    let m = front.len();
    let mut dist = vec![0.0; m];
    if m <= 2 {
        return vec![f64::INFINITY; m];
    }
    let objectives: [fn(&ObjectiveVector) -> f64; 2] = [|v| v.h1, |v| v.h2];
    for f in objectives {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            f(&points[front[a]])
                .partial_cmp(&f(&points[front[b]]))
                .unwrap_or(Ordering::Equal)
        });
        let lo = f(&points[front[order[0]]]);
        let hi = f(&points[front[order[m - 1]]]);
        dist[order[0]] = f64::INFINITY;
        dist[order[m - 1]] = f64::INFINITY;
        if hi > lo {
            for k in 1..m - 1 {
                let gap = f(&points[front[order[k + 1]]]) - f(&points[front[order[k - 1]]]);
                dist[order[k]] += gap / (hi - lo);
            }
        }
    }
    dist
}

/// Rank and crowding distance per individual.
fn rank_and_crowd(points: &[ObjectiveVector]) -> (Vec<usize>, Vec<f64>) {
    let mut rank = vec![0; points.len()];
    let mut crowd = vec![0.0; points.len()];
    for (r, front) in non_dominated_sort(points).iter().enumerate() {
        for (&i, d) in front.iter().zip(crowding_distance(points, front)) {
            rank[i] = r;
            crowd[i] = d;
        }
    }
    (rank, crowd)
}

/// Picks from front 0 the member with the highest h1, then the lowest h2,
/// then the earliest position.
pub fn select_front_zero<G, T: AsRef<[Evaluated<G, ObjectiveVector>]>>(pop: T) -> Option<usize> {
    let pop = pop.as_ref();
    let points: Vec<ObjectiveVector> = pop.iter().map(|e| e.fitness).collect();
    let front = non_dominated_sort(&points).into_iter().next()?;
    front.into_iter().reduce(|a, b| {
        let (pa, pb) = (points[a], points[b]);
        if pb.h1 > pa.h1 || (pb.h1 == pa.h1 && pb.h2 < pa.h2) {
            b
        } else {
            a
        }
    })
}

/// NSGA-II: offspring by crowded tournament, crossover and mutation, then
/// environmental selection over parents and offspring by front and crowding.
/// A population of one keeps the child unless the parent dominates it.
pub fn evolve_nsga2<G: Genome>(
    initial: Vec<G>,
    params: &EvolutionParams,
    ctx: &GenomeContext,
    budget: &mut FmBudget,
    rng: &mut GameRng,
    eval: &mut dyn FnMut(&G, &mut FmBudget) -> Scored<ObjectiveVector>,
) -> SearchOutcome<G, ObjectiveVector> {
    let mut ev = Evaluator {
        eval,
        cache: HashMap::new(),
        space: G::space_size(ctx),
    };
    let mut pop = Vec::with_capacity(params.population_size);
    for g in initial {
        match ev.evaluate(g, budget) {
            Some(e) => pop.push(e),
            None => break,
        }
    }
    let mut generations = 0;
    let mut idle = 0;
    while pop.len() == params.population_size && !budget.exhausted() && idle < IDLE_GENERATIONS && !ev.covered() {
        let used_before = budget.used();
        if params.population_size == 1 {
            let mut child = pop[0].genome.clone();
            child.mutate(ctx, params.mutation_rate, rng);
            if let Some(e) = ev.evaluate(child, budget) {
                if !pop[0].fitness.dominates(&e.fitness) {
                    pop[0] = e;
                }
            }
        } else {
            let points: Vec<ObjectiveVector> = pop.iter().map(|e| e.fitness).collect();
            let (rank, crowd) = rank_and_crowd(&points);
            let better = |a: usize, b: usize| rank[a] < rank[b] || (rank[a] == rank[b] && crowd[a] > crowd[b]);
            let pick = |rng: &mut GameRng| {
                let mut w = rng.gen_range(0..pop.len());
                for _ in 1..params.tournament_size.max(1) {
                    let c = rng.gen_range(0..pop.len());
                    if better(c, w) {
                        w = c;
                    }
                }
                w
            };
            let mut offspring = Vec::with_capacity(params.population_size);
            while offspring.len() < params.population_size {
                let (a, b) = (pick(rng), pick(rng));
                let mut child = pop[a].genome.crossover(&pop[b].genome, rng);
                child.mutate(ctx, params.mutation_rate, rng);
                match ev.evaluate(child, budget) {
                    Some(e) => offspring.push(e),
                    None => break,
                }
            }
            let mut merged = pop;
            merged.extend(offspring);
            pop = environmental_selection(merged, params.population_size);
        }
        generations += 1;
        idle = if budget.used() == used_before { idle + 1 } else { 0 };
    }
    let best = select_front_zero(&pop).map(|i| pop[i].clone());
    SearchOutcome {
        population: pop,
        best,
        generations,
    }
}

fn environmental_selection<G>(merged: Vec<Evaluated<G, ObjectiveVector>>, size: usize) -> Vec<Evaluated<G, ObjectiveVector>> {
    let points: Vec<ObjectiveVector> = merged.iter().map(|e| e.fitness).collect();
    let mut keep: Vec<usize> = Vec::with_capacity(size);
    for front in non_dominated_sort(&points) {
        if keep.len() + front.len() <= size {
            keep.extend(&front);
            continue;
        }
        let crowd = crowding_distance(&points, &front);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| crowd[b].partial_cmp(&crowd[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        keep.extend(order.into_iter().take(size - keep.len()).map(|k| front[k]));
        break;
    }
    keep.sort_unstable();
    let mut slots: Vec<Option<Evaluated<G, ObjectiveVector>>> = merged.into_iter().map(Some).collect();
    keep.into_iter().map(|i| slots[i].take().expect("indices are unique")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(h1: f64, h2: f64) -> ObjectiveVector {
        ObjectiveVector { h1, h2 }
    }

    #[test]
    fn hand_checked_front() {
        let pts = [ov(2.0, 5.0), ov(2.0, 3.0), ov(1.0, 1.0)];
        let fronts = non_dominated_sort(&pts);
        assert_eq!(fronts[0], vec![1, 2]);
        assert_eq!(fronts[1], vec![0]);
    }

    #[test]
    fn crowding_marks_boundaries_infinite() {
        let pts = [ov(0.0, 0.0), ov(1.0, 1.0), ov(2.0, 2.0), ov(4.0, 4.0)];
        let d = crowding_distance(&pts, &[0, 1, 2, 3]);
        assert!(d[0].is_infinite() && d[3].is_infinite());
        assert!((d[1] - 1.0).abs() < 1e-12);
        assert!((d[2] - 1.5).abs() < 1e-12);
    }
}
