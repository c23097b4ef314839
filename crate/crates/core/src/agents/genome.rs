//! Genome encodings searched by the evolutionary agents and their variation
//! operators.

use std::hash::Hash;

use rand::Rng;

use crate::engine::UnitId;
use crate::rng::GameRng;
use crate::scripts::{Portfolio, ScriptId};

use super::rollout::Policy;

/// What the operators need to know about the current decision.
#[derive(Clone, Debug)]
pub struct GenomeContext<'a> {
    pub portfolio: &'a Portfolio,
    /// Living units of the searching side, ascending.
    pub units: Vec<UnitId>,
    pub length: usize,
    pub num_changes: usize,
}

pub trait Genome: Clone + Eq + Hash {
    type Rollout: Policy;

    fn random(ctx: &GenomeContext, rng: &mut GameRng) -> Self;

    /// Uniform crossover: each gene comes from either parent with equal odds.
    fn crossover(&self, other: &Self, rng: &mut GameRng) -> Self;

    fn mutate(&mut self, ctx: &GenomeContext, rate: f64, rng: &mut GameRng);

    fn policy(&self, ctx: &GenomeContext) -> Self::Rollout;

    /// Number of distinct genomes, when small enough to count.
    fn space_size(_ctx: &GenomeContext) -> Option<u128> {
        None
    }

    /// The decided action has been executed in the real game.
    fn after_action(&mut self, _ctx: &GenomeContext, _rng: &mut GameRng) {}

    /// Brings a genome kept from an earlier decision in line with the current
    /// units and length.
    fn revalidate(&mut self, _ctx: &GenomeContext, _rng: &mut GameRng) {}
}

fn pick(a: ScriptId, b: ScriptId, rng: &mut GameRng) -> ScriptId {
    if rng.gen_bool(0.5) {
        a
    } else {
        b
    }
}

/// One script per controlled unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScriptAssignment {
    entries: Vec<(UnitId, ScriptId)>,
}

impl ScriptAssignment {
    pub fn uniform(units: &[UnitId], script: ScriptId) -> ScriptAssignment {
        ScriptAssignment {
            entries: units.iter().map(|&u| (u, script)).collect(),
        }
    }

    pub fn from_entries(mut entries: Vec<(UnitId, ScriptId)>) -> ScriptAssignment {
        entries.sort_by_key(|e| e.0);
        entries.dedup_by_key(|e| e.0);
        ScriptAssignment { entries }
    }

    pub fn entries(&self) -> &[(UnitId, ScriptId)] {
        &self.entries
    }

    pub fn get(&self, unit: UnitId) -> Option<ScriptId> {
        self.entries
            .binary_search_by_key(&unit, |e| e.0)
            .ok()
            .map(|i| self.entries[i].1)
    }

    /// Sets the script of a unit already in the assignment.
    pub fn set(&mut self, unit: UnitId, script: ScriptId) -> bool {
        match self.entries.binary_search_by_key(&unit, |e| e.0) {
            Ok(i) => {
                self.entries[i].1 = script;
                true
            }
            Err(_) => false,
        }
    }

    fn sync_units(&mut self, ctx: &GenomeContext, rng: &mut GameRng) {
        let entries = ctx
            .units
            .iter()
            .map(|&u| (u, self.get(u).unwrap_or_else(|| ctx.portfolio.sample(rng))))
            .collect();
        self.entries = entries;
    }
}

#[derive(Clone, Debug)]
pub struct AssignmentPolicy {
    pub assignment: ScriptAssignment,
    /// Used for units missing from the assignment.
    pub fallback: ScriptId,
}

impl Policy for AssignmentPolicy {
    fn next_script(&mut self, unit: UnitId) -> ScriptId {
        self.assignment.get(unit).unwrap_or(self.fallback)
    }
}

impl Genome for ScriptAssignment {
    type Rollout = AssignmentPolicy;

    fn random(ctx: &GenomeContext, rng: &mut GameRng) -> Self {
        ScriptAssignment {
            entries: ctx.units.iter().map(|&u| (u, ctx.portfolio.sample(rng))).collect(),
        }
    }

    fn crossover(&self, other: &Self, rng: &mut GameRng) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|&(u, s)| (u, other.get(u).map_or(s, |t| pick(s, t, rng))))
            .collect();
        ScriptAssignment { entries }
    }

    fn mutate(&mut self, ctx: &GenomeContext, rate: f64, rng: &mut GameRng) {
        for e in &mut self.entries {
            if rng.gen_bool(rate) {
                e.1 = ctx.portfolio.sample(rng);
            }
        }
    }

    fn policy(&self, ctx: &GenomeContext) -> AssignmentPolicy {
        AssignmentPolicy {
            assignment: self.clone(),
            fallback: ctx.portfolio.scripts()[0],
        }
    }

    fn space_size(ctx: &GenomeContext) -> Option<u128> {
        (ctx.portfolio.len() as u128).checked_pow(ctx.units.len() as u32)
    }

    fn revalidate(&mut self, ctx: &GenomeContext, rng: &mut GameRng) {
        self.sync_units(ctx, rng);
    }
}

/// Scripts for the next controlled actions, in order. Each gene drives the
/// lowest-id unit that still has actions at that point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SequenceGenome {
    pub genes: Vec<ScriptId>,
}

impl SequenceGenome {
    /// Drops the executed first gene and appends a random one.
    pub fn shift(&mut self, portfolio: &Portfolio, rng: &mut GameRng) {
        if !self.genes.is_empty() {
            self.genes.remove(0);
        }
        self.genes.push(portfolio.sample(rng));
    }
}

#[derive(Clone, Debug)]
pub struct SequencePolicy {
    genes: Vec<ScriptId>,
    step: usize,
}

impl SequencePolicy {
    pub fn new(genes: Vec<ScriptId>) -> SequencePolicy {
        assert!(!genes.is_empty(), "a sequence policy needs at least one gene");
        SequencePolicy { genes, step: 0 }
    }
}

impl Policy for SequencePolicy {
    fn next_script(&mut self, _unit: UnitId) -> ScriptId {
        // past the end the last gene repeats; the horizon normally stops first
        self.genes[self.step.min(self.genes.len() - 1)]
    }

    fn executed(&mut self) {
        self.step += 1;
    }
}

impl Genome for SequenceGenome {
    type Rollout = SequencePolicy;

    fn random(ctx: &GenomeContext, rng: &mut GameRng) -> Self {
        SequenceGenome {
            genes: (0..ctx.length).map(|_| ctx.portfolio.sample(rng)).collect(),
        }
    }

    fn crossover(&self, other: &Self, rng: &mut GameRng) -> Self {
        SequenceGenome {
            genes: self
                .genes
                .iter()
                .zip(&other.genes)
                .map(|(&a, &b)| pick(a, b, rng))
                .collect(),
        }
    }

    fn mutate(&mut self, ctx: &GenomeContext, rate: f64, rng: &mut GameRng) {
        for g in &mut self.genes {
            if rng.gen_bool(rate) {
                *g = ctx.portfolio.sample(rng);
            }
        }
    }

    fn policy(&self, _ctx: &GenomeContext) -> SequencePolicy {
        SequencePolicy::new(self.genes.clone())
    }

    fn space_size(ctx: &GenomeContext) -> Option<u128> {
        (ctx.portfolio.len() as u128).checked_pow(ctx.length as u32)
    }

    fn after_action(&mut self, ctx: &GenomeContext, rng: &mut GameRng) {
        self.shift(ctx.portfolio, rng);
    }

    fn revalidate(&mut self, ctx: &GenomeContext, rng: &mut GameRng) {
        self.genes.truncate(ctx.length);
        while self.genes.len() < ctx.length {
            self.genes.push(ctx.portfolio.sample(rng));
        }
    }
}

/// A scheduled script change: after `ticks` more executed actions, `unit`
/// switches to `script`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChangeEvent {
    pub ticks: u32,
    pub unit: UnitId,
    pub script: ScriptId,
}

impl ChangeEvent {
    pub fn random(ctx: &GenomeContext, rng: &mut GameRng) -> ChangeEvent {
        ChangeEvent {
            ticks: rng.gen_range(1..=ctx.length.max(1) as u32),
            unit: ctx.units[rng.gen_range(0..ctx.units.len())],
            script: ctx.portfolio.sample(rng),
        }
    }
}

/// Base assignment plus a fixed-size list of timed changes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseGenome {
    pub base: ScriptAssignment,
    pub changes: Vec<ChangeEvent>,
}

/// Decrements every event and applies those that reach zero to `base`. Returns
/// the indices of the events that fired.
fn tick(base: &mut ScriptAssignment, changes: &mut [ChangeEvent]) -> Vec<usize> {
    let mut fired = Vec::new();
    for (i, c) in changes.iter_mut().enumerate() {
        if c.ticks == 0 {
            continue;
        }
        c.ticks -= 1;
        if c.ticks == 0 {
            base.set(c.unit, c.script);
            fired.push(i);
        }
    }
    fired
}

#[derive(Clone, Debug)]
pub struct SparsePolicy {
    base: ScriptAssignment,
    changes: Vec<ChangeEvent>,
    fallback: ScriptId,
}

impl SparsePolicy {
    pub fn new(genome: &SparseGenome, fallback: ScriptId) -> SparsePolicy {
        SparsePolicy {
            base: genome.base.clone(),
            changes: genome.changes.clone(),
            fallback,
        }
    }

    pub fn assignment(&self) -> &ScriptAssignment {
        &self.base
    }
}

impl Policy for SparsePolicy {
    fn next_script(&mut self, unit: UnitId) -> ScriptId {
        self.base.get(unit).unwrap_or(self.fallback)
    }

    fn executed(&mut self) {
        tick(&mut self.base, &mut self.changes);
    }
}

impl Genome for SparseGenome {
    type Rollout = SparsePolicy;

    fn random(ctx: &GenomeContext, rng: &mut GameRng) -> Self {
        SparseGenome {
            base: ScriptAssignment::random(ctx, rng),
            changes: (0..ctx.num_changes).map(|_| ChangeEvent::random(ctx, rng)).collect(),
        }
    }

    fn crossover(&self, other: &Self, rng: &mut GameRng) -> Self {
        SparseGenome {
            base: self.base.crossover(&other.base, rng),
            changes: self
                .changes
                .iter()
                .zip(&other.changes)
                .map(|(&a, &b)| if rng.gen_bool(0.5) { a } else { b })
                .collect(),
        }
    }

    /// Half the time the base assignment is mutated gene-wise, otherwise one
    /// change event is redrawn.
    fn mutate(&mut self, ctx: &GenomeContext, rate: f64, rng: &mut GameRng) {
        if self.changes.is_empty() || rng.gen_bool(0.5) {
            self.base.mutate(ctx, rate, rng);
        } else {
            let i = rng.gen_range(0..self.changes.len());
            self.changes[i] = ChangeEvent::random(ctx, rng);
        }
    }

    fn policy(&self, ctx: &GenomeContext) -> SparsePolicy {
        SparsePolicy::new(self, ctx.portfolio.scripts()[0])
    }

    /// Real actions count down the schedule too; consumed events are replaced.
    fn after_action(&mut self, ctx: &GenomeContext, rng: &mut GameRng) {
        for i in tick(&mut self.base, &mut self.changes) {
            self.changes[i] = ChangeEvent::random(ctx, rng);
        }
    }

    fn revalidate(&mut self, ctx: &GenomeContext, rng: &mut GameRng) {
        self.base.sync_units(ctx, rng);
        self.changes.resize_with(ctx.num_changes, || ChangeEvent::random(ctx, rng));
        for c in &mut self.changes {
            if c.ticks == 0 || !ctx.units.contains(&c.unit) {
                *c = ChangeEvent::random(ctx, rng);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    fn ctx(portfolio: &Portfolio) -> GenomeContext<'_> {
        GenomeContext {
            portfolio,
            units: vec![0, 2, 3],
            length: 3,
            num_changes: 2,
        }
    }

    #[test]
    fn shift_twice() {
        let p = Portfolio::full();
        let mut rng = rng_from(1);
        let (a, b, c) = (ScriptId::AttackClosest, ScriptId::RunAway, ScriptId::Random);
        let mut g = SequenceGenome { genes: vec![a, b, c] };
        g.shift(&p, &mut rng);
        g.shift(&p, &mut rng);
        assert_eq!(g.genes.len(), 3);
        assert_eq!(g.genes[0], c);
    }

    #[test]
    fn crossover_of_identical_parents_is_identity() {
        let p = Portfolio::full();
        let c = ctx(&p);
        let mut rng = rng_from(2);
        let a = SparseGenome::random(&c, &mut rng);
        for _ in 0..20 {
            assert_eq!(a.crossover(&a, &mut rng), a);
        }
        let s = SequenceGenome::random(&c, &mut rng);
        assert_eq!(s.crossover(&s, &mut rng), s);
    }

    #[test]
    fn change_fires_after_exactly_its_ticks() {
        let p = Portfolio::full();
        let c = ctx(&p);
        let g = SparseGenome {
            base: ScriptAssignment::uniform(&c.units, ScriptId::AttackClosest),
            changes: vec![ChangeEvent {
                ticks: 1,
                unit: 3,
                script: ScriptId::RunAway,
            }],
        };
        let mut pol = g.policy(&c);
        assert_eq!(pol.next_script(3), ScriptId::AttackClosest);
        pol.executed();
        assert_eq!(pol.next_script(3), ScriptId::RunAway);
        assert_eq!(pol.next_script(0), ScriptId::AttackClosest);
    }

    #[test]
    fn real_action_replaces_consumed_change() {
        let p = Portfolio::full();
        let c = ctx(&p);
        let mut rng = rng_from(3);
        let mut g = SparseGenome {
            base: ScriptAssignment::uniform(&c.units, ScriptId::AttackClosest),
            changes: vec![
                ChangeEvent {
                    ticks: 1,
                    unit: 2,
                    script: ScriptId::Random,
                },
                ChangeEvent {
                    ticks: 3,
                    unit: 0,
                    script: ScriptId::RunAway,
                },
            ],
        };
        g.after_action(&c, &mut rng);
        assert_eq!(g.base.get(2), Some(ScriptId::Random));
        assert_eq!(g.changes.len(), 2);
        assert!(g.changes[0].ticks >= 1);
        assert_eq!(g.changes[1].ticks, 2);
    }

    #[test]
    fn revalidation_tracks_living_units() {
        let p = Portfolio::full();
        let mut c = ctx(&p);
        let mut rng = rng_from(4);
        let mut a = ScriptAssignment::uniform(&c.units, ScriptId::RunAway);
        c.units = vec![2, 5];
        a.revalidate(&c, &mut rng);
        assert_eq!(a.entries().len(), 2);
        assert_eq!(a.get(2), Some(ScriptId::RunAway));
        assert!(a.get(5).is_some());
        assert!(a.get(0).is_none());
    }
}
