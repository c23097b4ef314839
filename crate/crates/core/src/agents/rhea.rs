//! Evolutionary portfolio agents: POE evolves unit-script assignments, PRHEA
//! script sequences, S-PRHEA sparse assignments with timed changes and
//! MO-PRHEA script sequences under two objectives.

use rand::Rng;

use crate::engine::{Action, GameState, Player, UnitId};
use crate::heuristics::{combat_score, ObjectiveVector};
use crate::rng::{rng_from, GameRng};
use crate::scripts::{script_action, Portfolio, ScriptId};

use super::budget::FmBudget;
use super::evolution::{evolve_nsga2, evolve_scalar, EvolutionParams, SearchOutcome};
use super::genome::{Genome, GenomeContext, ScriptAssignment, SequenceGenome, SparseGenome};
use super::rollout::{rollout, FixedScript, Horizon, Policy, Rollout};
use super::{trace, Agent, AgentKind, AgentParams, Decision};

/// Evolutionary agent over genome type `G` with a scalar (h1) fitness.
#[derive(Clone, Debug)]
pub struct EvolutionAgent<G> {
    kind: AgentKind,
    params: AgentParams,
    portfolio: Portfolio,
    /// Population kept between decisions when `continue_search` is set.
    carried: Vec<G>,
}

pub type Poe = EvolutionAgent<ScriptAssignment>;
pub type Prhea = EvolutionAgent<SequenceGenome>;
pub type SPrhea = EvolutionAgent<SparseGenome>;

impl Poe {
    pub fn new(params: AgentParams, portfolio: Portfolio) -> Poe {
        EvolutionAgent::with_kind(AgentKind::Poe, params, portfolio)
    }
}

impl Prhea {
    pub fn new(params: AgentParams, portfolio: Portfolio) -> Prhea {
        EvolutionAgent::with_kind(AgentKind::Prhea, params, portfolio)
    }
}

impl SPrhea {
    pub fn new(params: AgentParams, portfolio: Portfolio) -> SPrhea {
        EvolutionAgent::with_kind(AgentKind::SPrhea, params, portfolio)
    }
}

fn evolution_params(p: &AgentParams) -> EvolutionParams {
    EvolutionParams {
        population_size: p.population_size as usize,
        mutation_rate: p.mutation_rate,
        tournament_size: p.tournament_size as usize,
        elitism: p.elitism,
    }
}

fn context<'a>(state: &GameState, me: Player, params: &AgentParams, portfolio: &'a Portfolio) -> GenomeContext<'a> {
    GenomeContext {
        portfolio,
        units: state.units_of(me).map(|u| u.id).collect(),
        length: params.individual_length as usize,
        num_changes: params.num_changes as usize,
    }
}

/// Initial population: the carried one, revalidated, or fresh random genomes.
fn seed_population<G: Genome>(carried: Vec<G>, size: usize, ctx: &GenomeContext, rng: &mut GameRng) -> Vec<G> {
    let mut pop: Vec<G> = carried;
    pop.truncate(size);
    for g in &mut pop {
        g.revalidate(ctx, rng);
    }
    while pop.len() < size {
        pop.push(G::random(ctx, rng));
    }
    pop
}

/// Plays a genome out from `state` on the common evaluation stream `nonce`.
fn play<G: Genome>(
    genome: &G,
    state: &GameState,
    ctx: &GenomeContext,
    opponent: ScriptId,
    budget: &mut FmBudget,
    nonce: u64,
) -> Rollout {
    let mut own = genome.policy(ctx);
    let mut opp = FixedScript(opponent);
    rollout(
        state,
        &mut own,
        &mut opp,
        Horizon::Actions(ctx.length),
        budget,
        &mut rng_from(nonce),
    )
}

/// Action of `script` for the acting unit, used when nothing was evaluated.
fn unevaluated(state: &GameState, script: ScriptId, nonce: u64) -> (Action, ScriptId) {
    let action = state
        .next_acting_unit()
        .and_then(|u| script_action(script, state, u, &mut rng_from(nonce)).ok())
        .unwrap_or(Action::EndTurn);
    (action, script)
}

impl<G: Genome + Send> EvolutionAgent<G> {
    pub fn with_kind(kind: AgentKind, params: AgentParams, portfolio: Portfolio) -> Self {
        EvolutionAgent {
            kind,
            params,
            portfolio,
            carried: Vec::new(),
        }
    }

    /// Runs the search and reports the full outcome. `decide` wraps this.
    pub fn search(&mut self, state: &GameState, budget: u64, rng: &mut GameRng) -> (Decision, SearchOutcome<G, f64>) {
        let me = state.current_player();
        let nonce: u64 = rng.gen();
        let mut fm = FmBudget::new(budget);
        let ctx = context(state, me, &self.params, &self.portfolio);
        let opponent = self.params.opponent_script;
        let initial = seed_population(std::mem::take(&mut self.carried), self.params.population_size as usize, &ctx, rng);
        let acting = state.next_acting_unit().unwrap_or_default();
        let fallback_script = first_script(&initial[0], &ctx, acting);

        let mut eval = |g: &G, fm: &mut FmBudget| {
            let r = play(g, state, &ctx, opponent, fm, nonce);
            r.first.map(|first| (combat_score(&r.state, me), first))
        };
        let outcome = evolve_scalar(initial, &evolution_params(&self.params), &ctx, &mut fm, rng, &mut eval);

        let (action, script) = match &outcome.best {
            Some(b) => b.first,
            None => unevaluated(state, fallback_script, nonce),
        };
        if self.params.continue_search {
            self.carried = outcome.population.iter().map(|e| e.genome.clone()).collect();
            for g in &mut self.carried {
                g.after_action(&ctx, rng);
            }
        }
        let decision = Decision {
            action,
            script: Some(script),
            fm_calls: fm.used(),
            fitness: outcome.best.as_ref().map(|b| b.fitness),
            generations: outcome.generations,
        };
        (decision, outcome)
    }
}

/// Script a genome assigns to the acting unit without simulating.
fn first_script<G: Genome>(g: &G, ctx: &GenomeContext, unit: UnitId) -> ScriptId {
    g.policy(ctx).next_script(unit)
}

impl<G: Genome + Send> Agent for EvolutionAgent<G> {
    fn kind(&self) -> AgentKind {
        self.kind
    }

    fn decide(&mut self, state: &GameState, budget: u64, rng: &mut GameRng) -> Decision {
        if state.next_acting_unit().is_none() {
            return Decision::plain(Action::EndTurn);
        }
        let (d, _) = self.search(state, budget, rng);
        trace(self.kind, &d);
        d
    }

    fn reset(&mut self) {
        self.carried.clear();
    }
}

/// PRHEA with NSGA-II selection over (h1, h2).
#[derive(Clone, Debug)]
pub struct MoPrhea {
    params: AgentParams,
    portfolio: Portfolio,
    carried: Vec<SequenceGenome>,
}

impl MoPrhea {
    pub fn new(params: AgentParams, portfolio: Portfolio) -> MoPrhea {
        MoPrhea {
            params,
            portfolio,
            carried: Vec::new(),
        }
    }

    pub fn search(
        &mut self,
        state: &GameState,
        budget: u64,
        rng: &mut GameRng,
    ) -> (Decision, SearchOutcome<SequenceGenome, ObjectiveVector>) {
        let me = state.current_player();
        let nonce: u64 = rng.gen();
        let mut fm = FmBudget::new(budget);
        let ctx = context(state, me, &self.params, &self.portfolio);
        let opponent = self.params.opponent_script;
        let initial = seed_population(std::mem::take(&mut self.carried), self.params.population_size as usize, &ctx, rng);
        let fallback_script = initial[0].genes[0];

        let mut eval = |g: &SequenceGenome, fm: &mut FmBudget| {
            let r = play(g, state, &ctx, opponent, fm, nonce);
            r.first.map(|first| (ObjectiveVector::of(&r.state, me), first))
        };
        let outcome = evolve_nsga2(initial, &evolution_params(&self.params), &ctx, &mut fm, rng, &mut eval);

        let (action, script) = match &outcome.best {
            Some(b) => b.first,
            None => unevaluated(state, fallback_script, nonce),
        };
        if self.params.continue_search {
            self.carried = outcome.population.iter().map(|e| e.genome.clone()).collect();
            for g in &mut self.carried {
                g.after_action(&ctx, rng);
            }
        }
        let decision = Decision {
            action,
            script: Some(script),
            fm_calls: fm.used(),
            fitness: outcome.best.as_ref().map(|b| b.fitness.h1),
            generations: outcome.generations,
        };
        (decision, outcome)
    }
}

impl Agent for MoPrhea {
    fn kind(&self) -> AgentKind {
        AgentKind::MoPrhea
    }

    fn decide(&mut self, state: &GameState, budget: u64, rng: &mut GameRng) -> Decision {
        if state.next_acting_unit().is_none() {
            return Decision::plain(Action::EndTurn);
        }
        let (d, _) = self.search(state, budget, rng);
        trace(AgentKind::MoPrhea, &d);
        d
    }

    fn reset(&mut self) {
        self.carried.clear();
    }
}
