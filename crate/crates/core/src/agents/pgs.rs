//! Portfolio greedy search: hill-climbs one unit-script assignment per side,
//! alternating between own improvement and opponent response.

use rand::Rng;

use crate::engine::{Action, GameState, UnitId};
use crate::heuristics::combat_score;
use crate::rng::{rng_from, GameRng};
use crate::scripts::{script_action, Portfolio, ScriptId};

use super::budget::FmBudget;
use super::genome::{AssignmentPolicy, ScriptAssignment};
use super::rollout::{rollout, Horizon};
use super::{trace, Agent, AgentKind, AgentParams, Decision};

#[derive(Clone, Debug)]
pub struct Pgs {
    params: AgentParams,
    portfolio: Portfolio,
}

struct Search<'a> {
    state: &'a GameState,
    horizon: Horizon,
    fallback: ScriptId,
    nonce: u64,
    budget: FmBudget,
    evaluations: u32,
}

impl Search<'_> {
    /// Value of an assignment pair for the side to move, with the first action
    /// it implies. `None` once the budget is spent.
    fn evaluate(&mut self, own: &ScriptAssignment, opp: &ScriptAssignment) -> Option<(f64, (Action, ScriptId))> {
        if self.budget.exhausted() {
            return None;
        }
        let me = self.state.current_player();
        let mut own_policy = AssignmentPolicy {
            assignment: own.clone(),
            fallback: self.fallback,
        };
        let mut opp_policy = AssignmentPolicy {
            assignment: opp.clone(),
            fallback: self.fallback,
        };
        let r = rollout(
            self.state,
            &mut own_policy,
            &mut opp_policy,
            self.horizon,
            &mut self.budget,
            &mut rng_from(self.nonce),
        );
        self.evaluations += 1;
        r.first.map(|f| (combat_score(&r.state, me), f))
    }
}

impl Pgs {
    pub fn new(params: AgentParams, portfolio: Portfolio) -> Pgs {
        Pgs { params, portfolio }
    }
}

impl Agent for Pgs {
    fn kind(&self) -> AgentKind {
        AgentKind::Pgs
    }

    fn decide(&mut self, state: &GameState, budget: u64, rng: &mut GameRng) -> Decision {
        let Some(acting) = state.next_acting_unit() else {
            return Decision::plain(Action::EndTurn);
        };
        let me = state.current_player();
        let own_units: Vec<UnitId> = state.units_of(me).map(|u| u.id).collect();
        let opp_units: Vec<UnitId> = state.units_of(me.opponent()).map(|u| u.id).collect();
        let scripts = self.portfolio.scripts();
        let mut own = ScriptAssignment::uniform(&own_units, self.portfolio.pick_or_first(self.params.initial_script));
        let mut opp = ScriptAssignment::uniform(&opp_units, self.params.opponent_script);
        let mut search = Search {
            state,
            horizon: Horizon::Turns(self.params.individual_length as usize),
            fallback: scripts[0],
            nonce: rng.gen(),
            budget: FmBudget::new(budget),
            evaluations: 0,
        };

        let Some((mut value, mut first)) = search.evaluate(&own, &opp) else {
            let script = own.get(acting).unwrap_or(scripts[0]);
            let action = script_action(script, state, acting, &mut rng_from(search.nonce)).unwrap_or(Action::EndTurn);
            return Decision {
                action,
                script: Some(script),
                ..Decision::plain(action)
            };
        };

        // returns false once the budget is gone
        let improve_own = |s: &mut Search, own: &mut ScriptAssignment, opp: &ScriptAssignment, value: &mut f64, first: &mut (Action, ScriptId)| {
            for &u in &own_units {
                let current = own.get(u).expect("own units are assigned");
                let mut best = current;
                for &script in scripts.iter().filter(|&&c| c != current) {
                    own.set(u, script);
                    match s.evaluate(own, opp) {
                        Some((v, f)) if v > *value => {
                            *value = v;
                            *first = f;
                            best = script;
                        }
                        Some(_) => {}
                        None => {
                            own.set(u, best);
                            return false;
                        }
                    }
                }
                own.set(u, best);
            }
            true
        };
        // the opponent minimises the searching side's value
        let improve_opp = |s: &mut Search, own: &ScriptAssignment, opp: &mut ScriptAssignment, value: &mut f64| {
            for &u in &opp_units {
                let current = opp.get(u).expect("opponent units are assigned");
                let mut best = current;
                for &script in scripts.iter().filter(|&&c| c != current) {
                    opp.set(u, script);
                    match s.evaluate(own, opp) {
                        Some((v, _)) if v < *value => {
                            *value = v;
                            best = script;
                        }
                        Some(_) => {}
                        None => {
                            opp.set(u, best);
                            return false;
                        }
                    }
                }
                opp.set(u, best);
            }
            true
        };

        if improve_own(&mut search, &mut own, &opp, &mut value, &mut first) {
            for _ in 0..self.params.response_iterations {
                if !improve_opp(&mut search, &own, &mut opp, &mut value) {
                    break;
                }
                if !improve_own(&mut search, &mut own, &opp, &mut value, &mut first) {
                    break;
                }
            }
        }

        let d = Decision {
            action: first.0,
            script: Some(first.1),
            fm_calls: search.budget.used(),
            fitness: Some(value),
            generations: search.evaluations,
        };
        trace(AgentKind::Pgs, &d);
        d
    }
}
