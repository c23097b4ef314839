//! Decision-makers. Every agent maps an observed state, a forward-model budget
//! and a random stream to one action for the side to move.

pub mod budget;
pub mod evolution;
pub mod genome;
mod pgs;
mod random;
mod rhea;
pub mod rollout;
mod rule_based;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Action, GameState};
use crate::modes::{BuiltinMode, Mode};
use crate::rng::GameRng;
use crate::scripts::{Portfolio, ScriptId};

pub use budget::FmBudget;
pub use pgs::Pgs;
pub use random::RandomAgent;
pub use rhea::{EvolutionAgent, MoPrhea, Poe, Prhea, SPrhea};
pub use rule_based::{danger_tiles, RuleCombat, RulePusher};

/// Forward-model calls per decision unless configured otherwise.
pub const DEFAULT_BUDGET: u64 = 1000;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed agent config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("unknown agent `{0}`")]
    Unknown(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Pgs,
    Poe,
    Prhea,
    MoPrhea,
    SPrhea,
    RuleCombat,
    RulePusher,
    Random,
}

impl AgentKind {
    pub const ALL: [AgentKind; 8] = [
        AgentKind::Pgs,
        AgentKind::Poe,
        AgentKind::Prhea,
        AgentKind::MoPrhea,
        AgentKind::SPrhea,
        AgentKind::RuleCombat,
        AgentKind::RulePusher,
        AgentKind::Random,
    ];

    /// The five agents that search over a script portfolio.
    pub const PORTFOLIO: [AgentKind; 5] = [
        AgentKind::Pgs,
        AgentKind::Poe,
        AgentKind::Prhea,
        AgentKind::MoPrhea,
        AgentKind::SPrhea,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Pgs => "pgs",
            AgentKind::Poe => "poe",
            AgentKind::Prhea => "prhea",
            AgentKind::MoPrhea => "mo_prhea",
            AgentKind::SPrhea => "s_prhea",
            AgentKind::RuleCombat => "rule_combat",
            AgentKind::RulePusher => "rule_pusher",
            AgentKind::Random => "random",
        }
    }

    pub fn uses_portfolio(self) -> bool {
        AgentKind::PORTFOLIO.contains(&self)
    }

    /// The rule-based opponent for a mode: the pusher agent where pushing into
    /// holes is possible, the combat agent elsewhere.
    pub fn rule_based_for(mode: &Mode) -> AgentKind {
        let rules = mode.rules();
        if rules.push_enabled && rules.map.has_holes() {
            AgentKind::RulePusher
        } else {
            AgentKind::RuleCombat
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        AgentKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| AgentError::Unknown(s.to_owned()))
    }
}

pub const POPULATION_SIZES: [u32; 3] = [1, 10, 100];
pub const MUTATION_RATES: [f64; 3] = [0.1, 0.5, 0.9];
pub const TOURNAMENT_SIZES: [u32; 3] = [3, 5, 10];
pub const NUM_CHANGES: [u32; 4] = [1, 3, 5, 10];
pub const INDIVIDUAL_LENGTHS: std::ops::RangeInclusive<u32> = 1..=10;
pub const RESPONSE_ITERATIONS: std::ops::RangeInclusive<u32> = 1..=5;

/// Search parameters. Each agent reads only the fields that apply to it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentParams {
    pub population_size: u32,
    pub individual_length: u32,
    pub mutation_rate: f64,
    pub tournament_size: u32,
    pub num_changes: u32,
    pub response_iterations: u32,
    pub elitism: bool,
    pub continue_search: bool,
    /// Script assumed for the opponent inside play-outs.
    pub opponent_script: ScriptId,
    /// Script PGS starts its own units with.
    pub initial_script: ScriptId,
}

impl Default for AgentParams {
    fn default() -> Self {
        AgentParams {
            population_size: 1,
            individual_length: 1,
            mutation_rate: 0.5,
            tournament_size: 5,
            num_changes: 5,
            response_iterations: 4,
            elitism: true,
            continue_search: true,
            opponent_script: ScriptId::AttackClosest,
            initial_script: ScriptId::AttackWeakest,
        }
    }
}

fn invalid(field: &'static str, message: impl Into<String>) -> AgentError {
    AgentError::Invalid {
        field,
        message: message.into(),
    }
}

impl AgentParams {
    /// Published tuned values for an agent and mode. Agents without search
    /// parameters get the defaults.
    pub fn tuned(kind: AgentKind, mode: BuiltinMode) -> AgentParams {
        use AgentKind::*;
        use BuiltinMode::*;
        let d = AgentParams::default();
        let evo = |population_size, individual_length, mutation_rate, tournament_size| AgentParams {
            population_size,
            individual_length,
            mutation_rate,
            tournament_size,
            ..d
        };
        match (kind, mode) {
            (Prhea, Kings) => evo(1, 1, 0.5, 5),
            (Prhea, Pushers) => evo(100, 3, 0.5, 5),
            (Prhea, Healers) => evo(100, 10, 0.1, 3),
            (MoPrhea, Kings) => evo(1, 1, 0.1, 5),
            (MoPrhea, Pushers) => evo(100, 1, 0.1, 3),
            (MoPrhea, Healers) => evo(10, 1, 0.1, 5),
            (SPrhea, Kings) => evo(1, 3, 0.5, 5),
            (SPrhea, Pushers) => evo(100, 3, 0.1, 3),
            (SPrhea, Healers) => evo(100, 1, 0.1, 10),
            (Poe, Kings) => evo(1, 3, 0.5, 5),
            (Poe, Pushers) => evo(10, 5, 0.9, 3),
            (Poe, Healers) => evo(10, 3, 0.1, 3),
            (Pgs, Kings) => AgentParams {
                individual_length: 3,
                response_iterations: 4,
                ..d
            },
            (Pgs, Pushers) => AgentParams {
                individual_length: 2,
                response_iterations: 3,
                ..d
            },
            (Pgs, Healers) => AgentParams {
                individual_length: 3,
                response_iterations: 1,
                ..d
            },
            (RuleCombat | RulePusher | Random, _) => d,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if !POPULATION_SIZES.contains(&self.population_size) {
            return Err(invalid("population_size", format!("{} not in {POPULATION_SIZES:?}", self.population_size)));
        }
        if !INDIVIDUAL_LENGTHS.contains(&self.individual_length) {
            return Err(invalid("individual_length", format!("{} not in 1..=10", self.individual_length)));
        }
        if !MUTATION_RATES.iter().any(|&r| (r - self.mutation_rate).abs() < 1e-9) {
            return Err(invalid("mutation_rate", format!("{} not in {MUTATION_RATES:?}", self.mutation_rate)));
        }
        if !TOURNAMENT_SIZES.contains(&self.tournament_size) {
            return Err(invalid("tournament_size", format!("{} not in {TOURNAMENT_SIZES:?}", self.tournament_size)));
        }
        if !NUM_CHANGES.contains(&self.num_changes) {
            return Err(invalid("num_changes", format!("{} not in {NUM_CHANGES:?}", self.num_changes)));
        }
        if !RESPONSE_ITERATIONS.contains(&self.response_iterations) {
            return Err(invalid("response_iterations", format!("{} not in 1..=5", self.response_iterations)));
        }
        Ok(())
    }
}

/// A fully specified agent: kind, label, parameters and portfolio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct AgentSpec {
    pub agent: AgentKind,
    /// Label used in reports; defaults to the kind name.
    pub name: String,
    pub portfolio: Portfolio,
    pub params: AgentParams,
}

/// Config-file form: everything but `agent` is optional and falls back to the
/// kind's Kings preset.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    agent: AgentKind,
    name: Option<String>,
    portfolio: Option<Portfolio>,
    #[serde(default)]
    params: ParamsPatch,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsPatch {
    population_size: Option<u32>,
    individual_length: Option<u32>,
    mutation_rate: Option<f64>,
    tournament_size: Option<u32>,
    num_changes: Option<u32>,
    response_iterations: Option<u32>,
    elitism: Option<bool>,
    continue_search: Option<bool>,
    opponent_script: Option<ScriptId>,
    initial_script: Option<ScriptId>,
}

impl TryFrom<RawSpec> for AgentSpec {
    type Error = AgentError;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        let mut spec = AgentSpec::preset(raw.agent);
        if let Some(name) = raw.name {
            spec.name = name;
        }
        if let Some(p) = raw.portfolio {
            spec.portfolio = p;
        }
        let p = raw.params;
        let q = &mut spec.params;
        q.population_size = p.population_size.unwrap_or(q.population_size);
        q.individual_length = p.individual_length.unwrap_or(q.individual_length);
        q.mutation_rate = p.mutation_rate.unwrap_or(q.mutation_rate);
        q.tournament_size = p.tournament_size.unwrap_or(q.tournament_size);
        q.num_changes = p.num_changes.unwrap_or(q.num_changes);
        q.response_iterations = p.response_iterations.unwrap_or(q.response_iterations);
        q.elitism = p.elitism.unwrap_or(q.elitism);
        q.continue_search = p.continue_search.unwrap_or(q.continue_search);
        q.opponent_script = p.opponent_script.unwrap_or(q.opponent_script);
        q.initial_script = p.initial_script.unwrap_or(q.initial_script);
        spec.validate()?;
        Ok(spec)
    }
}

impl AgentSpec {
    /// Kings preset with the full portfolio.
    pub fn preset(kind: AgentKind) -> AgentSpec {
        AgentSpec::tuned(kind, BuiltinMode::Kings)
    }

    /// Published tuned parameters for `mode` with the full portfolio.
    pub fn tuned(kind: AgentKind, mode: BuiltinMode) -> AgentSpec {
        AgentSpec {
            agent: kind,
            name: kind.name().to_owned(),
            portfolio: Portfolio::full(),
            params: AgentParams::tuned(kind, mode),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> AgentSpec {
        self.name = name.into();
        self
    }

    pub fn with_portfolio(mut self, portfolio: Portfolio) -> AgentSpec {
        self.portfolio = portfolio;
        self
    }

    pub fn with_params(mut self, params: AgentParams) -> AgentSpec {
        self.params = params;
        self
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if self.name.is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        self.params.validate()
    }

    pub fn parse(text: &str) -> Result<AgentSpec, AgentError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("agent specs always serialize")
    }

    pub fn load(path: &Path) -> Result<AgentSpec, AgentError> {
        let text = std::fs::read_to_string(path).map_err(|source| AgentError::Io {
            path: path.to_owned(),
            source,
        })?;
        AgentSpec::parse(&text)
    }

    /// A config file path, or a bare agent kind for its preset.
    pub fn resolve(name_or_path: &str) -> Result<AgentSpec, AgentError> {
        match name_or_path.parse::<AgentKind>() {
            Ok(kind) => Ok(AgentSpec::preset(kind)),
            Err(_) => AgentSpec::load(Path::new(name_or_path)),
        }
    }

    pub fn build(&self) -> Box<dyn Agent> {
        let p = self.params;
        let pf = self.portfolio.clone();
        match self.agent {
            AgentKind::Pgs => Box::new(Pgs::new(p, pf)),
            AgentKind::Poe => Box::new(Poe::new(p, pf)),
            AgentKind::Prhea => Box::new(Prhea::new(p, pf)),
            AgentKind::MoPrhea => Box::new(MoPrhea::new(p, pf)),
            AgentKind::SPrhea => Box::new(SPrhea::new(p, pf)),
            AgentKind::RuleCombat => Box::new(RuleCombat),
            AgentKind::RulePusher => Box::new(RulePusher),
            AgentKind::Random => Box::new(RandomAgent),
        }
    }
}

/// What an agent decided and what it cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub action: Action,
    /// Script that produced the action, for script-driven agents.
    pub script: Option<ScriptId>,
    pub fm_calls: u64,
    /// Scalar fitness (h1) of the chosen plan, when one was evaluated.
    pub fitness: Option<f64>,
    pub generations: u32,
}

impl Decision {
    pub fn plain(action: Action) -> Decision {
        Decision {
            action,
            script: None,
            fm_calls: 0,
            fitness: None,
            generations: 0,
        }
    }
}

pub trait Agent: Send {
    fn kind(&self) -> AgentKind;

    /// Picks an action for the side to move in `state`, spending at most
    /// `budget` forward-model advances.
    fn decide(&mut self, state: &GameState, budget: u64, rng: &mut GameRng) -> Decision;

    /// Forgets anything carried over from a previous game.
    fn reset(&mut self) {}
}

pub(crate) fn trace(kind: AgentKind, d: &Decision) {
    log::trace!(
        "{kind}: {} script={:?} fitness={:?} generations={} fm={}",
        d.action,
        d.script.map(ScriptId::abbreviation),
        d.fitness,
        d.generations,
        d.fm_calls
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for mode in BuiltinMode::ALL {
            for kind in AgentKind::ALL {
                AgentSpec::tuned(kind, mode).validate().unwrap();
            }
        }
        assert_eq!(AgentParams::tuned(AgentKind::Pgs, BuiltinMode::Kings).response_iterations, 4);
        assert_eq!(AgentParams::tuned(AgentKind::Poe, BuiltinMode::Pushers).mutation_rate, 0.9);
        let mo = AgentParams::tuned(AgentKind::MoPrhea, BuiltinMode::Healers);
        assert_eq!((mo.population_size, mo.individual_length, mo.mutation_rate), (10, 1, 0.1));
        for mode in BuiltinMode::ALL {
            assert_eq!(AgentParams::tuned(AgentKind::SPrhea, mode).num_changes, 5);
        }
    }

    #[test]
    fn spec_round_trip() {
        let spec = AgentSpec::tuned(AgentKind::SPrhea, BuiltinMode::Healers)
            .with_portfolio(Portfolio::new(vec![ScriptId::RunAway, ScriptId::AttackClosest]).unwrap());
        let text = spec.to_toml();
        assert_eq!(AgentSpec::parse(&text).unwrap(), spec);
    }

    #[test]
    fn partial_config_uses_preset() {
        let spec = AgentSpec::parse("agent = \"poe\"\nportfolio = [0, 4]\n[params]\nindividual_length = 7\n").unwrap();
        assert_eq!(spec.params.individual_length, 7);
        assert_eq!(spec.params.population_size, 1);
        assert_eq!(spec.portfolio.scripts(), &[ScriptId::AttackClosest, ScriptId::UseSpecialAbility]);
        assert_eq!(spec.name, "poe");
    }

    #[test]
    fn out_of_domain_values_are_rejected() {
        let err = AgentSpec::parse("agent = \"prhea\"\n[params]\npopulation_size = 7\n").unwrap_err();
        assert!(err.to_string().contains("population_size"), "{err}");
        assert!(AgentSpec::parse("agent = \"prhea\"\nportfolio = []\n").is_err());
        assert!(AgentSpec::parse("agent = \"prhea\"\nportfolio = [9]\n").is_err());
        assert!(AgentSpec::parse("agent = \"nope\"\n").is_err());
        assert!(AgentSpec::parse("agent = \"prhea\"\nbogus = 1\n").is_err());
    }

    #[test]
    fn rule_based_opponents() {
        let pick = |m| AgentKind::rule_based_for(&Mode::builtin(m));
        assert_eq!(pick(BuiltinMode::Kings), AgentKind::RuleCombat);
        assert_eq!(pick(BuiltinMode::Healers), AgentKind::RuleCombat);
        assert_eq!(pick(BuiltinMode::Pushers), AgentKind::RulePusher);
    }

    #[test]
    fn kind_names_parse() {
        for k in AgentKind::ALL {
            assert_eq!(k.name().parse::<AgentKind>().unwrap(), k);
        }
        assert_eq!("MO-PRHEA".parse::<AgentKind>().unwrap(), AgentKind::MoPrhea);
    }
}
