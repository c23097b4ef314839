use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{
    AgentKind, AgentParams, AgentSpec, INDIVIDUAL_LENGTHS, MUTATION_RATES, NUM_CHANGES, POPULATION_SIZES,
    RESPONSE_ITERATIONS, TOURNAMENT_SIZES,
};
use crate::rng::GameRng;
use crate::scripts::{Portfolio, ScriptId};

/// A named parameter with its candidate values. Booleans are 0 and 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub name: String,
    pub values: Vec<f64>,
}

impl Dimension {
    fn new(name: impl Into<String>, values: impl IntoIterator<Item = f64>) -> Dimension {
        Dimension {
            name: name.into(),
            values: values.into_iter().collect(),
        }
    }

    fn flag(name: impl Into<String>) -> Dimension {
        Dimension::new(name, [0.0, 1.0])
    }

    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.values.iter().position(|&v| (v - value).abs() < 1e-9)
    }
}

const PORTFOLIO_PREFIX: &str = "use_";

/// Tunable dimensions for one agent kind: its search parameters followed by
/// one inclusion flag per script.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub agent: AgentKind,
    dims: Vec<Dimension>,
}

impl SearchSpace {
    pub fn for_agent(agent: AgentKind) -> SearchSpace {
        let ints = |v: &[u32]| v.iter().map(|&x| f64::from(x)).collect::<Vec<_>>();
        let length = Dimension::new("individual_length", INDIVIDUAL_LENGTHS.map(f64::from));
        let mut dims = match agent {
            AgentKind::Pgs => vec![
                length,
                Dimension::new("response_iterations", RESPONSE_ITERATIONS.map(f64::from)),
            ],
            AgentKind::Poe | AgentKind::Prhea | AgentKind::MoPrhea | AgentKind::SPrhea => {
                let mut d = vec![
                    Dimension::new("population_size", ints(&POPULATION_SIZES)),
                    length,
                    Dimension::new("mutation_rate", MUTATION_RATES),
                    Dimension::new("tournament_size", ints(&TOURNAMENT_SIZES)),
                ];
                if agent == AgentKind::SPrhea {
                    d.push(Dimension::new("num_changes", ints(&NUM_CHANGES)));
                }
                d.push(Dimension::flag("elitism"));
                d.push(Dimension::flag("continue_search"));
                d
            }
            AgentKind::RuleCombat | AgentKind::RulePusher | AgentKind::Random => Vec::new(),
        };
        if agent.uses_portfolio() {
            dims.extend(
                ScriptId::ALL
                    .iter()
                    .map(|s| Dimension::flag(format!("{PORTFOLIO_PREFIX}{}", s.name()))),
            );
        }
        SearchSpace { agent, dims }
    }

    /// A space over arbitrary dimensions, for synthetic landscapes.
    pub fn custom(agent: AgentKind, dims: Vec<Dimension>) -> SearchSpace {
        SearchSpace { agent, dims }
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    /// Number of points, including invalid ones.
    pub fn size(&self) -> f64 {
        self.dims.iter().map(|d| d.values.len() as f64).product()
    }

    fn portfolio_mask(&self, point: &[usize]) -> Option<[bool; ScriptId::COUNT]> {
        let mut mask = [false; ScriptId::COUNT];
        let mut any_flag = false;
        for (d, &i) in self.dims.iter().zip(point) {
            if let Some(name) = d.name.strip_prefix(PORTFOLIO_PREFIX) {
                if let Some(s) = ScriptId::ALL.iter().find(|s| s.name() == name) {
                    mask[s.code() as usize] = d.values[i] != 0.0;
                    any_flag = true;
                }
            }
        }
        any_flag.then_some(mask)
    }

    /// In bounds, and at least one script when the space has portfolio flags.
    pub fn is_valid(&self, point: &[usize]) -> bool {
        point.len() == self.dims.len()
            && point.iter().zip(&self.dims).all(|(&i, d)| i < d.values.len())
            && self.portfolio_mask(point).is_none_or(|m| m.iter().any(|&b| b))
    }

    pub fn random_point(&self, rng: &mut GameRng) -> Vec<usize> {
        loop {
            let p: Vec<usize> = self.dims.iter().map(|d| rng.gen_range(0..d.values.len())).collect();
            if self.is_valid(&p) {
                return p;
            }
        }
    }

    /// Human-readable `name=value` pairs.
    pub fn describe(&self, point: &[usize]) -> String {
        self.dims
            .iter()
            .zip(point)
            .map(|(d, &i)| format!("{}={}", d.name, d.values[i]))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// The agent configuration a point stands for. Dimensions not in the space
    /// keep `base`'s values.
    pub fn to_spec(&self, point: &[usize], base: &AgentSpec) -> AgentSpec {
        let mut params: AgentParams = base.params;
        for (d, &i) in self.dims.iter().zip(point) {
            let v = d.values[i];
            match d.name.as_str() {
                "population_size" => params.population_size = v as u32,
                "individual_length" => params.individual_length = v as u32,
                "mutation_rate" => params.mutation_rate = v,
                "tournament_size" => params.tournament_size = v as u32,
                "num_changes" => params.num_changes = v as u32,
                "response_iterations" => params.response_iterations = v as u32,
                "elitism" => params.elitism = v != 0.0,
                "continue_search" => params.continue_search = v != 0.0,
                _ => {}
            }
        }
        let portfolio = match self.portfolio_mask(point) {
            Some(mask) => Portfolio::from_mask(mask).unwrap_or_else(|_| base.portfolio.clone()),
            None => base.portfolio.clone(),
        };
        AgentSpec {
            agent: self.agent,
            name: base.name.clone(),
            portfolio,
            params,
        }
    }

    /// The point closest to `spec`; `None` if a value is off the grid.
    pub fn point_of(&self, spec: &AgentSpec) -> Option<Vec<usize>> {
        let p = spec.params;
        let mask = spec.portfolio.mask();
        self.dims
            .iter()
            .map(|d| {
                let v = match d.name.as_str() {
                    "population_size" => f64::from(p.population_size),
                    "individual_length" => f64::from(p.individual_length),
                    "mutation_rate" => p.mutation_rate,
                    "tournament_size" => f64::from(p.tournament_size),
                    "num_changes" => f64::from(p.num_changes),
                    "response_iterations" => f64::from(p.response_iterations),
                    "elitism" => f64::from(u8::from(p.elitism)),
                    "continue_search" => f64::from(u8::from(p.continue_search)),
                    name => {
                        let script = name
                            .strip_prefix(PORTFOLIO_PREFIX)
                            .and_then(|n| ScriptId::ALL.into_iter().find(|s| s.name() == n))?;
                        f64::from(u8::from(mask[script.code() as usize]))
                    }
                };
                d.index_of(v)
            })
            .collect()
    }
}
