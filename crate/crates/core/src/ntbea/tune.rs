use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{AgentKind, AgentSpec};
use crate::modes::Mode;
use crate::rng::mix_all;
use crate::tournament::{play_match, MatchOutcome, TournamentError};

use super::{ntbea_run, LandscapeModel, NtbeaConfig, Point, SearchSpace};

/// How one parameter point is scored: a fixed number of games against the
/// mode's rule-based agent, with points per result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitnessProtocol {
    pub games: u32,
    pub win: u32,
    pub draw: u32,
    pub loss: u32,
}

impl Default for FitnessProtocol {
    fn default() -> Self {
        FitnessProtocol {
            games: 20,
            win: 3,
            draw: 1,
            loss: 0,
        }
    }
}

impl FitnessProtocol {
    pub fn score(&self, wins: u32, draws: u32, losses: u32) -> u32 {
        wins * self.win + draws * self.draw + losses * self.loss
    }

    /// Highest reachable score.
    pub fn max_score(&self) -> u32 {
        self.games * self.win.max(self.draw).max(self.loss)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointFitness {
    pub points: u32,
    pub wins: u32,
    pub draws: u32,
    pub losses: u32,
}

/// Plays `protocol.games` games of `spec` against the mode's rule-based agent.
/// Game `g` of evaluation `eval_index` uses seed `mix_all(run_seed, [eval_index, g])`
/// and swaps seats when `g` is odd.
pub fn evaluate_point(
    spec: &AgentSpec,
    mode: &Mode,
    run_seed: u64,
    eval_index: u64,
    protocol: &FitnessProtocol,
    budget: u64,
) -> PointFitness {
    let opponent = AgentSpec::preset(AgentKind::rule_based_for(mode));
    let outcomes: Vec<MatchOutcome> = (0..protocol.games)
        .into_par_iter()
        .map(|g| {
            let seed = mix_all(run_seed, [eval_index, u64::from(g)]);
            play_match(mode, [spec, &opponent], seed, g % 2 == 1, budget).outcome
        })
        .collect();
    let mut f = PointFitness::default();
    for o in outcomes {
        match o {
            MatchOutcome::Win0 => f.wins += 1,
            MatchOutcome::Win1 => f.losses += 1,
            MatchOutcome::Draw => f.draws += 1,
        }
    }
    f.points = protocol.score(f.wins, f.draws, f.losses);
    f
}

#[derive(Clone, Debug)]
pub struct TuneConfig {
    pub agent: AgentKind,
    pub mode: Mode,
    pub ntbea: NtbeaConfig,
    pub protocol: FitnessProtocol,
    /// Forward-model budget per decision inside the evaluation games.
    pub decision_budget: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunedEvaluation {
    pub index: u32,
    pub point: Point,
    pub fitness: PointFitness,
}

#[derive(Clone, Debug)]
pub struct TuneResult {
    pub space: SearchSpace,
    pub mode: String,
    pub best_point: Point,
    pub best: AgentSpec,
    pub history: Vec<TunedEvaluation>,
    pub model: LandscapeModel,
}

/// Tunes `cfg.agent` on `cfg.mode`. The model sees fitness scaled to [0, 1].
pub fn tune(cfg: &TuneConfig) -> TuneResult {
    let space = SearchSpace::for_agent(cfg.agent);
    let base = AgentSpec::preset(cfg.agent);
    let scale = f64::from(cfg.protocol.max_score().max(1));
    let mut history = Vec::new();
    let result = ntbea_run(&space, &cfg.ntbea, &mut |point, index| {
        let spec = space.to_spec(point, &base);
        let f = evaluate_point(
            &spec,
            &cfg.mode,
            cfg.ntbea.seed,
            u64::from(index),
            &cfg.protocol,
            cfg.decision_budget,
        );
        log::info!("eval {index}: {} -> {}", space.describe(point), f.points);
        history.push(TunedEvaluation {
            index,
            point: point.to_vec(),
            fitness: f,
        });
        f64::from(f.points) / scale
    });
    let best = space
        .to_spec(&result.best, &base)
        .with_name(format!("{}_tuned_{}", cfg.agent.name(), cfg.mode.name()));
    TuneResult {
        space,
        mode: cfg.mode.name().to_owned(),
        best_point: result.best,
        best,
        history,
        model: result.model,
    }
}

fn write_rows(path: &Path, header: Vec<String>, rows: Vec<Vec<String>>) -> Result<(), TournamentError> {
    let bad = |e: csv::Error| TournamentError::Format {
        path: path.to_owned(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(bad)?;
    w.write_record(&header).map_err(bad)?;
    for r in rows {
        w.write_record(&r).map_err(bad)?;
    }
    w.flush().map_err(|e| TournamentError::Io {
        path: path.to_owned(),
        source: e,
    })
}

impl TuneResult {
    /// Writes `evaluations.csv` (one row per evaluation, parameter values by
    /// dimension name), `model.csv` (every populated tuple-table entry) and
    /// `best.toml` (loadable agent config) into `dir`.
    pub fn export(&self, dir: &Path) -> Result<(), TournamentError> {
        let io = |path: &Path| {
            let path = path.to_owned();
            move |e| TournamentError::Io { path, source: e }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let dims = self.space.dims();

        let mut header = vec!["index".to_owned()];
        header.extend(dims.iter().map(|d| d.name.clone()));
        header.extend(["points", "wins", "draws", "losses"].map(str::to_owned));
        let rows = self
            .history
            .iter()
            .map(|e| {
                let mut row = vec![e.index.to_string()];
                row.extend(e.point.iter().zip(dims).map(|(&i, d)| d.values[i].to_string()));
                let f = e.fitness;
                row.extend([f.points, f.wins, f.draws, f.losses].map(|v| v.to_string()));
                row
            })
            .collect();
        write_rows(&dir.join("evaluations.csv"), header, rows)?;

        let header = ["tuple", "values", "count", "mean"].map(str::to_owned).to_vec();
        let rows = self
            .model
            .entries()
            .into_iter()
            .map(|(tuple, key, s)| {
                let names: Vec<&str> = tuple.iter().map(|&d| dims[d].name.as_str()).collect();
                let values: Vec<String> = tuple.iter().zip(&key).map(|(&d, &i)| dims[d].values[i].to_string()).collect();
                vec![names.join("+"), values.join("+"), s.count.to_string(), s.mean().to_string()]
            })
            .collect();
        write_rows(&dir.join("model.csv"), header, rows)?;

        let path = dir.join("best.toml");
        fs::write(&path, self.best.to_toml()).map_err(io(&path))
    }
}
