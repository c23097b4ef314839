//! Match play, round-robin leagues, portfolio usage profiles and result
//! export.

mod export;

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AgentKind, AgentSpec};
use crate::engine::{Action, Outcome, Player};
use crate::modes::Mode;
use crate::rng::{derive_rng, mix};
use crate::scripts::ScriptId;

pub use export::{
    export_league, export_profiles, load_league, match_columns, read_match_records, write_metadata, Metadata, SCHEMA_VERSION,
};

#[derive(Debug, Error)]
pub enum TournamentError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("a league needs at least two agents, got {0}")]
    TooFewAgents(usize),
    #[error("agent name `{0}` is used twice")]
    DuplicateName(String),
    #[error("games per pair must be a positive even number, got {0}")]
    OddGames(u32),
    #[error("{agent} executed no script-driven action in {games} games")]
    NoScriptActions { agent: String, games: u32 },
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> TournamentError + '_ {
    move |source| TournamentError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchOutcome {
    Win0,
    Win1,
    Draw,
}

impl MatchOutcome {
    pub fn from_outcome(o: Outcome) -> Option<MatchOutcome> {
        match o {
            Outcome::WinPlayer0 => Some(MatchOutcome::Win0),
            Outcome::WinPlayer1 => Some(MatchOutcome::Win1),
            Outcome::Draw => Some(MatchOutcome::Draw),
            Outcome::Ongoing => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MatchOutcome::Win0 => "win0",
            MatchOutcome::Win1 => "win1",
            MatchOutcome::Draw => "draw",
        }
    }

    /// Tournament points for the player at `seat`: win 3, draw 1, loss 0.
    pub fn points(self, seat: usize) -> u32 {
        match (self, seat) {
            (MatchOutcome::Draw, _) => 1,
            (MatchOutcome::Win0, 0) | (MatchOutcome::Win1, 1) => 3,
            _ => 0,
        }
    }
}

/// One finished game. Agent `i` always plays as player `i`; `seats_swapped`
/// says whether player 0 started in the second spawn zone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub mode: String,
    pub agent0: String,
    pub agent1: String,
    pub seed: u64,
    pub seats_swapped: bool,
    pub outcome: MatchOutcome,
    pub turns_played: u32,
    pub fm_calls: [u64; 2],
    /// Executed script-driven actions per agent, indexed by script code.
    pub usage: [[u64; ScriptId::COUNT]; 2],
    /// Actions an agent proposed that the engine rejected (replaced by an end
    /// of turn). Only possible under fog of war.
    pub rejected: [u32; 2],
}

/// Random stream of the agent sitting in `player`'s seat. Keyed by spawn zone
/// so that a seat-swapped rematch hands each zone the same stream.
fn agent_rng(seed: u64, player: Player, swapped: bool) -> crate::rng::GameRng {
    let zone = player.index() as u64 ^ u64::from(swapped);
    derive_rng(seed, mix(0x5eed, zone))
}

/// Plays one game to the end (a decisive result or the mode's turn limit).
pub fn play_match(mode: &Mode, specs: [&AgentSpec; 2], seed: u64, swapped: bool, budget: u64) -> MatchRecord {
    let mut agents = [specs[0].build(), specs[1].build()];
    let mut rngs = [agent_rng(seed, Player::P0, swapped), agent_rng(seed, Player::P1, swapped)];
    let mut state = mode.initial_state(seed, swapped);
    let mut fm_calls = [0u64; 2];
    let mut usage = [[0u64; ScriptId::COUNT]; 2];
    let mut rejected = [0u32; 2];
    while !state.is_terminal() {
        let p = state.current_player();
        let i = p.index();
        let obs = state.observe(p);
        let d = agents[i].decide(&obs, budget, &mut rngs[i]);
        fm_calls[i] += d.fm_calls;
        match state.apply(&d.action) {
            Ok(()) => {
                if let (Some(s), false) = (d.script, d.action.is_end_turn()) {
                    usage[i][s.code() as usize] += 1;
                }
            }
            Err(e) => {
                log::warn!("{} proposed {}: {e}", specs[i].name, d.action);
                rejected[i] += 1;
                state.apply(&Action::EndTurn).expect("ending the turn is always legal");
            }
        }
    }
    MatchRecord {
        mode: mode.name().to_owned(),
        agent0: specs[0].name.clone(),
        agent1: specs[1].name.clone(),
        seed,
        seats_swapped: swapped,
        outcome: MatchOutcome::from_outcome(state.outcome()).expect("loop ends on a terminal state"),
        turns_played: state.turn(),
        fm_calls,
        usage,
        rejected,
    }
}

/// Win/draw/loss counts from one agent's point of view.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub wins: u32,
    pub draws: u32,
    pub losses: u32,
}

impl Tally {
    pub fn games(&self) -> u32 {
        self.wins + self.draws + self.losses
    }

    pub fn win_rate(&self) -> f64 {
        if self.games() == 0 {
            0.0
        } else {
            f64::from(self.wins) / f64::from(self.games())
        }
    }

    fn add(&mut self, outcome: MatchOutcome, seat: usize) {
        match outcome.points(seat) {
            3 => self.wins += 1,
            1 => self.draws += 1,
            _ => self.losses += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeagueResult {
    pub mode: String,
    pub agents: Vec<String>,
    pub games_per_pair: u32,
    pub budget: u64,
    /// Ordered by pair (row-major over agent indices), seed, then seat order.
    pub records: Vec<MatchRecord>,
}

impl LeagueResult {
    /// `cell(i, j)` is agent i's record against agent j.
    pub fn matrix(&self) -> Vec<Vec<Tally>> {
        let n = self.agents.len();
        let index: HashMap<&str, usize> = self.agents.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        let mut m = vec![vec![Tally::default(); n]; n];
        for r in &self.records {
            let (Some(&a), Some(&b)) = (index.get(r.agent0.as_str()), index.get(r.agent1.as_str())) else {
                continue;
            };
            m[a][b].add(r.outcome, 0);
            m[b][a].add(r.outcome, 1);
        }
        m
    }

    pub fn totals(&self) -> Vec<Tally> {
        self.matrix()
            .into_iter()
            .map(|row| {
                row.into_iter().fold(Tally::default(), |acc, t| Tally {
                    wins: acc.wins + t.wins,
                    draws: acc.draws + t.draws,
                    losses: acc.losses + t.losses,
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct LeagueConfig {
    pub mode: Mode,
    pub agents: Vec<AgentSpec>,
    /// Seeds `1..=games_per_pair / 2`, each played once per seat arrangement.
    pub games_per_pair: u32,
    pub budget: u64,
    /// JSON-lines file of finished matches; existing entries are reused.
    pub checkpoint: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Job {
    a: usize,
    b: usize,
    seed: u64,
    swapped: bool,
}

/// Every (pair, seed, seat) job in the canonical result order.
fn schedule(n: usize, games_per_pair: u32) -> Vec<Job> {
    let mut jobs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for seed in 1..=u64::from(games_per_pair / 2) {
                for swapped in [false, true] {
                    jobs.push(Job { a, b, seed, swapped });
                }
            }
        }
    }
    jobs
}

/// Agent names, seed and seat arrangement.
type RecordKey = (String, String, u64, bool);

fn record_key(r: &MatchRecord) -> RecordKey {
    (r.agent0.clone(), r.agent1.clone(), r.seed, r.seats_swapped)
}

fn read_checkpoint(path: &Path) -> Result<HashMap<RecordKey, MatchRecord>, TournamentError> {
    let mut done = HashMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(io_err(path)(e)),
    };
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: MatchRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            // a torn last line from an interrupted run is replayed
            Err(e) => {
                log::warn!("{}:{}: skipping unreadable checkpoint line: {e}", path.display(), n + 1);
                continue;
            }
        };
        done.insert(record_key(&r), r);
    }
    Ok(done)
}

/// Round robin: every unordered pair plays each seed from both seats.
pub fn run_league(cfg: &LeagueConfig) -> Result<LeagueResult, TournamentError> {
    if cfg.agents.len() < 2 {
        return Err(TournamentError::TooFewAgents(cfg.agents.len()));
    }
    if cfg.games_per_pair == 0 || cfg.games_per_pair % 2 == 1 {
        return Err(TournamentError::OddGames(cfg.games_per_pair));
    }
    let mut names = std::collections::HashSet::new();
    for a in &cfg.agents {
        if !names.insert(a.name.as_str()) {
            return Err(TournamentError::DuplicateName(a.name.clone()));
        }
    }

    let done = match &cfg.checkpoint {
        Some(p) => read_checkpoint(p)?,
        None => HashMap::new(),
    };
    let sink = match &cfg.checkpoint {
        Some(p) => Some(Mutex::new(
            OpenOptions::new().create(true).append(true).open(p).map_err(io_err(p))?,
        )),
        None => None,
    };
    let jobs = schedule(cfg.agents.len(), cfg.games_per_pair);
    log::info!(
        "league on {}: {} agents, {} matches ({} from checkpoint)",
        cfg.mode.name(),
        cfg.agents.len(),
        jobs.len(),
        done.len()
    );
    let records: Result<Vec<MatchRecord>, TournamentError> = jobs
        .par_iter()
        .map(|j| {
            let (sa, sb) = (&cfg.agents[j.a], &cfg.agents[j.b]);
            let key = (sa.name.clone(), sb.name.clone(), j.seed, j.swapped);
            if let Some(r) = done.get(&key) {
                return Ok(r.clone());
            }
            let r = play_match(&cfg.mode, [sa, sb], j.seed, j.swapped, cfg.budget);
            if let (Some(sink), Some(path)) = (&sink, &cfg.checkpoint) {
                let line = serde_json::to_string(&r).expect("records serialize");
                let mut f = sink.lock().expect("checkpoint writer poisoned");
                writeln!(f, "{line}").map_err(io_err(path))?;
            }
            Ok(r)
        })
        .collect();
    Ok(LeagueResult {
        mode: cfg.mode.name().to_owned(),
        agents: cfg.agents.iter().map(|a| a.name.clone()).collect(),
        games_per_pair: cfg.games_per_pair,
        budget: cfg.budget,
        records: records?,
    })
}

/// Relative frequency with which an agent's search returned each script.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UsageProfile {
    pub agent: String,
    pub mode: String,
    pub opponent: String,
    pub games: u32,
    pub counts: [u64; ScriptId::COUNT],
}

impl UsageProfile {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Normalised counts; all zero when nothing was recorded.
    pub fn frequencies(&self) -> [f64; ScriptId::COUNT] {
        let total = self.total();
        let mut f = [0.0; ScriptId::COUNT];
        if total > 0 {
            for (fi, &c) in f.iter_mut().zip(&self.counts) {
                *fi = c as f64 / total as f64;
            }
        }
        f
    }
}

/// Plays `games` games of `spec` (as player 0) against the mode's rule-based
/// agent and counts the scripts it executed. Game `i` uses seed `i / 2 + 1`,
/// seat-swapped when `i` is odd.
pub fn usage_profile(
    mode: &Mode,
    spec: &AgentSpec,
    games: u32,
    budget: u64,
) -> Result<UsageProfile, TournamentError> {
    let opponent = AgentSpec::preset(AgentKind::rule_based_for(mode));
    let records: Vec<MatchRecord> = (0..games)
        .into_par_iter()
        .map(|i| play_match(mode, [spec, &opponent], u64::from(i / 2 + 1), i % 2 == 1, budget))
        .collect();
    let mut counts = [0u64; ScriptId::COUNT];
    for r in &records {
        for (c, u) in counts.iter_mut().zip(r.usage[0]) {
            *c += u;
        }
    }
    let profile = UsageProfile {
        agent: spec.name.clone(),
        mode: mode.name().to_owned(),
        opponent: opponent.name.clone(),
        games,
        counts,
    };
    if profile.total() == 0 {
        return Err(TournamentError::NoScriptActions {
            agent: spec.name.clone(),
            games,
        });
    }
    Ok(profile)
}
