//! CSV/JSON files written for a league or profile run.
//!
//! Layout of an output directory:
//! - `league_matrix.csv`: one row per ordered agent pair that met
//!   (`agent,opponent,wins,draws,losses,games,win_rate`), rows in agent order.
//! - `league_totals.csv`: `agent,wins,draws,losses,games,win_rate`.
//! - `match_records.csv`: one row per game, see [`match_columns`].
//! - `results.json`: the full [`LeagueResult`], reloadable with [`load_league`].
//! - `usage_profiles.csv` / `usage_profiles.json`: per agent and mode, total
//!   script actions and the relative frequency of each script.
//! - `metadata.json`: schema version, command flags and a timestamp. It is the
//!   only file whose bytes depend on when the run happened.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scripts::ScriptId;

use super::{io_err, LeagueResult, MatchOutcome, MatchRecord, TournamentError, UsageProfile};

pub const SCHEMA_VERSION: u32 = 1;

const FIXED_COLUMNS: [&str; 11] = [
    "mode",
    "agent0",
    "agent1",
    "seed",
    "seats_swapped",
    "outcome",
    "turns_played",
    "fm_calls0",
    "fm_calls1",
    "rejected0",
    "rejected1",
];

/// Column names of `match_records.csv`: the fixed columns followed by
/// `usage{seat}_{script}` for both seats and all scripts in code order.
pub fn match_columns() -> Vec<String> {
    let mut cols: Vec<String> = FIXED_COLUMNS.iter().map(|c| c.to_string()).collect();
    for seat in 0..2 {
        for s in ScriptId::ALL {
            cols.push(format!("usage{seat}_{}", s.abbreviation()));
        }
    }
    cols
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub command: String,
    /// Every command-line flag with its effective value.
    pub flags: BTreeMap<String, String>,
    pub created: String,
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> TournamentError + '_ {
    move |e| TournamentError::Format {
        path: path.to_owned(),
        message: e.to_string(),
    }
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), TournamentError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), TournamentError> {
    let mut text = serde_json::to_string_pretty(value).expect("results serialize");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn strings(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn match_row(r: &MatchRecord) -> Vec<String> {
    let mut row = vec![
        r.mode.clone(),
        r.agent0.clone(),
        r.agent1.clone(),
        r.seed.to_string(),
        r.seats_swapped.to_string(),
        r.outcome.as_str().to_owned(),
        r.turns_played.to_string(),
        r.fm_calls[0].to_string(),
        r.fm_calls[1].to_string(),
        r.rejected[0].to_string(),
        r.rejected[1].to_string(),
    ];
    for seat in r.usage {
        row.extend(seat.iter().map(|c| c.to_string()));
    }
    row
}

/// Writes the league files (everything but metadata) into `dir`.
pub fn export_league(result: &LeagueResult, dir: &Path) -> Result<(), TournamentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let matrix = result.matrix();
    let mut rows = Vec::new();
    for (i, row) in matrix.iter().enumerate() {
        for (j, t) in row.iter().enumerate() {
            if t.games() == 0 {
                continue;
            }
            rows.push(vec![
                result.agents[i].clone(),
                result.agents[j].clone(),
                t.wins.to_string(),
                t.draws.to_string(),
                t.losses.to_string(),
                t.games().to_string(),
                t.win_rate().to_string(),
            ]);
        }
    }
    write_csv(
        &dir.join("league_matrix.csv"),
        &strings(&["agent", "opponent", "wins", "draws", "losses", "games", "win_rate"]),
        &rows,
    )?;

    let totals: Vec<Vec<String>> = result
        .totals()
        .iter()
        .zip(&result.agents)
        .map(|(t, a)| {
            vec![
                a.clone(),
                t.wins.to_string(),
                t.draws.to_string(),
                t.losses.to_string(),
                t.games().to_string(),
                t.win_rate().to_string(),
            ]
        })
        .collect();
    write_csv(
        &dir.join("league_totals.csv"),
        &strings(&["agent", "wins", "draws", "losses", "games", "win_rate"]),
        &totals,
    )?;

    let records: Vec<Vec<String>> = result.records.iter().map(match_row).collect();
    write_csv(&dir.join("match_records.csv"), &match_columns(), &records)?;
    write_json(&dir.join("results.json"), result)
}

/// Reloads a league written by [`export_league`].
pub fn load_league(dir: &Path) -> Result<LeagueResult, TournamentError> {
    let path = dir.join("results.json");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| TournamentError::Format {
        path,
        message: e.to_string(),
    })
}

/// Parses `match_records.csv`.
pub fn read_match_records(path: &Path) -> Result<Vec<MatchRecord>, TournamentError> {
    let bad = |message: String| TournamentError::Format {
        path: path.to_owned(),
        message,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(str::to_owned).collect();
    if header != match_columns() {
        return Err(bad(format!("unexpected columns {header:?}")));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let num = |i: usize| -> Result<u64, TournamentError> {
            field(i)
                .parse()
                .map_err(|_| bad(format!("row {}: `{}` is not a number", line + 2, field(i))))
        };
        let outcome = match field(5) {
            "win0" => MatchOutcome::Win0,
            "win1" => MatchOutcome::Win1,
            "draw" => MatchOutcome::Draw,
            other => return Err(bad(format!("row {}: unknown outcome `{other}`", line + 2))),
        };
        let mut usage = [[0u64; ScriptId::COUNT]; 2];
        for (seat, u) in usage.iter_mut().enumerate() {
            for (k, c) in u.iter_mut().enumerate() {
                *c = num(FIXED_COLUMNS.len() + seat * ScriptId::COUNT + k)?;
            }
        }
        out.push(MatchRecord {
            mode: field(0).to_owned(),
            agent0: field(1).to_owned(),
            agent1: field(2).to_owned(),
            seed: num(3)?,
            seats_swapped: field(4) == "true",
            outcome,
            turns_played: num(6)? as u32,
            fm_calls: [num(7)?, num(8)?],
            usage,
            rejected: [num(9)? as u32, num(10)? as u32],
        });
    }
    Ok(out)
}

/// Writes `usage_profiles.csv` and `usage_profiles.json` into `dir`.
pub fn export_profiles(profiles: &[UsageProfile], dir: &Path) -> Result<(), TournamentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut header = strings(&["agent", "mode", "opponent", "games", "total"]);
    header.extend(ScriptId::ALL.iter().map(|s| s.abbreviation().to_owned()));
    let rows: Vec<Vec<String>> = profiles
        .iter()
        .map(|p| {
            let mut row = vec![
                p.agent.clone(),
                p.mode.clone(),
                p.opponent.clone(),
                p.games.to_string(),
                p.total().to_string(),
            ];
            row.extend(p.frequencies().iter().map(|f| f.to_string()));
            row
        })
        .collect();
    write_csv(&dir.join("usage_profiles.csv"), &header, &rows)?;
    write_json(&dir.join("usage_profiles.json"), &profiles)
}

pub fn write_metadata(dir: &Path, meta: &Metadata) -> Result<(), TournamentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(&dir.join("metadata.json"), meta)
}
