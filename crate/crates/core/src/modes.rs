//! Game-mode definitions: loading, validation and initial-state construction.
//!
//! Mode files are TOML. The map and the spawn zones are character grids of
//! the same size: `.` plain, `#` impassable, `O` hole for the map; `0`/`1`
//! mark the spawn tiles of each player, `.` everything else.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{
    Ability, AbilitySet, GameState, GridMap, Player, Pos, RoundEffect, Rules, TileKind, Unit, UnitId, WinRule,
};

#[derive(Debug, Error)]
pub enum ModeError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("unknown mode `{0}` (expected kings, pushers, healers or a path)")]
    Unknown(String),
}

fn invalid(key: &'static str, message: impl Into<String>) -> ModeError {
    ModeError::Invalid {
        key,
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitType {
    pub name: String,
    pub health: u32,
    pub attack_damage: u32,
    pub movement_range: u32,
    pub attack_range: u32,
    pub vision_range: u32,
    #[serde(default)]
    pub abilities: Vec<Ability>,
    #[serde(default)]
    pub king: bool,
}

fn default_turn_limit() -> u32 {
    100
}

/// A game mode as written in its definition file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub name: String,
    pub version: u32,
    #[serde(default = "default_turn_limit")]
    pub turn_limit: u32,
    pub action_points: u32,
    pub win_rule: WinRule,
    #[serde(default)]
    pub heal_amount: u32,
    #[serde(default)]
    pub push_enabled: bool,
    #[serde(default)]
    pub fog_enabled: bool,
    /// Unit types spawned for each player, in spawn order.
    pub roster: Vec<String>,
    pub map: Vec<String>,
    pub spawns: Vec<String>,
    pub round_effect: RoundEffect,
    pub unit_types: Vec<UnitType>,
}

impl ModeConfig {
    /// Parses and validates a definition.
    pub fn parse(text: &str) -> Result<ModeConfig, ModeError> {
        let cfg: ModeConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text form. Loading it again yields an identical config.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("mode config is always serializable")
    }

    pub fn validate(&self) -> Result<(), ModeError> {
        self.compile().map(|_| ())
    }

    /// Checks every invariant and produces the engine rule set plus spawn zones.
    fn compile(&self) -> Result<(Rules, [Vec<Pos>; 2]), ModeError> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        if self.turn_limit == 0 {
            return Err(invalid("turn_limit", "must be greater than 0"));
        }
        if self.action_points == 0 {
            return Err(invalid("action_points", "must be greater than 0"));
        }
        let map = GridMap::from_rows(&self.map).map_err(|m| invalid("map", m))?;
        if map.has_holes() && !self.push_enabled {
            return Err(invalid("map", "hole tiles require push_enabled"));
        }
        if let RoundEffect::Decay { amount: 0 } = self.round_effect {
            return Err(invalid("round_effect", "decay amount must be greater than 0"));
        }

        for (i, t) in self.unit_types.iter().enumerate() {
            if self.unit_types[..i].iter().any(|o| o.name == t.name) {
                return Err(invalid("unit_types", format!("duplicate unit type `{}`", t.name)));
            }
            if t.health == 0 {
                return Err(invalid("unit_types", format!("`{}` must have health > 0", t.name)));
            }
            if t.abilities.len() > AbilitySet::MAX {
                return Err(invalid(
                    "unit_types",
                    format!("`{}` declares more than {} abilities", t.name, AbilitySet::MAX),
                ));
            }
            if t.abilities.contains(&Ability::Heal) && self.heal_amount == 0 {
                return Err(invalid("heal_amount", format!("`{}` heals but heal_amount is 0", t.name)));
            }
            if t.abilities.contains(&Ability::Push) && !self.push_enabled {
                return Err(invalid("push_enabled", format!("`{}` pushes but push_enabled is false", t.name)));
            }
        }

        if self.roster.is_empty() {
            return Err(invalid("roster", "must list at least one unit"));
        }
        for name in &self.roster {
            if !self.unit_types.iter().any(|t| &t.name == name) {
                return Err(invalid("roster", format!("unknown unit type `{name}`")));
            }
        }
        let kings = self
            .roster
            .iter()
            .filter(|n| self.unit_types.iter().any(|t| &t.name == *n && t.king))
            .count();
        if self.win_rule == WinRule::KingDeath && kings != 1 {
            return Err(invalid("roster", format!("king_death needs exactly one king per player, found {kings}")));
        }

        if self.spawns.len() as i32 != map.height() {
            return Err(invalid("spawns", "must have the same number of rows as the map"));
        }
        let mut zones: [Vec<Pos>; 2] = [Vec::new(), Vec::new()];
        for (y, row) in self.spawns.iter().enumerate() {
            if row.chars().count() as i32 != map.width() {
                return Err(invalid("spawns", format!("row {y} does not match the map width")));
            }
            for (x, c) in row.chars().enumerate() {
                let p = Pos::new(x as i32, y as i32);
                let zone = match c {
                    '.' => continue,
                    '0' => 0,
                    '1' => 1,
                    other => return Err(invalid("spawns", format!("unknown character {other:?} at row {y}"))),
                };
                if map.tile(p) != TileKind::Plain {
                    return Err(invalid("spawns", format!("spawn tile {p} is {:?}", map.tile(p))));
                }
                zones[zone].push(p);
            }
        }
        for (i, z) in zones.iter().enumerate() {
            if z.len() < self.roster.len() {
                return Err(invalid(
                    "spawns",
                    format!("zone {i} has {} tiles for {} units", z.len(), self.roster.len()),
                ));
            }
        }

        let rules = Rules {
            name: self.name.clone(),
            map,
            unit_kinds: self.unit_types.iter().map(|t| t.name.clone()).collect(),
            action_points: self.action_points,
            turn_limit: self.turn_limit,
            win_rule: self.win_rule,
            round_effect: self.round_effect,
            heal_amount: self.heal_amount,
            push_enabled: self.push_enabled,
            fog_enabled: self.fog_enabled,
        };
        Ok((rules, zones))
    }
}

/// Reads and validates a mode file.
pub fn load_mode(path: impl AsRef<Path>) -> Result<ModeConfig, ModeError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModeError::Io {
        path: path.to_owned(),
        source,
    })?;
    ModeConfig::parse(&text)
}

/// The three shipped modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinMode {
    Kings,
    Pushers,
    Healers,
}

impl BuiltinMode {
    pub const ALL: [BuiltinMode; 3] = [BuiltinMode::Kings, BuiltinMode::Pushers, BuiltinMode::Healers];

    pub fn source(self) -> &'static str {
        match self {
            BuiltinMode::Kings => include_str!("../modes/kings.toml"),
            BuiltinMode::Pushers => include_str!("../modes/pushers.toml"),
            BuiltinMode::Healers => include_str!("../modes/healers.toml"),
        }
    }

    pub fn config(self) -> ModeConfig {
        ModeConfig::parse(self.source()).expect("shipped mode files are valid")
    }

    pub fn name(self) -> &'static str {
        match self {
            BuiltinMode::Kings => "kings",
            BuiltinMode::Pushers => "pushers",
            BuiltinMode::Healers => "healers",
        }
    }
}

impl FromStr for BuiltinMode {
    type Err = ModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "kings" => Ok(BuiltinMode::Kings),
            "pushers" => Ok(BuiltinMode::Pushers),
            "healers" => Ok(BuiltinMode::Healers),
            _ => Err(ModeError::Unknown(s.to_owned())),
        }
    }
}

impl fmt::Display for BuiltinMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A validated mode, ready to produce initial states. Cheap to clone.
#[derive(Clone, Debug)]
pub struct Mode {
    config: Arc<ModeConfig>,
    rules: Arc<Rules>,
    zones: Arc<[Vec<Pos>; 2]>,
}

impl Mode {
    pub fn new(config: ModeConfig) -> Result<Mode, ModeError> {
        let (rules, zones) = config.compile()?;
        Ok(Mode {
            config: Arc::new(config),
            rules: Arc::new(rules),
            zones: Arc::new(zones),
        })
    }

    pub fn builtin(mode: BuiltinMode) -> Mode {
        Mode::new(mode.config()).expect("shipped mode files are valid")
    }

    /// A shipped mode name (`kings`, `pushers`, `healers`) or a path to a mode file.
    pub fn resolve(name_or_path: &str) -> Result<Mode, ModeError> {
        match name_or_path.parse::<BuiltinMode>() {
            Ok(b) => Ok(Mode::builtin(b)),
            Err(_) if Path::new(name_or_path).exists() => Mode::new(load_mode(name_or_path)?),
            Err(e) => Err(e),
        }
    }

    pub fn config(&self) -> &ModeConfig {
        &self.config
    }

    pub fn rules(&self) -> &Arc<Rules> {
        &self.rules
    }

    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn spawn_zone(&self, player: Player) -> &[Pos] {
        &self.zones[player.index()]
    }

    /// Deterministic start position for `seed`. Each side's roster is placed
    /// by a seeded shuffle of its spawn zone. With `swapped` the same layout is
    /// produced with the players exchanged: player 1 gets player 0's units and
    /// tiles (and its first move), and vice versa.
    pub fn initial_state(&self, seed: u64, swapped: bool) -> GameState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut units = Vec::with_capacity(self.config.roster.len() * 2);
        let mut next_id: UnitId = 0;
        for zone_owner in Player::BOTH {
            let mut tiles = self.zones[zone_owner.index()].clone();
            tiles.shuffle(&mut rng);
            let owner = if swapped { zone_owner.opponent() } else { zone_owner };
            for (name, &pos) in self.config.roster.iter().zip(&tiles) {
                let kind = self
                    .config
                    .unit_types
                    .iter()
                    .position(|t| &t.name == name)
                    .expect("validated roster");
                let t = &self.config.unit_types[kind];
                units.push(Unit {
                    id: next_id,
                    owner,
                    kind: kind as u16,
                    pos,
                    health: t.health,
                    max_health: t.health,
                    attack_damage: t.attack_damage,
                    movement_range: t.movement_range,
                    attack_range: t.attack_range,
                    vision_range: t.vision_range,
                    abilities: AbilitySet::from_slice(&t.abilities).expect("validated ability count"),
                    is_king: t.king,
                    action_points: 0,
                });
                next_id += 1;
            }
        }
        let first = if swapped { Player::P1 } else { Player::P0 };
        GameState::new(self.rules.clone(), units, first).expect("validated spawn layout")
    }
}
