use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use portfolio_core::agents::{AgentSpec, DEFAULT_BUDGET};
use portfolio_core::bench::forward_model_throughput;
use portfolio_core::modes::{load_mode, Mode};
use portfolio_core::ntbea::{tune, FitnessProtocol, NtbeaConfig, TuneConfig};
use portfolio_core::tournament::{
    export_league, export_profiles, play_match, run_league, usage_profile, write_metadata, LeagueConfig, Metadata,
    SCHEMA_VERSION,
};

#[derive(Parser, Debug)]
#[command(name = "portfolio", version, about = "Portfolio-search agents for a turn-based strategy game")]
struct Cli {
    /// Worker threads for game-level parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check mode or agent config files without playing.
    Validate(ValidateArgs),
    /// Play one game and print its record as JSON.
    Play(PlayArgs),
    /// Round-robin league with seat-swapped seeds.
    League(LeagueArgs),
    /// Script-usage profiles against the mode's rule-based agent.
    Profile(ProfileArgs),
    /// Tune an agent's parameters and portfolio with NTBEA.
    Tune(TuneArgs),
    /// Measure single-threaded forward-model throughput.
    BenchFm(BenchArgs),
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    /// Mode (.toml with a map) or agent config files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct PlayArgs {
    #[arg(long, default_value = "kings")]
    mode: String,
    /// Agent kind or config path for player 0.
    #[arg(long)]
    agent0: String,
    /// Agent kind or config path for player 1.
    #[arg(long)]
    agent1: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    swapped: bool,
    /// Forward-model calls per decision.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args, Debug, Serialize)]
struct LeagueArgs {
    #[arg(long, default_value = "kings")]
    mode: String,
    /// Agent kinds or config paths; at least two.
    #[arg(long, num_args = 1.., required = true)]
    agents: Vec<String>,
    /// Games per pair; seeds 1..=games/2, each from both seats.
    #[arg(long, default_value_t = 200)]
    games: u32,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    out: PathBuf,
    /// Resume from (and append to) this JSON-lines file.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ProfileArgs {
    #[arg(long, num_args = 1.., required = true)]
    agent: Vec<String>,
    #[arg(long, num_args = 1.., default_value = "kings")]
    mode: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    games: u32,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct TuneArgs {
    #[arg(long)]
    agent: String,
    #[arg(long, default_value = "kings")]
    mode: String,
    /// Number of parameter points evaluated.
    #[arg(long, default_value_t = 100)]
    budget: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Games per evaluation.
    #[arg(long, default_value_t = 20)]
    games: u32,
    /// Forward-model calls per decision inside evaluation games.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    decision_budget: u64,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    c: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 50)]
    neighbours: u32,
    /// Model single dimensions and the full point only.
    #[arg(long)]
    no_pairs: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BenchArgs {
    #[arg(long, default_value_t = 5.0)]
    seconds: f64,
    #[arg(long, default_value = "kings")]
    mode: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write bench.json and metadata.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn flags<T: Serialize>(args: &T, threads: Option<usize>) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    if let serde_json::Value::Object(map) = serde_json::to_value(args).expect("arguments serialize") {
        for (k, v) in map {
            let text = match v {
                serde_json::Value::String(s) => s,
                serde_json::Value::Null => String::new(),
                other => other.to_string(),
            };
            out.insert(k, text);
        }
    }
    out.insert("threads".into(), threads.map(|t| t.to_string()).unwrap_or_default());
    out
}

fn metadata<T: Serialize>(command: &str, args: &T, threads: Option<usize>, out: &Path) -> Result<()> {
    let meta = Metadata {
        schema_version: SCHEMA_VERSION,
        command: command.to_owned(),
        flags: flags(args, threads),
        created: chrono::Utc::now().to_rfc3339(),
    };
    write_metadata(out, &meta)?;
    Ok(())
}

fn specs(names: &[String]) -> Result<Vec<AgentSpec>> {
    names
        .iter()
        .map(|n| AgentSpec::resolve(n).with_context(|| format!("loading agent `{n}`")))
        .collect()
}

fn validate(args: &ValidateArgs) -> Result<()> {
    let mut failed = 0;
    for f in &args.files {
        let text = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        // mode files are the ones with a map
        let is_mode = text.lines().any(|l| l.trim_start().starts_with("map"));
        let result = if is_mode {
            load_mode(f).and_then(Mode::new).map(|m| format!("mode `{}`", m.name())).map_err(anyhow::Error::from)
        } else {
            AgentSpec::load(f).map(|s| format!("agent `{}` ({})", s.name, s.agent.name())).map_err(anyhow::Error::from)
        };
        match result {
            Ok(what) => println!("{}: ok, {what}", f.display()),
            Err(e) => {
                failed += 1;
                println!("{}: {e:#}", f.display());
            }
        }
    }
    if failed > 0 {
        bail!("{failed} invalid file(s)");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads;
    match cli.command {
        Command::Validate(a) => validate(&a),
        Command::Play(a) => {
            let mode = Mode::resolve(&a.mode)?;
            let s = specs(&[a.agent0.clone(), a.agent1.clone()])?;
            let record = play_match(&mode, [&s[0], &s[1]], a.seed, a.swapped, a.budget);
            println!("{}", serde_json::to_string(&record)?);
            Ok(())
        }
        Command::League(a) => {
            let cfg = LeagueConfig {
                mode: Mode::resolve(&a.mode)?,
                agents: specs(&a.agents)?,
                games_per_pair: a.games,
                budget: a.budget,
                checkpoint: a.checkpoint.clone(),
            };
            let result = run_league(&cfg)?;
            export_league(&result, &a.out)?;
            metadata("league", &a, threads, &a.out)?;
            for (name, t) in result.agents.iter().zip(result.totals()) {
                println!("{name}: {}W {}D {}L ({:.3})", t.wins, t.draws, t.losses, t.win_rate());
            }
            Ok(())
        }
        Command::Profile(a) => {
            let agents = specs(&a.agent)?;
            let mut profiles = Vec::new();
            for m in &a.mode {
                let mode = Mode::resolve(m)?;
                for spec in &agents {
                    let p = usage_profile(&mode, spec, a.games, a.budget)?;
                    log::info!("{} on {}: {:?}", p.agent, p.mode, p.frequencies());
                    profiles.push(p);
                }
            }
            export_profiles(&profiles, &a.out)?;
            metadata("profile", &a, threads, &a.out)?;
            println!("wrote {} profile(s) to {}", profiles.len(), a.out.display());
            Ok(())
        }
        Command::Tune(a) => {
            let cfg = TuneConfig {
                agent: a.agent.parse()?,
                mode: Mode::resolve(&a.mode)?,
                ntbea: NtbeaConfig {
                    budget: a.budget,
                    c: a.c,
                    epsilon: a.epsilon,
                    neighbours: a.neighbours,
                    pairs: !a.no_pairs,
                    seed: a.seed,
                },
                protocol: FitnessProtocol {
                    games: a.games,
                    ..FitnessProtocol::default()
                },
                decision_budget: a.decision_budget,
            };
            if cfg.ntbea.budget == 0 {
                bail!("--budget must be at least 1");
            }
            if !cfg.agent.uses_portfolio() {
                bail!("`{}` has no tunable parameters", cfg.agent.name());
            }
            let result = tune(&cfg);
            result.export(&a.out)?;
            metadata("tune", &a, threads, &a.out)?;
            println!("{}", result.space.describe(&result.best_point));
            Ok(())
        }
        Command::BenchFm(a) => {
            let mode = Mode::resolve(&a.mode)?;
            let report = forward_model_throughput(&mode, Duration::from_secs_f64(a.seconds), a.seed);
            println!(
                "{:.0} forward-model calls/s ({} calls over {} games in {:.2} s)",
                report.calls_per_second, report.calls, report.games, report.seconds
            );
            if let Some(out) = &a.out {
                fs::create_dir_all(out)?;
                fs::write(out.join("bench.json"), serde_json::to_string_pretty(&report)? + "\n")?;
                metadata("bench-fm", &a, threads, out)?;
            }
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    run(cli)
}
