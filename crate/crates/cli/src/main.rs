//! `shipfc` command-line front end.

mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use shipfc::config::{RunConfig, Scenario};
use shipfc::eval::Objective;
use shipfc::models::Family;
use shipfc::pipeline::{OutlierMethod, StepSpec};
use shipfc::Error;

#[derive(Debug, Parser)]
#[command(name = "shipfc", version, about = "Ship fuel-consumption modeling from noon reports and gridded environment data")]
struct Cli {
    /// TOML run configuration; relative paths inside resolve against its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Top-level seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of cross-validation folds.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Grid-search objective.
    #[arg(long, global = true, value_parser = ["r2", "rmse"])]
    objective: Option<String>,
    /// Startup filter fuel threshold in t/day.
    #[arg(long, global = true)]
    min_fuel: Option<f64>,
    /// Response outlier rule, e.g. `iqr:1.5` or `zscore:3`.
    #[arg(long, global = true)]
    outlier: Option<String>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ridge,
    Svr,
    Forest,
    Boost,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Ridge => Family::Ridge,
            FamilyArg::Svr => Family::Svr,
            FamilyArg::Forest => Family::Forest,
            FamilyArg::Boost => Family::Boost,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Material,
    NullEnv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse the report table into records.json and rejected.json.
    Parse,
    /// Run the pipeline and write fused.csv and coverage.json.
    Fuse,
    /// Fit one family on the full training matrix and save it.
    Train {
        #[arg(long, value_enum)]
        family: FamilyArg,
    },
    /// Cross-validate every configured family on the rpm-only and full matrices.
    Evaluate {
        /// Also score this saved model on the fused data.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Rank features by random-forest impurity importance.
    Importance {
        /// Leave engine RPM out of the ranking.
        #[arg(long)]
        exclude_rpm: bool,
    },
    /// Exhaustive hyperparameter search for one family.
    Gridsearch {
        #[arg(long, value_enum)]
        family: FamilyArg,
    },
    /// Write a synthetic corpus with a known fuel law, plus a config for it.
    Synth {
        #[arg(long, value_enum)]
        scenario: Option<ScenarioArg>,
        /// Number of daily reports.
        #[arg(long)]
        days: Option<usize>,
        /// Skip defect injection.
        #[arg(long)]
        clean: bool,
    },
    /// Export the reported positions as CSV and GeoJSON.
    TrackExport,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Parse => "parse",
            Command::Fuse => "fuse",
            Command::Train { .. } => "train",
            Command::Evaluate { .. } => "evaluate",
            Command::Importance { .. } => "importance",
            Command::Gridsearch { .. } => "gridsearch",
            Command::Synth { .. } => "synth",
            Command::TrackExport => "track-export",
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Loaded {
    cfg: RunConfig,
    file_hash: Option<String>,
    path: Option<PathBuf>,
}

fn load_config(cli: &Cli) -> Result<Loaded, Error> {
    let (mut cfg, file_hash, base) = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            let cfg: RunConfig =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (cfg, Some(sha256_hex(text.as_bytes())), base)
        }
        None => (RunConfig::default(), None, PathBuf::from(".")),
    };
    cfg.resolve_paths(&base);
    apply_overrides(cli, &mut cfg)?;
    Ok(Loaded { cfg, file_hash, path: cli.config.clone() })
}

fn apply_overrides(cli: &Cli, cfg: &mut RunConfig) -> Result<(), Error> {
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(k) = cli.k {
        cfg.evaluation.k = k;
    }
    if let Some(o) = &cli.objective {
        cfg.evaluation.objective = o.parse::<Objective>()?;
    }
    if let Some(out) = &cli.out {
        cfg.paths.output_dir = out.clone();
    }
    if let Some(min_fuel) = cli.min_fuel {
        let mut hit = false;
        for s in &mut cfg.pipeline.steps {
            if let StepSpec::FilterStartupAcceleration(f) = s {
                f.min_fuel = min_fuel;
                hit = true;
            }
        }
        if !hit {
            return Err(Error::Config("--min-fuel given but the pipeline has no startup filter step".into()));
        }
    }
    if let Some(spec) = &cli.outlier {
        let method: OutlierMethod = spec.parse()?;
        let mut hit = false;
        for s in &mut cfg.pipeline.steps {
            if let StepSpec::RemoveResponseOutliers(o) = s {
                o.method = method;
                hit = true;
            }
        }
        if !hit {
            return Err(Error::Config("--outlier given but the pipeline has no outlier step".into()));
        }
    }
    Ok(())
}

fn write_run_manifest(cmd: &Command, loaded: &Loaded, outputs: &[PathBuf]) -> Result<(), Error> {
    let cfg = &loaded.cfg;
    let effective = serde_json::to_string(cfg).map_err(|e| Error::Config(e.to_string()))?;
    let out_dir = &cfg.paths.output_dir;
    let rel = |p: &PathBuf| p.strip_prefix(out_dir).unwrap_or(p).display().to_string();
    let manifest = json!({
        "command": cmd.name(),
        "config_path": loaded.path.as_ref().map(|p| p.display().to_string()),
        "config_sha256": loaded.file_hash,
        "effective_config_sha256": sha256_hex(effective.as_bytes()),
        "seed": cfg.seed,
        "k": cfg.evaluation.k,
        "versions": {
            "shipfc-core": shipfc::VERSION,
            "shipfc-cli": env!("CARGO_PKG_VERSION"),
        },
        "outputs": outputs.iter().map(rel).collect::<Vec<_>>(),
        "effective_config": serde_json::from_str::<serde_json::Value>(&effective).expect("round trip"),
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))? + "\n";
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("run.json"), text)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    let mut loaded = load_config(cli)?;
    if let Command::Synth { scenario, days, clean } = &cli.command {
        if let Some(s) = scenario {
            loaded.cfg.synth.scenario = match s {
                ScenarioArg::Material => Scenario::Material,
                ScenarioArg::NullEnv => Scenario::NullEnv,
            };
        }
        if let Some(d) = days {
            loaded.cfg.synth.n_days = *d;
        }
        if *clean {
            loaded.cfg.synth.defects = false;
        }
    }
    let needs_inputs = !matches!(cli.command, Command::Synth { .. });
    loaded.cfg.validate(needs_inputs)?;
    let cfg = &loaded.cfg;
    let outputs = match &cli.command {
        Command::Parse => commands::parse(cfg)?,
        Command::Fuse => commands::fuse(cfg)?,
        Command::Train { family } => commands::train(cfg, (*family).into())?,
        Command::Evaluate { model } => commands::evaluate(cfg, model.as_deref())?,
        Command::Importance { exclude_rpm } => commands::importance(cfg, *exclude_rpm)?,
        Command::Gridsearch { family } => commands::gridsearch(cfg, (*family).into())?,
        Command::Synth { .. } => commands::synth(cfg)?,
        Command::TrackExport => commands::track_export(cfg)?,
    };
    write_run_manifest(&cli.command, &loaded, &outputs)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut chain = Vec::new();
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                chain.push(s.to_string());
                src = s.source();
            }
            let body = json!({
                "error": {
                    "command": cli.command.name(),
                    "module": e.module(),
                    "message": e.to_string(),
                    "causes": chain,
                }
            });
            eprintln!("{body}");
            ExitCode::from(if matches!(e, Error::Config(_)) { 2 } else { 1 })
        }
    }
}
