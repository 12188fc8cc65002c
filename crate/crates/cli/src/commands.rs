use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pathrunner_core::corpus::{annotate, classic_levels, load_level_dir};
use pathrunner_core::eval::report::{evaluate_set, summarize};
use pathrunner_core::eval::spawn_position;
use pathrunner_core::model::train;
use pathrunner_core::path::{format_path_file, parse_path_file};
use pathrunner_core::{
    compare_sets, generate_level, solve_for_path, AnnotatedLevel, Checkpoint, Error, GenConfig,
    LevelModel, LevelSet, PathRecord, PathSequence, Tile, TrainConfig,
};
use serde::{Deserialize, Serialize};

use crate::config::{pick, require, RunConfig};
use crate::files::{dir_label, read_bytes, read_text, write_atomic};
use crate::{
    Cli, Command, CompareArgs, EvalArgs, GenArgs, IngestArgs, ReportFormat, ServeArgs, SolveArgs,
    SynthArgs, TrainChainArgs, TrainPathsArgs,
};

const CORPUS_FORMAT: &str = "pathrunner-corpus";
const CORPUS_VERSION: u32 = 1;

pub fn execute(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::SynthLevels(a) => synth_levels(a, &cfg),
        Command::Ingest(a) => ingest(a, &cfg),
        Command::Solve(a) => solve(a, &cfg),
        Command::TrainPaths(a) => train_paths(a, &cfg),
        Command::TrainChain(a) => train_chain(a, &cfg),
        Command::Gen(a) => gen(a, &cfg),
        Command::Eval(a) => eval(a, &cfg),
        Command::Compare(a) => compare(a, &cfg),
        Command::Serve(a) => serve(a, &cfg),
    }
}

fn level_file(dir: &Path, i: usize, ext: &str) -> PathBuf {
    dir.join(format!("level-{i:03}.{ext}"))
}

fn synth_levels(a: SynthArgs, cfg: &RunConfig) -> Result<()> {
    let out = require(a.out, cfg.out.clone(), "out")?;
    let count = pick(a.count, cfg.count).unwrap_or(150);
    let seed = pick(a.seed, cfg.seed).unwrap_or(0);
    for (i, g) in classic_levels(seed, count).iter().enumerate() {
        write_atomic(&level_file(&out, i, "txt"), g.to_text().as_bytes())?;
    }
    println!("wrote {count} levels to {}", out.display());
    Ok(())
}

/// One entry of the annotated corpus file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub path: String,
    #[serde(flatten)]
    pub level: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusFile {
    pub format: String,
    pub version: u32,
    pub levels: Vec<CorpusEntry>,
}

impl CorpusFile {
    /// Decode into annotated levels and their paths.
    pub fn decode(&self) -> Result<(Vec<AnnotatedLevel>, Vec<PathSequence>)> {
        if self.format != CORPUS_FORMAT || self.version != CORPUS_VERSION {
            bail!("unsupported corpus {} v{}", self.format, self.version);
        }
        let mut levels = Vec::with_capacity(self.levels.len());
        let mut paths = Vec::with_capacity(self.levels.len());
        for e in &self.levels {
            let level = AnnotatedLevel::from_json_value(e.level.clone())
                .with_context(|| format!("corpus level {}", e.name))?;
            let record = PathRecord::parse_line(&e.path)
                .with_context(|| format!("corpus path for {}", e.name))?;
            levels.push(level);
            paths.push(record.sequence());
        }
        Ok((levels, paths))
    }
}

fn ingest(a: IngestArgs, cfg: &RunConfig) -> Result<()> {
    let dir = require(a.levels, cfg.levels.clone(), "levels")?;
    let paths_file = require(a.paths, cfg.paths.clone(), "paths")?;
    let out = require(a.out, cfg.out.clone(), "out")?;
    let named = load_level_dir(&dir)?;
    let records = parse_path_file(&read_text(&paths_file)?)?;
    let grids: Vec<_> = named.iter().map(|(_, g)| g.clone()).collect();
    let annotated = annotate(&grids, &records)?;
    let levels = named
        .iter()
        .zip(&records)
        .zip(&annotated)
        .map(|(((name, _), rec), level)| CorpusEntry {
            name: name.clone(),
            path: rec.to_line(),
            level: level.to_json_value(),
        })
        .collect();
    let doc = CorpusFile {
        format: CORPUS_FORMAT.into(),
        version: CORPUS_VERSION,
        levels,
    };
    write_atomic(&out, (serde_json::to_string_pretty(&doc)? + "\n").as_bytes())?;
    println!("annotated {} levels into {}", annotated.len(), out.display());
    Ok(())
}

fn solve(a: SolveArgs, cfg: &RunConfig) -> Result<()> {
    let dir = require(a.levels, cfg.levels.clone(), "levels")?;
    let out = require(a.out, cfg.out.clone(), "out")?;
    let named = load_level_dir(&dir)?;
    let mut records = Vec::with_capacity(named.len());
    let mut unsolved = 0;
    for (name, grid) in &named {
        let record = match solve_for_path(grid) {
            Ok(r) => r,
            Err(Error::Solve) => {
                log::warn!("{name}: no gold reachable; writing an empty path");
                unsolved += 1;
                PathRecord {
                    anchor: Some(spawn_position(grid)?),
                    actions: Vec::new(),
                }
            }
            Err(e) if grid.count(Tile::Gold) == 0 => {
                log::warn!("{name}: {e}; writing an empty path");
                unsolved += 1;
                PathRecord {
                    anchor: Some(spawn_position(grid)?),
                    actions: Vec::new(),
                }
            }
            Err(e) => return Err(e).with_context(|| format!("solving {name}")),
        };
        records.push(record);
    }
    write_atomic(&out, format_path_file(&records).as_bytes())?;
    println!(
        "solved {} of {} levels into {}",
        named.len() - unsolved,
        named.len(),
        out.display()
    );
    Ok(())
}

fn train_paths(a: TrainPathsArgs, cfg: &RunConfig) -> Result<()> {
    let paths_file = require(a.paths, cfg.paths.clone(), "paths")?;
    let out = require(a.out, cfg.out.clone(), "out")?;
    let d = TrainConfig::default();
    let config = TrainConfig {
        epochs: pick(a.epochs, cfg.epochs).unwrap_or(d.epochs),
        learning_rate: pick(a.learning_rate, cfg.learning_rate).unwrap_or(d.learning_rate),
        dropout_rate: pick(a.dropout_rate, cfg.dropout_rate).unwrap_or(d.dropout_rate),
        clip_norm: pick(a.clip_norm, cfg.clip_norm).unwrap_or(d.clip_norm),
        batch_size: pick(a.batch_size, cfg.batch_size).unwrap_or(d.batch_size),
        seed: pick(a.seed, cfg.seed).unwrap_or(d.seed),
        hidden_size: pick(a.hidden_size, cfg.hidden_size).unwrap_or(d.hidden_size),
        layers: pick(a.layers, cfg.layers).unwrap_or(d.layers),
        chunk_len: pick(a.chunk_len, cfg.chunk_len).unwrap_or(d.chunk_len),
    };
    let records = parse_path_file(&read_text(&paths_file)?)?;
    let paths: Vec<_> = records.into_iter().map(|r| r.actions).collect();
    let outcome = train(&paths, &config)?;
    let first = outcome.loss_history.first().copied().unwrap_or(f64::NAN);
    let last = outcome.loss_history.last().copied().unwrap_or(f64::NAN);
    let ckpt = Checkpoint {
        model: outcome.model,
        chunk_len: config.chunk_len,
        loss_history: outcome.loss_history,
        train: Some(config),
    };
    write_atomic(&out, &ckpt.to_bytes())?;
    println!("trained path model: loss {first:.4} -> {last:.4}; wrote {}", out.display());
    Ok(())
}

fn train_chain(a: TrainChainArgs, cfg: &RunConfig) -> Result<()> {
    let corpus = require(a.corpus, cfg.corpus.clone(), "corpus")?;
    let out = require(a.out, cfg.out.clone(), "out")?;
    let doc: CorpusFile = serde_json::from_str(&read_text(&corpus)?)
        .with_context(|| format!("parsing {}", corpus.display()))?;
    let (levels, paths) = doc.decode()?;
    let model = LevelModel::train(&levels, &paths)?;
    write_atomic(&out, model.to_json().as_bytes())?;
    println!(
        "trained level model: {} full keys, {} backoff keys; wrote {}",
        model.table.full.len(),
        model.table.backoff.len(),
        out.display()
    );
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::from_bytes(&read_bytes(path)?).with_context(|| format!("loading {}", path.display()))
}

pub fn load_level_model(path: &Path) -> Result<LevelModel> {
    LevelModel::from_json(&read_text(path)?).with_context(|| format!("loading {}", path.display()))
}

fn gen(a: GenArgs, cfg: &RunConfig) -> Result<()> {
    let ckpt = load_checkpoint(&require(a.paths_model, cfg.paths_model.clone(), "paths-model")?)?;
    let model = load_level_model(&require(a.level_model, cfg.level_model.clone(), "level-model")?)?;
    let out = require(a.out, cfg.out.clone(), "out")?;
    let count = pick(a.count, cfg.count).unwrap_or(1);
    let seed = pick(a.seed, cfg.seed).unwrap_or(0);
    let path_length = pick(a.path_length, cfg.path_length).unwrap_or(GenConfig::default().path_length);
    for i in 0..count {
        let config = GenConfig {
            path_length,
            seed: seed.wrapping_add(i as u64),
        };
        let level = generate_level(&config, &ckpt, &model)?;
        write_atomic(&level_file(&out, i, "txt"), level.grid().to_text().as_bytes())?;
        let sidecar = serde_json::to_string_pretty(&level.sidecar())? + "\n";
        write_atomic(&level_file(&out, i, "json"), sidecar.as_bytes())?;
    }
    println!("generated {count} levels into {}", out.display());
    Ok(())
}

fn load_set(dir: &Path) -> Result<LevelSet> {
    Ok(LevelSet {
        name: dir_label(dir),
        levels: load_level_dir(dir).with_context(|| format!("loading {}", dir.display()))?,
    })
}

fn eval(a: EvalArgs, cfg: &RunConfig) -> Result<()> {
    let dir = require(a.levels, cfg.levels.clone(), "levels")?;
    let set = load_set(&dir)?;
    if set.levels.is_empty() {
        bail!("no levels in {}", dir.display());
    }
    let summary = summarize(&set.name, evaluate_set(&set)?);
    if let Some(out) = pick(a.out, cfg.out.clone()) {
        write_atomic(&out, (serde_json::to_string_pretty(&summary)? + "\n").as_bytes())?;
    }
    let mut line = String::new();
    let _ = write!(
        line,
        "{}: {} levels, percent collected {:.2} ± {:.2}, gold {:.2} ± {:.2}",
        summary.name,
        summary.count,
        summary.percent_collected.mean,
        summary.percent_collected.std,
        summary.gold_total.mean,
        summary.gold_total.std
    );
    println!("{line}");
    Ok(())
}

fn compare(a: CompareArgs, cfg: &RunConfig) -> Result<()> {
    let format = match (a.format, cfg.format.as_deref()) {
        (Some(f), _) => f,
        (None, None | Some("table")) => ReportFormat::Table,
        (None, Some("tsv")) => ReportFormat::Tsv,
        (None, Some("json")) => ReportFormat::Json,
        (None, Some(other)) => bail!("unknown report format {other:?}"),
    };
    let report = compare_sets(&load_set(&a.set_a)?, &load_set(&a.set_b)?)?;
    let text = match format {
        ReportFormat::Table => report.to_table(),
        ReportFormat::Tsv => report.to_tsv(),
        ReportFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
    };
    match pick(a.out, cfg.out.clone()) {
        Some(out) => write_atomic(&out, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn serve(a: ServeArgs, cfg: &RunConfig) -> Result<()> {
    let host = pick(a.host, cfg.host.clone()).unwrap_or_else(|| "127.0.0.1".into());
    let port = pick(a.port, cfg.port).unwrap_or(8080);
    let models = match (
        pick(a.paths_model, cfg.paths_model.clone()),
        pick(a.level_model, cfg.level_model.clone()),
    ) {
        (Some(p), Some(l)) => Some(crate::server::Models {
            paths: load_checkpoint(&p)?,
            levels: load_level_model(&l)?,
        }),
        (None, None) => {
            log::warn!("no models given; generation endpoints will answer 503");
            None
        }
        _ => bail!("--paths-model and --level-model must be given together"),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(crate::server::serve(&host, port, models))
}
