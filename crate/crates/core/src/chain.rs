//! Path-conditioned multi-dimensional Markov chain over tiles, the action→tile
//! compatibility map, and Gaussian entity-count statistics.
//!
//! A tile is conditioned on the tiles to its left and below plus the path
//! actions at its own cell, to its right and above. Unseen keys back off to the
//! left/below pair, then to the global tile marginal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{ActionMap, AnnotatedLevel, PathSequence};
use crate::tile::{Action, Tile, TileGrid};

const OUTSIDE: char = 'X';
const NO_ACTION: char = '.';

/// Action annotation of a neighboring cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionSlot {
    Outside,
    NoAction,
    Act(Action),
}

impl ActionSlot {
    fn from_cell(cell: Option<Option<Action>>) -> Self {
        match cell {
            None => ActionSlot::Outside,
            Some(None) => ActionSlot::NoAction,
            Some(Some(a)) => ActionSlot::Act(a),
        }
    }

    fn symbol(self) -> char {
        match self {
            ActionSlot::Outside => OUTSIDE,
            ActionSlot::NoAction => NO_ACTION,
            ActionSlot::Act(a) => a.symbol(),
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            OUTSIDE => Some(ActionSlot::Outside),
            NO_ACTION => Some(ActionSlot::NoAction),
            c => Action::from_symbol(c).map(ActionSlot::Act),
        }
    }
}

fn tile_slot_symbol(t: Option<Tile>) -> char {
    t.map_or(OUTSIDE, Tile::symbol)
}

fn tile_slot_from(c: char) -> Option<Option<Tile>> {
    if c == OUTSIDE {
        Some(None)
    } else {
        Tile::from_symbol(c).map(Some)
    }
}

/// Full conditioning context of one cell. `None` tiles are outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChainKey {
    pub tile_left: Option<Tile>,
    pub tile_below: Option<Tile>,
    pub action_here: Option<Action>,
    pub action_right: ActionSlot,
    pub action_above: ActionSlot,
}

/// Structure-only context used when the full key is unseen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BackoffKey {
    pub tile_left: Option<Tile>,
    pub tile_below: Option<Tile>,
}

impl ChainKey {
    /// Context of cell `(x, y)`. `tile_at` must return already-known tiles.
    pub fn at(
        tile_at: impl Fn(i64, i64) -> Option<Tile>,
        actions: &ActionMap,
        x: usize,
        y: usize,
    ) -> Self {
        let (xi, yi) = (x as i64, y as i64);
        ChainKey {
            tile_left: tile_at(xi - 1, yi),
            tile_below: tile_at(xi, yi + 1),
            action_here: actions.get(x, y),
            action_right: ActionSlot::from_cell(actions.at(xi + 1, yi)),
            action_above: ActionSlot::from_cell(actions.at(xi, yi - 1)),
        }
    }

    pub fn backoff(&self) -> BackoffKey {
        BackoffKey {
            tile_left: self.tile_left,
            tile_below: self.tile_below,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let c: Vec<char> = s.chars().collect();
        if c.len() != 5 {
            return None;
        }
        let action_here = match c[2] {
            NO_ACTION => None,
            a => Some(Action::from_symbol(a)?),
        };
        Some(ChainKey {
            tile_left: tile_slot_from(c[0])?,
            tile_below: tile_slot_from(c[1])?,
            action_here,
            action_right: ActionSlot::from_symbol(c[3])?,
            action_above: ActionSlot::from_symbol(c[4])?,
        })
    }
}

impl fmt::Display for ChainKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}{}{}{}",
            tile_slot_symbol(self.tile_left),
            tile_slot_symbol(self.tile_below),
            self.action_here.map_or(NO_ACTION, Action::symbol),
            self.action_right.symbol(),
            self.action_above.symbol()
        )
    }
}

impl BackoffKey {
    pub fn parse(s: &str) -> Option<Self> {
        let c: Vec<char> = s.chars().collect();
        (c.len() == 2).then_some(())?;
        Some(BackoffKey {
            tile_left: tile_slot_from(c[0])?,
            tile_below: tile_slot_from(c[1])?,
        })
    }
}

impl fmt::Display for BackoffKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}",
            tile_slot_symbol(self.tile_left),
            tile_slot_symbol(self.tile_below)
        )
    }
}

/// Observation counts per tile, indexed like [`Tile::ALL`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TileCounts([u64; 8]);

impl TileCounts {
    pub fn add(&mut self, tile: Tile, n: u64) {
        self.0[tile.index()] += n;
    }

    pub fn merge(&mut self, other: &TileCounts) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }

    pub fn get(&self, tile: Tile) -> u64 {
        self.0[tile.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Normalized distribution; all zeros when nothing was counted.
    pub fn probabilities(&self) -> [f64; 8] {
        let total = self.total();
        let mut p = [0.0; 8];
        if total > 0 {
            for (p, &c) in p.iter_mut().zip(&self.0) {
                *p = c as f64 / total as f64;
            }
        }
        p
    }

    fn to_map(self) -> BTreeMap<String, u64> {
        Tile::ALL
            .into_iter()
            .filter(|t| self.get(*t) > 0)
            .map(|t| (t.symbol().to_string(), self.get(t)))
            .collect()
    }

    fn from_map(map: &BTreeMap<String, u64>) -> Result<Self> {
        let mut counts = TileCounts::default();
        for (k, &n) in map {
            let mut chars = k.chars();
            let tile = match (chars.next(), chars.next()) {
                (Some(c), None) => Tile::from_symbol(c),
                _ => None,
            }
            .ok_or_else(|| Error::Format(format!("bad tile key {k:?}")))?;
            counts.add(tile, n);
        }
        Ok(counts)
    }
}

/// Which tier of the chain answered a lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LookupTier {
    Full,
    Backoff,
    Global,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainTable {
    pub full: BTreeMap<ChainKey, TileCounts>,
    pub backoff: BTreeMap<BackoffKey, TileCounts>,
    pub global: TileCounts,
}

impl ChainTable {
    /// Count every cell of every level. Entity tiles count as empty space.
    pub fn train(levels: &[AnnotatedLevel]) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Corpus("no levels to train the chain on".into()));
        }
        let mut table = ChainTable::default();
        for level in levels {
            table.add_level(level)?;
        }
        Ok(table)
    }

    pub fn add_level(&mut self, level: &AnnotatedLevel) -> Result<()> {
        let grid = &level.grid;
        if (grid.width(), grid.height()) != (level.actions.width(), level.actions.height()) {
            return Err(Error::Shape("action map does not match level".into()));
        }
        let tile_at = |x: i64, y: i64| grid.at(x, y).map(Tile::structural);
        for y in 0..grid.height() {
            for x in 0..grid.width() {
                let tile = grid.get(x, y).structural();
                let key = ChainKey::at(tile_at, &level.actions, x, y);
                self.full.entry(key).or_default().add(tile, 1);
                self.backoff.entry(key.backoff()).or_default().add(tile, 1);
                self.global.add(tile, 1);
            }
        }
        Ok(())
    }

    /// Add another table's counts into this one.
    pub fn merge(&mut self, other: &ChainTable) {
        for (k, c) in &other.full {
            self.full.entry(*k).or_default().merge(c);
        }
        for (k, c) in &other.backoff {
            self.backoff.entry(*k).or_default().merge(c);
        }
        self.global.merge(&other.global);
    }

    /// Distribution for `key`, falling back to the left/below pair and then the
    /// global marginal.
    pub fn lookup(&self, key: &ChainKey) -> ([f64; 8], LookupTier) {
        if let Some(c) = self.full.get(key).filter(|c| c.total() > 0) {
            return (c.probabilities(), LookupTier::Full);
        }
        if let Some(c) = self.backoff.get(&key.backoff()).filter(|c| c.total() > 0) {
            return (c.probabilities(), LookupTier::Backoff);
        }
        (self.global.probabilities(), LookupTier::Global)
    }

    /// Every stored distribution, for invariant checks.
    pub fn distributions(&self) -> impl Iterator<Item = &TileCounts> {
        self.full
            .values()
            .chain(self.backoff.values())
            .chain(std::iter::once(&self.global))
    }
}

/// Equivalent to [`ChainTable::train`].
pub fn train_chain(levels: &[AnnotatedLevel]) -> Result<ChainTable> {
    ChainTable::train(levels)
}

/// Tiles observed under each action.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionTileCompat(pub BTreeMap<Action, BTreeSet<Tile>>);

impl ActionTileCompat {
    /// Allowed tiles for `action`; empty when the action was never observed.
    pub fn allowed(&self, action: Action) -> BTreeSet<Tile> {
        self.0.get(&action).cloned().unwrap_or_default()
    }
}

/// Collect the structural tiles seen at each annotated cell.
pub fn build_compat(levels: &[AnnotatedLevel]) -> ActionTileCompat {
    let mut map: BTreeMap<Action, BTreeSet<Tile>> = BTreeMap::new();
    for level in levels {
        for y in 0..level.grid.height() {
            for x in 0..level.grid.width() {
                if let Some(a) = level.actions.get(x, y) {
                    map.entry(a).or_default().insert(level.grid.get(x, y).structural());
                }
            }
        }
    }
    ActionTileCompat(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub std: f64,
}

/// Gold and enemy counts per path action, modelled as Gaussians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntityStats {
    pub gold_ratio: Gaussian,
    pub enemy_ratio: Gaussian,
}

fn fit(values: &[f64]) -> Gaussian {
    let (mean, std) = crate::eval::mean_std(values);
    Gaussian { mean, std }
}

/// Fit ratio Gaussians from aligned levels and paths. Empty paths are skipped.
pub fn fit_entity_stats(levels: &[TileGrid], paths: &[PathSequence]) -> Result<EntityStats> {
    if levels.len() != paths.len() {
        return Err(Error::Alignment {
            levels: levels.len(),
            paths: paths.len(),
        });
    }
    let mut gold = Vec::new();
    let mut enemies = Vec::new();
    for (i, (level, path)) in levels.iter().zip(paths).enumerate() {
        if path.is_empty() {
            log::warn!("level {i}: empty path, left out of entity statistics");
            continue;
        }
        let len = path.len() as f64;
        gold.push(level.count(Tile::Gold) as f64 / len);
        enemies.push(level.count(Tile::Enemy) as f64 / len);
    }
    if gold.is_empty() {
        return Err(Error::Corpus("no nonempty paths for entity statistics".into()));
    }
    Ok(EntityStats {
        gold_ratio: fit(&gold),
        enemy_ratio: fit(&enemies),
    })
}

/// Everything needed to fill a level around a path.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelModel {
    pub table: ChainTable,
    pub compat: ActionTileCompat,
    pub stats: EntityStats,
}

const LEVEL_MODEL_FORMAT: &str = "pathrunner-level-model";
const LEVEL_MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LevelModelJson {
    format: String,
    version: u32,
    full: BTreeMap<String, BTreeMap<String, u64>>,
    backoff: BTreeMap<String, BTreeMap<String, u64>>,
    global: BTreeMap<String, u64>,
    compat: BTreeMap<String, String>,
    entity_stats: EntityStats,
}

impl LevelModel {
    pub fn train(levels: &[AnnotatedLevel], paths: &[PathSequence]) -> Result<Self> {
        let table = ChainTable::train(levels)?;
        let compat = build_compat(levels);
        let grids: Vec<TileGrid> = levels.iter().map(|l| l.grid.clone()).collect();
        let stats = fit_entity_stats(&grids, paths)?;
        Ok(LevelModel {
            table,
            compat,
            stats,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = LevelModelJson {
            format: LEVEL_MODEL_FORMAT.into(),
            version: LEVEL_MODEL_VERSION,
            full: self
                .table
                .full
                .iter()
                .map(|(k, c)| (k.to_string(), c.to_map()))
                .collect(),
            backoff: self
                .table
                .backoff
                .iter()
                .map(|(k, c)| (k.to_string(), c.to_map()))
                .collect(),
            global: self.table.global.to_map(),
            compat: self
                .compat
                .0
                .iter()
                .map(|(a, ts)| (a.symbol().to_string(), ts.iter().map(|t| t.symbol()).collect()))
                .collect(),
            entity_stats: self.stats,
        };
        serde_json::to_string_pretty(&doc).expect("level model serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LevelModelJson = serde_json::from_str(text)?;
        if doc.format != LEVEL_MODEL_FORMAT || doc.version != LEVEL_MODEL_VERSION {
            return Err(Error::Format(format!(
                "unsupported level model {} v{}",
                doc.format, doc.version
            )));
        }
        let bad = |k: &str| Error::Format(format!("bad chain key {k:?}"));
        let mut table = ChainTable::default();
        for (k, m) in &doc.full {
            let key = ChainKey::parse(k).ok_or_else(|| bad(k))?;
            table.full.insert(key, TileCounts::from_map(m)?);
        }
        for (k, m) in &doc.backoff {
            let key = BackoffKey::parse(k).ok_or_else(|| bad(k))?;
            table.backoff.insert(key, TileCounts::from_map(m)?);
        }
        table.global = TileCounts::from_map(&doc.global)?;
        let mut compat = BTreeMap::new();
        for (a, tiles) in &doc.compat {
            let action = a
                .chars()
                .next()
                .and_then(Action::from_symbol)
                .ok_or_else(|| Error::Format(format!("bad compat action {a:?}")))?;
            let set = tiles
                .chars()
                .map(|c| Tile::from_symbol(c).ok_or_else(|| Error::Format(format!("bad tile {c:?}"))))
                .collect::<Result<BTreeSet<_>>>()?;
            compat.insert(action, set);
        }
        Ok(LevelModel {
            table,
            compat: ActionTileCompat(compat),
            stats: doc.entity_stats,
        })
    }
}
