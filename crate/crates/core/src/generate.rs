//! Level generation around a player path.
//!
//! The pipeline sizes the level to the path, constrains the tiles the path
//! touches, fills the grid with the Markov chain from the bottom-left corner,
//! then scatters gold and enemies along the path and puts the spawn at its
//! start.

use std::collections::BTreeSet;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::chain::{ActionTileCompat, ChainKey, ChainTable, EntityStats, Gaussian, LevelModel, LookupTier};
use crate::error::Result;
use crate::model::{sample_path, Checkpoint, DEFAULT_PATH_LENGTH};
use crate::path::{overlay_path, ActionMap, AnnotatedLevel, Coord, PathSequence};
use crate::tile::{Action, Tile, TileGrid};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub path_length: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            path_length: DEFAULT_PATH_LENGTH,
            seed: 0,
        }
    }
}

/// Smallest grid holding the path: (width, height, normalized start).
pub fn min_bounding_grid(actions: &[Action]) -> (usize, usize, Coord) {
    let path = PathSequence::new(actions.to_vec());
    let (w, h) = path.bounding_size();
    (w, h, path.start())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartialCell {
    Fixed(Tile),
    Constrained(BTreeSet<Tile>),
    Free,
}

impl PartialCell {
    pub fn admits(&self, tile: Tile) -> bool {
        match self {
            PartialCell::Fixed(t) => *t == tile,
            PartialCell::Constrained(set) => set.contains(&tile),
            PartialCell::Free => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<PartialCell>,
}

impl PartialGrid {
    pub fn get(&self, x: usize, y: usize) -> &PartialCell {
        &self.cells[y * self.width + x]
    }
}

/// Counts of non-primary branches taken while generating.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FallbackEvents {
    /// Lookups answered by the left/below table.
    pub backoff: usize,
    /// Lookups answered by the global marginal.
    pub global: usize,
    /// Constrained cells whose allowed tiles had no chain support.
    pub constraint: usize,
    /// Annotated cells left free because their action was never observed.
    pub unconstrained_action: usize,
}

impl FallbackEvents {
    pub fn total(&self) -> usize {
        self.backoff + self.global + self.constraint + self.unconstrained_action
    }
}

/// Constrain each annotated cell to the tiles seen under its action.
pub fn prespecify(
    actions: &ActionMap,
    compat: &ActionTileCompat,
    events: &mut FallbackEvents,
) -> PartialGrid {
    let (width, height) = (actions.width(), actions.height());
    let mut cells = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let cell = match actions.get(x, y) {
                None => PartialCell::Free,
                Some(a) => {
                    let allowed = compat.allowed(a);
                    match allowed.len() {
                        0 => {
                            log::warn!("action '{a}' never observed in training; cell left free");
                            events.unconstrained_action += 1;
                            PartialCell::Free
                        }
                        1 => PartialCell::Fixed(*allowed.iter().next().expect("one tile")),
                        _ => PartialCell::Constrained(allowed),
                    }
                }
            };
            cells.push(cell);
        }
    }
    PartialGrid {
        width,
        height,
        cells,
    }
}

fn draw(probs: &[f64; 8], rng: &mut impl RngCore) -> Tile {
    Tile::ALL[crate::model::sample::sample_index(probs, rng)]
}

/// Fill the grid row by row from the bottom-left corner.
pub fn generate_tiles(
    partial: &PartialGrid,
    actions: &ActionMap,
    table: &ChainTable,
    rng: &mut impl RngCore,
    events: &mut FallbackEvents,
) -> TileGrid {
    let (w, h) = (partial.width, partial.height);
    let mut grid = TileGrid::filled(w, h, Tile::Empty);
    for y in (0..h).rev() {
        for x in 0..w {
            let tile = match partial.get(x, y) {
                PartialCell::Fixed(t) => *t,
                cell => {
                    let key = ChainKey::at(
                        |cx, cy| {
                            // Only cells left of or below (x, y) are filled yet.
                            grid.at(cx, cy)
                        },
                        actions,
                        x,
                        y,
                    );
                    let (mut probs, tier) = table.lookup(&key);
                    match tier {
                        LookupTier::Full => {}
                        LookupTier::Backoff => events.backoff += 1,
                        LookupTier::Global => {
                            log::debug!("chain key {key} fell back to the global marginal");
                            events.global += 1;
                        }
                    }
                    match cell {
                        PartialCell::Constrained(allowed) => {
                            for t in Tile::ALL {
                                if !allowed.contains(&t) {
                                    probs[t.index()] = 0.0;
                                }
                            }
                            let mass: f64 = probs.iter().sum();
                            if mass > 0.0 {
                                probs.iter_mut().for_each(|p| *p /= mass);
                                draw(&probs, rng)
                            } else {
                                log::debug!("no chain support for allowed set at ({x}, {y})");
                                events.constraint += 1;
                                let options: Vec<Tile> = allowed.iter().copied().collect();
                                options[rng.random_range(0..options.len())]
                            }
                        }
                        _ => draw(&probs, rng),
                    }
                }
            };
            grid.set(x, y, tile);
        }
    }
    grid
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityCounts {
    pub gold: usize,
    pub enemies: usize,
    /// Requested counts before clamping to the available cells.
    pub gold_requested: usize,
    pub enemies_requested: usize,
}

fn sample_ratio(g: Gaussian, rng: &mut impl RngCore) -> f64 {
    if g.std <= 0.0 || !g.std.is_finite() {
        return g.mean.max(0.0);
    }
    let normal = Normal::new(g.mean, g.std).expect("finite gaussian");
    for _ in 0..1000 {
        let v = normal.sample(rng);
        if v >= 0.0 {
            return v;
        }
    }
    0.0
}

/// Place gold, then enemies, on empty path cells other than the start, and the
/// spawn at the start.
pub fn place_entities(
    grid: &mut TileGrid,
    trace: &[Coord],
    path_len: usize,
    stats: &EntityStats,
    rng: &mut impl RngCore,
) -> EntityCounts {
    let gold_ratio = sample_ratio(stats.gold_ratio, rng);
    let enemy_ratio = sample_ratio(stats.enemy_ratio, rng);
    let gold_requested = (gold_ratio * path_len as f64).round() as usize;
    let enemies_requested = (enemy_ratio * path_len as f64).round() as usize;

    let start = trace[0];
    let mut seen = BTreeSet::new();
    let mut eligible: Vec<Coord> = trace
        .iter()
        .copied()
        .filter(|&c| c != start && seen.insert(c))
        .filter(|&(x, y)| grid.at(x, y) == Some(Tile::Empty))
        .collect();

    let mut take = |n: usize, tile: Tile, rng: &mut dyn RngCore, grid: &mut TileGrid| {
        let n = if n > eligible.len() {
            log::warn!(
                "only {} empty path cells for {n} {tile:?} tiles",
                eligible.len()
            );
            eligible.len()
        } else {
            n
        };
        let mut picks: Vec<usize> = sample_indices(rng, eligible.len(), n).into_vec();
        picks.sort_unstable_by(|a, b| b.cmp(a));
        for i in picks {
            let (x, y) = eligible.remove(i);
            grid.set(x as usize, y as usize, tile);
        }
        n
    };
    let gold = take(gold_requested, Tile::Gold, rng, grid);
    let enemies = take(enemies_requested, Tile::Enemy, rng, grid);
    grid.set(start.0 as usize, start.1 as usize, Tile::Spawn);
    EntityCounts {
        gold,
        enemies,
        gold_requested,
        enemies_requested,
    }
}

/// A generated level and everything that went into it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedLevel {
    pub seed: u64,
    pub path: PathSequence,
    pub partial: PartialGrid,
    /// Tiles before entity placement.
    pub structure: TileGrid,
    pub level: AnnotatedLevel,
    pub entities: EntityCounts,
    pub fallbacks: FallbackEvents,
}

impl GeneratedLevel {
    pub fn grid(&self) -> &TileGrid {
        &self.level.grid
    }

    /// Sidecar metadata written next to the level text.
    pub fn sidecar(&self) -> serde_json::Value {
        let (x, y) = self.path.start();
        serde_json::json!({
            "seed": self.seed,
            "path": self.path.to_string(),
            "start": [x, y],
            "width": self.level.grid.width(),
            "height": self.level.grid.height(),
            "gold": self.entities.gold,
            "enemies": self.entities.enemies,
            "fallback_events": self.fallbacks.total(),
            "fallbacks": self.fallbacks,
            "actions": self.level.actions.rows(),
        })
    }
}

/// Build a level around an explicit path.
pub fn generate_from_path(
    path: PathSequence,
    model: &LevelModel,
    seed: u64,
    rng: &mut impl RngCore,
) -> Result<GeneratedLevel> {
    let (w, h) = path.bounding_size();
    let actions = overlay_path(w, h, &path)?;
    let mut fallbacks = FallbackEvents::default();
    let partial = prespecify(&actions, &model.compat, &mut fallbacks);
    let structure = generate_tiles(&partial, &actions, &model.table, rng, &mut fallbacks);
    let mut grid = structure.clone();
    let entities = place_entities(&mut grid, &path.trace(), path.len(), &model.stats, rng);
    Ok(GeneratedLevel {
        seed,
        path,
        partial,
        structure,
        level: AnnotatedLevel::new(grid, actions)?,
        entities,
        fallbacks,
    })
}

/// Sample a path from the LSTM and build a level around it. Deterministic in
/// `config.seed`.
pub fn generate_level(
    config: &GenConfig,
    paths: &Checkpoint,
    model: &LevelModel,
) -> Result<GeneratedLevel> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let actions = sample_path(&paths.model, config.path_length, paths.chunk_len, &mut rng);
    generate_from_path(PathSequence::new(actions), model, config.seed, &mut rng)
}
