use serde::{Deserialize, Serialize};

use super::search::astar_to_goal;
use crate::error::{Error, Result};
use crate::path::Coord;
use crate::tile::{Tile, TileGrid};

/// Playability, coherence and composition metrics of one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMetrics {
    pub gold_total: usize,
    pub gold_reached: usize,
    pub percent_collected: f64,
    /// Expansions summed over reachable gold only.
    pub total_nodes_explored: usize,
    pub nodes_per_gold: f64,
    pub width: usize,
    pub height: usize,
    /// Proportion of empty cells.
    pub empty: f64,
    /// Proportion of ladder, rope, gold, enemy and spawn cells.
    pub interesting: f64,
}

pub fn spawn_position(grid: &TileGrid) -> Result<Coord> {
    match grid.positions(Tile::Spawn).as_slice() {
        [(x, y)] => Ok((*x as i64, *y as i64)),
        [] => Err(Error::Structure("level has no spawn tile".into())),
        many => Err(Error::Structure(format!(
            "level has {} spawn tiles",
            many.len()
        ))),
    }
}

/// Search independently from the spawn to every gold piece.
pub fn evaluate_level(grid: &TileGrid) -> Result<LevelMetrics> {
    let spawn = spawn_position(grid)?;
    let gold = grid.positions(Tile::Gold);
    let mut reached = 0;
    let mut total_nodes = 0;
    for &(x, y) in &gold {
        let r = astar_to_goal(grid, spawn, (x as i64, y as i64));
        if r.reached {
            reached += 1;
            total_nodes += r.nodes_explored;
        }
    }
    let cells = grid.cells().len() as f64;
    let interesting = grid
        .cells()
        .iter()
        .filter(|t| {
            matches!(
                t,
                Tile::Ladder | Tile::Rope | Tile::Gold | Tile::Enemy | Tile::Spawn
            )
        })
        .count();
    Ok(LevelMetrics {
        gold_total: gold.len(),
        gold_reached: reached,
        percent_collected: if gold.is_empty() {
            100.0
        } else {
            100.0 * reached as f64 / gold.len() as f64
        },
        total_nodes_explored: total_nodes,
        nodes_per_gold: if reached == 0 {
            0.0
        } else {
            total_nodes as f64 / reached as f64
        },
        width: grid.width(),
        height: grid.height(),
        empty: grid.count(Tile::Empty) as f64 / cells,
        interesting: interesting as f64 / cells,
    })
}
