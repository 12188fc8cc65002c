use super::metrics::spawn_position;
use super::search::astar_to_goal;
use crate::error::{Error, Result};
use crate::path::{trace_path, PathRecord};
use crate::tile::{Tile, TileGrid};

/// Greedy gold tour from the spawn: repeatedly walk to the nearest reachable
/// uncollected gold (by A* path length, ties in row-major order).
///
/// The returned record is anchored at the spawn position.
pub fn solve_for_path(grid: &TileGrid) -> Result<PathRecord> {
    let spawn = spawn_position(grid)?;
    let mut remaining: Vec<(i64, i64)> = grid
        .positions(Tile::Gold)
        .into_iter()
        .map(|(x, y)| (x as i64, y as i64))
        .collect();
    if remaining.is_empty() {
        return Err(Error::Structure("level has no gold".into()));
    }
    let mut pos = spawn;
    let mut actions = Vec::new();
    loop {
        let best = remaining
            .iter()
            .enumerate()
            .filter_map(|(i, &g)| {
                let r = astar_to_goal(grid, pos, g);
                r.reached.then_some((r.path.len(), i, r.path))
            })
            .min_by_key(|(len, i, _)| (*len, *i));
        let Some((_, i, path)) = best else { break };
        pos = *trace_path(pos, &path).last().expect("trace is nonempty");
        actions.extend(path);
        remaining.swap_remove(i);
        // keep row-major order for tie-breaking
        remaining.sort_by_key(|&(x, y)| (y, x));
        if remaining.is_empty() {
            break;
        }
    }
    if remaining.len() == grid.count(Tile::Gold) {
        return Err(Error::Solve);
    }
    Ok(PathRecord {
        anchor: Some(spawn),
        actions,
    })
}
