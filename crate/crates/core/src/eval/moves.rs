//! Movement rules for the evaluation agent.
//!
//! The agent walks, climbs ladders, hangs on ropes and falls. It cannot dig, and
//! enemies are ignored (treated as empty space). The bottom edge of the grid acts
//! as a floor.

use crate::path::Coord;
use crate::tile::{Action, Tile, TileGrid};

fn passable(grid: &TileGrid, x: i64, y: i64) -> bool {
    grid.at(x, y).is_some_and(|t| !t.is_solid())
}

/// Whether the agent can stand at `(x, y)` without falling.
pub fn is_supported(grid: &TileGrid, (x, y): Coord) -> bool {
    if matches!(grid.at(x, y), Some(Tile::Ladder | Tile::Rope)) {
        return true;
    }
    match grid.at(x, y + 1) {
        None => true,
        Some(below) => below.is_solid() || below == Tile::Ladder,
    }
}

/// Moves available from `pos`, in alphabet order.
pub fn legal_moves(grid: &TileGrid, pos: Coord) -> Vec<(Action, Coord)> {
    let (x, y) = pos;
    let mut moves = Vec::with_capacity(4);
    if !is_supported(grid, pos) {
        if passable(grid, x, y + 1) {
            moves.push((Action::Fall, (x, y + 1)));
        }
        return moves;
    }
    let here = grid.at(x, y);
    let below = grid.at(x, y + 1);
    if passable(grid, x - 1, y) {
        moves.push((Action::Left, (x - 1, y)));
    }
    if passable(grid, x + 1, y) {
        moves.push((Action::Right, (x + 1, y)));
    }
    if here == Some(Tile::Ladder) && passable(grid, x, y - 1) {
        moves.push((Action::Up, (x, y - 1)));
    }
    let below_open = passable(grid, x, y + 1);
    if below == Some(Tile::Ladder) || (here == Some(Tile::Ladder) && below_open) {
        moves.push((Action::ClimbDown, (x, y + 1)));
    } else if here == Some(Tile::Rope) && below_open {
        moves.push((Action::Fall, (x, y + 1)));
    }
    moves
}
