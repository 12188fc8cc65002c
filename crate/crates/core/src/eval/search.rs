use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::moves::legal_moves;
use crate::path::Coord;
use crate::tile::{Action, TileGrid};

/// Outcome of a single A* query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub reached: bool,
    /// States popped from the open list and expanded.
    pub nodes_explored: usize,
    /// Moves from start to goal; empty when unreached or when start is the goal.
    pub path: Vec<Action>,
}

fn manhattan(a: Coord, b: Coord) -> usize {
    (a.0.abs_diff(b.0) + a.1.abs_diff(b.1)) as usize
}

/// A* with a Manhattan heuristic and unit move cost.
///
/// Ties on f are broken by smaller h, then insertion order, so the expansion
/// count is deterministic.
pub fn astar_to_goal(grid: &TileGrid, start: Coord, goal: Coord) -> SearchResult {
    let w = grid.width();
    let index = |(x, y): Coord| y as usize * w + x as usize;
    let unreached = SearchResult {
        reached: false,
        nodes_explored: 0,
        path: Vec::new(),
    };
    if !grid.contains(start.0, start.1) || !grid.contains(goal.0, goal.1) {
        return unreached;
    }

    let n = w * grid.height();
    let mut best_g = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut parent: Vec<Option<(usize, Action)>> = vec![None; n];
    let mut open = BinaryHeap::new();
    let mut seq = 0usize;

    best_g[index(start)] = 0;
    let h0 = manhattan(start, goal);
    open.push(Reverse((h0, h0, seq, start)));
    let mut expanded = 0;

    while let Some(Reverse((_, _, _, pos))) = open.pop() {
        let i = index(pos);
        if closed[i] {
            continue;
        }
        closed[i] = true;
        expanded += 1;
        if pos == goal {
            let mut path = Vec::new();
            let mut cur = i;
            while let Some((prev, action)) = parent[cur] {
                path.push(action);
                cur = prev;
            }
            path.reverse();
            return SearchResult {
                reached: true,
                nodes_explored: expanded,
                path,
            };
        }
        let g = best_g[i];
        for (action, next) in legal_moves(grid, pos) {
            let j = index(next);
            if closed[j] || g + 1 >= best_g[j] {
                continue;
            }
            best_g[j] = g + 1;
            parent[j] = Some((i, action));
            let h = manhattan(next, goal);
            seq += 1;
            open.push(Reverse((g + 1 + h, h, seq, next)));
        }
    }
    SearchResult {
        nodes_explored: expanded,
        ..unreached
    }
}
