//! Level corpora: loading level directories, pairing levels with paths, and a
//! seeded builder of classic-layout 32x22 levels used as a bundled stand-in
//! corpus.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::path::{overlay_at, AnnotatedLevel, PathRecord};
use crate::tile::{Tile, TileGrid};

pub const LEVEL_WIDTH: usize = 32;
pub const LEVEL_HEIGHT: usize = 22;

/// Read every `*.txt` level in `dir`, sorted by file name.
pub fn load_level_dir(dir: &Path) -> Result<Vec<(String, TileGrid)>> {
    let mut names: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p)?;
            let grid = TileGrid::parse(&text)
                .map_err(|e| Error::Format(format!("{}: {e}", p.display())))?;
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((name, grid))
        })
        .collect()
}

/// Overlay each path on its level.
pub fn annotate(levels: &[TileGrid], paths: &[PathRecord]) -> Result<Vec<AnnotatedLevel>> {
    if levels.len() != paths.len() {
        return Err(Error::Alignment {
            levels: levels.len(),
            paths: paths.len(),
        });
    }
    levels
        .iter()
        .zip(paths)
        .map(|(grid, path)| {
            let map = overlay_at(grid.width(), grid.height(), path.placement(), &path.actions)?;
            AnnotatedLevel::new(grid.clone(), map)
        })
        .collect()
}

/// Build `count` levels in the original game's style: a solid floor, stacked
/// brick platforms with gaps, ladders between platforms, ropes, and gold and
/// enemies on walkable cells.
pub fn classic_levels(seed: u64, count: usize) -> Vec<TileGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| classic_level(&mut rng)).collect()
}

fn classic_level(rng: &mut ChaCha8Rng) -> TileGrid {
    let (w, h) = (LEVEL_WIDTH, LEVEL_HEIGHT);
    let mut g = TileGrid::filled(w, h, Tile::Empty);
    for x in 0..w {
        g.set(x, h - 1, Tile::Solid);
    }

    // Platform rows, bottom to top.
    let mut floors = vec![h - 1];
    loop {
        let next = *floors.last().expect("floor") as i64 - rng.random_range(3..=5);
        if next < 3 {
            break;
        }
        floors.push(next as usize);
    }

    for &row in &floors[1..] {
        let mut x = rng.random_range(0..4);
        while x < w {
            let len = rng.random_range(3..12).min(w - x);
            let tile = if rng.random_bool(0.2) {
                Tile::Solid
            } else {
                Tile::Brick
            };
            for cx in x..x + len {
                g.set(cx, row, tile);
            }
            x += len + rng.random_range(1..4);
        }
    }

    // Ladders from each walking level up through the platform above it.
    for pair in floors.windows(2) {
        let (lower, upper) = (pair[0], pair[1]);
        // Most platform segments get a ladder whose foot rests on brick.
        let mut x = 0;
        while x < w {
            if !g.get(x, upper).is_solid() {
                x += 1;
                continue;
            }
            let end = (x..w).find(|&e| !g.get(e, upper).is_solid()).unwrap_or(w);
            let feet: Vec<usize> = (x..end).filter(|&c| g.get(c, lower).is_solid()).collect();
            if !feet.is_empty() && rng.random_bool(0.85) {
                let c = feet[rng.random_range(0..feet.len())];
                for y in upper..lower {
                    g.set(c, y, Tile::Ladder);
                }
            }
            x = end;
        }
    }
    if rng.random_bool(0.5) {
        let top = *floors.last().expect("floor");
        let x = rng.random_range(0..w);
        if g.get(x, top).is_solid() || g.get(x, top) == Tile::Ladder {
            for y in 0..top {
                g.set(x, y, Tile::Ladder);
            }
        }
    }

    // Ropes hang in the open space between platforms.
    for pair in floors.windows(2) {
        let (lower, upper) = (pair[0], pair[1]);
        if lower - upper < 4 || !rng.random_bool(0.6) {
            continue;
        }
        let y = upper + 2;
        let start = rng.random_range(0..w - 4);
        let len = rng.random_range(4..12).min(w - start);
        for x in start..start + len {
            if g.get(x, y) == Tile::Empty {
                g.set(x, y, Tile::Rope);
            }
        }
    }

    // Walls split some walking rows.
    for &row in &floors {
        if row < 2 || !rng.random_bool(0.25) {
            continue;
        }
        let x = rng.random_range(1..w - 1);
        for y in row.saturating_sub(2)..row {
            if g.get(x, y) == Tile::Empty {
                g.set(x, y, Tile::Solid);
            }
        }
    }

    let walkable: Vec<(usize, usize)> = (0..h - 1)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| {
            g.get(x, y) == Tile::Empty && {
                let below = g.get(x, y + 1);
                below.is_solid() || below == Tile::Ladder
            }
        })
        .collect();
    let mut free = walkable;
    let spawn_row: Vec<usize> = (0..w).filter(|&x| g.get(x, h - 2) == Tile::Empty).collect();
    let sx = spawn_row[rng.random_range(0..spawn_row.len())];
    g.set(sx, h - 2, Tile::Spawn);
    free.retain(|&c| c != (sx, h - 2));
    let mut place = |tile: Tile, n: usize, g: &mut TileGrid, rng: &mut ChaCha8Rng| {
        for _ in 0..n {
            if free.is_empty() {
                return;
            }
            let i = rng.random_range(0..free.len());
            let (x, y) = free.swap_remove(i);
            g.set(x, y, tile);
        }
    };
    let gold = rng.random_range(3..=10);
    let enemies = rng.random_range(1..=5);
    place(Tile::Gold, gold, &mut g, rng);
    place(Tile::Enemy, enemies, &mut g, rng);
    g
}
