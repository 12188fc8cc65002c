//! Tiles, actions and the rectangular level grid.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A level tile, using the VGLC Lode Runner symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tile {
    Empty,
    Brick,
    Solid,
    Ladder,
    Rope,
    Gold,
    Enemy,
    Spawn,
}

impl Tile {
    pub const ALL: [Tile; 8] = [
        Tile::Empty,
        Tile::Brick,
        Tile::Solid,
        Tile::Ladder,
        Tile::Rope,
        Tile::Gold,
        Tile::Enemy,
        Tile::Spawn,
    ];

    pub fn symbol(self) -> char {
        match self {
            Tile::Empty => '.',
            Tile::Brick => 'b',
            Tile::Solid => 'B',
            Tile::Ladder => '#',
            Tile::Rope => '-',
            Tile::Gold => 'G',
            Tile::Enemy => 'E',
            Tile::Spawn => 'M',
        }
    }

    pub fn from_symbol(c: char) -> Option<Tile> {
        Tile::ALL.into_iter().find(|t| t.symbol() == c)
    }

    /// Position in [`Tile::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Bricks of either kind block movement.
    pub fn is_solid(self) -> bool {
        matches!(self, Tile::Brick | Tile::Solid)
    }

    /// Tiles the level model does not learn: they are placed separately.
    pub fn is_entity(self) -> bool {
        matches!(self, Tile::Gold | Tile::Enemy | Tile::Spawn)
    }

    /// Entities collapse to empty space for structure learning.
    pub fn structural(self) -> Tile {
        if self.is_entity() {
            Tile::Empty
        } else {
            self
        }
    }
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// One step of a player path. Rows grow downwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    Left,
    Right,
    Up,
    ClimbDown,
    Fall,
}

impl Action {
    /// Fixed alphabet order used for one-hot encoding.
    pub const ALL: [Action; 5] = [
        Action::Left,
        Action::Right,
        Action::Up,
        Action::ClimbDown,
        Action::Fall,
    ];

    pub fn symbol(self) -> char {
        match self {
            Action::Left => 'l',
            Action::Right => 'r',
            Action::Up => 'u',
            Action::ClimbDown => 'c',
            Action::Fall => 'f',
        }
    }

    pub fn from_symbol(c: char) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.symbol() == c)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// (column, row) displacement.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
            Action::Up => (0, -1),
            Action::ClimbDown | Action::Fall => (0, 1),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Parse a string of action characters.
pub fn parse_actions(s: &str) -> Result<Vec<Action>> {
    s.chars()
        .map(|c| Action::from_symbol(c).ok_or(Error::ActionSymbol(c)))
        .collect()
}

pub fn format_actions(actions: &[Action]) -> String {
    actions.iter().map(|a| a.symbol()).collect()
}

/// A rectangular level, stored row-major with row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TileGrid {
    width: usize,
    height: usize,
    cells: Vec<Tile>,
}

impl TileGrid {
    pub fn new(width: usize, height: usize, cells: Vec<Tile>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Format(format!("empty grid {width}x{height}")));
        }
        if cells.len() != width * height {
            return Err(Error::Shape(format!(
                "{} cells for a {width}x{height} grid",
                cells.len()
            )));
        }
        Ok(TileGrid {
            width,
            height,
            cells,
        })
    }

    pub fn filled(width: usize, height: usize, tile: Tile) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be positive");
        TileGrid {
            width,
            height,
            cells: vec![tile; width * height],
        }
    }

    /// Parse VGLC plain text: one row per line, one character per cell.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text
            .lines()
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .collect();
        // A single trailing newline is allowed; blank rows elsewhere are not.
        if lines.is_empty() || lines.iter().all(|l| l.is_empty()) {
            return Err(Error::Format("level text is empty".into()));
        }
        let width = lines[0].chars().count();
        let mut cells = Vec::with_capacity(width * lines.len());
        for (y, line) in lines.iter().enumerate() {
            let len = line.chars().count();
            if len != width {
                return Err(Error::Format(format!(
                    "line {} has {len} characters, expected {width}",
                    y + 1
                )));
            }
            for (x, c) in line.chars().enumerate() {
                let tile = Tile::from_symbol(c).ok_or(Error::Symbol {
                    symbol: c,
                    line: y + 1,
                    column: x + 1,
                })?;
                cells.push(tile);
            }
        }
        TileGrid::new(width, lines.len(), cells)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[Tile] {
        &self.cells
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Tile {
        self.cells[y * self.width + x]
    }

    /// Tile at signed coordinates, `None` outside the grid.
    pub fn at(&self, x: i64, y: i64) -> Option<Tile> {
        self.contains(x, y).then(|| self.get(x as usize, y as usize))
    }

    pub fn set(&mut self, x: usize, y: usize, tile: Tile) {
        self.cells[y * self.width + x] = tile;
    }

    pub fn count(&self, tile: Tile) -> usize {
        self.cells.iter().filter(|&&t| t == tile).count()
    }

    /// Coordinates of every cell holding `tile`, in row-major order.
    pub fn positions(&self, tile: Tile) -> Vec<(usize, usize)> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == tile)
            .map(|(i, _)| (i % self.width, i / self.width))
            .collect()
    }

    pub fn rows(&self) -> Vec<String> {
        self.cells
            .chunks(self.width)
            .map(|row| row.iter().map(|t| t.symbol()).collect())
            .collect()
    }

    /// VGLC text with a trailing newline after every row.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in self.rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for TileGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_small_grid() {
        let g = TileGrid::parse("BB\n.M").unwrap();
        assert_eq!((g.width(), g.height()), (2, 2));
        assert_eq!(g.get(0, 0), Tile::Solid);
        assert_eq!(g.get(1, 0), Tile::Solid);
        assert_eq!(g.get(0, 1), Tile::Empty);
        assert_eq!(g.get(1, 1), Tile::Spawn);
    }

    #[test]
    fn ragged_lines_fail() {
        assert!(matches!(TileGrid::parse("B.\nB"), Err(Error::Format(_))));
    }

    #[test]
    fn unknown_symbol_reports_position() {
        match TileGrid::parse("..\n.x") {
            Err(Error::Symbol {
                symbol,
                line,
                column,
            }) => assert_eq!((symbol, line, column), ('x', 2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_text_fails() {
        assert!(TileGrid::parse("").is_err());
        assert!(TileGrid::parse("\n").is_err());
    }

    #[test]
    fn text_roundtrip() {
        let text = "b.#-\nGEMB\n";
        assert_eq!(TileGrid::parse(text).unwrap().to_text(), text);
    }

    #[test]
    fn action_displacements() {
        assert_eq!(Action::Left.delta(), (-1, 0));
        assert_eq!(Action::Up.delta(), (0, -1));
        assert_eq!(Action::ClimbDown.delta(), Action::Fall.delta());
        assert_eq!(format_actions(&parse_actions("lrucf").unwrap()), "lrucf");
        assert!(parse_actions("lx").is_err());
    }
}
