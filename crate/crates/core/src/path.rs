//! Player paths: coordinate traces, action overlays and the path/annotated file formats.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tile::{format_actions, parse_actions, Action, Tile, TileGrid};

/// (column, row), row 0 at the top.
pub type Coord = (i64, i64);

/// Apply action displacements from `start`. The result has `actions.len() + 1` entries.
pub fn trace_path(start: Coord, actions: &[Action]) -> Vec<Coord> {
    let mut trace = Vec::with_capacity(actions.len() + 1);
    let mut pos = start;
    trace.push(pos);
    for a in actions {
        let (dx, dy) = a.delta();
        pos = (pos.0 + dx, pos.1 + dy);
        trace.push(pos);
    }
    trace
}

/// Recover actions from a coordinate trace.
///
/// Downward steps are ambiguous between climbing and falling. Without a grid they
/// map to [`Action::Fall`]; with one, a step departing a ladder cell maps to
/// [`Action::ClimbDown`].
pub fn actions_from_trace(coords: &[Coord], context: Option<&TileGrid>) -> Result<Vec<Action>> {
    coords
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (from, to) = (w[0], w[1]);
            match (to.0 - from.0, to.1 - from.1) {
                (-1, 0) => Ok(Action::Left),
                (1, 0) => Ok(Action::Right),
                (0, -1) => Ok(Action::Up),
                (0, 1) => {
                    let on_ladder = context
                        .and_then(|g| g.at(from.0, from.1))
                        .is_some_and(|t| t == Tile::Ladder);
                    Ok(if on_ladder {
                        Action::ClimbDown
                    } else {
                        Action::Fall
                    })
                }
                _ => Err(Error::Trace {
                    index: i,
                    next: i + 1,
                }),
            }
        })
        .collect()
}

/// Column and row extents of a trace: (min, max) per axis.
fn extents(trace: &[Coord]) -> ((i64, i64), (i64, i64)) {
    let mut xs = (i64::MAX, i64::MIN);
    let mut ys = (i64::MAX, i64::MIN);
    for &(x, y) in trace {
        xs = (xs.0.min(x), xs.1.max(x));
        ys = (ys.0.min(y), ys.1.max(y));
    }
    (xs, ys)
}

/// An action sequence anchored so that its trace has minimum column and row 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathSequence {
    actions: Vec<Action>,
    start: Coord,
}

impl PathSequence {
    pub fn new(actions: Vec<Action>) -> Self {
        let trace = trace_path((0, 0), &actions);
        let ((min_x, _), (min_y, _)) = extents(&trace);
        PathSequence {
            actions,
            start: (-min_x, -min_y),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(PathSequence::new(parse_actions(s)?))
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn start(&self) -> Coord {
        self.start
    }

    pub fn trace(&self) -> Vec<Coord> {
        trace_path(self.start, &self.actions)
    }

    /// Smallest grid containing the trace: (width, height).
    pub fn bounding_size(&self) -> (usize, usize) {
        let ((min_x, max_x), (min_y, max_y)) = extents(&self.trace());
        ((max_x - min_x + 1) as usize, (max_y - min_y + 1) as usize)
    }

    pub fn unique_cells(&self) -> BTreeSet<Coord> {
        self.trace().into_iter().collect()
    }
}

impl fmt::Display for PathSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_actions(&self.actions))
    }
}

/// Per-cell action annotation; `None` is the no-action token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionMap {
    width: usize,
    height: usize,
    cells: Vec<Option<Action>>,
}

impl ActionMap {
    pub fn empty(width: usize, height: usize) -> Self {
        ActionMap {
            width,
            height,
            cells: vec![None; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Option<Action> {
        self.cells[y * self.width + x]
    }

    /// Annotation at signed coordinates; outer `None` means outside the map.
    pub fn at(&self, x: i64, y: i64) -> Option<Option<Action>> {
        (x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height)
            .then(|| self.get(x as usize, y as usize))
    }

    pub fn set(&mut self, x: usize, y: usize, action: Option<Action>) {
        self.cells[y * self.width + x] = action;
    }

    pub fn annotated_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Rows with '.' standing in for the no-action token.
    pub fn rows(&self) -> Vec<String> {
        self.cells
            .chunks(self.width)
            .map(|row| row.iter().map(|c| c.map_or('.', Action::symbol)).collect())
            .collect()
    }

    pub fn from_rows(rows: &[String]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        if width == 0 {
            return Err(Error::Format("empty action map".into()));
        }
        let mut cells = Vec::with_capacity(width * height);
        for row in rows {
            if row.chars().count() != width {
                return Err(Error::Format("ragged action map".into()));
            }
            for c in row.chars() {
                cells.push(match c {
                    '.' | '\u{2205}' => None,
                    c => Some(Action::from_symbol(c).ok_or(Error::ActionSymbol(c))?),
                });
            }
        }
        Ok(ActionMap {
            width,
            height,
            cells,
        })
    }
}

/// Mark each visited cell with the action taken when leaving it.
///
/// The final cell repeats the last action. A revisited cell keeps the action of
/// its latest visit.
pub fn overlay_at(
    width: usize,
    height: usize,
    start: Coord,
    actions: &[Action],
) -> Result<ActionMap> {
    let trace = trace_path(start, actions);
    let mut map = ActionMap::empty(width, height);
    for (i, &(x, y)) in trace.iter().enumerate() {
        if map.at(x, y).is_none() {
            return Err(Error::Bounds {
                width,
                height,
                column: x,
                row: y,
            });
        }
        let action = actions.get(i).or(actions.last()).copied();
        map.set(x as usize, y as usize, action);
    }
    Ok(map)
}

/// [`overlay_at`] using the path's normalized start.
pub fn overlay_path(width: usize, height: usize, path: &PathSequence) -> Result<ActionMap> {
    overlay_at(width, height, path.start(), path.actions())
}

/// A level together with the per-cell actions of a path through it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedLevel {
    pub grid: TileGrid,
    pub actions: ActionMap,
}

#[derive(Serialize, Deserialize)]
struct AnnotatedJson {
    width: usize,
    height: usize,
    tiles: Vec<String>,
    actions: Vec<String>,
}

impl AnnotatedLevel {
    pub fn new(grid: TileGrid, actions: ActionMap) -> Result<Self> {
        if (grid.width(), grid.height()) != (actions.width(), actions.height()) {
            return Err(Error::Shape(format!(
                "action map {}x{} does not match grid {}x{}",
                actions.width(),
                actions.height(),
                grid.width(),
                grid.height()
            )));
        }
        Ok(AnnotatedLevel { grid, actions })
    }

    /// A level with no path information.
    pub fn bare(grid: TileGrid) -> Self {
        let actions = ActionMap::empty(grid.width(), grid.height());
        AnnotatedLevel { grid, actions }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(AnnotatedJson {
            width: self.grid.width(),
            height: self.grid.height(),
            tiles: self.grid.rows(),
            actions: self.actions.rows(),
        })
        .expect("annotated level serializes")
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let raw: AnnotatedJson = serde_json::from_value(value)?;
        let grid = TileGrid::parse(&raw.tiles.join("\n"))?;
        let actions = ActionMap::from_rows(&raw.actions)?;
        if (grid.width(), grid.height()) != (raw.width, raw.height) {
            return Err(Error::Format("declared size does not match tiles".into()));
        }
        AnnotatedLevel::new(grid, actions)
    }
}

/// One line of a path file: `[COL,ROW:]ACTIONS`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathRecord {
    /// Start cell in level coordinates, when recorded.
    pub anchor: Option<Coord>,
    pub actions: Vec<Action>,
}

impl PathRecord {
    pub fn sequence(&self) -> PathSequence {
        PathSequence::new(self.actions.clone())
    }

    /// Where the path starts inside its level.
    pub fn placement(&self) -> Coord {
        self.anchor.unwrap_or_else(|| self.sequence().start())
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let line = line.trim();
        let (anchor, body) = match line.split_once(':') {
            Some((head, body)) => {
                let (c, r) = head
                    .split_once(',')
                    .ok_or_else(|| Error::Format(format!("bad path anchor {head:?}")))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::Format(format!("bad path anchor {head:?}")))
                };
                (Some((parse(c)?, parse(r)?)), body)
            }
            None => (None, line),
        };
        Ok(PathRecord {
            anchor,
            actions: parse_actions(body)?,
        })
    }

    pub fn to_line(&self) -> String {
        match self.anchor {
            Some((c, r)) => format!("{c},{r}:{}", format_actions(&self.actions)),
            None => format_actions(&self.actions),
        }
    }
}

pub fn parse_path_file(text: &str) -> Result<Vec<PathRecord>> {
    text.lines().map(PathRecord::parse_line).collect()
}

pub fn format_path_file(records: &[PathRecord]) -> String {
    records.iter().map(|r| r.to_line() + "\n").collect()
}
