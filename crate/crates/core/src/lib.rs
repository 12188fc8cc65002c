//! Path-driven Lode Runner level generation.
//!
//! An LSTM learns player action sequences, a path-conditioned Markov chain
//! fills levels around sampled paths, and an A* agent scores the results.

pub mod chain;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod generate;
pub mod model;
pub mod path;
pub mod tile;

pub use chain::{
    build_compat, fit_entity_stats, train_chain, ActionTileCompat, ChainKey, ChainTable,
    EntityStats, LevelModel,
};
pub use error::{Error, Result};
pub use eval::{
    astar_to_goal, compare_sets, evaluate_level, legal_moves, mann_whitney_u, solve_for_path,
    ComparisonReport, LevelMetrics, LevelSet, SearchResult,
};
pub use generate::{generate_from_path, generate_level, GenConfig, GeneratedLevel};
pub use model::{Checkpoint, LstmModel, ModelShape, TrainConfig};
pub use path::{
    actions_from_trace, overlay_path, trace_path, ActionMap, AnnotatedLevel, Coord, PathRecord,
    PathSequence,
};
pub use tile::{Action, Tile, TileGrid};
