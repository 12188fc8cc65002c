//! A*-based level evaluation and comparison statistics.

pub mod metrics;
pub mod moves;
pub mod report;
pub mod search;
pub mod solve;
pub mod stats;

pub use metrics::{evaluate_level, spawn_position, LevelMetrics};
pub use moves::{is_supported, legal_moves};
pub use report::{compare_sets, ComparisonReport, LevelRecord, LevelSet, SetSummary};
pub use search::{astar_to_goal, SearchResult};
pub use solve::solve_for_path;
pub use stats::{mann_whitney_u, mean_std, MannWhitney};
