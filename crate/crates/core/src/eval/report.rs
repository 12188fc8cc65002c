//! Set-versus-set comparison reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{evaluate_level, LevelMetrics};
use super::stats::{mann_whitney_u, mean_std, MannWhitney};
use crate::error::{Error, Result};
use crate::tile::TileGrid;

/// Size of the original game's levels, used for the size tally.
pub const REFERENCE_SIZE: (usize, usize) = (32, 22);

/// Histogram bins over [0, 1] for the empty/interesting proportions.
pub const HISTOGRAM_BINS: usize = 20;

/// A named collection of levels.
#[derive(Debug, Clone)]
pub struct LevelSet {
    pub name: String,
    pub levels: Vec<(String, TileGrid)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub name: String,
    #[serde(flatten)]
    pub metrics: LevelMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let (mean, std) = mean_std(&v);
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeTally {
    pub reference: (usize, usize),
    pub matching: usize,
    pub smaller: usize,
    pub larger: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSummary {
    pub name: String,
    pub count: usize,
    pub gold_total: MeanStd,
    pub percent_collected: MeanStd,
    pub total_nodes_explored: MeanStd,
    pub nodes_per_gold: MeanStd,
    pub width: MeanStd,
    pub height: MeanStd,
    pub empty: MeanStd,
    pub interesting: MeanStd,
    pub sizes: SizeTally,
    pub empty_histogram: Vec<usize>,
    pub interesting_histogram: Vec<usize>,
    pub levels: Vec<LevelRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub a: SetSummary,
    pub b: SetSummary,
    /// Test on percent collected, with `a` as the first sample.
    pub percent_collected_test: MannWhitney,
}

/// Evaluate each level; errors name the offending level.
pub fn evaluate_set(set: &LevelSet) -> Result<Vec<LevelRecord>> {
    set.levels
        .iter()
        .enumerate()
        .map(|(i, (name, grid))| {
            let metrics = evaluate_level(grid).map_err(|e| {
                Error::Structure(format!("{} level {i} ({name}): {e}", set.name))
            })?;
            Ok(LevelRecord {
                name: name.clone(),
                metrics,
            })
        })
        .collect()
}

pub fn histogram(values: impl IntoIterator<Item = f64>, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    for v in values {
        let b = ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
}

pub fn summarize(name: &str, levels: Vec<LevelRecord>) -> SetSummary {
    let col = |f: fn(&LevelMetrics) -> f64| MeanStd::of(levels.iter().map(|r| f(&r.metrics)));
    let (rw, rh) = REFERENCE_SIZE;
    let mut sizes = SizeTally {
        reference: REFERENCE_SIZE,
        matching: 0,
        smaller: 0,
        larger: 0,
    };
    for r in &levels {
        let (w, h) = (r.metrics.width, r.metrics.height);
        if (w, h) == (rw, rh) {
            sizes.matching += 1;
        } else if w <= rw && h <= rh {
            sizes.smaller += 1;
        } else {
            sizes.larger += 1;
        }
    }
    SetSummary {
        name: name.to_string(),
        count: levels.len(),
        gold_total: col(|m| m.gold_total as f64),
        percent_collected: col(|m| m.percent_collected),
        total_nodes_explored: col(|m| m.total_nodes_explored as f64),
        nodes_per_gold: col(|m| m.nodes_per_gold),
        width: col(|m| m.width as f64),
        height: col(|m| m.height as f64),
        empty: col(|m| m.empty),
        interesting: col(|m| m.interesting),
        sizes,
        empty_histogram: histogram(levels.iter().map(|r| r.metrics.empty), HISTOGRAM_BINS),
        interesting_histogram: histogram(
            levels.iter().map(|r| r.metrics.interesting),
            HISTOGRAM_BINS,
        ),
        levels,
    }
}

pub fn compare_sets(a: &LevelSet, b: &LevelSet) -> Result<ComparisonReport> {
    if a.levels.is_empty() || b.levels.is_empty() {
        return Err(Error::Input("both level sets must be nonempty".into()));
    }
    let sa = summarize(&a.name, evaluate_set(a)?);
    let sb = summarize(&b.name, evaluate_set(b)?);
    let pc = |s: &SetSummary| -> Vec<f64> {
        s.levels.iter().map(|r| r.metrics.percent_collected).collect()
    };
    let test = mann_whitney_u(&pc(&sa), &pc(&sb))?;
    Ok(ComparisonReport {
        a: sa,
        b: sb,
        percent_collected_test: test,
    })
}

const COLUMNS: [&str; 9] = [
    "set",
    "n",
    "gold_total",
    "percent_collected",
    "total_nodes_explored",
    "nodes_per_gold",
    "s_width_height",
    "e_empty",
    "i_interesting",
];

fn pm(v: MeanStd, digits: usize) -> String {
    format!("{:.*} ± {:.*}", digits, v.mean, digits, v.std)
}

impl SetSummary {
    fn cells(&self) -> Vec<String> {
        vec![
            self.name.clone(),
            self.count.to_string(),
            pm(self.gold_total, 2),
            pm(self.percent_collected, 2),
            pm(self.total_nodes_explored, 2),
            pm(self.nodes_per_gold, 2),
            format!(
                "{:.1}x{:.1} ({} at {}x{})",
                self.width.mean,
                self.height.mean,
                self.sizes.matching,
                self.sizes.reference.0,
                self.sizes.reference.1
            ),
            pm(self.empty, 3),
            pm(self.interesting, 3),
        ]
    }
}

impl ComparisonReport {
    /// Tab-separated table, one row per set.
    pub fn to_tsv(&self) -> String {
        let mut out = COLUMNS.join("\t");
        out.push('\n');
        for s in [&self.a, &self.b] {
            out.push_str(&s.cells().join("\t"));
            out.push('\n');
        }
        out
    }

    /// Human-readable aligned table with the U test underneath.
    pub fn to_table(&self) -> String {
        let rows: Vec<Vec<String>> = std::iter::once(COLUMNS.map(String::from).to_vec())
            .chain([self.a.cells(), self.b.cells()])
            .collect();
        let widths: Vec<usize> = (0..COLUMNS.len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, row) in rows.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, &w)| format!("{cell:<w$}"))
                .collect();
            out.push_str(line.join(" | ").trim_end());
            out.push('\n');
            if i == 0 {
                let sep: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
                out.push_str(&sep.join("-+-"));
                out.push('\n');
            }
        }
        let t = &self.percent_collected_test;
        let _ = writeln!(
            out,
            "Mann-Whitney U on percent collected: U = {:.1}, p = {:.5} ({})",
            t.u,
            t.p,
            if t.exact { "exact" } else { "normal approximation" }
        );
        out
    }
}
