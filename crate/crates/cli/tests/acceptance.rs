//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Tolerances and limits are pinned below.

use std::collections::{BTreeMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use pathrunner_core::chain::{ChainTable, LevelModel};
use pathrunner_core::model::{
    make_training_pairs, next_action_accuracy, train_on_pairs, AdamState, Checkpoint, LstmModel,
    ModelShape, OneHotChunk, TrainConfig, ALPHABET,
};
use pathrunner_core::path::{overlay_at, AnnotatedLevel, Coord};
use pathrunner_core::tile::{parse_actions, Action, Tile, TileGrid};
use pathrunner_core::{astar_to_goal, generate_level, legal_moves, mann_whitney_u, GenConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const GRAD_STEP: f64 = 1e-5;
const GRAD_REL_TOL: f64 = 1e-4;
/// Floor on the relative-error denominator so gradients near zero compare absolutely.
const GRAD_DENOM_FLOOR: f64 = 1e-6;
const GRAD_TRIALS: u64 = 100;
const GRAD_LIMIT: Duration = Duration::from_secs(10);
const ADAM_TOL: f64 = 1e-6;
const LEARN_LOSS_RATIO: f64 = 0.25;
const LEARN_ACCURACY: f64 = 0.90;
const LEARN_LIMIT: Duration = Duration::from_secs(300);
const CHAIN_SUM_TOL: f64 = 1e-9;
const CHAIN_CORPORA: u64 = 50;
const ORACLE_LEVELS: usize = 200;
const CONSTRAINT_LEVELS: u64 = 100;
const PIPELINE_LIMIT: Duration = Duration::from_secs(600);
const PIPELINE_COUNT: usize = 34;

type Outcome = Result<String, String>;

fn check(cond: bool, pass: String, fail: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(pass)
    } else {
        Err(fail())
    }
}

// ---- gradients -------------------------------------------------------------

fn random_chunk(len: usize, rng: &mut ChaCha8Rng) -> OneHotChunk {
    OneHotChunk::from_indices(
        (0..len)
            .map(|_| rng.random_bool(0.85).then(|| rng.random_range(0..ALPHABET)))
            .collect(),
    )
}

fn chunk_loss(model: &LstmModel, input: &OneHotChunk, target: &OneHotChunk) -> f64 {
    let pass = model.forward(input, 0.0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    LstmModel::loss(&pass, target)
}

fn gradients() -> Outcome {
    let start = Instant::now();
    let shape = ModelShape {
        hidden_size: 4,
        layers: 2,
    };
    let mut worst: f64 = 0.0;
    for trial in 0..GRAD_TRIALS {
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let mut model = LstmModel::init(shape, &mut rng);
        for p in model.params_mut() {
            *p += rng.random_range(-0.5..0.5);
        }
        let len = rng.random_range(2..8);
        let input = random_chunk(len, &mut rng);
        let target = OneHotChunk::from_indices(
            (0..len).map(|t| Some((t * 3 + trial as usize) % ALPHABET)).collect(),
        );
        let pass = model.forward(&input, 0.0, &mut rng).unwrap();
        let (analytic, _) = model.backward(&pass, &target).unwrap();
        for (i, &a) in analytic.iter().enumerate() {
            let orig = model.params()[i];
            model.params_mut()[i] = orig + GRAD_STEP;
            let up = chunk_loss(&model, &input, &target);
            model.params_mut()[i] = orig - GRAD_STEP;
            let down = chunk_loss(&model, &input, &target);
            model.params_mut()[i] = orig;
            let n = (up - down) / (2.0 * GRAD_STEP);
            worst = worst.max((a - n).abs() / a.abs().max(n.abs()).max(GRAD_DENOM_FLOOR));
        }
    }
    let elapsed = start.elapsed();
    check(
        worst < GRAD_REL_TOL && elapsed < GRAD_LIMIT,
        format!(
            "{} params x {GRAD_TRIALS} trials, worst relative error {worst:.2e}, {:.2}s",
            shape.param_count(),
            elapsed.as_secs_f64()
        ),
        || format!("worst relative error {worst:.2e}, {:.2}s", elapsed.as_secs_f64()),
    )
}

// ---- optimizer -------------------------------------------------------------

fn adam() -> Outcome {
    let (lr, b1, b2, eps) = (0.001, 0.9, 0.999, 1e-8);
    let g: f64 = 1.0;
    // One step from zero moments: m = (1-b1)g, v = (1-b2)g^2, then bias correction.
    let m_hat = (1.0 - b1) * g / (1.0 - b1);
    let v_hat = (1.0 - b2) * g * g / (1.0 - b2);
    let expected = -lr * m_hat / (v_hat.sqrt() + eps);

    let mut p = [0.25];
    let mut state = AdamState::new(1);
    state.step(&mut p, &[g], lr);
    let delta = p[0] - 0.25;

    let mut q = [0.25, -3.0];
    let mut idle = AdamState::new(2);
    idle.step(&mut q, &[0.0, 0.0], lr);
    check(
        (delta - expected).abs() <= ADAM_TOL && q == [0.25, -3.0],
        format!("delta {delta:.12} vs closed form {expected:.12}; zero gradient is a no-op"),
        || format!("delta {delta} vs {expected}, zero-gradient params {q:?}"),
    )
}

// ---- learnability ----------------------------------------------------------

fn periodic_paths(n: usize, len: usize, seed: u64) -> Vec<Vec<Action>> {
    let period = parse_actions("rrrrluuuu").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let phase = rng.random_range(0..period.len());
            (0..len).map(|t| period[(t + phase) % period.len()]).collect()
        })
        .collect()
}

fn learnability() -> Outcome {
    let start = Instant::now();
    let config = TrainConfig {
        hidden_size: 64,
        layers: 2,
        epochs: 60,
        learning_rate: 0.001,
        seed: 17,
        ..TrainConfig::default()
    };
    let train = make_training_pairs(&periodic_paths(200, 100, 1), config.chunk_len).unwrap();
    let held = make_training_pairs(&periodic_paths(50, 100, 2), config.chunk_len).unwrap();
    let outcome = train_on_pairs(&train, &config).map_err(|e| e.to_string())?;
    let first = outcome.loss_history[0];
    let last = *outcome.loss_history.last().unwrap();
    let acc = next_action_accuracy(&outcome.model, &held).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let msg = format!(
        "loss {first:.4} -> {last:.4} ({:.1}%), held-out accuracy {:.1}%, {:.1}s",
        100.0 * last / first,
        100.0 * acc,
        elapsed.as_secs_f64()
    );
    check(
        last < LEARN_LOSS_RATIO * first && acc > LEARN_ACCURACY && elapsed < LEARN_LIMIT,
        msg.clone(),
        || msg,
    )
}

// ---- chain -----------------------------------------------------------------

fn micro_corpus(seed: u64) -> Vec<AnnotatedLevel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rng.random_range(2..=6))
        .map(|_| {
            let (w, h) = (rng.random_range(1..=6), rng.random_range(1..=6));
            let mut g = TileGrid::filled(w, h, Tile::Empty);
            for y in 0..h {
                for x in 0..w {
                    g.set(x, y, Tile::ALL[rng.random_range(0..Tile::ALL.len())]);
                }
            }
            let start = (rng.random_range(0..w) as i64, rng.random_range(0..h) as i64);
            let (mut x, mut y) = start;
            let mut acts = Vec::new();
            for _ in 0..rng.random_range(0..10) {
                let a = Action::ALL[rng.random_range(0..5)];
                let (dx, dy) = a.delta();
                if g.contains(x + dx, y + dy) {
                    (x, y) = (x + dx, y + dy);
                    acts.push(a);
                }
            }
            AnnotatedLevel::new(g.clone(), overlay_at(w, h, start, &acts).unwrap()).unwrap()
        })
        .collect()
}

fn chain_soundness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut mismatches = 0;
    let mut dists = 0;
    for seed in 0..CHAIN_CORPORA {
        let corpus = micro_corpus(seed);
        let whole = ChainTable::train(&corpus).unwrap();
        for c in whole.distributions().filter(|c| c.total() > 0) {
            worst = worst.max((c.probabilities().iter().sum::<f64>() - 1.0).abs());
            dists += 1;
        }
        let cut = corpus.len() / 2;
        let mut merged = ChainTable::train(&corpus[..cut]).unwrap();
        merged.merge(&ChainTable::train(&corpus[cut..]).unwrap());
        mismatches += usize::from(merged != whole);
    }
    check(
        worst <= CHAIN_SUM_TOL && mismatches == 0,
        format!("{dists} distributions, worst |sum-1| {worst:.1e}; additivity exact on {CHAIN_CORPORA} corpora"),
        || format!("worst |sum-1| {worst:e}, {mismatches} additivity mismatches"),
    )
}

// ---- A* vs BFS -------------------------------------------------------------

fn bfs(grid: &TileGrid, start: Coord) -> Vec<Option<usize>> {
    let w = grid.width() as i64;
    let idx = |(x, y): Coord| (y * w + x) as usize;
    let mut dist = vec![None; grid.width() * grid.height()];
    dist[idx(start)] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        let d = dist[idx(p)].unwrap();
        for (_, q) in legal_moves(grid, p) {
            if dist[idx(q)].is_none() {
                dist[idx(q)] = Some(d + 1);
                queue.push_back(q);
            }
        }
    }
    dist
}

fn oracle_equivalence() -> Outcome {
    let palette = [Tile::Empty, Tile::Empty, Tile::Brick, Tile::Solid, Tile::Ladder, Tile::Rope];
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut queries, mut bad) = (0usize, 0usize);
    for _ in 0..ORACLE_LEVELS {
        let (w, h) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let mut g = TileGrid::filled(w, h, Tile::Empty);
        for y in 0..h {
            for x in 0..w {
                g.set(x, y, palette[rng.random_range(0..palette.len())]);
            }
        }
        let open: Vec<Coord> = (0..h as i64)
            .flat_map(|y| (0..w as i64).map(move |x| (x, y)))
            .filter(|&(x, y)| !g.at(x, y).unwrap().is_solid())
            .collect();
        for &s in &open {
            let dist = bfs(&g, s);
            for &t in &open {
                let r = astar_to_goal(&g, s, t);
                queries += 1;
                let expected = dist[(t.1 * w as i64 + t.0) as usize];
                bad += usize::from(r.reached.then_some(r.path.len()) != expected);
            }
        }
    }
    check(
        bad == 0,
        format!("{queries} start/goal pairs on {ORACLE_LEVELS} levels, 0 discrepancies"),
        || format!("{bad} of {queries} pairs disagree"),
    )
}

// ---- constraints -----------------------------------------------------------

fn constraints(ckpt: &Checkpoint, model: &LevelModel) -> Outcome {
    let up = model.compat.allowed(Action::Up);
    let (mut u_cells, mut u_bad, mut constrained, mut c_bad) = (0, 0, 0, 0);
    let (mut spawn_bad, mut size_bad) = (0, 0);
    for seed in 0..CONSTRAINT_LEVELS {
        let gen = generate_level(&GenConfig { seed, ..GenConfig::default() }, ckpt, model)
            .map_err(|e| e.to_string())?;
        let grid = gen.grid();
        size_bad += usize::from((grid.width(), grid.height()) != gen.path.bounding_size());
        spawn_bad += usize::from(grid.count(Tile::Spawn) != 1);
        let start = gen.path.start();
        for y in 0..grid.height() {
            for x in 0..grid.width() {
                // The spawn overwrites the start cell by design.
                let tile = if (x as i64, y as i64) == start {
                    gen.structure.get(x, y)
                } else {
                    grid.get(x, y).structural()
                };
                let cell = gen.partial.get(x, y);
                if !matches!(cell, pathrunner_core::generate::PartialCell::Free) {
                    constrained += 1;
                    c_bad += usize::from(!cell.admits(tile) || !cell.admits(gen.structure.get(x, y)));
                }
                if gen.level.actions.get(x, y) == Some(Action::Up) {
                    u_cells += 1;
                    u_bad += usize::from(!up.contains(&tile));
                }
            }
        }
    }
    check(
        u_bad + c_bad + spawn_bad + size_bad == 0,
        format!(
            "{CONSTRAINT_LEVELS} levels: {u_cells} 'u' cells and {constrained} constrained cells all valid; one spawn each; sizes match paths"
        ),
        || format!("'u' violations {u_bad}, constraint violations {c_bad}, spawn errors {spawn_bad}, size errors {size_bad}"),
    )
}

// ---- statistics ------------------------------------------------------------

fn statistics() -> Outcome {
    let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).map_err(|e| e.to_string())?;
    let sample = [3.0, 7.5, 1.0, 9.0, 4.0, 4.0, 12.0, 0.5, 6.0, 8.0];
    let selfc = mann_whitney_u(&sample, &sample).map_err(|e| e.to_string())?;
    let big: Vec<f64> = (0..34).map(|i| (i * 7 % 11) as f64).collect();
    let self_big = mann_whitney_u(&big, &big).map_err(|e| e.to_string())?;
    check(
        r.u == 0.0 && (r.p - 0.1).abs() < 1e-12 && r.exact && selfc.p >= 0.9 && self_big.p >= 0.9,
        format!(
            "U={} p={:.4} (exact); self-comparison p={:.3} (n=10), p={:.3} (n=34)",
            r.u, r.p, selfc.p, self_big.p
        ),
        || format!("U={} p={} self p={} / {}", r.u, r.p, selfc.p, self_big.p),
    )
}

// ---- pipeline and determinism ----------------------------------------------

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/levels")
}

fn cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pathrunner"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

/// Every seeded command at the 2x64 scale, writing into `dir`. Returns the
/// comparison table.
fn pipeline_run(dir: &Path) -> Result<String, String> {
    let p = |name: &str| dir.join(name).to_str().unwrap().to_string();
    let train = data_dir().join("train");
    let heldout = data_dir().join("heldout");
    let (train, heldout) = (train.to_str().unwrap(), heldout.to_str().unwrap());
    let count = PIPELINE_COUNT.to_string();
    cli(&["synth-levels", "--out", &p("synth"), "--count", "4", "--seed", "3"])?;
    cli(&["solve", "--levels", train, "--out", &p("paths.txt")])?;
    cli(&["ingest", "--levels", train, "--paths", &p("paths.txt"), "--out", &p("corpus.json")])?;
    cli(&["train-chain", "--corpus", &p("corpus.json"), "--out", &p("level-model.json")])?;
    cli(&[
        "train-paths", "--paths", &p("paths.txt"), "--out", &p("paths.ckpt"), "--hidden-size",
        "64", "--layers", "2", "--epochs", "60", "--learning-rate", "0.001", "--seed", "1",
    ])?;
    cli(&[
        "gen", "--paths-model", &p("paths.ckpt"), "--level-model", &p("level-model.json"),
        "--out", &p("gen"), "--count", &count, "--seed", "1000",
    ])?;
    cli(&["eval", "--levels", &p("gen"), "--out", &p("eval.json")])?;
    cli(&["compare", &p("gen"), heldout, "--format", "json", "--out", &p("report.json")])?;
    cli(&["compare", &p("gen"), heldout, "--format", "tsv", "--out", &p("report.tsv")])?;
    cli(&["compare", &p("gen"), heldout])
}

fn pipeline(dir: &Path) -> Outcome {
    let start = Instant::now();
    let table = pipeline_run(dir)?;
    let elapsed = start.elapsed();
    let generated = fs::read_dir(dir.join("gen"))
        .map_err(|e| e.to_string())?
        .filter(|e| e.as_ref().is_ok_and(|e| e.path().extension().is_some_and(|x| x == "txt")))
        .count();
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    let columns = [
        "gold_total",
        "percent_collected",
        "total_nodes_explored",
        "nodes_per_gold",
        "s_width_height",
        "e_empty",
        "i_interesting",
    ];
    let complete = columns.iter().all(|c| table.contains(c))
        && table.contains("Mann-Whitney")
        && report["a"]["count"] == PIPELINE_COUNT
        && report["b"]["count"] == PIPELINE_COUNT
        && report["percent_collected_test"]["p"].is_number();
    for line in table.lines() {
        println!("    {line}");
    }
    println!(
        "    generated levels at 32x22: {} of {PIPELINE_COUNT} (reported, not asserted)",
        report["a"]["sizes"]["matching"]
    );
    check(
        generated == PIPELINE_COUNT && complete && elapsed < PIPELINE_LIMIT,
        format!("{generated} levels generated and compared against {PIPELINE_COUNT} held-out in {:.1}s", elapsed.as_secs_f64()),
        || format!("{generated} levels, report complete: {complete}, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn files_under(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism(first: &Path, second: &Path) -> Outcome {
    pipeline_run(second)?;
    let (a, b) = (files_under(first), files_under(second));
    let differing: Vec<_> = a
        .iter()
        .filter(|(k, v)| b.get(*k) != Some(*v))
        .map(|(k, _)| k.display().to_string())
        .collect();
    check(
        differing.is_empty() && a.len() == b.len(),
        format!("{} artifacts from 8 seeded commands byte-identical across two runs", a.len()),
        || format!("differing: {differing:?}"),
    )
}

fn main() {
    let tmp = TempDir::new().expect("temp dir");
    let (run1, run2) = (tmp.path().join("run1"), tmp.path().join("run2"));
    let mut results: Vec<(&str, Outcome)> = vec![
        ("gradient correctness", gradients()),
        ("optimizer exactness", adam()),
        ("learnability", learnability()),
        ("chain soundness", chain_soundness()),
        ("oracle equivalence", oracle_equivalence()),
        ("statistics", statistics()),
    ];
    let pipe = pipeline(&run1);
    let pipe_ok = pipe.is_ok();
    results.push(("pipeline reproduction shape", pipe));
    let constraint = if pipe_ok {
        let ckpt = Checkpoint::from_bytes(&fs::read(run1.join("paths.ckpt")).unwrap()).unwrap();
        let lm = LevelModel::from_json(&fs::read_to_string(run1.join("level-model.json")).unwrap()).unwrap();
        constraints(&ckpt, &lm)
    } else {
        Err("pipeline models unavailable".into())
    };
    results.push(("constraint satisfaction", constraint));
    results.push(("determinism", determinism(&run1, &run2)));

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(msg) => println!("PASS {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
