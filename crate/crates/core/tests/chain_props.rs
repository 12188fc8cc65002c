use pathrunner_core::chain::{build_compat, ChainKey, ChainTable, LookupTier};
use pathrunner_core::path::{overlay_at, AnnotatedLevel};
use pathrunner_core::tile::{Action, Tile, TileGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_level(rng: &mut ChaCha8Rng) -> AnnotatedLevel {
    let (w, h) = (rng.random_range(1..=6), rng.random_range(1..=6));
    let mut g = TileGrid::filled(w, h, Tile::Empty);
    for y in 0..h {
        for x in 0..w {
            g.set(x, y, Tile::ALL[rng.random_range(0..Tile::ALL.len())]);
        }
    }
    // A random walk that stays in the grid.
    let (mut x, mut y) = (rng.random_range(0..w) as i64, rng.random_range(0..h) as i64);
    let start = (x, y);
    let mut actions = Vec::new();
    for _ in 0..rng.random_range(0..12) {
        let a = Action::ALL[rng.random_range(0..Action::ALL.len())];
        let (dx, dy) = a.delta();
        if g.contains(x + dx, y + dy) {
            x += dx;
            y += dy;
            actions.push(a);
        }
    }
    let map = overlay_at(w, h, start, &actions).unwrap();
    AnnotatedLevel::new(g, map).unwrap()
}

fn micro_corpus(seed: u64) -> Vec<AnnotatedLevel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rng.random_range(1..=6)).map(|_| random_level(&mut rng)).collect()
}

fn assert_normalized(table: &ChainTable) {
    for counts in table.distributions() {
        if counts.total() == 0 {
            continue;
        }
        let sum: f64 = counts.probabilities().iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9, "sum {sum}");
    }
}

#[test]
fn distributions_sum_to_one_and_counts_add() {
    for seed in 0..50 {
        let corpus = micro_corpus(seed);
        let whole = ChainTable::train(&corpus).unwrap();
        assert_normalized(&whole);

        // Every split point gives the same merged counts.
        for cut in 1..corpus.len() {
            let mut left = ChainTable::train(&corpus[..cut]).unwrap();
            let right = ChainTable::train(&corpus[cut..]).unwrap();
            left.merge(&right);
            assert_eq!(left, whole, "seed {seed} cut {cut}");
        }
    }
}

#[test]
fn every_cell_is_counted_once_per_tier() {
    let corpus = micro_corpus(7);
    let table = ChainTable::train(&corpus).unwrap();
    let cells: u64 = corpus
        .iter()
        .map(|l| (l.grid.width() * l.grid.height()) as u64)
        .sum();
    assert_eq!(table.global.total(), cells);
    assert_eq!(table.full.values().map(|c| c.total()).sum::<u64>(), cells);
    assert_eq!(table.backoff.values().map(|c| c.total()).sum::<u64>(), cells);
}

#[test]
fn entities_never_appear_in_counts() {
    let corpus = micro_corpus(3);
    let table = ChainTable::train(&corpus).unwrap();
    for counts in table.distributions() {
        for t in [Tile::Gold, Tile::Enemy, Tile::Spawn] {
            assert_eq!(counts.get(t), 0);
        }
    }
    for tiles in build_compat(&corpus).0.values() {
        assert!(tiles.iter().all(|t| !t.is_entity()));
    }
}

#[test]
fn lookup_tiers_fall_through() {
    let level = AnnotatedLevel::bare(TileGrid::parse(".B\nBB").unwrap());
    let table = ChainTable::train(&[level]).unwrap();
    let seen = ChainKey::parse("XX...").unwrap();
    let (_, tier) = table.lookup(&seen);
    assert_eq!(tier, LookupTier::Full);
    let backoff_only = ChainKey::parse("XXrrr").unwrap();
    assert_eq!(table.lookup(&backoff_only).1, LookupTier::Backoff);
    let unseen = ChainKey::parse("##...").unwrap();
    let (p, tier) = table.lookup(&unseen);
    assert_eq!(tier, LookupTier::Global);
    assert_eq!(p[Tile::Solid.index()], 0.75);
}

proptest! {
    #[test]
    fn merge_is_commutative(a in any::<u64>(), b in any::<u64>()) {
        let ta = ChainTable::train(&micro_corpus(a)).unwrap();
        let tb = ChainTable::train(&micro_corpus(b)).unwrap();
        let mut ab = ta.clone();
        ab.merge(&tb);
        let mut ba = tb;
        ba.merge(&ta);
        prop_assert_eq!(ab, ba);
    }
}
