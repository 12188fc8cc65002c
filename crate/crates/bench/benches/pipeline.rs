use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pathrunner_core::corpus::{annotate, classic_levels};
use pathrunner_core::model::{LstmModel, ModelShape, OneHotChunk};
use pathrunner_core::{
    astar_to_goal, evaluate_level, generate_from_path, solve_for_path, LevelModel, PathRecord,
    PathSequence, Tile,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lstm(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let model = LstmModel::init(
        ModelShape {
            hidden_size: 64,
            layers: 2,
        },
        &mut rng,
    );
    let chunk = OneHotChunk::from_indices((0..50).map(|_| Some(rng.random_range(0..5))).collect());
    c.bench_function("lstm_forward_2x64_len50", |b| {
        b.iter(|| model.forward(black_box(&chunk), 0.0, &mut rng).unwrap())
    });
    let pass = model.forward(&chunk, 0.3, &mut rng).unwrap();
    c.bench_function("lstm_backward_2x64_len50", |b| {
        b.iter(|| model.backward(black_box(&pass), &chunk).unwrap())
    });
}

fn search(c: &mut Criterion) {
    let levels = classic_levels(1, 8);
    c.bench_function("astar_spawn_to_gold_32x22", |b| {
        b.iter(|| {
            for g in &levels {
                let spawn = g.positions(Tile::Spawn)[0];
                for (x, y) in g.positions(Tile::Gold) {
                    let from = (spawn.0 as i64, spawn.1 as i64);
                    black_box(astar_to_goal(g, from, (x as i64, y as i64)));
                }
            }
        })
    });
    c.bench_function("evaluate_level_32x22", |b| {
        b.iter(|| evaluate_level(black_box(&levels[0])).unwrap())
    });
}

fn generation(c: &mut Criterion) {
    let (levels, paths): (Vec<_>, Vec<PathRecord>) = classic_levels(2, 40)
        .into_iter()
        .filter_map(|g| solve_for_path(&g).ok().map(|p| (g, p)))
        .unzip();
    let annotated = annotate(&levels, &paths).unwrap();
    let seqs: Vec<PathSequence> = paths.iter().map(PathRecord::sequence).collect();
    let model = LevelModel::train(&annotated, &seqs).unwrap();
    let path = paths.iter().max_by_key(|p| p.actions.len()).unwrap().sequence();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    c.bench_function("generate_from_path", |b| {
        b.iter(|| generate_from_path(black_box(path.clone()), &model, 3, &mut rng).unwrap())
    });
}

criterion_group!(benches, lstm, search, generation);
criterion_main!(benches);
