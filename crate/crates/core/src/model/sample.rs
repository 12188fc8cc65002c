use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use super::chunk::OneHotChunk;
use super::lstm::LstmModel;
use crate::tile::Action;

/// Path length used when none is requested.
pub const DEFAULT_PATH_LENGTH: usize = 103;

/// Draw an index from a probability row.
pub fn sample_index(row: &[f64], rng: &mut impl RngCore) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left u above the final cumulative sum.
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}

/// Generate `length` actions block by block: the first block is predicted from
/// an all-zero input, each later block from the block before it. `pick` turns
/// each probability row into an action index.
pub fn sample_path_with(
    model: &LstmModel,
    length: usize,
    chunk_len: usize,
    mut pick: impl FnMut(&[f64]) -> usize,
) -> Vec<Action> {
    let mut out = Vec::with_capacity(length);
    let mut input = OneHotChunk::zeros(chunk_len);
    // Forward passes here never use dropout, so this rng is never drawn from.
    let mut unused = ChaCha8Rng::seed_from_u64(0);
    while out.len() < length {
        let pass = model
            .forward(&input, 0.0, &mut unused)
            .expect("trained model produces finite activations");
        let take = (length - out.len()).min(chunk_len);
        let block: Vec<Option<usize>> = pass.probs[..take]
            .iter()
            .map(|row| Some(pick(row)))
            .collect();
        out.extend(block.iter().flatten().map(|&i| Action::ALL[i]));
        let mut next = block;
        next.resize(chunk_len, None);
        input = OneHotChunk::from_indices(next);
    }
    out
}

/// Sample a path by treating each softmax row as a categorical distribution.
pub fn sample_path(
    model: &LstmModel,
    length: usize,
    chunk_len: usize,
    rng: &mut impl RngCore,
) -> Vec<Action> {
    sample_path_with(model, length, chunk_len, |row| sample_index(row, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::lstm::ModelShape;

    fn model() -> LstmModel {
        let mut m = LstmModel::zeros(ModelShape {
            hidden_size: 3,
            layers: 2,
        });
        m.set_output_bias(Action::Right.index(), 3.0);
        m
    }

    #[test]
    fn zero_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_path(&model(), 0, 50, &mut rng).is_empty());
    }

    #[test]
    fn default_length_spans_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = sample_path(&model(), DEFAULT_PATH_LENGTH, 50, &mut rng);
        assert_eq!(p.len(), 103);
    }

    #[test]
    fn argmax_picker_is_deterministic() {
        let argmax = |row: &[f64]| {
            (0..row.len())
                .max_by(|&a, &b| row[a].total_cmp(&row[b]))
                .unwrap()
        };
        let p = sample_path_with(&model(), 20, 8, argmax);
        assert_eq!(crate::tile::format_actions(&p), "r".repeat(20));
    }

    #[test]
    fn sample_index_respects_point_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            assert_eq!(sample_index(&[0.0, 0.0, 1.0, 0.0, 0.0], &mut rng), 2);
        }
    }
}
