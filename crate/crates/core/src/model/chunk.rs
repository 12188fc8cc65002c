use crate::error::{Error, Result};
use crate::tile::Action;

/// Number of symbols in the one-hot encoding.
pub const ALPHABET: usize = 5;

/// Chunk length used for training pairs and generation blocks.
pub const DEFAULT_CHUNK_LEN: usize = 50;

/// A fixed-length block of one-hot rows. `None` rows are all-zero (padding or
/// an empty priming input).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHotChunk {
    rows: Vec<Option<usize>>,
}

impl OneHotChunk {
    pub fn zeros(len: usize) -> Self {
        OneHotChunk {
            rows: vec![None; len],
        }
    }

    /// Encode `actions`, zero-padding up to `len`.
    pub fn encode(actions: &[Action], len: usize) -> Self {
        assert!(actions.len() <= len, "chunk overflow");
        let mut rows: Vec<Option<usize>> = actions.iter().map(|a| Some(a.index())).collect();
        rows.resize(len, None);
        OneHotChunk { rows }
    }

    pub fn from_indices(rows: Vec<Option<usize>>) -> Self {
        assert!(
            rows.iter().flatten().all(|&i| i < ALPHABET),
            "one-hot index out of range"
        );
        OneHotChunk { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Hot column of row `t`, if any.
    pub fn hot(&self, t: usize) -> Option<usize> {
        self.rows[t]
    }

    pub fn rows(&self) -> &[Option<usize>] {
        &self.rows
    }

    /// Dense {0,1} matrix, `len` rows by [`ALPHABET`] columns.
    pub fn matrix(&self) -> Vec<[f64; ALPHABET]> {
        self.rows
            .iter()
            .map(|r| {
                let mut row = [0.0; ALPHABET];
                if let Some(i) = r {
                    row[*i] = 1.0;
                }
                row
            })
            .collect()
    }

    pub fn actions(&self) -> Vec<Action> {
        self.rows.iter().flatten().map(|&i| Action::ALL[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingPair {
    pub input: OneHotChunk,
    pub target: OneHotChunk,
}

/// Split each path into consecutive chunks and pair every chunk with its
/// successor. A short final chunk is zero-padded; paths without one full chunk
/// and at least one more action are skipped with a warning.
pub fn make_training_pairs(paths: &[Vec<Action>], chunk_len: usize) -> Result<Vec<TrainingPair>> {
    if chunk_len == 0 {
        return Err(Error::Config("chunk length must be at least 1".into()));
    }
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for (i, path) in paths.iter().enumerate() {
        if path.len() <= chunk_len {
            log::debug!("path {i}: {} actions, too short for chunk length {chunk_len}", path.len());
            skipped += 1;
            continue;
        }
        let chunks: Vec<&[Action]> = path.chunks(chunk_len).collect();
        for w in chunks.windows(2) {
            pairs.push(TrainingPair {
                input: OneHotChunk::encode(w[0], chunk_len),
                target: OneHotChunk::encode(w[1], chunk_len),
            });
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} of {} paths are too short for chunk length {chunk_len}, skipped", paths.len());
    }
    if pairs.is_empty() {
        return Err(Error::Corpus(format!(
            "no path longer than the chunk length {chunk_len}"
        )));
    }
    Ok(pairs)
}
