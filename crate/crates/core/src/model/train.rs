use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::chunk::{make_training_pairs, TrainingPair, DEFAULT_CHUNK_LEN};
use super::lstm::{LstmModel, ModelShape};
use super::optim::{clip_gradients, AdamState};
use crate::error::{Error, Result};
use crate::tile::Action;

/// Model shape and optimization settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub dropout_rate: f64,
    pub clip_norm: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub hidden_size: usize,
    pub layers: usize,
    pub chunk_len: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 60,
            learning_rate: 0.001,
            dropout_rate: 0.3,
            clip_norm: 5.0,
            batch_size: 16,
            seed: 0,
            hidden_size: 512,
            layers: 2,
            chunk_len: DEFAULT_CHUNK_LEN,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.into()));
        if self.epochs < 1 {
            return fail("epochs must be at least 1");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return fail("dropout rate must lie in [0, 1)");
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return fail("clip norm must be positive");
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return fail("learning rate must be positive");
        }
        if self.batch_size < 1 || self.hidden_size < 1 || self.layers < 1 || self.chunk_len < 1 {
            return fail("batch size, hidden size, layers and chunk length must be at least 1");
        }
        Ok(())
    }

    pub fn shape(&self) -> ModelShape {
        ModelShape {
            hidden_size: self.hidden_size,
            layers: self.layers,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LstmModel,
    /// Mean training loss of each epoch.
    pub loss_history: Vec<f64>,
}

/// Train from raw action sequences.
pub fn train(paths: &[Vec<Action>], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let pairs = make_training_pairs(paths, config.chunk_len)?;
    train_on_pairs(&pairs, config)
}

/// Minibatch Adam over fixed pairs; one seeded stream drives init, shuffling
/// and dropout.
pub fn train_on_pairs(pairs: &[TrainingPair], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(Error::Corpus("no training pairs".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = LstmModel::init(config.shape(), &mut rng);
    let mut adam = AdamState::new(model.params().len());
    let mut grads = vec![0.0; model.params().len()];
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.iter_mut().for_each(|g| *g = 0.0);
            for &i in batch {
                let pair = &pairs[i];
                let pass = model
                    .forward(&pair.input, config.dropout_rate, &mut rng)
                    .map_err(|e| match e {
                        Error::Numerics { .. } => Error::Numerics { epoch },
                        e => e,
                    })?;
                epoch_loss += model.backward_into(&pass, &pair.target, &mut grads)?;
            }
            let scale = 1.0 / batch.len() as f64;
            grads.iter_mut().for_each(|g| *g *= scale);
            if grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::Numerics { epoch });
            }
            clip_gradients(&mut grads, config.clip_norm);
            adam.step(model.params_mut(), &grads, config.learning_rate);
        }
        let mean = epoch_loss / pairs.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Numerics { epoch });
        }
        log::info!("epoch {}/{}: loss {mean:.5}", epoch + 1, config.epochs);
        history.push(mean);
    }
    Ok(TrainOutcome {
        model,
        loss_history: history,
    })
}

/// Fraction of non-padding target rows whose argmax prediction is correct.
pub fn next_action_accuracy(model: &LstmModel, pairs: &[TrainingPair]) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (mut hit, mut total) = (0usize, 0usize);
    for pair in pairs {
        let pass = model.forward(&pair.input, 0.0, &mut rng)?;
        for (t, row) in pass.probs.iter().enumerate() {
            let Some(k) = pair.target.hot(t) else { continue };
            let best = (0..row.len())
                .max_by(|&a, &b| row[a].total_cmp(&row[b]))
                .expect("nonempty row");
            hit += usize::from(best == k);
            total += 1;
        }
    }
    Ok(if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    })
}
