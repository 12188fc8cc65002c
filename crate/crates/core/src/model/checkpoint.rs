//! Model checkpoints: one JSON header line, then the parameters as raw
//! little-endian `f64` values in storage order.

use serde::{Deserialize, Serialize};

use super::lstm::{LstmModel, ModelShape};
use super::train::TrainConfig;
use crate::error::{Error, Result};
use crate::tile::{format_actions, Action};

const FORMAT: &str = "pathrunner-lstm";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub shape: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub version: u32,
    pub alphabet: String,
    pub hidden_size: usize,
    pub layers: usize,
    pub chunk_len: usize,
    pub param_count: usize,
    pub tensors: Vec<TensorInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loss_history: Vec<f64>,
}

/// A model with the metadata needed to use it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: LstmModel,
    pub chunk_len: usize,
    pub train: Option<TrainConfig>,
    pub loss_history: Vec<f64>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let shape = self.model.shape();
        let header = CheckpointHeader {
            format: FORMAT.into(),
            version: VERSION,
            alphabet: format_actions(&Action::ALL),
            hidden_size: shape.hidden_size,
            layers: shape.layers,
            chunk_len: self.chunk_len,
            param_count: shape.param_count(),
            tensors: shape
                .tensors()
                .into_iter()
                .map(|(name, shape)| TensorInfo { name, shape })
                .collect(),
            train: self.train.clone(),
            loss_history: self.loss_history.clone(),
        };
        let mut out = serde_json::to_vec(&header).expect("header serializes");
        out.push(b'\n');
        for p in self.model.params() {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let split = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format("checkpoint has no header line".into()))?;
        let header: CheckpointHeader = serde_json::from_slice(&bytes[..split])?;
        if header.format != FORMAT || header.version != VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint {} v{}",
                header.format, header.version
            )));
        }
        if header.alphabet != format_actions(&Action::ALL) {
            return Err(Error::Format(format!("unexpected alphabet {:?}", header.alphabet)));
        }
        let shape = ModelShape {
            hidden_size: header.hidden_size,
            layers: header.layers,
        };
        let body = &bytes[split + 1..];
        if body.len() != shape.param_count() * 8 || header.param_count != shape.param_count() {
            return Err(Error::Shape(format!(
                "checkpoint body holds {} bytes, model needs {}",
                body.len(),
                shape.param_count() * 8
            )));
        }
        let params = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Checkpoint {
            model: LstmModel::from_params(shape, params)?,
            chunk_len: header.chunk_len,
            train: header.train,
            loss_history: header.loss_history,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn checkpoint() -> Checkpoint {
        let shape = ModelShape {
            hidden_size: 3,
            layers: 2,
        };
        Checkpoint {
            model: LstmModel::init(shape, &mut ChaCha8Rng::seed_from_u64(5)),
            chunk_len: 50,
            train: Some(TrainConfig::default()),
            loss_history: vec![1.6, 1.2],
        }
    }

    #[test]
    fn roundtrip_is_exact() {
        let c = checkpoint();
        let bytes = c.to_bytes();
        assert_eq!(Checkpoint::from_bytes(&bytes).unwrap(), c);
        let header_end = bytes.iter().position(|&b| b == b'\n').unwrap();
        assert_eq!(bytes.len() - header_end - 1, c.model.params().len() * 8);
        let header: serde_json::Value = serde_json::from_slice(&bytes[..header_end]).unwrap();
        assert_eq!(header["alphabet"], "lrucf");
        assert_eq!(header["tensors"][0]["shape"], serde_json::json!([12, 8]));
    }

    #[test]
    fn truncated_body_rejected() {
        let bytes = checkpoint().to_bytes();
        assert!(matches!(
            Checkpoint::from_bytes(&bytes[..bytes.len() - 8]),
            Err(Error::Shape(_))
        ));
        assert!(Checkpoint::from_bytes(b"not a checkpoint").is_err());
    }
}
