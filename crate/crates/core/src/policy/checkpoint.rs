//! Binary checkpoint: magic, format version, a JSON header carrying the
//! configuration, statistics and layer shapes, then every layer's weights
//! (row-major) and bias as little-endian f64.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::{Dense, Mlp};
use super::train::{PolicyConfig, PolicyStats};
use crate::error::{Error, Result};
use crate::representation::RepresentationStrategy;

const MAGIC: &[u8; 8] = b"RAILFRCK";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Training provenance kept with the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub train_steps: usize,
    pub train_seed: u64,
    /// Start rails of every training episode.
    pub train_starts: Vec<[f64; 2]>,
    /// Shelf level heights seen in training.
    pub train_levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub strategy: RepresentationStrategy,
    pub policy: PolicyConfig,
    pub stats: PolicyStats,
    pub params: Mlp,
    pub meta: CheckpointMeta,
}

#[derive(Serialize, Deserialize)]
struct Header {
    strategy: RepresentationStrategy,
    policy: PolicyConfig,
    stats: PolicyStats,
    meta: CheckpointMeta,
    shapes: Vec<[usize; 2]>,
}

impl Checkpoint {
    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        self.stats.validate()?;
        self.strategy.validate()?;
        let expected: Vec<[usize; 2]> = self
            .policy
            .layer_sizes()
            .windows(2)
            .map(|w| [w[1], w[0]])
            .collect();
        if self.params.shapes() != expected {
            return Err(Error::Invariant(format!(
                "layer shapes {:?} do not match policy config {:?}",
                self.params.shapes(),
                expected
            )));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let header = Header {
            strategy: self.strategy.clone(),
            policy: self.policy.clone(),
            stats: self.stats.clone(),
            meta: self.meta.clone(),
            shapes: self.params.shapes(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| Error::Invariant(e.to_string()))?;
        let mut out = Vec::with_capacity(16 + json.len() + 8 * self.params.num_params());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for v in self.params.params() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let malformed = |offset: usize, message: &str| Error::Malformed {
            line: offset,
            message: message.to_string(),
        };
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(malformed(0, "not a checkpoint file"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != CHECKPOINT_VERSION {
            return Err(Error::Version {
                found: version,
                expected: CHECKPOINT_VERSION,
            });
        }
        let header_len = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
        let body_start = 16 + header_len;
        let json = bytes
            .get(16..body_start)
            .ok_or_else(|| malformed(16, "truncated header"))?;
        let header: Header = serde_json::from_slice(json).map_err(|e| malformed(16, &e.to_string()))?;

        let mut values = bytes[body_start..].chunks_exact(8);
        if values.remainder().len() != 0 {
            return Err(malformed(body_start, "trailing partial value"));
        }
        let mut next = || -> Result<f64> {
            values
                .next()
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .ok_or_else(|| malformed(body_start, "truncated weights"))
        };
        let mut layers = Vec::with_capacity(header.shapes.len());
        for &[outputs, inputs] in &header.shapes {
            let mut layer = Dense::zeros(inputs, outputs);
            for w in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                *w = next()?;
            }
            layers.push(layer);
        }
        if values.next().is_some() {
            return Err(malformed(body_start, "more weights than the header declares"));
        }
        let ckpt = Checkpoint {
            strategy: header.strategy,
            policy: header.policy,
            stats: header.stats,
            params: Mlp { layers },
            meta: header.meta,
        };
        ckpt.validate()?;
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episode::NormStats;
    use crate::representation::StrategyKind;

    fn checkpoint() -> Checkpoint {
        let policy = PolicyConfig {
            hidden_sizes: vec![4],
            chunk_len: 2,
            exec_steps: 1,
            seed: 1,
        };
        Checkpoint {
            strategy: RepresentationStrategy::new(StrategyKind::EpsEps),
            params: policy.init_params(),
            stats: PolicyStats {
                input: NormStats {
                    mean: vec![0.1; 12],
                    std: vec![0.3; 12],
                },
                action: NormStats {
                    mean: vec![0.0; 5],
                    std: vec![1.0 / 3.0; 5],
                },
            },
            policy,
            meta: CheckpointMeta {
                train_steps: 10,
                train_seed: 2,
                train_starts: vec![[0.5, 1.2]],
                train_levels: vec![0.7],
            },
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let ck = checkpoint();
        let bytes = ck.to_bytes().unwrap();
        assert_eq!(Checkpoint::from_bytes(&bytes).unwrap(), ck);
    }

    #[test]
    fn corrupt_inputs_rejected() {
        let bytes = checkpoint().to_bytes().unwrap();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 8]).is_err());
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        let mut wrong_version = bytes.clone();
        wrong_version[8] = 9;
        assert!(matches!(
            Checkpoint::from_bytes(&wrong_version),
            Err(Error::Version { found: 9, .. })
        ));
        assert!(Checkpoint::from_bytes(b"nonsense").is_err());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut ck = checkpoint();
        ck.policy.hidden_sizes = vec![5];
        assert!(ck.to_bytes().is_err());
    }
}
