//! State and action encodings for the rail joints, their inverse at
//! inference time, and construction of training chunks.
//!
//! Only the rail dimensions are transformed. Every other joint passes
//! through bitwise unchanged under all strategies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::episode::{Episode, JointVector, TaskObservation, RAIL_X, RAIL_Z, STATE_DIM};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    /// Absolute state, absolute targets.
    AbsAbs,
    /// State and targets relative to the episode's first state.
    EpsEps,
    /// Zeroed rail state, targets relative to the state at chunk issuance.
    ZeroChunk,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [StrategyKind::AbsAbs, StrategyKind::EpsEps, StrategyKind::ZeroChunk];

    pub fn token(self) -> &'static str {
        match self {
            StrategyKind::AbsAbs => "abs-abs",
            StrategyKind::EpsEps => "eps-eps",
            StrategyKind::ZeroChunk => "zero-chunk",
        }
    }

    /// Short label used in tables and charts.
    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::AbsAbs => "Abs/Abs",
            StrategyKind::EpsEps => "Eps/Eps",
            StrategyKind::ZeroChunk => "0/Chunk",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs-abs" => Ok(StrategyKind::AbsAbs),
            "eps-eps" => Ok(StrategyKind::EpsEps),
            "zero-chunk" => Ok(StrategyKind::ZeroChunk),
            other => Err(Error::Config(format!(
                "unknown strategy {other:?} (expected abs-abs, eps-eps or zero-chunk)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentationStrategy {
    pub kind: StrategyKind,
    pub rail_dims: Vec<usize>,
    /// ZeroChunk ablation: feed an all-zero state instead of zeroing rails only.
    #[serde(default)]
    pub zero_full_state: bool,
}

impl RepresentationStrategy {
    pub fn new(kind: StrategyKind) -> Self {
        RepresentationStrategy {
            kind,
            rail_dims: vec![RAIL_X, RAIL_Z],
            zero_full_state: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&d) = self.rail_dims.iter().find(|&&d| d >= STATE_DIM) {
            return Err(Error::Dimension {
                expected: STATE_DIM,
                got: d + 1,
            });
        }
        Ok(())
    }

    /// Reference subtracted from rail targets: `s0`, `s_t`, or nothing.
    fn action_reference(&self, s_t: &JointVector, origin: &EpisodeOrigin) -> Option<JointVector> {
        match self.kind {
            StrategyKind::AbsAbs => None,
            StrategyKind::EpsEps => Some(origin.0),
            StrategyKind::ZeroChunk => Some(*s_t),
        }
    }

    /// Origin recorded alongside a chunk for audit.
    pub fn chunk_origin(&self, s_t: &JointVector, origin: &EpisodeOrigin) -> JointVector {
        self.action_reference(s_t, origin).unwrap_or_default()
    }

    pub fn encode_state(&self, s_t: &JointVector, origin: &EpisodeOrigin) -> JointVector {
        let mut out = *s_t;
        match self.kind {
            StrategyKind::AbsAbs => {}
            StrategyKind::EpsEps => {
                for &d in &self.rail_dims {
                    out[d] = s_t[d] - origin.0[d];
                }
            }
            StrategyKind::ZeroChunk if self.zero_full_state => out = JointVector::zeros(),
            StrategyKind::ZeroChunk => {
                for &d in &self.rail_dims {
                    out[d] = 0.0;
                }
            }
        }
        out
    }

    pub fn encode_action(&self, a: &JointVector, s_t: &JointVector, origin: &EpisodeOrigin) -> JointVector {
        let mut out = *a;
        if let Some(reference) = self.action_reference(s_t, origin) {
            for &d in &self.rail_dims {
                out[d] = a[d] - reference[d];
            }
        }
        out
    }

    /// Encode up to `h` actions issued at state `s_t`. Short chunks are padded
    /// by repeating the last encoded action, with `mask = false` on padding.
    pub fn encode_action_chunk(
        &self,
        actions: &[JointVector],
        s_t: &JointVector,
        origin: &EpisodeOrigin,
        h: usize,
    ) -> Result<(Vec<JointVector>, Vec<bool>)> {
        if actions.is_empty() {
            return Err(Error::EmptyChunk);
        }
        if actions.len() > h {
            return Err(Error::Dimension {
                expected: h,
                got: actions.len(),
            });
        }
        let mut chunk: Vec<JointVector> = actions
            .iter()
            .map(|a| self.encode_action(a, s_t, origin))
            .collect();
        let mut mask = vec![true; chunk.len()];
        let last = *chunk.last().expect("non-empty");
        chunk.resize(h, last);
        mask.resize(h, false);
        Ok((chunk, mask))
    }

    /// Map an encoded target back to an absolute joint command. `s_t` is the
    /// state at which the chunk containing `a_enc` was issued.
    pub fn decode_action(&self, a_enc: &JointVector, s_t: &JointVector, origin: &EpisodeOrigin) -> JointVector {
        let mut out = *a_enc;
        if let Some(reference) = self.action_reference(s_t, origin) {
            for &d in &self.rail_dims {
                out[d] = a_enc[d] + reference[d];
            }
        }
        out
    }
}

/// The state captured at episode start (`s_{i,0}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeOrigin(pub JointVector);

impl EpisodeOrigin {
    pub fn of(episode: &Episode) -> Self {
        EpisodeOrigin(episode.start_state())
    }
}

/// One training example.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkSample {
    pub episode_id: u64,
    pub t: usize,
    pub obs: TaskObservation,
    pub state_enc: JointVector,
    pub action_chunk: Vec<JointVector>,
    pub mask: Vec<bool>,
    pub origin: JointVector,
}

impl ChunkSample {
    pub fn real_actions(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }
}

/// One sample per timestep, stride 1.
pub fn make_chunks(episode: &Episode, strategy: &RepresentationStrategy, h: usize) -> Result<Vec<ChunkSample>> {
    if h == 0 {
        return Err(Error::Config("chunk length must be at least 1".into()));
    }
    strategy.validate()?;
    let steps = episode.steps();
    if steps.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let origin = EpisodeOrigin::of(episode);
    let actions: Vec<JointVector> = steps.iter().map(|s| s.action).collect();
    steps
        .iter()
        .enumerate()
        .map(|(t, step)| {
            let end = (t + h).min(steps.len());
            let (action_chunk, mask) = strategy.encode_action_chunk(&actions[t..end], &step.state, &origin, h)?;
            Ok(ChunkSample {
                episode_id: episode.id,
                t,
                obs: step.obs,
                state_enc: strategy.encode_state(&step.state, &origin),
                action_chunk,
                mask,
                origin: strategy.chunk_origin(&step.state, &origin),
            })
        })
        .collect()
}
