//! Demonstration data model, line-delimited episode files and
//! dataset-statistics normalization.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::{Index, IndexMut};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of proprioceptive joints: rail X, rail Z, reach, wrist pitch, gripper.
pub const STATE_DIM: usize = 5;
/// Flattened length of a [`TaskObservation`].
pub const OBS_DIM: usize = 7;
pub const RAIL_X: usize = 0;
pub const RAIL_Z: usize = 1;
pub const REACH: usize = 2;
pub const PITCH: usize = 3;
pub const GRIPPER: usize = 4;

pub const FORMAT_VERSION: u32 = 1;

/// Floor applied to every standard deviation in [`NormStats`].
pub const STD_FLOOR: f64 = 1e-6;

/// Joint positions or joint targets, indexed by the `RAIL_X`.. constants.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointVector(pub [f64; STATE_DIM]);

impl JointVector {
    pub const fn zeros() -> Self {
        JointVector([0.0; STATE_DIM])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn rails(&self) -> [f64; 2] {
        [self.0[RAIL_X], self.0[RAIL_Z]]
    }
}

impl From<[f64; STATE_DIM]> for JointVector {
    fn from(v: [f64; STATE_DIM]) -> Self {
        JointVector(v)
    }
}

impl TryFrom<&[f64]> for JointVector {
    type Error = Error;

    fn try_from(v: &[f64]) -> Result<Self> {
        let arr: [f64; STATE_DIM] = v.try_into().map_err(|_| Error::Dimension {
            expected: STATE_DIM,
            got: v.len(),
        })?;
        Ok(JointVector(arr))
    }
}

impl Index<usize> for JointVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for JointVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Egocentric task observation, the stand-in for the carriage and wrist cameras.
///
/// Offsets are `(depth, height)` pairs measured from the gripper. Nothing in
/// here depends on where the carriage sits on the rails.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TaskObservation {
    pub gripper_to_bottle: [f64; 2],
    pub bottle_tilt: f64,
    pub gripper_to_shelf_edge: [f64; 2],
    pub bottle_grasped: bool,
    pub gripper_aperture_seen: f64,
}

impl TaskObservation {
    pub fn to_array(&self) -> [f64; OBS_DIM] {
        [
            self.gripper_to_bottle[0],
            self.gripper_to_bottle[1],
            self.bottle_tilt,
            self.gripper_to_shelf_edge[0],
            self.gripper_to_shelf_edge[1],
            if self.bottle_grasped { 1.0 } else { 0.0 },
            self.gripper_aperture_seen,
        ]
    }

    pub fn from_array(v: &[f64; OBS_DIM]) -> Self {
        TaskObservation {
            gripper_to_bottle: [v[0], v[1]],
            bottle_tilt: v[2],
            gripper_to_shelf_edge: [v[3], v[4]],
            bottle_grasped: v[5] >= 0.5,
            gripper_aperture_seen: v[6],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub t: usize,
    pub state: JointVector,
    /// Target joint command, in the same units as `state`.
    pub action: JointVector,
    pub obs: TaskObservation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EnvLabel {
    A,
    B,
}

impl fmt::Display for EnvLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvLabel::A => f.write_str("A"),
            EnvLabel::B => f.write_str("B"),
        }
    }
}

impl FromStr for EnvLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(EnvLabel::A),
            "B" | "b" => Ok(EnvLabel::B),
            other => Err(Error::Config(format!("unknown environment label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub id: u64,
    pub env_label: EnvLabel,
    steps: Vec<Step>,
    start_state: JointVector,
}

impl Episode {
    /// Build an episode, checking that steps are non-empty and `t` counts up from 0.
    pub fn new(id: u64, env_label: EnvLabel, steps: Vec<Step>) -> Result<Self> {
        let first = steps
            .first()
            .ok_or_else(|| Error::Invariant(format!("episode {id} has no steps")))?;
        for (i, step) in steps.iter().enumerate() {
            if step.t != i {
                return Err(Error::Invariant(format!(
                    "episode {id}: step {i} has t = {}",
                    step.t
                )));
            }
        }
        let start_state = first.state;
        Ok(Episode {
            id,
            env_label,
            steps,
            start_state,
        })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn start_state(&self) -> JointVector {
        self.start_state
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    fn check_finite(&self) -> Result<()> {
        for (i, step) in self.steps.iter().enumerate() {
            if !(step.state.is_finite() && step.action.is_finite() && step.obs.is_finite()) {
                return Err(Error::NonFinite {
                    episode: self.id,
                    step: i,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct FileHeader {
    format_version: u32,
    state_dim: usize,
    obs_dim: usize,
}

#[derive(Serialize, Deserialize)]
struct StepRecord {
    t: usize,
    state: [f64; STATE_DIM],
    action: [f64; STATE_DIM],
    obs: [f64; OBS_DIM],
}

#[derive(Serialize, Deserialize)]
struct EpisodeRecord {
    id: u64,
    env_label: EnvLabel,
    steps: Vec<StepRecord>,
}

impl From<&Episode> for EpisodeRecord {
    fn from(ep: &Episode) -> Self {
        EpisodeRecord {
            id: ep.id,
            env_label: ep.env_label,
            steps: ep
                .steps
                .iter()
                .map(|s| StepRecord {
                    t: s.t,
                    state: s.state.0,
                    action: s.action.0,
                    obs: s.obs.to_array(),
                })
                .collect(),
        }
    }
}

impl TryFrom<EpisodeRecord> for Episode {
    type Error = Error;
    fn try_from(rec: EpisodeRecord) -> Result<Self> {
        let steps = rec
            .steps
            .into_iter()
            .map(|s| Step {
                t: s.t,
                state: JointVector(s.state),
                action: JointVector(s.action),
                obs: TaskObservation::from_array(&s.obs),
            })
            .collect();
        Episode::new(rec.id, rec.env_label, steps)
    }
}

/// Write episodes as one header line followed by one JSON line per episode.
pub fn save_episodes(episodes: &[Episode], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    for ep in episodes {
        ep.check_finite()?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_episodes(episodes, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

fn write_episodes(episodes: &[Episode], out: &mut impl Write) -> std::io::Result<()> {
    let header = FileHeader {
        format_version: FORMAT_VERSION,
        state_dim: STATE_DIM,
        obs_dim: OBS_DIM,
    };
    serde_json::to_writer(&mut *out, &header)?;
    out.write_all(b"\n")?;
    for ep in episodes {
        serde_json::to_writer(&mut *out, &EpisodeRecord::from(ep))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_episodes(path: impl AsRef<Path>) -> Result<Vec<Episode>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_episodes(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parse the episode format from any reader. Every line, including the
/// last, must be newline-terminated; a missing terminator means truncation.
pub fn read_episodes(mut reader: impl BufRead) -> Result<Vec<Episode>> {
    let mut buf = String::new();
    reader
        .read_to_string(&mut buf)
        .map_err(|e| Error::io("<reader>", e))?;
    if buf.is_empty() {
        return Err(Error::Malformed {
            line: 1,
            message: "missing header".into(),
        });
    }
    if !buf.ends_with('\n') {
        let line = buf.lines().count();
        return Err(Error::Malformed {
            line,
            message: "record is not newline-terminated (truncated file?)".into(),
        });
    }

    let mut lines = buf.lines().enumerate();
    let (_, header_line) = lines.next().ok_or(Error::Malformed {
        line: 1,
        message: "missing header".into(),
    })?;
    let header: FileHeader = serde_json::from_str(header_line).map_err(|e| Error::Malformed {
        line: 1,
        message: e.to_string(),
    })?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Version {
            found: header.format_version,
            expected: FORMAT_VERSION,
        });
    }
    if header.state_dim != STATE_DIM || header.obs_dim != OBS_DIM {
        return Err(Error::Malformed {
            line: 1,
            message: format!(
                "header dims ({}, {}) do not match ({STATE_DIM}, {OBS_DIM})",
                header.state_dim, header.obs_dim
            ),
        });
    }

    let mut episodes = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let rec: EpisodeRecord = serde_json::from_str(line).map_err(|e| Error::Malformed {
            line: idx + 1,
            message: e.to_string(),
        })?;
        episodes.push(Episode::try_from(rec)?);
    }
    Ok(episodes)
}

/// Per-dimension location/scale statistics of a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// Population mean and standard deviation over `rows` (Welford), with
    /// each std floored at [`STD_FLOOR`].
    pub fn from_rows<'a, I>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut n = 0usize;
        let mut mean = vec![0.0; dim];
        let mut m2 = vec![0.0; dim];
        for row in rows {
            if row.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: row.len(),
                });
            }
            n += 1;
            let inv = 1.0 / n as f64;
            for ((m, s), &x) in mean.iter_mut().zip(m2.iter_mut()).zip(row) {
                let delta = x - *m;
                *m += delta * inv;
                *s += delta * (x - *m);
            }
        }
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let std = m2
            .iter()
            .map(|s| (s / n as f64).sqrt().max(STD_FLOOR))
            .collect();
        Ok(NormStats { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    /// `(v - mean) / std`, elementwise.
    pub fn normalize(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        Ok(v.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| (x - m) / s)
            .collect())
    }

    pub fn denormalize(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        Ok(v.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| x * s + m)
            .collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean.len() != self.std.len() {
            return Err(Error::Dimension {
                expected: self.mean.len(),
                got: self.std.len(),
            });
        }
        if self.std.iter().any(|s| !(*s >= STD_FLOOR) || !s.is_finite())
            || self.mean.iter().any(|m| !m.is_finite())
        {
            return Err(Error::Invariant("normalization stats out of range".into()));
        }
        Ok(())
    }
}

/// Flatten one step into the policy input layout: observation, then state.
pub fn input_row(obs: &TaskObservation, state: &JointVector) -> [f64; OBS_DIM + STATE_DIM] {
    let mut row = [0.0; OBS_DIM + STATE_DIM];
    row[..OBS_DIM].copy_from_slice(&obs.to_array());
    row[OBS_DIM..].copy_from_slice(&state.0);
    row
}

/// Statistics of the raw (un-encoded) inputs in the policy layout.
pub fn compute_stats(episodes: &[Episode]) -> Result<NormStats> {
    let rows: Vec<_> = episodes
        .iter()
        .flat_map(|ep| ep.steps.iter().map(|s| input_row(&s.obs, &s.state)))
        .collect();
    NormStats::from_rows(OBS_DIM + STATE_DIM, rows.iter().map(|r| r.as_slice()))
}
