use std::collections::VecDeque;

use super::checkpoint::Checkpoint;
use super::train::predict_chunk;
use crate::episode::{JointVector, TaskObservation};
use crate::error::Result;
use crate::railsim::{Controller, SimState};
use crate::representation::EpisodeOrigin;

/// Receding-horizon execution of a trained policy: predict a chunk, run its
/// first `exec_steps` actions, then predict again. Only proprioception and
/// the observation are read from the simulator. Build one per episode.
#[derive(Debug)]
pub struct ChunkedController<'a> {
    ckpt: &'a Checkpoint,
    origin: Option<EpisodeOrigin>,
    queue: VecDeque<JointVector>,
}

impl<'a> ChunkedController<'a> {
    pub fn new(ckpt: &'a Checkpoint) -> Self {
        ChunkedController {
            ckpt,
            origin: None,
            queue: VecDeque::with_capacity(ckpt.policy.exec_steps),
        }
    }

    fn refill(&mut self, s_t: &JointVector, obs: &TaskObservation) -> Result<()> {
        let origin = *self.origin.get_or_insert(EpisodeOrigin(*s_t));
        let strategy = &self.ckpt.strategy;
        let state_enc = strategy.encode_state(s_t, &origin);
        let chunk = predict_chunk(&self.ckpt.params, &self.ckpt.stats, obs, &state_enc)?;
        self.queue.extend(
            chunk
                .iter()
                .take(self.ckpt.policy.exec_steps)
                .map(|a| strategy.decode_action(a, s_t, &origin)),
        );
        Ok(())
    }
}

impl Controller for ChunkedController<'_> {
    fn act(&mut self, sim: &SimState, obs: &TaskObservation) -> Result<JointVector> {
        if self.queue.is_empty() {
            self.refill(&sim.robot, obs)?;
        }
        Ok(self.queue.pop_front().expect("refill yields at least one action"))
    }
}
