use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::derive_seed;
use crate::episode::{EnvLabel, Episode};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::railsim::{run_episode, Expert, StartCondition};

/// Attempts per episode before the whole run is declared broken.
const MAX_ATTEMPTS: usize = 20;

/// Where one demonstration starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoStart {
    pub env: EnvLabel,
    pub start: StartCondition,
    pub jitter_seed: u64,
}

/// Draw a start from the two-cluster sampler: environment by `env_mix`,
/// X uniform in that environment's range, one of the demonstration shelf
/// levels, and a start height just above the shelf.
pub fn sample_start(cfg: &ExperimentConfig, rng: &mut impl Rng) -> DemoStart {
    let d = &cfg.dataset;
    let env = if rng.random::<f64>() < d.env_mix { EnvLabel::A } else { EnvLabel::B };
    let x_range = match env {
        EnvLabel::A => d.env_a_x,
        EnvLabel::B => d.env_b_x,
    };
    let x = uniform(rng, x_range);
    let shelf_index = d.z_indices[rng.random_range(0..d.z_indices.len())];
    let h = uniform(rng, d.start_height);
    let dx = uniform(rng, [-d.bottle_dx, d.bottle_dx]);
    let world = cfg.world(env);
    DemoStart {
        env,
        start: StartCondition {
            rails: [x, world.shelf_z(shelf_index) + h],
            shelf_index,
            bottle_x: x + dx,
            seed: rng.random(),
        },
        jitter_seed: rng.random(),
    }
}

pub(crate) fn uniform(rng: &mut impl Rng, range: [f64; 2]) -> f64 {
    if range[0] < range[1] {
        rng.random_range(range[0]..range[1])
    } else {
        range[0]
    }
}

/// Collect `n` successful expert demonstrations. Episode `i` depends only on
/// `(seed, i)`, so the result does not depend on the execution mode.
pub fn gen_dataset(cfg: &ExperimentConfig, n: usize, seed: u64, exec: Execution) -> Result<Vec<Episode>> {
    if n == 0 {
        return Err(Error::Config("need at least one episode".into()));
    }
    cfg.validate()?;
    let results = exec.map_range(n, |i| collect_one(cfg, i as u64, seed));
    let mut episodes = Vec::with_capacity(n);
    let mut failures = 0usize;
    for r in results {
        let (episode, failed) = r?;
        failures += failed;
        episodes.push(episode);
    }
    let rate = failures as f64 / (failures + n) as f64;
    if rate > cfg.dataset.max_failure_rate {
        return Err(Error::ExpertFailure { rate });
    }
    Ok(episodes)
}

fn collect_one(cfg: &ExperimentConfig, id: u64, seed: u64) -> Result<(Episode, usize)> {
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[id, attempt as u64]));
        let demo = sample_start(cfg, &mut rng);
        let world = cfg.world(demo.env);
        let mut expert = Expert::with_jitter(world, cfg.dataset.expert_jitter, demo.jitter_seed);
        let rollout = run_episode(world, &demo.start, id, &mut expert, world.max_steps)?;
        if rollout.score() == 4 {
            return Ok((rollout.episode, attempt));
        }
    }
    Err(Error::ExpertFailure { rate: 1.0 })
}
