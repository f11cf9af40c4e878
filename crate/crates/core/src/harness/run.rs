use super::config::ExperimentConfig;
use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::policy::{train, Checkpoint, CheckpointMeta, CurvePoint, PolicyConfig, PolicyStats, TrainingSet};
use crate::representation::{make_chunks, RepresentationStrategy};

#[derive(Debug, Clone)]
pub struct TrainedStrategy {
    pub checkpoint: Checkpoint,
    pub curve: Vec<CurvePoint>,
}

/// Encode `episodes` with `strategy`, fit statistics, and train a policy
/// with the configured schedule. `steps` and `chunk_len` override the config.
pub fn train_strategy(
    episodes: &[Episode],
    strategy: &RepresentationStrategy,
    cfg: &ExperimentConfig,
    steps: Option<usize>,
    chunk_len: Option<usize>,
    exec: Execution,
) -> Result<TrainedStrategy> {
    if episodes.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut policy: PolicyConfig = cfg.policy.clone();
    if let Some(h) = chunk_len {
        policy.chunk_len = h;
        policy.exec_steps = policy.exec_steps.min(h);
    }
    policy.validate()?;
    let mut training = cfg.training.clone();
    if let Some(steps) = steps {
        training.steps = steps;
    }

    let mut samples = Vec::new();
    for e in episodes {
        samples.extend(make_chunks(e, strategy, policy.chunk_len)?);
    }
    let stats = PolicyStats::fit(&samples)?;
    let set = TrainingSet::new(&samples, &stats)?;
    let out = train(&set, &policy, &training, exec)?;

    let levels = &cfg.env_b.shelf_z_levels;
    let mut train_starts: Vec<[f64; 2]> = episodes.iter().map(|e| e.start_state().rails()).collect();
    train_starts.sort_by(|a, b| a.partial_cmp(b).expect("finite starts"));
    let mut train_levels: Vec<f64> = train_starts
        .iter()
        .filter_map(|s| levels.iter().rev().find(|&&l| l < s[1]).copied())
        .collect();
    train_levels.sort_by(f64::total_cmp);
    train_levels.dedup();

    let checkpoint = Checkpoint {
        strategy: strategy.clone(),
        policy,
        stats,
        params: out.params,
        meta: CheckpointMeta {
            train_steps: training.steps,
            train_seed: cfg.training.seed,
            train_starts,
            train_levels,
        },
    };
    checkpoint.validate()?;
    Ok(TrainedStrategy {
        checkpoint,
        curve: out.curve,
    })
}
