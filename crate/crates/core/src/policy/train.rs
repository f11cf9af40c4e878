use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::schedule::LrSchedule;
use crate::episode::{input_row, JointVector, NormStats, TaskObservation, OBS_DIM, STATE_DIM};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::representation::ChunkSample;

/// Samples per gradient shard. Shards are summed in index order, so the
/// reduction is the same in sequential and parallel mode.
const SHARD: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub hidden_sizes: Vec<usize>,
    pub chunk_len: usize,
    pub exec_steps: usize,
    pub seed: u64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            hidden_sizes: vec![256, 256],
            chunk_len: 16,
            exec_steps: 8,
            seed: 0,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chunk_len == 0 || self.exec_steps == 0 || self.exec_steps > self.chunk_len {
            return Err(Error::Config(format!(
                "need 1 <= exec_steps ({}) <= chunk_len ({})",
                self.exec_steps, self.chunk_len
            )));
        }
        if self.hidden_sizes.contains(&0) {
            return Err(Error::Config("hidden sizes must be at least 1".into()));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        OBS_DIM + STATE_DIM
    }

    pub fn output_dim(&self) -> usize {
        self.chunk_len * STATE_DIM
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_dim()];
        sizes.extend(&self.hidden_sizes);
        sizes.push(self.output_dim());
        sizes
    }

    pub fn init_params(&self) -> Mlp {
        Mlp::new(&self.layer_sizes(), &mut ChaCha8Rng::seed_from_u64(self.seed))
    }
}

/// Input statistics over `obs ++ state_enc` and action statistics over
/// unmasked encoded actions, both from the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyStats {
    pub input: NormStats,
    pub action: NormStats,
}

impl PolicyStats {
    pub fn fit(samples: &[ChunkSample]) -> Result<Self> {
        let sorted = canonical_order(samples);
        let inputs: Vec<_> = sorted.iter().map(|s| input_row(&s.obs, &s.state_enc)).collect();
        let input = NormStats::from_rows(OBS_DIM + STATE_DIM, inputs.iter().map(|r| r.as_slice()))?;
        let actions = sorted.iter().flat_map(|s| {
            s.action_chunk
                .iter()
                .zip(&s.mask)
                .filter(|(_, m)| **m)
                .map(|(a, _)| a.as_slice())
        });
        let action = NormStats::from_rows(STATE_DIM, actions)?;
        Ok(PolicyStats { input, action })
    }

    pub fn validate(&self) -> Result<()> {
        self.input.validate()?;
        self.action.validate()?;
        if self.input.dim() != OBS_DIM + STATE_DIM || self.action.dim() != STATE_DIM {
            return Err(Error::Dimension {
                expected: OBS_DIM + STATE_DIM,
                got: self.input.dim(),
            });
        }
        Ok(())
    }

    pub fn normalize_input(&self, obs: &TaskObservation, state_enc: &JointVector) -> Result<Vec<f64>> {
        self.input.normalize(&input_row(obs, state_enc))
    }

    pub fn normalize_chunk(&self, chunk: &[JointVector]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(chunk.len() * STATE_DIM);
        for a in chunk {
            out.extend(self.action.normalize(a.as_slice())?);
        }
        Ok(out)
    }

    pub fn denormalize_chunk(&self, flat: &[f64]) -> Result<Vec<JointVector>> {
        if flat.len() % STATE_DIM != 0 {
            return Err(Error::Dimension {
                expected: STATE_DIM,
                got: flat.len(),
            });
        }
        flat.chunks_exact(STATE_DIM)
            .map(|row| JointVector::try_from(self.action.denormalize(row)?.as_slice()))
            .collect()
    }
}

fn canonical_order(samples: &[ChunkSample]) -> Vec<&ChunkSample> {
    let mut sorted: Vec<&ChunkSample> = samples.iter().collect();
    sorted.sort_by_key(|s| (s.episode_id, s.t));
    sorted
}

/// Normalized inputs, targets and masks in canonical `(episode, t)` order.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub masks: Vec<Vec<bool>>,
}

impl TrainingSet {
    pub fn new(samples: &[ChunkSample], stats: &PolicyStats) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut set = TrainingSet {
            inputs: Vec::with_capacity(samples.len()),
            targets: Vec::with_capacity(samples.len()),
            masks: Vec::with_capacity(samples.len()),
        };
        for s in canonical_order(samples) {
            set.inputs.push(stats.normalize_input(&s.obs, &s.state_enc)?);
            set.targets.push(stats.normalize_chunk(&s.action_chunk)?);
            set.masks.push(s.mask.clone());
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: usize,
    pub lr: f64,
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub params: Mlp,
    pub curve: Vec<CurvePoint>,
}

/// Adaptive-moment optimizer constants. `beta1 = 0` disables momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.0,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Everything the training loop needs besides data and architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub schedule: LrSchedule,
    pub optimizer: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            steps: 20_000,
            batch_size: 64,
            seed: 0,
            schedule: LrSchedule::default(),
            optimizer: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        let o = &self.optimizer;
        if !(0.0..1.0).contains(&o.beta1) || !(0.0..1.0).contains(&o.beta2) || !(o.eps > 0.0) {
            return Err(Error::Config("need 0 <= beta < 1 and eps > 0".into()));
        }
        Ok(())
    }
}

struct Adam {
    cfg: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(cfg: AdamConfig, n: usize) -> Self {
        Adam {
            cfg,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn update(&mut self, params: &mut Mlp, grad: &Mlp, lr: f64) {
        let AdamConfig { beta1, beta2, eps } = self.cfg;
        self.t += 1;
        let c1 = 1.0 - beta1.powi(self.t);
        let c2 = 1.0 - beta2.powi(self.t);
        for (((p, g), m), v) in params
            .params_mut()
            .zip(grad.params())
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        }
    }
}

/// Mean loss and mean gradient over the samples at `indices`.
pub fn batch_gradient(params: &Mlp, set: &TrainingSet, indices: &[usize], exec: Execution) -> Result<(f64, Mlp)> {
    let shards: Vec<&[usize]> = indices.chunks(SHARD).collect();
    let partial = exec.map(&shards, |shard| -> Result<(f64, Mlp)> {
        let mut grad = params.zeros_like();
        let mut loss = 0.0;
        for &i in *shard {
            loss += params.backward_into(&set.inputs[i], &set.targets[i], &set.masks[i], &mut grad)?;
        }
        Ok((loss, grad))
    });
    let mut total = params.zeros_like();
    let mut loss = 0.0;
    for p in partial {
        let (l, g) = p?;
        loss += l;
        total.add_scaled(&g, 1.0);
    }
    let scale = 1.0 / indices.len() as f64;
    total.params_mut().for_each(|g| *g *= scale);
    Ok((loss * scale, total))
}

/// Minibatch training. Batch composition depends only on `train.seed`, the
/// step index and the dataset size.
pub fn train(set: &TrainingSet, config: &PolicyConfig, train: &TrainConfig, exec: Execution) -> Result<TrainOutput> {
    config.validate()?;
    train.validate()?;
    if set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut params = config.init_params();
    if set.inputs[0].len() != params.input_dim() || set.targets[0].len() != params.output_dim() {
        return Err(Error::Dimension {
            expected: params.output_dim(),
            got: set.targets[0].len(),
        });
    }
    let mut adam = Adam::new(train.optimizer, params.num_params());
    let mut rng = ChaCha8Rng::seed_from_u64(train.seed);
    let mut curve = Vec::with_capacity(train.steps);
    let mut indices = vec![0usize; train.batch_size];
    for step in 0..train.steps {
        indices.iter_mut().for_each(|i| *i = rng.random_range(0..set.len()));
        let (loss, grad) = batch_gradient(&params, set, &indices, exec)?;
        let lr = train.schedule.lr_at(step);
        if !loss.is_finite() {
            return Err(Error::Diverged { step });
        }
        adam.update(&mut params, &grad, lr);
        if !params.is_finite() {
            return Err(Error::Diverged { step });
        }
        curve.push(CurvePoint { step, lr, loss });
    }
    Ok(TrainOutput { params, curve })
}

/// Predicted chunk in encoded-action space (still relative for eps-eps and
/// zero-chunk; decoding to joint commands is the representation's job).
pub fn predict_chunk(
    params: &Mlp,
    stats: &PolicyStats,
    obs: &TaskObservation,
    state_enc: &JointVector,
) -> Result<Vec<JointVector>> {
    let input = stats.normalize_input(obs, state_enc)?;
    let out = params.forward(&input)?;
    stats.denormalize_chunk(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(id: u64, t: usize, v: f64) -> ChunkSample {
        ChunkSample {
            episode_id: id,
            t,
            obs: TaskObservation {
                gripper_to_bottle: [v, -v],
                bottle_tilt: 0.5 * v,
                ..Default::default()
            },
            state_enc: JointVector([v, 2.0 * v, 0.1, 0.0, 1.0]),
            action_chunk: vec![JointVector([v; 5]), JointVector([-v; 5])],
            mask: vec![true, t % 2 == 0],
            origin: JointVector::zeros(),
        }
    }

    fn small_config() -> PolicyConfig {
        PolicyConfig {
            hidden_sizes: vec![16],
            chunk_len: 2,
            exec_steps: 1,
            seed: 3,
        }
    }

    #[test]
    fn config_validation() {
        assert!(PolicyConfig::default().validate().is_ok());
        let bad = PolicyConfig {
            exec_steps: 17,
            ..PolicyConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn stats_shapes_and_masking() {
        let samples = vec![sample(0, 0, 1.0), sample(0, 1, 3.0)];
        let stats = PolicyStats::fit(&samples).unwrap();
        stats.validate().unwrap();
        // Unmasked actions: +1, -1, +3 (the t = 1 tail is masked).
        assert!((stats.action.mean[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn same_seed_same_curve_and_order_independent() {
        let samples: Vec<_> = (0..20).map(|i| sample(i / 5, (i % 5) as usize, i as f64 * 0.1)).collect();
        let stats = PolicyStats::fit(&samples).unwrap();
        let set = TrainingSet::new(&samples, &stats).unwrap();
        let cfg = small_config();
        let tc = TrainConfig {
            steps: 40,
            batch_size: 4,
            seed: 9,
            schedule: LrSchedule {
                warmup_steps: 5,
                decay_steps: 50,
                peak: 1e-2,
                floor: 1e-3,
            },
            optimizer: AdamConfig::default(),
        };
        let a = train(&set, &cfg, &tc, Execution::Parallel).unwrap();
        let b = train(&set, &cfg, &tc, Execution::Sequential).unwrap();
        assert_eq!(a.curve, b.curve);
        assert_eq!(a.params, b.params);

        let mut shuffled = samples.clone();
        shuffled.reverse();
        shuffled.swap(3, 11);
        let stats2 = PolicyStats::fit(&shuffled).unwrap();
        assert_eq!(stats, stats2);
        let set2 = TrainingSet::new(&shuffled, &stats2).unwrap();
        let c = train(&set2, &cfg, &tc, Execution::Parallel).unwrap();
        assert_eq!(a.curve, c.curve);
    }

    #[test]
    fn predict_matches_denormalized_forward() {
        let samples = vec![sample(0, 0, 1.0), sample(0, 1, 3.0), sample(1, 0, -2.0)];
        let stats = PolicyStats::fit(&samples).unwrap();
        let cfg = small_config();
        let params = cfg.init_params();
        let s = &samples[1];
        let chunk = predict_chunk(&params, &stats, &s.obs, &s.state_enc).unwrap();
        assert_eq!(chunk.len(), cfg.chunk_len);
        let raw = params.forward(&stats.normalize_input(&s.obs, &s.state_enc).unwrap()).unwrap();
        for (k, a) in chunk.iter().enumerate() {
            for d in 0..STATE_DIM {
                let expect = raw[k * STATE_DIM + d] * stats.action.std[d] + stats.action.mean[d];
                assert_eq!(a[d], expect);
            }
        }
        assert_eq!(chunk, predict_chunk(&params, &stats, &s.obs, &s.state_enc).unwrap());
    }

    #[test]
    fn empty_dataset_rejected() {
        let samples = vec![sample(0, 0, 1.0)];
        let stats = PolicyStats::fit(&samples).unwrap();
        assert!(matches!(TrainingSet::new(&[], &stats), Err(Error::EmptyDataset)));
    }
}
