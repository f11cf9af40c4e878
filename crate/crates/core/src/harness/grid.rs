use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, HaltPolicy};
use super::dataset::uniform;
use super::derive_seed;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::policy::{Checkpoint, ChunkedController};
use crate::railsim::{run_episode, score, Controller, HaltReason, StageFlags, StartCondition, WorldConfig};

/// Evaluation start positions: shelf levels crossed with carriage X values.
/// In-distribution cells use the training levels and X range; out-of-
/// distribution cells use unseen levels in another cabinet further along
/// the rail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub id_z_indices: Vec<usize>,
    pub ood_z_indices: Vec<usize>,
    pub x_values: Vec<f64>,
    pub repeats_per_cell: usize,
    pub ood_x_offset: f64,
    pub start_height: [f64; 2],
    pub bottle_dx: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        let (lo, hi, n) = (1.12, 1.78, 36);
        GridSpec {
            id_z_indices: vec![1, 2, 3, 4],
            ood_z_indices: vec![0, 5],
            x_values: (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
            repeats_per_cell: 1,
            ood_x_offset: 0.9,
            start_height: [0.115, 0.125],
            bottle_dx: 0.008,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Quick,
    Full,
}

impl std::str::FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(GridKind::Quick),
            "full" => Ok(GridKind::Full),
            other => Err(Error::Config(format!("unknown grid {other:?} (expected quick or full)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub z_index: usize,
    pub x: f64,
    pub ood: bool,
}

impl GridSpec {
    /// Every `stride`-th X value, starting with the first.
    pub fn subsampled(&self, stride: usize) -> Self {
        GridSpec {
            x_values: self.x_values.iter().copied().step_by(stride.max(1)).collect(),
            ..self.clone()
        }
    }

    pub fn select(&self, kind: GridKind, quick_stride: usize) -> Self {
        match kind {
            GridKind::Quick => self.subsampled(quick_stride),
            GridKind::Full => self.clone(),
        }
    }

    pub fn validate(&self, world: &WorldConfig) -> Result<()> {
        let levels = world.shelf_z_levels.len();
        if self.id_z_indices.iter().any(|z| self.ood_z_indices.contains(z)) {
            return Err(Error::Config("ID and OOD shelf levels overlap".into()));
        }
        if self.id_z_indices.iter().chain(&self.ood_z_indices).any(|&z| z >= levels) {
            return Err(Error::Config(format!("grid shelf index out of range ({levels} levels)")));
        }
        if self.repeats_per_cell == 0 {
            return Err(Error::Config("repeats_per_cell must be at least 1".into()));
        }
        for cell in self.cells() {
            if !(world.shelf_x_extent[0]..=world.shelf_x_extent[1]).contains(&cell.x)
                || !world.rail_limits.contains([cell.x, world.shelf_z(cell.z_index) + self.start_height[1]])
            {
                return Err(Error::OutOfLimits {
                    x: cell.x,
                    z: world.shelf_z(cell.z_index),
                });
            }
        }
        Ok(())
    }

    /// ID cells first, then OOD, each level-major.
    pub fn cells(&self) -> Vec<GridCell> {
        let id = self.id_z_indices.iter().flat_map(|&z_index| {
            self.x_values.iter().map(move |&x| GridCell {
                z_index,
                x,
                ood: false,
            })
        });
        let ood = self.ood_z_indices.iter().flat_map(|&z_index| {
            self.x_values.iter().map(move |&x| GridCell {
                z_index,
                x: x + self.ood_x_offset,
                ood: true,
            })
        });
        id.chain(ood).collect()
    }

    /// Start of `cell` for one repeat under one seed. Every strategy sees the
    /// same starts for the same seed.
    pub fn start(&self, world: &WorldConfig, cell_index: usize, repeat: usize, seed: u64) -> StartCondition {
        let cell = self.cells()[cell_index];
        self.start_for(world, &cell, cell_index, repeat, seed)
    }

    fn start_for(&self, world: &WorldConfig, cell: &GridCell, cell_index: usize, repeat: usize, seed: u64) -> StartCondition {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[cell_index as u64, repeat as u64]));
        let h = uniform(&mut rng, self.start_height);
        let dx = uniform(&mut rng, [-self.bottle_dx, self.bottle_dx]);
        StartCondition {
            rails: [cell.x, world.shelf_z(cell.z_index) + h],
            shelf_index: cell.z_index,
            bottle_x: cell.x + dx,
            seed: rand::Rng::random(&mut rng),
        }
    }
}

/// One evaluation episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub strategy: String,
    pub z_index: usize,
    pub x: f64,
    pub ood: bool,
    pub seed: u64,
    pub repeat: usize,
    pub score: u8,
    pub flags: StageFlags,
    pub halt: Option<HaltReason>,
    pub steps_used: usize,
}

/// Roll out a fresh controller from `make` on every (seed, cell, repeat).
/// Records come back in seed, cell, repeat order whatever the execution mode.
pub fn evaluate_grid<C, F>(
    label: &str,
    make: F,
    grid: &GridSpec,
    cfg: &ExperimentConfig,
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<EvalRecord>>
where
    C: Controller,
    F: Fn() -> C + Sync,
{
    let world = cfg.world(cfg.eval.env);
    grid.validate(world)?;
    let cells = grid.cells();
    let jobs: Vec<(u64, usize, usize)> = seeds
        .iter()
        .flat_map(|&seed| {
            (0..cells.len()).flat_map(move |c| (0..grid.repeats_per_cell).map(move |r| (seed, c, r)))
        })
        .collect();
    exec.map(&jobs, |&(seed, c, repeat)| {
        let cell = &cells[c];
        let start = grid.start_for(world, cell, c, repeat, seed);
        let mut controller = make();
        let rollout = run_episode(world, &start, c as u64, &mut controller, cfg.eval.max_steps)?;
        let mut flags = rollout.flags;
        if cfg.eval.halt_policy == HaltPolicy::Zero && rollout.halt == Some(HaltReason::SafetyViolation) {
            flags = StageFlags::default();
        }
        Ok(EvalRecord {
            strategy: label.to_string(),
            z_index: cell.z_index,
            x: cell.x,
            ood: cell.ood,
            seed,
            repeat,
            score: score(&flags),
            flags,
            halt: rollout.halt,
            steps_used: rollout.steps_used(),
        })
    })
    .into_iter()
    .collect()
}

/// Evaluate a trained checkpoint on the grid, after checking that no
/// evaluation start repeats a training start and that OOD cells really lie
/// outside the training levels and X range.
pub fn run_grid(
    ckpt: &Checkpoint,
    grid: &GridSpec,
    cfg: &ExperimentConfig,
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<EvalRecord>> {
    ckpt.validate()?;
    check_disjoint(ckpt, grid, cfg, seeds)?;
    let label = ckpt.strategy.kind.token();
    evaluate_grid(label, || ChunkedController::new(ckpt), grid, cfg, seeds, exec)
}

fn check_disjoint(ckpt: &Checkpoint, grid: &GridSpec, cfg: &ExperimentConfig, seeds: &[u64]) -> Result<()> {
    const EPS: f64 = 1e-9;
    let world = cfg.world(cfg.eval.env);
    let train = &ckpt.meta.train_starts;
    let x_lo = train.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min);
    let x_hi = train.iter().map(|s| s[0]).fold(f64::NEG_INFINITY, f64::max);
    for (c, cell) in grid.cells().iter().enumerate() {
        if cell.ood {
            let level = world.shelf_z(cell.z_index);
            if ckpt.meta.train_levels.iter().any(|l| (l - level).abs() < EPS) {
                return Err(Error::Invariant(format!("OOD level {level} appears in training data")));
            }
            if (x_lo - EPS..=x_hi + EPS).contains(&cell.x) {
                return Err(Error::Invariant(format!("OOD x {} lies inside the training range", cell.x)));
            }
        }
        for &seed in seeds {
            for r in 0..grid.repeats_per_cell {
                let s = grid.start_for(world, cell, c, r, seed).rails;
                if train.iter().any(|t| (t[0] - s[0]).abs() < EPS && (t[1] - s[1]).abs() < EPS) {
                    return Err(Error::Invariant(format!("evaluation start {s:?} repeats a training start")));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = GridSpec::default();
        assert_eq!(g.x_values.len(), 36);
        assert_eq!(g.cells().len(), 6 * 36);
        let q = g.subsampled(4);
        assert_eq!(q.x_values.len(), 9);
        assert_eq!(q.cells().iter().filter(|c| !c.ood).count(), 36);
        g.validate(&WorldConfig::env_b()).unwrap();
    }

    #[test]
    fn overlapping_levels_rejected() {
        let g = GridSpec {
            ood_z_indices: vec![1, 5],
            ..GridSpec::default()
        };
        assert!(g.validate(&WorldConfig::env_b()).is_err());
    }

    #[test]
    fn starts_are_seeded() {
        let g = GridSpec::default();
        let w = WorldConfig::env_b();
        assert_eq!(g.start(&w, 3, 0, 7), g.start(&w, 3, 0, 7));
        assert_ne!(g.start(&w, 3, 0, 7), g.start(&w, 3, 0, 8));
    }
}
