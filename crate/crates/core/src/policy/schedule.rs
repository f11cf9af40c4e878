use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear warmup to `peak`, cosine decay to `floor` at `decay_steps`, then flat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub warmup_steps: usize,
    pub decay_steps: usize,
    pub peak: f64,
    pub floor: f64,
}

impl Default for LrSchedule {
    fn default() -> Self {
        LrSchedule {
            warmup_steps: 1000,
            decay_steps: 20_000,
            peak: 1.0e-4,
            floor: 1.0e-5,
        }
    }
}

impl LrSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.warmup_steps >= self.decay_steps {
            return Err(Error::Config("warmup must end before decay".into()));
        }
        if !(self.floor <= self.peak) || self.floor < 0.0 {
            return Err(Error::Config("need 0 <= floor <= peak".into()));
        }
        Ok(())
    }

    pub fn lr_at(&self, step: usize) -> f64 {
        self.lr(step as f64)
    }

    /// The schedule over continuous time.
    pub fn lr(&self, t: f64) -> f64 {
        let warmup = self.warmup_steps as f64;
        let decay = self.decay_steps as f64;
        if t < warmup {
            return self.peak * t / warmup;
        }
        if t >= decay {
            return self.floor;
        }
        let progress = (t - warmup) / (decay - warmup);
        self.peak - (self.peak - self.floor) * 0.5 * (1.0 - (PI * progress).cos())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let s = LrSchedule::default();
        assert_eq!(s.lr_at(0), 0.0);
        assert_eq!(s.lr_at(500), 5.0e-5);
        assert_eq!(s.lr_at(1000), 1.0e-4);
        assert_eq!(s.lr_at(20_000), 1.0e-5);
        assert_eq!(s.lr_at(1_000_000), 1.0e-5);
    }

    #[test]
    fn continuous_at_boundaries() {
        let s = LrSchedule::default();
        for edge in [1000.0, 20_000.0] {
            assert!((s.lr(edge - 1e-9) - s.lr(edge)).abs() <= 1e-12);
            assert!((s.lr(edge + 1e-9) - s.lr(edge)).abs() <= 1e-12);
        }
        let mid = s.lr_at(10_500);
        assert!((mid - 5.5e-5).abs() < 1e-12);
    }

    #[test]
    fn monotone_decay() {
        let s = LrSchedule::default();
        let mut prev = s.lr_at(1000);
        for step in (1001..20_000).step_by(97) {
            let lr = s.lr_at(step);
            assert!(lr <= prev);
            prev = lr;
        }
        assert!(LrSchedule {
            warmup_steps: 10,
            decay_steps: 10,
            ..LrSchedule::default()
        }
        .validate()
        .is_err());
    }
}
