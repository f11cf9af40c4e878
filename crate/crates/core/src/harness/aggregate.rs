use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::grid::EvalRecord;
use crate::error::{Error, Result};

/// Mean, population SD and success rate (score 4) of one split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub success: f64,
}

impl SplitStats {
    fn of(scores: &[u8]) -> Result<Option<Self>> {
        if scores.is_empty() {
            return Ok(None);
        }
        let n = scores.len() as f64;
        // Streaming pass.
        let (mut mean, mut m2) = (0.0, 0.0);
        for (i, &s) in scores.iter().enumerate() {
            let x = f64::from(s);
            let delta = x - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (x - mean);
        }
        let sd = (m2 / n).sqrt();
        // Independent recomputation from the score histogram.
        let mut counts = [0usize; 5];
        for &s in scores {
            counts[usize::from(s.min(4))] += 1;
        }
        let check_mean = counts.iter().enumerate().map(|(k, c)| (k * c) as f64).sum::<f64>() / n;
        let check_var = counts
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 * (k as f64 - check_mean).powi(2))
            .sum::<f64>()
            / n;
        if (mean - check_mean).abs() > 1e-12 || (sd - check_var.sqrt()).abs() > 1e-12 {
            return Err(Error::Invariant(format!(
                "aggregation mismatch: mean {mean} vs {check_mean}, sd {sd} vs {}",
                check_var.sqrt()
            )));
        }
        Ok(Some(SplitStats {
            n: scores.len(),
            mean,
            sd,
            success: counts[4] as f64 / n,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub strategy: String,
    pub id: Option<SplitStats>,
    pub ood: Option<SplitStats>,
    pub total: Option<SplitStats>,
}

/// One row per strategy, ordered by strategy name.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportTable {
    pub rows: Vec<StrategyRow>,
}

impl ReportTable {
    pub fn row(&self, strategy: &str) -> Option<&StrategyRow> {
        self.rows.iter().find(|r| r.strategy == strategy)
    }
}

/// A split with no episodes is `None`, never zero.
pub fn aggregate(records: &[EvalRecord]) -> Result<ReportTable> {
    let mut by_strategy: BTreeMap<&str, (Vec<u8>, Vec<u8>)> = BTreeMap::new();
    for r in records {
        let flag_sum = r.flags.as_array().iter().filter(|f| **f).count() as u8;
        if r.score != flag_sum || r.score > 4 {
            return Err(Error::Invariant(format!(
                "record score {} disagrees with its flags ({flag_sum})",
                r.score
            )));
        }
        let entry = by_strategy.entry(r.strategy.as_str()).or_default();
        if r.ood { &mut entry.1 } else { &mut entry.0 }.push(r.score);
    }
    let rows = by_strategy
        .into_iter()
        .map(|(strategy, (id, ood))| {
            let total: Vec<u8> = id.iter().chain(&ood).copied().collect();
            Ok(StrategyRow {
                strategy: strategy.to_string(),
                id: SplitStats::of(&id)?,
                ood: SplitStats::of(&ood)?,
                total: SplitStats::of(&total)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ReportTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::railsim::StageFlags;

    fn record(strategy: &str, score: u8, ood: bool) -> EvalRecord {
        let flags = StageFlags {
            grasped: score >= 1,
            uprighted: score >= 2,
            bottom_on_shelf: score >= 3,
            released_stable: score >= 4,
        };
        EvalRecord {
            strategy: strategy.into(),
            z_index: 1,
            x: 1.2,
            ood,
            seed: 0,
            repeat: 0,
            score,
            flags,
            halt: None,
            steps_used: 10,
        }
    }

    #[test]
    fn forced_arithmetic() {
        let t = aggregate(&[record("a", 4, false), record("a", 4, false)]).unwrap();
        let id = t.row("a").unwrap().id.unwrap();
        assert_eq!((id.mean, id.sd, id.success), (4.0, 0.0, 1.0));
        assert!(t.row("a").unwrap().ood.is_none());

        let t = aggregate(&[record("a", 0, false), record("a", 4, false)]).unwrap();
        let id = t.row("a").unwrap().id.unwrap();
        assert_eq!((id.mean, id.sd, id.success), (2.0, 2.0, 0.5));
    }

    #[test]
    fn inconsistent_score_rejected() {
        let mut r = record("a", 3, false);
        r.score = 4;
        assert!(aggregate(&[r]).is_err());
    }

    #[test]
    fn empty_records_give_empty_table() {
        assert!(aggregate(&[]).unwrap().rows.is_empty());
    }
}
