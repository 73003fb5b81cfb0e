//! Contrastive ranking loss over ordered candidate pairs.
//!
//! Pairs are rank positions in a LaSE-ranked candidate list: within each
//! pair the higher-ranked position is the positive. The loss is the hinge
//! `sum over pairs of max(0, margin - score[pos] + score[neg])`, convex
//! and piecewise-linear in the scores, with the margin optionally scaled
//! by rank distance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContrastiveError {
    #[error("pair index {index} out of range for {len} scores")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid pair: {0}")]
    InvalidPair(String),
}

/// One ordered (positive, negative, margin) pair over rank positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub positive_index: usize,
    pub negative_index: usize,
    pub margin: f64,
}

impl PairSpec {
    pub fn new(
        positive_index: usize,
        negative_index: usize,
        margin: f64,
    ) -> Result<Self, ContrastiveError> {
        if positive_index == negative_index {
            return Err(ContrastiveError::InvalidPair(format!(
                "positive and negative index are both {positive_index}"
            )));
        }
        if margin < 0.0 || margin.is_nan() {
            return Err(ContrastiveError::InvalidPair(format!(
                "margin {margin} is not a nonnegative number"
            )));
        }
        Ok(PairSpec {
            positive_index,
            negative_index,
            margin,
        })
    }
}

/// Margin settings for pair construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub base_margin: f64,
    /// Scale each pair's margin by its rank distance `j - i`. Off gives
    /// the fixed-margin form.
    pub rank_scaled: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            base_margin: 0.01,
            rank_scaled: true,
        }
    }
}

/// Scores and pairs for one ranked candidate list. `scores[k]` belongs to
/// the candidate at rank position `k` (0 = best).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastivePairBatch {
    pub scores: Vec<f64>,
    pub pairs: Vec<PairSpec>,
}

impl ContrastivePairBatch {
    pub fn new(scores: Vec<f64>, pairs: Vec<PairSpec>) -> Result<Self, ContrastiveError> {
        let len = scores.len();
        for pair in &pairs {
            for index in [pair.positive_index, pair.negative_index] {
                if index >= len {
                    return Err(ContrastiveError::IndexOutOfRange { index, len });
                }
            }
        }
        Ok(ContrastivePairBatch { scores, pairs })
    }

    /// Batch over `scores` with the all-pairs construction of
    /// [`build_pairs`].
    pub fn all_pairs(scores: Vec<f64>, config: &LossConfig) -> Self {
        let pairs = build_pairs(scores.len(), config);
        ContrastivePairBatch { scores, pairs }
    }
}

/// All ordered pairs `(i, j)` with `i < j` over `n` rank positions:
/// `i` is the positive, `j` the negative, margin `base * (j - i)` when
/// rank-scaled else `base`. Yields `n(n-1)/2` pairs; `n <= 1` yields none.
pub fn build_pairs(n: usize, config: &LossConfig) -> Vec<PairSpec> {
    let mut pairs = Vec::with_capacity(n.saturating_mul(n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let margin = if config.rank_scaled {
                config.base_margin * (j - i) as f64
            } else {
                config.base_margin
            };
            pairs.push(PairSpec {
                positive_index: i,
                negative_index: j,
                margin,
            });
        }
    }
    pairs
}

fn check_index(index: usize, len: usize) -> Result<(), ContrastiveError> {
    if index >= len {
        return Err(ContrastiveError::IndexOutOfRange { index, len });
    }
    Ok(())
}

/// Hinge ranking loss: `sum max(0, margin - scores[pos] + scores[neg])`.
pub fn ranking_loss(batch: &ContrastivePairBatch) -> Result<f64, ContrastiveError> {
    let len = batch.scores.len();
    let mut total = 0.0;
    for pair in &batch.pairs {
        check_index(pair.positive_index, len)?;
        check_index(pair.negative_index, len)?;
        let arg =
            pair.margin - batch.scores[pair.positive_index] + batch.scores[pair.negative_index];
        if arg > 0.0 {
            total += arg;
        }
    }
    Ok(total)
}

/// Subgradient of [`ranking_loss`] with respect to the scores: each
/// active pair (hinge argument > 0) contributes -1 at its positive index
/// and +1 at its negative index; pairs exactly at the hinge contribute 0.
pub fn loss_subgradient(batch: &ContrastivePairBatch) -> Result<Vec<f64>, ContrastiveError> {
    let len = batch.scores.len();
    let mut grad = vec![0.0; len];
    for pair in &batch.pairs {
        check_index(pair.positive_index, len)?;
        check_index(pair.negative_index, len)?;
        let arg =
            pair.margin - batch.scores[pair.positive_index] + batch.scores[pair.negative_index];
        if arg > 0.0 {
            grad[pair.positive_index] -= 1.0;
            grad[pair.negative_index] += 1.0;
        }
    }
    Ok(grad)
}
