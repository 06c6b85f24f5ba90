//! Broadcast and receive indices from dynamic communicability.
//!
//! The communicability matrix is the ordered product of daily resolvents
//! `(I - alpha A_t)^-1`. It is dense even when every snapshot is sparse, so it
//! is never formed: row sums come from a right-to-left recurrence of
//! truncated Neumann series applied to the all-ones vector, column sums from
//! the mirrored left-to-right recurrence on transposed snapshots.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EvolvingMentionNetwork, UserId};
use crate::sparse::SparseMatrix;

pub const DEFAULT_TRUNCATION: usize = 10;

/// The penalising factors used for the broadcast-score study.
pub const ALPHA_GRID: [f64; 6] = [0.15, 0.3, 0.45, 0.6, 0.75, 0.9];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunicabilityConfig {
    pub alpha: f64,
    /// Number of series terms kept beyond the identity, per day.
    pub truncation_order: usize,
}

impl Default for CommunicabilityConfig {
    fn default() -> Self {
        Self {
            alpha: 0.75,
            truncation_order: DEFAULT_TRUNCATION,
        }
    }
}

impl CommunicabilityConfig {
    pub fn new(alpha: f64, truncation_order: usize) -> Result<Self> {
        let cfg = Self {
            alpha,
            truncation_order,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `alpha` must lie in `[0, 1)`; zero is accepted as the degenerate limit
    /// where every score is 1.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::invalid(format!(
                "alpha must lie in [0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Broadcast,
    Receive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub kind: ScoreKind,
    pub values: Vec<f64>,
}

/// `sum_{i=0..k} alpha^i A^i v`, using `k` sparse matrix-vector products.
pub fn resolvent_apply(a: &SparseMatrix, alpha: f64, v: &[f64], k: usize) -> Result<Vec<f64>> {
    if v.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: v.len(),
        });
    }
    let mut acc = v.to_vec();
    if k == 0 || a.nnz() == 0 || alpha == 0.0 {
        return Ok(acc);
    }
    let mut term = v.to_vec();
    let mut next = vec![0.0; v.len()];
    for _ in 0..k {
        a.mul_vec_into(&term, &mut next)?;
        let mut any = false;
        for ((t, &x), s) in term.iter_mut().zip(&next).zip(acc.iter_mut()) {
            *t = alpha * x;
            *s += *t;
            any |= *t != 0.0;
        }
        if !any {
            break;
        }
    }
    Ok(acc)
}

/// Row sums of the communicability matrix.
pub fn broadcast_scores(
    net: &EvolvingMentionNetwork,
    cfg: &CommunicabilityConfig,
) -> Result<ScoreVector> {
    cfg.validate()?;
    let mut v = vec![1.0; net.len()];
    for snap in net.snapshots().iter().rev() {
        v = resolvent_apply(&snap.adjacency, cfg.alpha, &v, cfg.truncation_order)?;
    }
    Ok(ScoreVector {
        kind: ScoreKind::Broadcast,
        values: v,
    })
}

/// Column sums of the communicability matrix.
pub fn receive_scores(
    net: &EvolvingMentionNetwork,
    cfg: &CommunicabilityConfig,
) -> Result<ScoreVector> {
    cfg.validate()?;
    let mut v = vec![1.0; net.len()];
    for snap in net.snapshots() {
        let at = snap.adjacency.transpose();
        v = resolvent_apply(&at, cfg.alpha, &v, cfg.truncation_order)?;
    }
    Ok(ScoreVector {
        kind: ScoreKind::Receive,
        values: v,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaScores {
    pub alpha: f64,
    pub broadcast: ScoreVector,
    pub receive: ScoreVector,
}

/// Broadcast and receive scores for several penalising factors. Each factor
/// is an independent job.
pub fn scores_for_alphas(
    net: &EvolvingMentionNetwork,
    alphas: &[f64],
    truncation_order: usize,
) -> Result<Vec<AlphaScores>> {
    alphas
        .par_iter()
        .map(|&alpha| {
            let cfg = CommunicabilityConfig::new(alpha, truncation_order)?;
            Ok(AlphaScores {
                alpha,
                broadcast: broadcast_scores(net, &cfg)?,
                receive: receive_scores(net, &cfg)?,
            })
        })
        .collect()
}

/// Eligible users sorted by descending score, ties by ascending user id.
pub fn rank_by_score(
    users: &[UserId],
    scores: &ScoreVector,
    eligible: &BTreeSet<UserId>,
) -> Result<Vec<UserId>> {
    if users.len() != scores.values.len() {
        return Err(Error::DimensionMismatch {
            expected: users.len(),
            found: scores.values.len(),
        });
    }
    let known: BTreeSet<&UserId> = users.iter().collect();
    if let Some(u) = eligible.iter().find(|u| !known.contains(u)) {
        return Err(Error::UnknownUser(u.0.clone()));
    }
    let mut ranked: Vec<(f64, &UserId)> = users
        .iter()
        .zip(&scores.values)
        .filter(|(u, _)| eligible.contains(*u))
        .map(|(u, &s)| (s, u))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    Ok(ranked.into_iter().map(|(_, u)| u.clone()).collect())
}
