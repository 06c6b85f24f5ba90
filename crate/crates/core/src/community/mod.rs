//! Community detection, community statistics and tracking over time.

mod clique;
mod louvain;
mod metrics;
mod temporal;

use serde::{Deserialize, Serialize};

use crate::model::UserId;

pub use clique::{k_clique_communities, maximal_cliques};
pub use louvain::{louvain, modularity, LOUVAIN_MIN_GAIN};
pub use metrics::{community_stats, conductance, participation_bin, CommunityStats};
pub use temporal::{
    daily_sentiment_series, flag_sentiment_anomalies, pearson, user_loss_factor, DailySentiment,
    EnduranceRecord,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method", content = "k")]
pub enum SourceAlgorithm {
    Louvain,
    WeightedLouvain,
    KClique(usize),
}

/// A detected community; `members` is sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Community {
    pub id: usize,
    pub source_algorithm: SourceAlgorithm,
    pub members: Vec<UserId>,
}

impl Community {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member_set(&self) -> std::collections::BTreeSet<UserId> {
        self.members.iter().cloned().collect()
    }
}
