//! Randomly generated communities for experiments and tests.

use rand::Rng;

use chrono::NaiveDate;

use super::{log_to_tweets, simulate, AgentProfile, GlobalParams, Model};
use crate::error::{Error, Result};
use crate::model::{ScaleKind, SentimentScale, TweetRecord, UserId};
use crate::rng::{name_key, substream};

/// Ranges the profiles of a random community are drawn from (uniformly).
#[derive(Debug, Clone, PartialEq)]
pub struct CommunitySpec {
    pub agents: usize,
    /// Probability of each possible edge inside a group.
    pub edge_probability: f64,
    /// Agents are split into this many contiguous, near-equal groups.
    pub groups: usize,
    /// Probability of each possible edge between groups.
    pub cross_edge_probability: f64,
    pub p_init: (f64, f64),
    pub p_reply: (f64, f64),
    pub p_prop: (f64, f64),
    /// Baselines as fractions of the scale's maximum.
    pub baseline: (f64, f64),
}

impl Default for CommunitySpec {
    fn default() -> Self {
        Self {
            agents: 28,
            edge_probability: 0.25,
            groups: 1,
            cross_edge_probability: 0.0,
            p_init: (0.002, 0.02),
            p_reply: (0.05, 0.4),
            p_prop: (0.0, 0.03),
            baseline: (-0.1, 0.2),
        }
    }
}

fn uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// A random community, optionally made of planted groups. Agent ids are `agent00`, `agent01`, ...; the neutral
/// level of every agent is the mean baseline.
pub fn random_model(
    spec: &CommunitySpec,
    globals: GlobalParams,
    scale: ScaleKind,
    seed: u64,
) -> Result<Model> {
    let n = spec.agents;
    let mut rng = substream(seed, &[name_key("random-community")]);
    if spec.groups == 0 {
        return Err(Error::invalid("a community needs at least one group"));
    }
    let group = |i: usize| i * spec.groups / n;
    let mut neighbours = vec![Vec::new(); n];
    for a in 0..n {
        for b in a + 1..n {
            let p = if group(a) == group(b) {
                spec.edge_probability
            } else {
                spec.cross_edge_probability
            };
            if rng.random_bool(p) {
                neighbours[a].push(b);
                neighbours[b].push(a);
            }
        }
    }
    let sc = SentimentScale::of(scale);
    let mut profiles: Vec<AgentProfile> = (0..n)
        .map(|_| AgentProfile {
            p_init: uniform(&mut rng, spec.p_init),
            p_reply: uniform(&mut rng, spec.p_reply),
            p_prop: uniform(&mut rng, spec.p_prop),
            baseline_sentiment: sc.clamp(uniform(&mut rng, spec.baseline) * sc.max),
            neutral_sentiment: 0.0,
        })
        .collect();
    let neutral = if n == 0 {
        0.0
    } else {
        profiles.iter().map(|p| p.baseline_sentiment).sum::<f64>() / n as f64
    };
    for p in &mut profiles {
        p.neutral_sentiment = neutral;
    }
    let users = (0..n).map(|i| UserId(format!("agent{i:02}"))).collect();
    Model::new(users, neighbours, profiles, globals, scale)
}

/// Tweets produced by simulating `model` for `days` days from `start`.
pub fn history(
    model: &Model,
    days: usize,
    start: NaiveDate,
    seed: u64,
) -> Result<Vec<TweetRecord>> {
    let log = simulate(model, days, seed)?;
    Ok(log_to_tweets(&log, start, model.scale))
}
