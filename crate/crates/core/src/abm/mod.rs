//! Agent-based model of sentiment contagion on a static undirected graph.
//!
//! Agents act synchronously: every agent decides what to send from the state
//! left by the previous step, then every agent updates its mood from what it
//! received. Each agent draws from its own substream per step, so a run is a
//! pure function of the model and the seed.

mod agent;
mod estimate;
mod simulate;
mod summary;
pub mod synthetic;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ScaleKind, SentimentScale, UserId, WeightedInteractionGraph};

pub use agent::{agent_act, agent_evolve, Emission};
pub use estimate::{build_model, estimate_opportunities, OpportunityCounts, Tally};
pub use simulate::{log_to_tweets, simulate, LogEntry, MessageLog};
pub(crate) use summary::mean_std;
pub use summary::{summarize, summarize_history, MomentSummary};

/// The six global parameters shared by all agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalParams {
    pub iterations_per_day: u32,
    pub mean_burst_size: f64,
    pub contagion_factor: f64,
    pub reset_probability: f64,
    pub sentiment_noise: f64,
    /// Minimum number of messages exchanged for two users to become
    /// neighbours. Only used when building a model from history.
    pub neighbour_threshold: u64,
}

impl Default for GlobalParams {
    fn default() -> Self {
        Self {
            iterations_per_day: 48,
            mean_burst_size: 2.1,
            contagion_factor: 0.2,
            reset_probability: 0.03,
            sentiment_noise: 1.5,
            neighbour_threshold: 1,
        }
    }
}

impl GlobalParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(m.to_string()));
        if self.iterations_per_day == 0 {
            return bad("iterations_per_day must be >= 1");
        }
        if !(self.mean_burst_size >= 1.0 && self.mean_burst_size.is_finite()) {
            return bad("mean_burst_size must be >= 1");
        }
        if !(self.contagion_factor >= 0.0 && self.contagion_factor.is_finite()) {
            return bad("contagion_factor must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.reset_probability) {
            return bad("reset_probability must lie in [0, 1]");
        }
        if !(self.sentiment_noise >= 0.0 && self.sentiment_noise.is_finite()) {
            return bad("sentiment_noise must be >= 0");
        }
        if self.neighbour_threshold == 0 {
            return bad("neighbour_threshold must be >= 1");
        }
        Ok(())
    }
}

/// Constant per-agent characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub p_init: f64,
    pub p_reply: f64,
    pub p_prop: f64,
    pub baseline_sentiment: f64,
    pub neutral_sentiment: f64,
}

impl AgentProfile {
    fn validate(&self, scale: &SentimentScale) -> Result<()> {
        for (name, p) in [
            ("p_init", self.p_init),
            ("p_reply", self.p_reply),
            ("p_prop", self.p_prop),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} outside [0, 1]")));
            }
        }
        for (name, s) in [
            ("baseline_sentiment", self.baseline_sentiment),
            ("neutral_sentiment", self.neutral_sentiment),
        ] {
            if !(s >= scale.min && s <= scale.max) {
                return Err(Error::invalid(format!(
                    "{name} = {s} outside the {} range",
                    scale.kind
                )));
            }
        }
        Ok(())
    }
}

/// Mutable per-agent state.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    /// Unclamped; only emitted messages are capped to the scale.
    pub current_sentiment: f64,
    /// Neighbours that messaged this agent in the previous step, sorted.
    pub recent_senders: Vec<usize>,
}

impl AgentState {
    pub fn initial(profile: &AgentProfile) -> Self {
        Self {
            current_sentiment: profile.baseline_sentiment,
            recent_senders: Vec::new(),
        }
    }
}

/// How sentiment noise is applied within a burst.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentMode {
    /// One draw per burst, shared by all its messages.
    #[default]
    PerBurst,
    /// An independent draw per message; each message is logged on its own.
    PerMessage,
}

/// A community ready to simulate: graph, profiles and global parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct Model {
    pub users: Vec<UserId>,
    /// Sorted neighbour lists.
    pub neighbours: Vec<Vec<usize>>,
    pub profiles: Vec<AgentProfile>,
    pub globals: GlobalParams,
    pub scale: ScaleKind,
    pub sentiment_mode: SentimentMode,
    /// Agents whose baseline fell back to the community neutral level
    /// because they sent nothing in the history.
    pub baseline_fallback: Vec<bool>,
}

impl Model {
    /// Builds a model on the edges of `graph`; weights are ignored.
    pub fn from_graph(
        graph: &WeightedInteractionGraph,
        profiles: Vec<AgentProfile>,
        globals: GlobalParams,
        scale: ScaleKind,
    ) -> Result<Self> {
        let neighbours = (0..graph.len())
            .map(|i| graph.neighbours(i).iter().map(|&(j, _)| j).collect())
            .collect();
        Self::new(graph.users().to_vec(), neighbours, profiles, globals, scale)
    }

    pub fn new(
        users: Vec<UserId>,
        mut neighbours: Vec<Vec<usize>>,
        profiles: Vec<AgentProfile>,
        globals: GlobalParams,
        scale: ScaleKind,
    ) -> Result<Self> {
        let n = users.len();
        if neighbours.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: neighbours.len(),
            });
        }
        if profiles.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: profiles.len(),
            });
        }
        globals.validate()?;
        let sc = SentimentScale::of(scale);
        for p in &profiles {
            p.validate(&sc)?;
        }
        for (i, list) in neighbours.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.iter().any(|&j| j >= n || j == i) {
                return Err(Error::invalid(format!(
                    "bad neighbour list for {}",
                    users[i]
                )));
            }
        }
        for (i, list) in neighbours.iter().enumerate() {
            for &j in list {
                if neighbours[j].binary_search(&i).is_err() {
                    return Err(Error::invalid(format!(
                        "neighbour lists not symmetric between {} and {}",
                        users[i], users[j]
                    )));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        if !users.iter().all(|u| seen.insert(u)) {
            return Err(Error::invalid("duplicate agent ids"));
        }
        Ok(Self {
            baseline_fallback: vec![false; n],
            users,
            neighbours,
            profiles,
            globals,
            scale,
            sentiment_mode: SentimentMode::PerBurst,
        })
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn sentiment_scale(&self) -> SentimentScale {
        SentimentScale::of(self.scale)
    }

    pub fn index_of(&self, u: &UserId) -> Option<usize> {
        self.users.iter().position(|x| x == u)
    }

    pub fn with_globals(mut self, globals: GlobalParams) -> Result<Self> {
        globals.validate()?;
        self.globals = globals;
        Ok(self)
    }

    pub fn with_sentiment_mode(mut self, mode: SentimentMode) -> Self {
        self.sentiment_mode = mode;
        self
    }

    pub fn edge_count(&self) -> usize {
        self.neighbours.iter().map(Vec::len).sum::<usize>() / 2
    }
}

#[derive(Serialize, Deserialize)]
struct AgentEntry {
    id: UserId,
    #[serde(flatten)]
    profile: AgentProfile,
    neighbours: Vec<UserId>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    baseline_fallback: bool,
}

/// On-disk layout of a model: agents carry their profile and neighbour ids.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    scale: ScaleKind,
    #[serde(default)]
    sentiment_mode: SentimentMode,
    globals: GlobalParams,
    agents: Vec<AgentEntry>,
}

impl From<Model> for ModelFile {
    fn from(m: Model) -> Self {
        let agents = (0..m.users.len())
            .map(|i| AgentEntry {
                id: m.users[i].clone(),
                profile: m.profiles[i],
                neighbours: m.neighbours[i]
                    .iter()
                    .map(|&j| m.users[j].clone())
                    .collect(),
                baseline_fallback: m.baseline_fallback[i],
            })
            .collect();
        Self {
            scale: m.scale,
            sentiment_mode: m.sentiment_mode,
            globals: m.globals,
            agents,
        }
    }
}

impl TryFrom<ModelFile> for Model {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        let index: HashMap<&UserId, usize> = f
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| (&a.id, i))
            .collect();
        let neighbours = f
            .agents
            .iter()
            .map(|a| {
                a.neighbours
                    .iter()
                    .map(|u| {
                        index
                            .get(u)
                            .copied()
                            .ok_or_else(|| Error::UnknownUser(u.0.clone()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut model = Model::new(
            f.agents.iter().map(|a| a.id.clone()).collect(),
            neighbours,
            f.agents.iter().map(|a| a.profile).collect(),
            f.globals,
            f.scale,
        )?;
        model.baseline_fallback = f.agents.iter().map(|a| a.baseline_fallback).collect();
        model.sentiment_mode = f.sentiment_mode;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(b: f64) -> AgentProfile {
        AgentProfile {
            p_init: 0.1,
            p_reply: 0.5,
            p_prop: 0.05,
            baseline_sentiment: b,
            neutral_sentiment: 0.0,
        }
    }

    #[test]
    fn model_json_round_trip() {
        let m = Model::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1], vec![0, 2], vec![1]],
            vec![profile(1.0), profile(-2.0), profile(0.5)],
            GlobalParams::default(),
            ScaleKind::Mc,
        )
        .unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: Model = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn asymmetric_neighbours_rejected() {
        let r = Model::new(
            vec!["a".into(), "b".into()],
            vec![vec![1], vec![]],
            vec![profile(0.0), profile(0.0)],
            GlobalParams::default(),
            ScaleKind::Mc,
        );
        assert!(r.is_err());
    }

    #[test]
    fn globals_validation() {
        let mut g = GlobalParams::default();
        assert!(g.validate().is_ok());
        g.mean_burst_size = 0.5;
        assert!(g.validate().is_err());
        g = GlobalParams {
            reset_probability: 1.5,
            ..Default::default()
        };
        assert!(g.validate().is_err());
    }
}
