//! Sentiment and influence analysis for mention networks.
//!
//! Covers ingesting and filtering mention data, dynamic communicability
//! broadcast/receive scores, per-user sentiment attributes with
//! randomization tests, community detection and tracking, and an agent-based
//! model of sentiment contagion with grid-search calibration.

pub mod abm;
pub mod calibrate;
pub mod communicability;
pub mod community;
pub mod error;
pub mod ingest;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod sentiment;
pub mod sparse;

pub use error::{Error, Result};
pub use model::{
    DateRange, EvolvingMentionNetwork, ScaleKind, Scores, SentimentScale, Snapshot, TweetRecord,
    UserId, WeightedInteractionGraph,
};
