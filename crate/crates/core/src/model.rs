//! Shared domain types: sentiment scales, tweet records, date windows,
//! evolving mention networks and weighted interaction graphs.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, NaiveDate, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleKind {
    Mc,
    Ss,
    L,
}

impl FromStr for ScaleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mc" => Ok(ScaleKind::Mc),
            "ss" => Ok(ScaleKind::Ss),
            "l" => Ok(ScaleKind::L),
            other => Err(Error::invalid(format!("unknown sentiment scale '{other}'"))),
        }
    }
}

impl fmt::Display for ScaleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaleKind::Mc => "mc",
            ScaleKind::Ss => "ss",
            ScaleKind::L => "l",
        })
    }
}

/// One of the three sentiment scores attached to messages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScale {
    pub kind: ScaleKind,
    pub min: f64,
    pub max: f64,
    pub integer_valued: bool,
}

impl SentimentScale {
    pub const MC: SentimentScale = SentimentScale {
        kind: ScaleKind::Mc,
        min: -25.0,
        max: 25.0,
        integer_valued: true,
    };
    pub const SS: SentimentScale = SentimentScale {
        kind: ScaleKind::Ss,
        min: -4.0,
        max: 4.0,
        integer_valued: true,
    };
    pub const L: SentimentScale = SentimentScale {
        kind: ScaleKind::L,
        min: -100.0,
        max: 100.0,
        integer_valued: false,
    };

    pub fn of(kind: ScaleKind) -> Self {
        match kind {
            ScaleKind::Mc => Self::MC,
            ScaleKind::Ss => Self::SS,
            ScaleKind::L => Self::L,
        }
    }

    /// Caps `x` to the scale's range, rounding half away from zero on the
    /// integer scales. NaN maps to 0 (neutral).
    pub fn clamp(&self, x: f64) -> f64 {
        if x.is_nan() {
            return 0.0;
        }
        let capped = x.clamp(self.min, self.max);
        if self.integer_valued {
            capped.round()
        } else {
            capped
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x.is_finite()
            && x >= self.min
            && x <= self.max
            && (!self.integer_valued || x.fract() == 0.0)
    }
}

pub fn clamp_score(x: f64, scale: &SentimentScale) -> f64 {
    scale.clamp(x)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub String);

impl UserId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for UserId {
    fn from(s: &str) -> Self {
        UserId(s.to_owned())
    }
}

impl From<String> for UserId {
    fn from(s: String) -> Self {
        UserId(s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ss: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
}

impl Scores {
    pub fn get(&self, kind: ScaleKind) -> Option<f64> {
        match kind {
            ScaleKind::Mc => self.mc.map(f64::from),
            ScaleKind::Ss => self.ss.map(f64::from),
            ScaleKind::L => self.l,
        }
    }

    /// Stores a score already valid for the scale `kind`.
    pub fn set(&mut self, kind: ScaleKind, value: f64) {
        match kind {
            ScaleKind::Mc => self.mc = Some(value as i32),
            ScaleKind::Ss => self.ss = Some(value as i32),
            ScaleKind::L => self.l = Some(value),
        }
    }
}

/// A mention-bearing message. Absent scores stay absent; a score of 0 means
/// "neutral or not detected".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub timestamp: DateTime<Utc>,
    pub sender: UserId,
    #[serde(default)]
    pub mentions: Vec<UserId>,
    #[serde(flatten)]
    pub scores: Scores,
}

impl TweetRecord {
    /// Checks score ranges, truncates the timestamp to whole seconds and
    /// removes duplicate mentions (first occurrence wins).
    pub fn normalize(mut self) -> Result<Self> {
        for kind in [ScaleKind::Mc, ScaleKind::Ss, ScaleKind::L] {
            if let Some(v) = self.scores.get(kind) {
                let scale = SentimentScale::of(kind);
                if !scale.contains(v) {
                    return Err(Error::invalid(format!(
                        "{kind} score {v} outside [{}, {}]",
                        scale.min, scale.max
                    )));
                }
            }
        }
        self.timestamp = self.timestamp.with_nanosecond(0).unwrap_or(self.timestamp);
        let mut seen = std::collections::HashSet::with_capacity(self.mentions.len());
        self.mentions.retain(|m| seen.insert(m.clone()));
        Ok(self)
    }

    pub fn date(&self) -> NaiveDate {
        self.timestamp.date_naive()
    }

    pub fn score(&self, kind: ScaleKind) -> Option<f64> {
        self.scores.get(kind)
    }

    /// Mentions of users other than the sender.
    pub fn others(&self) -> impl Iterator<Item = &UserId> {
        self.mentions.iter().filter(move |m| **m != self.sender)
    }
}

/// An inclusive range of UTC calendar days, written `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if end < start {
            return Err(Error::invalid(format!("empty date range {start}..{end}")));
        }
        Ok(Self { start, end })
    }

    /// `days` consecutive days starting at `start`.
    pub fn starting(start: NaiveDate, days: usize) -> Result<Self> {
        if days == 0 {
            return Err(Error::invalid("date range must span at least one day"));
        }
        Self::new(start, start + Duration::days(days as i64 - 1))
    }

    pub fn len(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> {
        let start = self.start;
        (0..self.len()).map(move |i| start + Duration::days(i as i64))
    }

    pub fn contains_date(&self, d: NaiveDate) -> bool {
        d >= self.start && d <= self.end
    }

    pub fn contains(&self, ts: &DateTime<Utc>) -> bool {
        self.contains_date(ts.date_naive())
    }

    pub fn day_index(&self, d: NaiveDate) -> Option<usize> {
        self.contains_date(d)
            .then(|| (d - self.start).num_days() as usize)
    }

    pub fn overlaps(&self, other: &DateRange) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl fmt::Display for DateRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for DateRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| Error::invalid(format!("expected <start>..<end>, got '{s}'")))?;
        let parse = |x: &str| {
            NaiveDate::parse_from_str(x.trim(), "%Y-%m-%d")
                .map_err(|e| Error::invalid(format!("bad date '{x}': {e}")))
        };
        Self::new(parse(a)?, parse(b)?)
    }
}

impl TryFrom<String> for DateRange {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DateRange> for String {
    fn from(r: DateRange) -> Self {
        r.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub date: NaiveDate,
    pub adjacency: SparseMatrix,
}

/// Daily directed adjacency snapshots over a fixed, ordered user set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvingMentionNetwork {
    users: Vec<UserId>,
    index: HashMap<UserId, usize>,
    snapshots: Vec<Snapshot>,
    binary: bool,
}

impl EvolvingMentionNetwork {
    pub fn new(users: Vec<UserId>, snapshots: Vec<Snapshot>, binary: bool) -> Result<Self> {
        let n = users.len();
        let index: HashMap<UserId, usize> = users
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, u)| (u, i))
            .collect();
        if index.len() != n {
            return Err(Error::invalid("duplicate user ids in network"));
        }
        for (t, snap) in snapshots.iter().enumerate() {
            if snap.adjacency.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: snap.adjacency.dim(),
                });
            }
            if t > 0 && snap.date != snapshots[t - 1].date + Duration::days(1) {
                return Err(Error::invalid(format!(
                    "snapshot dates not consecutive at {}",
                    snap.date
                )));
            }
            for (i, j, v) in snap.adjacency.triplets() {
                if i == j {
                    return Err(Error::invalid("self-loop in snapshot"));
                }
                if v < 0.0 || (binary && v != 1.0) {
                    return Err(Error::invalid(format!("invalid entry {v} in snapshot")));
                }
            }
        }
        Ok(Self {
            users,
            index,
            snapshots,
            binary,
        })
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn index_of(&self, u: &UserId) -> Option<usize> {
        self.index.get(u).copied()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    /// Every snapshot transposed, in reverse order. Dates keep their original
    /// ascending sequence.
    pub fn reversed_transpose(&self) -> Self {
        let snapshots = self
            .snapshots
            .iter()
            .zip(self.snapshots.iter().rev())
            .map(|(slot, s)| Snapshot {
                date: slot.date,
                adjacency: s.adjacency.transpose(),
            })
            .collect();
        Self {
            users: self.users.clone(),
            index: self.index.clone(),
            snapshots,
            binary: self.binary,
        }
    }

    /// Users with at least one outgoing edge on the first day.
    pub fn first_day_active(&self) -> Vec<UserId> {
        match self.snapshots.first() {
            None => Vec::new(),
            Some(s) => (0..self.users.len())
                .filter(|&i| s.adjacency.row(i).next().is_some())
                .map(|i| self.users[i].clone())
                .collect(),
        }
    }
}

/// Undirected graph whose edge weights count messages exchanged in either
/// direction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedInteractionGraph {
    users: Vec<UserId>,
    index: HashMap<UserId, usize>,
    adjacency: Vec<Vec<(usize, u64)>>,
    edges: Vec<(usize, usize, u64)>,
}

impl WeightedInteractionGraph {
    /// Builds the graph from index pairs; repeated pairs (in either
    /// orientation) accumulate weight. Self-loops and zero weights are rejected.
    pub fn from_edges(
        users: Vec<UserId>,
        edges: impl IntoIterator<Item = (usize, usize, u64)>,
    ) -> Result<Self> {
        let n = users.len();
        let index: HashMap<UserId, usize> = users
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, u)| (u, i))
            .collect();
        if index.len() != n {
            return Err(Error::invalid("duplicate user ids in graph"));
        }
        let mut merged: std::collections::BTreeMap<(usize, usize), u64> = Default::default();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.max(b) + 1,
                });
            }
            if a == b {
                return Err(Error::invalid("self-loop in interaction graph"));
            }
            if w == 0 {
                return Err(Error::invalid("edge weight must be >= 1"));
            }
            *merged.entry((a.min(b), a.max(b))).or_default() += w;
        }
        let mut adjacency = vec![Vec::new(); n];
        let edges: Vec<(usize, usize, u64)> =
            merged.into_iter().map(|((a, b), w)| (a, b, w)).collect();
        for &(a, b, w) in &edges {
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            users,
            index,
            adjacency,
            edges,
        })
    }

    /// Convenience constructor from labelled edges; users are the sorted set of
    /// endpoints plus `extra_users`.
    pub fn from_labelled<'a>(
        edges: impl IntoIterator<Item = (&'a str, &'a str, u64)>,
        extra_users: &[&str],
    ) -> Result<Self> {
        let edges: Vec<_> = edges.into_iter().collect();
        let mut names: std::collections::BTreeSet<&str> = extra_users.iter().copied().collect();
        for &(a, b, _) in &edges {
            names.insert(a);
            names.insert(b);
        }
        let users: Vec<UserId> = names.into_iter().map(UserId::from).collect();
        let idx: HashMap<&str, usize> = users
            .iter()
            .enumerate()
            .map(|(i, u)| (u.as_str(), i))
            .collect();
        let idx_edges: Vec<_> = edges.iter().map(|&(a, b, w)| (idx[a], idx[b], w)).collect();
        Self::from_edges(users, idx_edges)
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn index_of(&self, u: &UserId) -> Option<usize> {
        self.index.get(u).copied()
    }

    /// Indices of `members`, failing on unknown users.
    pub fn indices_of<'a>(
        &self,
        members: impl IntoIterator<Item = &'a UserId>,
    ) -> Result<Vec<usize>> {
        members
            .into_iter()
            .map(|u| {
                self.index_of(u)
                    .ok_or_else(|| Error::UnknownUser(u.0.clone()))
            })
            .collect()
    }

    pub fn neighbours(&self, i: usize) -> &[(usize, u64)] {
        &self.adjacency[i]
    }

    /// Undirected edges `(a, b, weight)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(usize, usize, u64)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, a: usize, b: usize) -> u64 {
        match self.adjacency[a].binary_search_by_key(&b, |&(j, _)| j) {
            Ok(p) => self.adjacency[a][p].1,
            Err(_) => 0,
        }
    }

    /// Sum of incident edge weights (or the plain degree when `weighted` is false).
    pub fn degree(&self, i: usize, weighted: bool) -> f64 {
        if weighted {
            self.adjacency[i].iter().map(|&(_, w)| w as f64).sum()
        } else {
            self.adjacency[i].len() as f64
        }
    }
}
