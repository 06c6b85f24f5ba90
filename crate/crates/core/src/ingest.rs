//! Tweet parsing, outlier filtering, the reciprocated-mention core and network
//! construction.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    DateRange, EvolvingMentionNetwork, Snapshot, TweetRecord, UserId, WeightedInteractionGraph,
};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedTweets {
    pub records: Vec<TweetRecord>,
    pub errors: Vec<LineError>,
}

/// Reads JSON Lines tweets. Blank lines are skipped. In strict mode the first
/// malformed line aborts with [`Error::Parse`]; otherwise malformed lines are
/// collected with their 1-based line numbers.
pub fn parse_tweets<R: BufRead>(reader: R, strict: bool) -> Result<ParsedTweets> {
    let mut out = ParsedTweets::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<TweetRecord>(&line)
            .map_err(|e| e.to_string())
            .and_then(|t| t.normalize().map_err(|e| e.to_string()));
        match parsed {
            Ok(t) => out.records.push(t),
            Err(message) if strict => {
                return Err(Error::Parse {
                    line: lineno,
                    message,
                })
            }
            Err(message) => out.errors.push(LineError {
                line: lineno,
                message,
            }),
        }
    }
    Ok(out)
}

/// How in- and out-degree are counted for the celebrity filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeMode {
    /// Number of distinct counterparties.
    #[default]
    DistinctUsers,
    /// Number of mention events.
    Events,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub max_tweets_per_day: f64,
    pub max_self_mention_ratio: f64,
    pub max_in_out_degree_ratio: f64,
    /// Only users with at least this many collected tweets are subject to the
    /// frequency filter.
    pub min_tweets_for_frequency: usize,
    pub degree_mode: DegreeMode,
    /// Restricts the degree computation to this window; all tweets otherwise.
    pub degree_window: Option<DateRange>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            max_tweets_per_day: 200.0,
            max_self_mention_ratio: 0.5,
            max_in_out_degree_ratio: 50.0,
            min_tweets_for_frequency: 200,
            degree_mode: DegreeMode::DistinctUsers,
            degree_window: None,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_tweets_per_day > 0.0
            && self.max_self_mention_ratio > 0.0
            && self.max_self_mention_ratio <= 1.0
            && self.max_in_out_degree_ratio > 0.0)
        {
            return Err(Error::invalid("filter thresholds must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub excluded_frequency: BTreeSet<UserId>,
    pub excluded_self_mention: BTreeSet<UserId>,
    pub excluded_degree_ratio: BTreeSet<UserId>,
    pub retained: BTreeSet<UserId>,
}

#[derive(Default)]
struct SenderStats {
    tweets: usize,
    first: Option<chrono::DateTime<chrono::Utc>>,
    last: Option<chrono::DateTime<chrono::Utc>>,
    self_mentions: usize,
    all_mentions: usize,
}

/// Applies the frequency, self-mention and in/out-degree filters.
pub fn filter_users(tweets: &[TweetRecord], cfg: &FilterConfig) -> Result<FilterReport> {
    if tweets.is_empty() {
        return Err(Error::EmptyInput("no tweets to filter"));
    }
    cfg.validate()?;

    let mut universe: BTreeSet<&UserId> = BTreeSet::new();
    let mut senders: HashMap<&UserId, SenderStats> = HashMap::new();
    for t in tweets {
        universe.insert(&t.sender);
        universe.extend(t.mentions.iter());
        let s = senders.entry(&t.sender).or_default();
        s.tweets += 1;
        s.first = Some(s.first.map_or(t.timestamp, |f| f.min(t.timestamp)));
        s.last = Some(s.last.map_or(t.timestamp, |l| l.max(t.timestamp)));
        s.all_mentions += t.mentions.len();
        s.self_mentions += t.mentions.iter().filter(|m| **m == t.sender).count();
    }

    let mut report = FilterReport::default();
    for (&user, s) in &senders {
        if s.tweets >= cfg.min_tweets_for_frequency {
            let secs = (s.last.unwrap() - s.first.unwrap()).num_seconds().max(0) as f64;
            let span_days = (secs / 86_400.0).ceil().max(1.0);
            if s.tweets as f64 / span_days > cfg.max_tweets_per_day {
                report.excluded_frequency.insert(user.clone());
            }
        }
        if s.all_mentions > 0
            && s.self_mentions as f64 / s.all_mentions as f64 > cfg.max_self_mention_ratio
        {
            report.excluded_self_mention.insert(user.clone());
        }
    }

    let mut in_deg: HashMap<&UserId, usize> = HashMap::new();
    let mut out_deg: HashMap<&UserId, usize> = HashMap::new();
    let mut seen_pairs: HashSet<(&UserId, &UserId)> = HashSet::new();
    for t in tweets {
        if let Some(w) = &cfg.degree_window {
            if !w.contains(&t.timestamp) {
                continue;
            }
        }
        for m in t.others() {
            let count = match cfg.degree_mode {
                DegreeMode::Events => true,
                DegreeMode::DistinctUsers => seen_pairs.insert((&t.sender, m)),
            };
            if count {
                *out_deg.entry(&t.sender).or_default() += 1;
                *in_deg.entry(m).or_default() += 1;
            }
        }
    }
    for (&user, &din) in &in_deg {
        let dout = out_deg.get(user).copied().unwrap_or(0);
        let excluded = dout == 0 || din as f64 / dout as f64 > cfg.max_in_out_degree_ratio;
        if excluded && din > 0 {
            report.excluded_degree_ratio.insert(user.clone());
        }
    }

    report.retained = universe
        .into_iter()
        .filter(|u| {
            !report.excluded_frequency.contains(*u)
                && !report.excluded_self_mention.contains(*u)
                && !report.excluded_degree_ratio.contains(*u)
        })
        .cloned()
        .collect();
    Ok(report)
}

/// Directed mention pairs `(sender, mentioned)` among `users` within `window`,
/// excluding self-mentions, one entry per (tweet, mention).
pub(crate) fn mention_pairs<'a>(
    tweets: &'a [TweetRecord],
    users: Option<&'a BTreeSet<UserId>>,
    window: &'a DateRange,
) -> impl Iterator<Item = (&'a TweetRecord, &'a UserId)> + 'a {
    tweets
        .iter()
        .filter(move |t| window.contains(&t.timestamp))
        .filter(move |t| users.is_none_or(|u| u.contains(&t.sender)))
        .flat_map(move |t| {
            t.others()
                .filter(move |m| users.is_none_or(|u| u.contains(*m)))
                .map(move |m| (t, m))
        })
}

/// Largest connected component of the reciprocated-mention graph. Equal-size
/// components are ranked by their smallest member id.
pub fn reciprocal_core(
    tweets: &[TweetRecord],
    users: &BTreeSet<UserId>,
    window: &DateRange,
) -> BTreeSet<UserId> {
    let directed: HashSet<(&UserId, &UserId)> = mention_pairs(tweets, Some(users), window)
        .map(|(t, m)| (&t.sender, m))
        .collect();
    let mut adj: BTreeMap<&UserId, Vec<&UserId>> = BTreeMap::new();
    for &(a, b) in &directed {
        if a < b && directed.contains(&(b, a)) {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
    }

    let mut visited: HashSet<&UserId> = HashSet::new();
    let mut best: Vec<&UserId> = Vec::new();
    // BTreeMap iteration visits components in order of their smallest member,
    // so a strictly-larger test keeps the lexicographic tie-break.
    for &start in adj.keys() {
        if !visited.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if visited.insert(v) {
                    comp.push(v);
                    stack.push(v);
                }
            }
        }
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best.into_iter().cloned().collect()
}

/// One snapshot per day of `window` over the ordered `users`. Binary mode
/// stores 1 for any mention that day; weighted mode stores mention counts.
pub fn build_evolving_network(
    tweets: &[TweetRecord],
    users: &BTreeSet<UserId>,
    window: &DateRange,
    binary: bool,
) -> Result<EvolvingMentionNetwork> {
    let ordered: Vec<UserId> = users.iter().cloned().collect();
    let index: HashMap<&UserId, usize> = ordered.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let mut per_day: Vec<HashMap<(usize, usize), f64>> = vec![HashMap::new(); window.len()];
    for (t, m) in mention_pairs(tweets, Some(users), window) {
        let day = window.day_index(t.date()).expect("filtered to window");
        let e = per_day[day]
            .entry((index[&t.sender], index[m]))
            .or_default();
        if binary {
            *e = 1.0;
        } else {
            *e += 1.0;
        }
    }
    let n = ordered.len();
    let snapshots = window
        .days()
        .zip(per_day)
        .map(|(date, cells)| {
            let mut trip: Vec<_> = cells.into_iter().map(|((i, j), v)| (i, j, v)).collect();
            trip.sort_by_key(|a| (a.0, a.1));
            Ok(Snapshot {
                date,
                adjacency: SparseMatrix::from_triplets(n, trip)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EvolvingMentionNetwork::new(ordered, snapshots, binary)
}

/// Interaction graph over every user taking part in a non-self mention within
/// `window`.
pub fn build_interaction_graph(
    tweets: &[TweetRecord],
    window: &DateRange,
    min_weight: u64,
) -> Result<WeightedInteractionGraph> {
    let mut users = BTreeSet::new();
    for (t, m) in mention_pairs(tweets, None, window) {
        users.insert(t.sender.clone());
        users.insert(m.clone());
    }
    build_interaction_graph_among(tweets, &users, window, min_weight)
}

/// Interaction graph whose node set is exactly `users`; edges with total
/// weight below `min_weight` are dropped.
pub fn build_interaction_graph_among(
    tweets: &[TweetRecord],
    users: &BTreeSet<UserId>,
    window: &DateRange,
    min_weight: u64,
) -> Result<WeightedInteractionGraph> {
    if min_weight == 0 {
        return Err(Error::invalid("min_weight must be >= 1"));
    }
    let ordered: Vec<UserId> = users.iter().cloned().collect();
    let index: HashMap<&UserId, usize> = ordered.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let mut weights: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (t, m) in mention_pairs(tweets, Some(users), window) {
        let (a, b) = (index[&t.sender], index[m]);
        *weights.entry((a.min(b), a.max(b))).or_default() += 1;
    }
    WeightedInteractionGraph::from_edges(
        ordered,
        weights
            .into_iter()
            .filter(|&(_, w)| w >= min_weight)
            .map(|((a, b), w)| (a, b, w)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Scores;
    use chrono::{Duration, TimeZone, Utc};

    fn tw(id: usize, day: u32, hour: u32, sender: &str, mentions: &[&str]) -> TweetRecord {
        TweetRecord {
            tweet_id: format!("t{id}"),
            timestamp: Utc.with_ymd_and_hms(2014, 10, day, hour, 0, 0).unwrap(),
            sender: sender.into(),
            mentions: mentions.iter().map(|&m| m.into()).collect(),
            scores: Scores::default(),
        }
    }

    fn week() -> DateRange {
        "2014-10-09..2014-10-15".parse().unwrap()
    }

    fn set(xs: &[&str]) -> BTreeSet<UserId> {
        xs.iter().map(|&x| x.into()).collect()
    }

    #[test]
    fn parse_examples() {
        let one = r#"{"tweet_id":"1","timestamp":"2014-10-09T10:00:00Z","sender":"a","mentions":["b"],"mc":3}"#;
        assert_eq!(
            parse_tweets(one.as_bytes(), false).unwrap().records.len(),
            1
        );
        assert!(parse_tweets("".as_bytes(), false)
            .unwrap()
            .records
            .is_empty());

        let three = format!("{one}\n{{not json\n{one}\n");
        let parsed = parse_tweets(three.as_bytes(), false).unwrap();
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.errors.len(), 1);
        assert_eq!(parsed.errors[0].line, 2);
        match parse_tweets(three.as_bytes(), true) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_out_of_range_scores() {
        let bad = r#"{"tweet_id":"1","timestamp":"2014-10-09T10:00:00Z","sender":"a","mentions":[],"ss":7}"#;
        let parsed = parse_tweets(bad.as_bytes(), false).unwrap();
        assert_eq!(parsed.errors.len(), 1);
        let frac = r#"{"tweet_id":"1","timestamp":"2014-10-09T10:00:00Z","sender":"a","mentions":[],"mc":1.5}"#;
        assert_eq!(
            parse_tweets(frac.as_bytes(), false).unwrap().errors.len(),
            1
        );
    }

    #[test]
    fn frequency_filter() {
        let base = Utc.with_ymd_and_hms(2014, 10, 9, 0, 0, 0).unwrap();
        let mut tweets: Vec<TweetRecord> = (0..400)
            .map(|i| TweetRecord {
                timestamp: base + Duration::seconds(i * 200),
                ..tw(i as usize, 9, 0, "bot", &["x"])
            })
            .collect();
        // 250 tweets over 10 days: 25/day, kept
        tweets.extend((0..250).map(|i| TweetRecord {
            timestamp: base + Duration::seconds(i * 3456),
            ..tw(1000 + i as usize, 9, 0, "human", &["x"])
        }));
        tweets.push(tw(5000, 10, 0, "x", &["human", "bot"]));
        let r = filter_users(&tweets, &FilterConfig::default()).unwrap();
        assert!(r.excluded_frequency.contains(&"bot".into()));
        assert!(!r.excluded_frequency.contains(&"human".into()));
    }

    #[test]
    fn self_mention_filter() {
        let tweets = vec![
            tw(1, 9, 1, "narcissus", &["narcissus"]),
            tw(2, 9, 2, "narcissus", &["narcissus", "b"]),
            tw(3, 9, 3, "a", &["b", "c"]),
            tw(4, 9, 4, "b", &["a"]),
            tw(5, 9, 5, "c", &["a"]),
        ];
        let r = filter_users(&tweets, &FilterConfig::default()).unwrap();
        assert!(r.excluded_self_mention.contains(&"narcissus".into()));
        assert!(!r.excluded_self_mention.contains(&"a".into()));
    }

    #[test]
    fn degree_ratio_filter() {
        let mut tweets = Vec::new();
        for i in 0..600 {
            let fan = format!("fan{i}");
            tweets.push(TweetRecord {
                sender: UserId(fan.clone()),
                ..tw(i, 9, 1, "", &["celeb"])
            });
            // fans also mention each other so they are not zero-out-degree
            tweets.push(TweetRecord {
                sender: UserId(fan),
                mentions: vec![UserId(format!("fan{}", (i + 1) % 600))],
                ..tw(10_000 + i, 9, 2, "", &[])
            });
        }
        for j in 0..10 {
            tweets.push(tw(20_000 + j, 9, 3, "celeb", &[&format!("fan{j}")]));
        }
        tweets.push(tw(30_000, 9, 4, "fan0", &["silent"]));
        let r = filter_users(&tweets, &FilterConfig::default()).unwrap();
        assert!(r.excluded_degree_ratio.contains(&"celeb".into()));
        // mentioned but never mentions anyone: ratio treated as infinite
        assert!(r.excluded_degree_ratio.contains(&"silent".into()));
        assert!(!r.excluded_degree_ratio.contains(&"fan1".into()));
        assert!(!r.retained.contains(&"celeb".into()));
        assert!(r.retained.contains(&"fan1".into()));
    }

    #[test]
    fn filter_empty_input() {
        assert!(matches!(
            filter_users(&[], &FilterConfig::default()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn reciprocal_core_examples() {
        let users = set(&["A", "B", "C", "D", "E"]);
        let pair = vec![tw(1, 9, 1, "A", &["B"]), tw(2, 10, 1, "B", &["A"])];
        assert_eq!(reciprocal_core(&pair, &users, &week()), set(&["A", "B"]));

        let oneway = vec![tw(1, 9, 1, "A", &["B"])];
        assert!(reciprocal_core(&oneway, &users, &week()).is_empty());

        let mut two = pair.clone();
        two.extend([
            tw(3, 9, 2, "C", &["D"]),
            tw(4, 9, 3, "D", &["C", "E"]),
            tw(5, 9, 4, "E", &["D"]),
        ]);
        assert_eq!(
            reciprocal_core(&two, &users, &week()),
            set(&["C", "D", "E"])
        );

        // equal sizes: the component holding the smallest id wins
        let tie = vec![
            tw(1, 9, 1, "D", &["E"]),
            tw(2, 9, 1, "E", &["D"]),
            tw(3, 9, 1, "B", &["C"]),
            tw(4, 9, 1, "C", &["B"]),
        ];
        assert_eq!(reciprocal_core(&tie, &users, &week()), set(&["B", "C"]));

        // reciprocation outside the window does not count
        let late = vec![tw(1, 9, 1, "A", &["B"]), tw(2, 20, 1, "B", &["A"])];
        assert!(reciprocal_core(&late, &users, &week()).is_empty());
    }

    #[test]
    fn evolving_network_examples() {
        let users = set(&["A", "B", "C"]);
        let empty = build_evolving_network(&[], &users, &week(), true).unwrap();
        assert_eq!(empty.snapshots().len(), 7);
        assert!(empty.snapshots().iter().all(|s| s.adjacency.nnz() == 0));

        let tweets = vec![
            tw(1, 9, 1, "A", &["B"]),
            tw(2, 9, 5, "A", &["B", "A"]),
            tw(3, 10, 1, "A", &["C"]),
        ];
        let bin = build_evolving_network(&tweets, &users, &week(), true).unwrap();
        let (a, b, c) = (0, 1, 2);
        assert_eq!(bin.snapshots()[0].adjacency.get(a, b), 1.0);
        assert_eq!(bin.snapshots()[0].adjacency.get(a, a), 0.0);
        assert_eq!(bin.snapshots()[0].adjacency.get(a, c), 0.0);
        assert_eq!(bin.snapshots()[1].adjacency.get(a, c), 1.0);

        let weighted = build_evolving_network(&tweets, &users, &week(), false).unwrap();
        assert_eq!(weighted.snapshots()[0].adjacency.get(a, b), 2.0);
        let total: f64 = weighted.snapshots().iter().map(|s| s.adjacency.sum()).sum();
        assert_eq!(total, 3.0);
    }

    #[test]
    fn interaction_graph_examples() {
        let mut tweets: Vec<_> = (0..3).map(|i| tw(i, 9, 1, "A", &["B"])).collect();
        tweets.extend((0..2).map(|i| tw(10 + i, 10, 1, "B", &["A"])));
        tweets.push(tw(99, 10, 1, "C", &["C"]));
        let g = build_interaction_graph(&tweets, &week(), 1).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.weight(0, 1), 5);

        let sparse = build_interaction_graph(&tweets, &week(), 10).unwrap();
        assert_eq!(sparse.edge_count(), 0);

        let among =
            build_interaction_graph_among(&tweets, &set(&["A", "B", "Z"]), &week(), 1).unwrap();
        assert_eq!(among.len(), 3);
        let z = among.index_of(&"Z".into()).unwrap();
        assert!(among.neighbours(z).is_empty());
    }
}
