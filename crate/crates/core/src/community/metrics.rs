use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::mention_pairs;
use crate::model::{DateRange, ScaleKind, TweetRecord, UserId, WeightedInteractionGraph};

fn membership(graph: &WeightedInteractionGraph, s: &BTreeSet<UserId>) -> Result<Vec<bool>> {
    let mut inside = vec![false; graph.len()];
    for i in graph.indices_of(s)? {
        inside[i] = true;
    }
    Ok(inside)
}

/// Cut weight over the smaller side's volume. A side with zero volume gives 1.
pub fn conductance(
    graph: &WeightedInteractionGraph,
    s: &BTreeSet<UserId>,
    weighted: bool,
) -> Result<f64> {
    if s.is_empty() || s.len() >= graph.len() {
        return Err(Error::invalid(
            "conductance needs a proper non-empty subset",
        ));
    }
    let inside = membership(graph, s)?;
    let (mut cut, mut vol_in, mut vol_out) = (0.0, 0.0, 0.0);
    for &(a, b, w) in graph.edges() {
        let w = if weighted { w as f64 } else { 1.0 };
        for x in [a, b] {
            if inside[x] {
                vol_in += w;
            } else {
                vol_out += w;
            }
        }
        if inside[a] != inside[b] {
            cut += w;
        }
    }
    let denom = f64::min(vol_in, vol_out);
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((cut / denom).clamp(0.0, 1.0))
}

/// Bin index 0..5 for a participation percentage: [0,20], (20,40], ... (80,100].
pub fn participation_bin(pct: f64) -> usize {
    if pct <= 20.0 {
        0
    } else {
        (((pct - 20.0) / 20.0).ceil() as usize).min(4)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityStats {
    pub size: usize,
    pub internal_edges: usize,
    pub internal_edges_per_node: f64,
    pub conductance: f64,
    pub weighted_conductance: f64,
    pub connected: bool,
    pub nonzero_sentiment_fraction: f64,
    /// Absent when no internal mention carries a score.
    pub mean_internal_sentiment: Option<f64>,
    pub avg_participation_pct: f64,
    pub participation_bins: [f64; 5],
}

fn is_connected(graph: &WeightedInteractionGraph, inside: &[bool]) -> bool {
    let Some(start) = inside.iter().position(|&x| x) else {
        return false;
    };
    let mut seen = vec![false; graph.len()];
    seen[start] = true;
    let mut stack = vec![start];
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for &(j, _) in graph.neighbours(i) {
            if inside[j] && !seen[j] {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == inside.iter().filter(|&&x| x).count()
}

/// Statistics of the member set `s`. Sentiment and participation are computed
/// from the tweets inside `window`; each mention of a member by a member is
/// one internal mention.
pub fn community_stats(
    graph: &WeightedInteractionGraph,
    tweets: &[TweetRecord],
    s: &BTreeSet<UserId>,
    scale: ScaleKind,
    window: &DateRange,
) -> Result<CommunityStats> {
    if s.is_empty() {
        return Err(Error::EmptyInput("community"));
    }
    let inside = membership(graph, s)?;
    let internal_edges = graph
        .edges()
        .iter()
        .filter(|&&(a, b, _)| inside[a] && inside[b])
        .count();
    let proper = s.len() < graph.len();
    let (conductance, weighted_conductance) = if proper {
        (conductance(graph, s, false)?, conductance(graph, s, true)?)
    } else {
        (0.0, 0.0)
    };

    let (mut scored, mut nonzero, mut total) = (0usize, 0usize, 0.0);
    for (t, _) in mention_pairs(tweets, Some(s), window) {
        if let Some(x) = t.score(scale) {
            scored += 1;
            total += x;
            if x != 0.0 {
                nonzero += 1;
            }
        }
    }

    let mut anywhere: BTreeMap<&UserId, BTreeSet<NaiveDate>> = BTreeMap::new();
    let mut within: BTreeMap<&UserId, BTreeSet<NaiveDate>> = BTreeMap::new();
    for (t, m) in mention_pairs(tweets, None, window) {
        let d = t.date();
        for u in [&t.sender, m] {
            if s.contains(u) {
                anywhere.entry(u).or_default().insert(d);
            }
        }
        if s.contains(&t.sender) && s.contains(m) {
            within.entry(&t.sender).or_default().insert(d);
            within.entry(m).or_default().insert(d);
        }
    }
    let mut bins = [0.0; 5];
    let mut pct_sum = 0.0;
    for u in s {
        let all = anywhere.get(u).map_or(0, |d| d.len());
        let inner = within.get(u).map_or(0, |d| d.len());
        let pct = if all == 0 {
            0.0
        } else {
            100.0 * inner as f64 / all as f64
        };
        pct_sum += pct;
        bins[participation_bin(pct)] += 1.0;
    }
    let n = s.len() as f64;
    for b in &mut bins {
        *b /= n;
    }

    Ok(CommunityStats {
        size: s.len(),
        internal_edges,
        internal_edges_per_node: internal_edges as f64 / n,
        conductance,
        weighted_conductance,
        connected: is_connected(graph, &inside),
        nonzero_sentiment_fraction: if scored == 0 {
            0.0
        } else {
            nonzero as f64 / scored as f64
        },
        mean_internal_sentiment: (scored > 0).then(|| total / scored as f64),
        avg_participation_pct: pct_sum / n,
        participation_bins: bins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn two_triangles(w: u64) -> WeightedInteractionGraph {
        WeightedInteractionGraph::from_labelled(
            [
                ("a", "b"),
                ("b", "c"),
                ("a", "c"),
                ("d", "e"),
                ("e", "f"),
                ("d", "f"),
                ("c", "d"),
            ]
            .map(|(a, b)| (a, b, w)),
            &[],
        )
        .unwrap()
    }

    fn set(xs: &[&str]) -> BTreeSet<UserId> {
        xs.iter().map(|&x| x.into()).collect()
    }

    #[test]
    fn two_triangles_one_seventh() {
        let g = two_triangles(1);
        let s = set(&["a", "b", "c"]);
        assert!((conductance(&g, &s, false).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        assert!((conductance(&g, &s, true).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        let doubled = two_triangles(2);
        assert!((conductance(&doubled, &s, true).unwrap() - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn separated_set_has_zero_conductance() {
        let g =
            WeightedInteractionGraph::from_labelled([("a", "b", 1), ("c", "d", 1)], &[]).unwrap();
        assert_eq!(conductance(&g, &set(&["a", "b"]), false).unwrap(), 0.0);
    }

    #[test]
    fn isolated_set_is_one_and_bad_sets_error() {
        let g = WeightedInteractionGraph::from_labelled([("a", "b", 1)], &["z"]).unwrap();
        assert_eq!(conductance(&g, &set(&["z"]), false).unwrap(), 1.0);
        assert!(conductance(&g, &BTreeSet::new(), false).is_err());
        assert!(conductance(&g, &set(&["a", "b", "z"]), false).is_err());
    }

    #[test]
    fn bins() {
        assert_eq!(participation_bin(0.0), 0);
        assert_eq!(participation_bin(20.0), 0);
        assert_eq!(participation_bin(20.5), 1);
        assert_eq!(participation_bin(40.0), 1);
        assert_eq!(participation_bin(90.0), 4);
        assert_eq!(participation_bin(100.0), 4);
    }

    fn tweet(day: u32, from: &str, to: &[&str], mc: i32) -> TweetRecord {
        TweetRecord {
            tweet_id: format!("{from}{day}{}", to.join("")),
            timestamp: Utc.with_ymd_and_hms(2024, 1, day, 12, 0, 0).unwrap(),
            sender: from.into(),
            mentions: to.iter().map(|&x| x.into()).collect(),
            scores: crate::model::Scores {
                mc: Some(mc),
                ss: None,
                l: None,
            },
        }
    }

    #[test]
    fn participation_ninety_percent() {
        // u is active 10 days; on 9 of them it talks to v, on one to outsider w
        let mut tweets: Vec<_> = (1..=9).map(|d| tweet(d, "u", &["v"], 0)).collect();
        tweets.push(tweet(10, "u", &["w"], 0));
        let g =
            WeightedInteractionGraph::from_labelled([("u", "v", 9), ("u", "w", 1)], &[]).unwrap();
        let window = DateRange::starting(NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(), 10).unwrap();
        let st = community_stats(&g, &tweets, &set(&["u", "v"]), ScaleKind::Mc, &window).unwrap();
        // u: 9/10 = 90% (bin 5), v: 9/9 = 100% (bin 5)
        assert_eq!(st.participation_bins, [0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((st.avg_participation_pct - 95.0).abs() < 1e-12);
        assert_eq!(st.nonzero_sentiment_fraction, 0.0);
        assert_eq!(st.mean_internal_sentiment, Some(0.0));
        assert_eq!(st.internal_edges, 1);
        assert!(st.connected);
    }

    #[test]
    fn no_internal_mentions() {
        let g = WeightedInteractionGraph::from_labelled([("a", "b", 1)], &["c"]).unwrap();
        let window = DateRange::starting(NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(), 3).unwrap();
        let st = community_stats(&g, &[], &set(&["a", "c"]), ScaleKind::Mc, &window).unwrap();
        assert_eq!(st.internal_edges, 0);
        assert_eq!(st.internal_edges_per_node, 0.0);
        assert!(!st.connected);
        assert_eq!(st.mean_internal_sentiment, None);
        assert!((st.participation_bins.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
