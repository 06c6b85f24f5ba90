use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::Timelike;
use serde::{Deserialize, Serialize};

use super::{AgentProfile, GlobalParams, Model};
use crate::error::{Error, Result};
use crate::ingest::{build_interaction_graph_among, mention_pairs};
use crate::model::{DateRange, ScaleKind, TweetRecord, UserId};

/// Successes out of opportunities for one behaviour.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub successes: u64,
    pub opportunities: u64,
}

impl Tally {
    /// Observed rate; 0 when there was no opportunity.
    pub fn rate(&self) -> f64 {
        if self.opportunities == 0 {
            0.0
        } else {
            self.successes as f64 / self.opportunities as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpportunityCounts {
    pub init: Tally,
    pub reply: Tally,
    pub prop: Tally,
}

/// Counts, per agent, the chances it had to initiate, reply and propagate and
/// how often it did, using windows of one iteration.
///
/// In each window an agent that heard from no neighbour in the previous
/// window has one initiation opportunity per neighbour. Otherwise every
/// neighbour that wrote to it is a reply opportunity and every other
/// neighbour a propagation opportunity. The first window has no previous one.
pub fn estimate_opportunities(
    tweets: &[TweetRecord],
    users: &[UserId],
    neighbours: &[Vec<usize>],
    window: &DateRange,
    iterations_per_day: u32,
) -> Vec<OpportunityCounts> {
    let n = users.len();
    let ipd = u64::from(iterations_per_day);
    let windows = window.len() as u64 * ipd;
    let index: HashMap<&UserId, usize> = users.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let member: BTreeSet<UserId> = users.iter().cloned().collect();

    // sent[a][w] = neighbours a wrote to; heard[a][w] = neighbours that wrote to a
    let mut sent: Vec<BTreeMap<u64, BTreeSet<usize>>> = vec![BTreeMap::new(); n];
    let mut heard: Vec<BTreeMap<u64, BTreeSet<usize>>> = vec![BTreeMap::new(); n];
    for (t, m) in mention_pairs(tweets, Some(&member), window) {
        let (a, b) = (index[&t.sender], index[m]);
        if neighbours[a].binary_search(&b).is_err() {
            continue;
        }
        let day = window.day_index(t.date()).expect("filtered to window") as u64;
        let secs = u64::from(t.timestamp.num_seconds_from_midnight());
        let w = day * ipd + secs * ipd / 86_400;
        sent[a].entry(w).or_default().insert(b);
        heard[b].entry(w).or_default().insert(a);
    }

    let empty = BTreeSet::new();
    (0..n)
        .map(|a| {
            let deg = neighbours[a].len() as u64;
            let mut c = OpportunityCounts::default();
            if deg == 0 {
                return c;
            }
            for w in 0..windows {
                let prev = if w == 0 {
                    &empty
                } else {
                    heard[a].get(&(w - 1)).unwrap_or(&empty)
                };
                let targets = sent[a].get(&w).unwrap_or(&empty);
                if prev.is_empty() {
                    c.init.opportunities += deg;
                    c.init.successes += targets.len() as u64;
                } else {
                    let replied = targets.intersection(prev).count() as u64;
                    c.reply.opportunities += prev.len() as u64;
                    c.reply.successes += replied;
                    c.prop.opportunities += deg - prev.len() as u64;
                    c.prop.successes += targets.len() as u64 - replied;
                }
            }
            c
        })
        .collect()
}

/// Builds a model of `community` from its history inside `window`.
///
/// Neighbours exchanged at least `neighbour_threshold` messages. Baselines
/// are each user's mean sent score and the neutral level is the mean over all
/// community messages; users who sent nothing fall back to the neutral level
/// and are flagged in `baseline_fallback`.
pub fn build_model(
    tweets: &[TweetRecord],
    community: &BTreeSet<UserId>,
    globals: GlobalParams,
    scale: ScaleKind,
    window: &DateRange,
) -> Result<Model> {
    globals.validate()?;
    if community.is_empty() {
        return Err(Error::EmptyInput("community"));
    }
    let graph =
        build_interaction_graph_among(tweets, community, window, globals.neighbour_threshold)?;
    let users = graph.users().to_vec();
    let neighbours: Vec<Vec<usize>> = (0..graph.len())
        .map(|i| graph.neighbours(i).iter().map(|&(j, _)| j).collect())
        .collect();

    let mut by_sender: HashMap<&UserId, (f64, u64)> = HashMap::new();
    let (mut total, mut count) = (0.0, 0u64);
    for (t, _) in mention_pairs(tweets, Some(community), window) {
        if let Some(s) = t.score(scale) {
            let e = by_sender.entry(&t.sender).or_default();
            e.0 += s;
            e.1 += 1;
            total += s;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InsufficientData(
            "community sent no scored messages".into(),
        ));
    }
    let neutral = total / count as f64;

    let counts = estimate_opportunities(
        tweets,
        &users,
        &neighbours,
        window,
        globals.iterations_per_day,
    );
    let mut fallback = Vec::with_capacity(users.len());
    let profiles = users
        .iter()
        .zip(&counts)
        .map(|(u, c)| {
            let baseline = match by_sender.get(u) {
                Some(&(s, k)) => s / k as f64,
                None => neutral,
            };
            fallback.push(!by_sender.contains_key(u));
            AgentProfile {
                p_init: c.init.rate(),
                p_reply: c.reply.rate(),
                p_prop: c.prop.rate(),
                baseline_sentiment: baseline,
                neutral_sentiment: neutral,
            }
        })
        .collect();
    let mut model = Model::new(users, neighbours, profiles, globals, scale)?;
    model.baseline_fallback = fallback;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Scores;
    use chrono::{NaiveDate, TimeZone, Utc};

    fn at(day: u32, hour: u32, from: &str, to: &str, mc: i32) -> TweetRecord {
        TweetRecord {
            tweet_id: format!("{from}{to}{day}{hour}"),
            timestamp: Utc.with_ymd_and_hms(2024, 2, day, hour, 0, 0).unwrap(),
            sender: from.into(),
            mentions: vec![to.into()],
            scores: Scores {
                mc: Some(mc),
                ss: None,
                l: None,
            },
        }
    }

    fn window(days: usize) -> DateRange {
        DateRange::starting(NaiveDate::from_ymd_opt(2024, 2, 1).unwrap(), days).unwrap()
    }

    #[test]
    fn three_initiations_in_twelve_quiet_windows() {
        // 12 windows of 2 hours; a writes to b in windows 1, 5 and 9 and never hears back
        let tweets = vec![
            at(1, 2, "a", "b", 1),
            at(1, 10, "a", "b", 1),
            at(1, 18, "a", "b", 1),
        ];
        let users: Vec<UserId> = vec!["a".into(), "b".into()];
        let c = estimate_opportunities(&tweets, &users, &[vec![1], vec![0]], &window(1), 12);
        assert_eq!(
            c[0].init,
            Tally {
                successes: 3,
                opportunities: 12
            }
        );
        assert_eq!(c[0].init.rate(), 0.25);
        assert_eq!(c[0].reply.rate(), 0.0);
        // b heard from a three times and never answered
        assert_eq!(
            c[1].reply,
            Tally {
                successes: 0,
                opportunities: 3
            }
        );
        assert_eq!(
            c[1].init,
            Tally {
                successes: 0,
                opportunities: 9
            }
        );
    }

    #[test]
    fn reply_and_propagation_are_attributed_per_neighbour() {
        // a hears from b in window 0, then writes to b (reply) and c (propagate)
        let tweets = vec![
            at(1, 0, "b", "a", 0),
            at(1, 1, "a", "b", 0),
            at(1, 1, "a", "c", 0),
        ];
        let users: Vec<UserId> = vec!["a".into(), "b".into(), "c".into()];
        let nb = vec![vec![1, 2], vec![0], vec![0]];
        let c = estimate_opportunities(&tweets, &users, &nb, &window(1), 24);
        assert_eq!(
            c[0].reply,
            Tally {
                successes: 1,
                opportunities: 1
            }
        );
        assert_eq!(
            c[0].prop,
            Tally {
                successes: 1,
                opportunities: 1
            }
        );
        assert_eq!(c[0].init.successes, 0);
    }

    #[test]
    fn model_from_history() {
        let tweets = vec![
            at(1, 1, "a", "b", 4),
            at(1, 2, "b", "a", 2),
            at(1, 3, "a", "b", 0),
            at(2, 3, "c", "a", -3),
        ];
        let community: BTreeSet<UserId> = ["a", "b", "c", "d"].iter().map(|&x| x.into()).collect();
        let globals = GlobalParams {
            iterations_per_day: 24,
            neighbour_threshold: 2,
            ..Default::default()
        };
        let m = build_model(&tweets, &community, globals, ScaleKind::Mc, &window(2)).unwrap();
        // only a-b crosses the threshold
        assert_eq!(m.neighbours, vec![vec![1], vec![0], vec![], vec![]]);
        assert_eq!(m.profiles[0].baseline_sentiment, 2.0);
        assert_eq!(m.profiles[0].neutral_sentiment, 0.75);
        assert_eq!(m.profiles[3].baseline_sentiment, 0.75);
        assert_eq!(m.baseline_fallback, vec![false, false, false, true]);
        assert_eq!(m.profiles[2].p_init, 0.0);
    }
}
