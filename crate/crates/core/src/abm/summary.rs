use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::MessageLog;
use crate::error::{Error, Result};
use crate::ingest::mention_pairs;
use crate::model::{DateRange, ScaleKind, TweetRecord, UserId};

/// Moments matched during calibration: per-user daily message counts and the
/// community's daily mean sentiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub users: Vec<UserId>,
    /// Number of days the moments were computed over.
    pub days: usize,
    pub count_mean: Vec<f64>,
    pub count_std: Vec<f64>,
    pub sentiment_mean: f64,
    pub sentiment_std: f64,
}

impl MomentSummary {
    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }
}

/// Mean and sample standard deviation; a single value has std 0.
pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// `counts[user][day]` messages sent; `daily[day] = (sentiment sum, scored messages)`.
fn from_daily(users: Vec<UserId>, counts: Vec<Vec<f64>>, daily: &[(f64, u64)]) -> MomentSummary {
    let days = daily.len();
    let (count_mean, count_std) = counts.iter().map(|c| mean_std(c)).unzip();
    let means: Vec<f64> = daily
        .iter()
        .filter(|&&(_, k)| k > 0)
        .map(|&(s, k)| s / k as f64)
        .collect();
    let (sentiment_mean, sentiment_std) = mean_std(&means);
    MomentSummary {
        users,
        days,
        count_mean,
        count_std,
        sentiment_mean,
        sentiment_std,
    }
}

/// Moments of a simulated run. Bursts count as their individual messages and
/// each message weighs equally in the daily sentiment.
pub fn summarize(log: &MessageLog) -> Result<MomentSummary> {
    if log.days < 2 {
        return Err(Error::InsufficientData(
            "moments need at least 2 days".into(),
        ));
    }
    let mut counts = vec![vec![0.0; log.days]; log.users.len()];
    let mut daily = vec![(0.0, 0u64); log.days];
    for e in &log.entries {
        let d = log.day_of(e.step);
        let k = u64::from(e.burst);
        counts[e.sender][d] += k as f64;
        daily[d].0 += e.sentiment * k as f64;
        daily[d].1 += k;
    }
    Ok(from_daily(log.users.clone(), counts, &daily))
}

/// Moments of historical data restricted to mentions among `users` inside
/// `window`. Every (tweet, mentioned member) pair is one message.
pub fn summarize_history(
    tweets: &[TweetRecord],
    users: &BTreeSet<UserId>,
    window: &DateRange,
    scale: ScaleKind,
) -> Result<MomentSummary> {
    let days = window.len();
    if days < 2 {
        return Err(Error::InsufficientData(
            "moments need at least 2 days".into(),
        ));
    }
    let ordered: Vec<UserId> = users.iter().cloned().collect();
    let index: HashMap<&UserId, usize> = ordered.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let mut counts = vec![vec![0.0; days]; ordered.len()];
    let mut daily = vec![(0.0, 0u64); days];
    for (t, _) in mention_pairs(tweets, Some(users), window) {
        let d = window.day_index(t.date()).expect("filtered to window");
        counts[index[&t.sender]][d] += 1.0;
        if let Some(s) = t.score(scale) {
            daily[d].0 += s;
            daily[d].1 += 1;
        }
    }
    Ok(from_daily(ordered, counts, &daily))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abm::LogEntry;

    fn log(entries: Vec<LogEntry>, days: usize) -> MessageLog {
        MessageLog {
            users: vec!["a".into(), "b".into()],
            iterations_per_day: 2,
            days,
            entries,
        }
    }

    fn e(step: u64, sender: usize, burst: u32, sentiment: f64) -> LogEntry {
        LogEntry {
            step,
            sender,
            recipient: 1 - sender,
            burst,
            sentiment,
        }
    }

    #[test]
    fn counts_one_and_three() {
        // day 0: one message; day 1: a burst of three
        let s = summarize(&log(vec![e(0, 0, 1, 3.0), e(3, 0, 3, 3.0)], 2)).unwrap();
        assert_eq!(s.count_mean[0], 2.0);
        assert_eq!(s.count_std[0], 2f64.sqrt());
        assert_eq!((s.count_mean[1], s.count_std[1]), (0.0, 0.0));
        assert_eq!((s.sentiment_mean, s.sentiment_std), (3.0, 0.0));
    }

    #[test]
    fn steady_sender() {
        let entries = (0..4).map(|d| e(2 * d, 1, 2, -1.0)).collect();
        let s = summarize(&log(entries, 4)).unwrap();
        assert_eq!((s.count_mean[1], s.count_std[1]), (2.0, 0.0));
        assert_eq!(s.sentiment_mean, -1.0);
    }

    #[test]
    fn sample_std_convention() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 2f64.sqrt()));
        let (m, sd) = mean_std(&[1.0, 3.0, 1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((sd - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn silent_days_are_skipped_for_sentiment() {
        let s = summarize(&log(vec![e(0, 0, 1, 2.0), e(6, 0, 1, 4.0)], 5)).unwrap();
        assert_eq!(s.sentiment_mean, 3.0);
        assert!((s.sentiment_std - 2f64.sqrt()).abs() < 1e-15);
        assert!(summarize(&log(vec![], 1)).is_err());
    }
}
