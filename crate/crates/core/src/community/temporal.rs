use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::mention_pairs;
use crate::model::{DateRange, ScaleKind, TweetRecord, UserId};

/// Activity of one community in an earlier period `a` and a later period `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnduranceRecord {
    #[serde(rename = "active_autumn")]
    pub active_a: usize,
    #[serde(rename = "active_spring")]
    pub active_b: usize,
    pub user_loss_factor: f64,
}

fn active_members(tweets: &[TweetRecord], s: &BTreeSet<UserId>, period: &DateRange) -> usize {
    let mut active = BTreeSet::new();
    for (t, m) in mention_pairs(tweets, Some(s), period) {
        active.insert(&t.sender);
        active.insert(m);
    }
    active.len()
}

/// Members who mentioned, or were mentioned by, another member during each
/// period; the loss factor is the earlier count over the later one.
pub fn user_loss_factor(
    tweets: &[TweetRecord],
    s: &BTreeSet<UserId>,
    period_a: &DateRange,
    period_b: &DateRange,
) -> Result<EnduranceRecord> {
    if period_a.overlaps(period_b) {
        return Err(Error::invalid("endurance periods overlap"));
    }
    let active_a = active_members(tweets, s, period_a);
    let active_b = active_members(tweets, s, period_b);
    if active_b == 0 {
        return Err(Error::CommunityExtinct);
    }
    Ok(EnduranceRecord {
        active_a,
        active_b,
        user_loss_factor: active_a as f64 / active_b as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySentiment {
    pub date: NaiveDate,
    /// Absent on days without a scored internal mention.
    pub mean: Option<f64>,
    pub count: usize,
}

/// One entry per day of `window`: the mean score of the internal mentions
/// sent that day.
pub fn daily_sentiment_series(
    tweets: &[TweetRecord],
    s: &BTreeSet<UserId>,
    scale: ScaleKind,
    window: &DateRange,
) -> Vec<DailySentiment> {
    let mut acc: BTreeMap<NaiveDate, (f64, usize)> = BTreeMap::new();
    for (t, _) in mention_pairs(tweets, Some(s), window) {
        if let Some(x) = t.score(scale) {
            let e = acc.entry(t.date()).or_default();
            e.0 += x;
            e.1 += 1;
        }
    }
    window
        .days()
        .map(|date| {
            let (sum, count) = acc.get(&date).copied().unwrap_or((0.0, 0));
            DailySentiment {
                date,
                mean: (count > 0).then(|| sum / count as f64),
                count,
            }
        })
        .collect()
}

fn mean_and_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Dates whose mean lies more than `z_threshold` sample standard deviations
/// from the mean of all present days. Needs at least 8 present days.
pub fn flag_sentiment_anomalies(
    series: &[DailySentiment],
    z_threshold: f64,
) -> Result<Vec<NaiveDate>> {
    let present: Vec<(NaiveDate, f64)> = series
        .iter()
        .filter_map(|d| d.mean.map(|m| (d.date, m)))
        .collect();
    if present.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "{} days with sentiment, need at least 8",
            present.len()
        )));
    }
    let values: Vec<f64> = present.iter().map(|&(_, v)| v).collect();
    let (mean, std) = mean_and_std(&values);
    Ok(present
        .into_iter()
        .filter(|&(_, v)| (v - mean).abs() > z_threshold * std)
        .map(|(d, _)| d)
        .collect())
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(
            "pearson needs at least 2 pairs".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
