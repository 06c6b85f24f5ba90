//! User-level sentiment attributes, group comparisons with randomization
//! p-values, and moving averages along a ranking.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DateRange, ScaleKind, TweetRecord, UserId};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    MeanSentiment,
    MeanAbsSentiment,
    PosFraction,
    ZeroFraction,
    NegFraction,
    AvgPosStrength,
    AvgNegStrength,
}

impl Attribute {
    pub const ALL: [Attribute; 7] = [
        Attribute::MeanSentiment,
        Attribute::MeanAbsSentiment,
        Attribute::PosFraction,
        Attribute::ZeroFraction,
        Attribute::NegFraction,
        Attribute::AvgPosStrength,
        Attribute::AvgNegStrength,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Attribute::MeanSentiment => "mean_sentiment",
            Attribute::MeanAbsSentiment => "mean_abs_sentiment",
            Attribute::PosFraction => "pos_fraction",
            Attribute::ZeroFraction => "zero_fraction",
            Attribute::NegFraction => "neg_fraction",
            Attribute::AvgPosStrength => "avg_pos_strength",
            Attribute::AvgNegStrength => "avg_neg_strength",
        }
    }
}

/// The seven attributes, as held per user or averaged over a group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AttributeValues {
    pub mean_sentiment: f64,
    pub mean_abs_sentiment: f64,
    pub pos_fraction: f64,
    pub zero_fraction: f64,
    pub neg_fraction: f64,
    pub avg_pos_strength: f64,
    pub avg_neg_strength: f64,
}

impl AttributeValues {
    pub fn get(&self, a: Attribute) -> f64 {
        match a {
            Attribute::MeanSentiment => self.mean_sentiment,
            Attribute::MeanAbsSentiment => self.mean_abs_sentiment,
            Attribute::PosFraction => self.pos_fraction,
            Attribute::ZeroFraction => self.zero_fraction,
            Attribute::NegFraction => self.neg_fraction,
            Attribute::AvgPosStrength => self.avg_pos_strength,
            Attribute::AvgNegStrength => self.avg_neg_strength,
        }
    }

    fn get_mut(&mut self, a: Attribute) -> &mut f64 {
        match a {
            Attribute::MeanSentiment => &mut self.mean_sentiment,
            Attribute::MeanAbsSentiment => &mut self.mean_abs_sentiment,
            Attribute::PosFraction => &mut self.pos_fraction,
            Attribute::ZeroFraction => &mut self.zero_fraction,
            Attribute::NegFraction => &mut self.neg_fraction,
            Attribute::AvgPosStrength => &mut self.avg_pos_strength,
            Attribute::AvgNegStrength => &mut self.avg_neg_strength,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserSentimentAttributes {
    #[serde(flatten)]
    pub values: AttributeValues,
    pub edge_count: usize,
}

/// Aggregates the scores of one user's outgoing edges. Both strengths are
/// divided by the full edge count, so `mean = pos_strength - neg_strength`
/// and `mean_abs = pos_strength + neg_strength`.
pub fn user_attributes(edge_scores: &[f64]) -> Result<UserSentimentAttributes> {
    if edge_scores.is_empty() {
        return Err(Error::NoOutgoingEdges);
    }
    let n = edge_scores.len() as f64;
    let (mut pos_sum, mut neg_sum) = (0.0, 0.0);
    let (mut pos, mut zero, mut neg) = (0usize, 0usize, 0usize);
    for &s in edge_scores {
        if s > 0.0 {
            pos += 1;
            pos_sum += s;
        } else if s < 0.0 {
            neg += 1;
            neg_sum -= s;
        } else {
            zero += 1;
        }
    }
    let avg_pos_strength = pos_sum / n;
    let avg_neg_strength = neg_sum / n;
    Ok(UserSentimentAttributes {
        values: AttributeValues {
            mean_sentiment: avg_pos_strength - avg_neg_strength,
            mean_abs_sentiment: avg_pos_strength + avg_neg_strength,
            pos_fraction: pos as f64 / n,
            zero_fraction: zero as f64 / n,
            neg_fraction: neg as f64 / n,
            avg_pos_strength,
            avg_neg_strength,
        },
        edge_count: edge_scores.len(),
    })
}

/// Per-sender edge scores: one entry per (tweet, mention) with both endpoints
/// in `users`, within `window`, excluding self-mentions and tweets without a
/// score on `scale`.
pub fn edge_scores_by_sender(
    tweets: &[TweetRecord],
    users: &BTreeSet<UserId>,
    window: &DateRange,
    scale: ScaleKind,
) -> BTreeMap<UserId, Vec<f64>> {
    let mut out: BTreeMap<UserId, Vec<f64>> = BTreeMap::new();
    for t in tweets {
        if !window.contains(&t.timestamp) || !users.contains(&t.sender) {
            continue;
        }
        let Some(score) = t.score(scale) else {
            continue;
        };
        let k = t.others().filter(|m| users.contains(*m)).count();
        if k > 0 {
            out.entry(t.sender.clone())
                .or_default()
                .extend(std::iter::repeat_n(score, k));
        }
    }
    out
}

pub fn attributes_by_user(
    edge_scores: &BTreeMap<UserId, Vec<f64>>,
) -> BTreeMap<UserId, UserSentimentAttributes> {
    edge_scores
        .iter()
        .filter_map(|(u, s)| user_attributes(s).ok().map(|a| (u.clone(), a)))
        .collect()
}

/// Unweighted mean of each attribute over `subset`.
pub fn group_means<'a>(
    attrs: &BTreeMap<UserId, UserSentimentAttributes>,
    subset: impl IntoIterator<Item = &'a UserId>,
) -> Result<AttributeValues> {
    let mut acc = AttributeValues::default();
    let mut n = 0usize;
    for u in subset {
        let a = attrs
            .get(u)
            .ok_or_else(|| Error::UnknownUser(u.0.clone()))?;
        for at in Attribute::ALL {
            *acc.get_mut(at) += a.values.get(at);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyInput("empty subset"));
    }
    for at in Attribute::ALL {
        *acc.get_mut(at) /= n as f64;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// One-sided randomization p-value for the mean of a size-`subset_size`
/// group. Each of the `n_samples` subsets is drawn without replacement by a
/// partial Fisher-Yates shuffle on its own `(seed, index)` substream, so the
/// result does not depend on thread count. Ties with `observed` count as
/// extreme.
pub fn randomization_pvalue(
    population: &[f64],
    subset_size: usize,
    observed: f64,
    n_samples: usize,
    side: Side,
    seed: u64,
) -> Result<f64> {
    if subset_size == 0 || subset_size > population.len() {
        return Err(Error::invalid(format!(
            "subset size {subset_size} not in 1..={}",
            population.len()
        )));
    }
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be >= 1"));
    }
    if !observed.is_finite() {
        return Err(Error::invalid("observed statistic must be finite"));
    }
    // absorbs summation-order differences between equal subsets
    let tol = 1e-12 * observed.abs().max(1.0);
    let n = population.len();
    let hits: usize = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, &[i as u64]);
            let mean = sample_subset_mean(population, subset_size, n, &mut rng);
            let extreme = match side {
                Side::Lower => mean <= observed + tol,
                Side::Upper => mean >= observed - tol,
            };
            usize::from(extreme)
        })
        .sum();
    Ok(hits as f64 / n_samples as f64)
}

fn sample_subset_mean<R: Rng>(population: &[f64], k: usize, n: usize, rng: &mut R) -> f64 {
    // virtual array of indices with swaps recorded sparsely: O(k) per subset
    let mut swapped: HashMap<usize, usize> = HashMap::with_capacity(2 * k);
    let mut sum = 0.0;
    for i in 0..k {
        let j = rng.random_range(i..n);
        let vj = *swapped.get(&j).unwrap_or(&j);
        let vi = *swapped.get(&i).unwrap_or(&i);
        swapped.insert(j, vi);
        sum += population[vj];
    }
    sum / k as f64
}

/// Convenience wrapper drawing the population from `attrs`.
pub fn attribute_pvalue(
    attrs: &BTreeMap<UserId, UserSentimentAttributes>,
    attribute: Attribute,
    subset_size: usize,
    observed: f64,
    n_samples: usize,
    side: Side,
    seed: u64,
) -> Result<f64> {
    let population: Vec<f64> = attrs.values().map(|a| a.values.get(attribute)).collect();
    randomization_pvalue(&population, subset_size, observed, n_samples, side, seed)
}

/// Means of consecutive windows: element `i` averages `values[i..i + window]`.
pub fn moving_average_by_rank(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window > values.len() {
        return Err(Error::invalid(format!(
            "window {window} not in 1..={}",
            values.len()
        )));
    }
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    for &v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    Ok((0..=values.len() - window)
        .map(|i| (prefix[i + window] - prefix[i]) / window as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub top: usize,
    pub means: AttributeValues,
    /// One-sided p-value per attribute, in the direction the group deviates.
    pub p_values: BTreeMap<Attribute, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopBroadcasterReport {
    pub population: usize,
    pub population_means: AttributeValues,
    pub groups: Vec<GroupComparison>,
}

/// Compares the top-`k` users of `ranking` (restricted to those with
/// attributes) against the whole ranked population, for every `k` in `tops`.
pub fn compare_top_groups(
    attrs: &BTreeMap<UserId, UserSentimentAttributes>,
    ranking: &[UserId],
    tops: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<TopBroadcasterReport> {
    let ranked: Vec<&UserId> = ranking.iter().filter(|u| attrs.contains_key(*u)).collect();
    let pop_attrs: BTreeMap<UserId, UserSentimentAttributes> =
        ranked.iter().map(|&u| (u.clone(), attrs[u])).collect();
    let population_means = group_means(&pop_attrs, ranked.iter().copied())?;
    let mut groups = Vec::new();
    for (gi, &top) in tops.iter().enumerate() {
        if top == 0 || top > ranked.len() {
            return Err(Error::invalid(format!(
                "top {top} exceeds ranked population {}",
                ranked.len()
            )));
        }
        let means = group_means(&pop_attrs, ranked[..top].iter().copied())?;
        let mut p_values = BTreeMap::new();
        for (ai, at) in Attribute::ALL.into_iter().enumerate() {
            let side = if means.get(at) < population_means.get(at) {
                Side::Lower
            } else {
                Side::Upper
            };
            let sub_seed = crate::rng::derive_seed(seed, &[gi as u64, ai as u64]);
            let p = attribute_pvalue(
                &pop_attrs,
                at,
                top,
                means.get(at),
                n_samples,
                side,
                sub_seed,
            )?;
            p_values.insert(at, p);
        }
        groups.push(GroupComparison {
            top,
            means,
            p_values,
        });
    }
    Ok(TopBroadcasterReport {
        population: ranked.len(),
        population_means,
        groups,
    })
}

/// Moving averages of every attribute along `ranking` (users without
/// attributes skipped). Windows wider than the ranked population are clipped.
pub fn moving_averages_by_rank(
    attrs: &BTreeMap<UserId, UserSentimentAttributes>,
    ranking: &[UserId],
    window: usize,
) -> Result<BTreeMap<Attribute, Vec<f64>>> {
    let ranked: Vec<&UserSentimentAttributes> =
        ranking.iter().filter_map(|u| attrs.get(u)).collect();
    let window = window.min(ranked.len());
    Attribute::ALL
        .into_iter()
        .map(|at| {
            let series: Vec<f64> = ranked.iter().map(|a| a.values.get(at)).collect();
            Ok((at, moving_average_by_rank(&series, window)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn attributes_of_mixed_scores() {
        let a = user_attributes(&[2.0, 0.0, -1.0]).unwrap().values;
        assert!(close(a.mean_sentiment, 1.0 / 3.0));
        assert!(close(a.mean_abs_sentiment, 1.0));
        assert!(close(a.pos_fraction, 1.0 / 3.0));
        assert!(close(a.zero_fraction, 1.0 / 3.0));
        assert!(close(a.neg_fraction, 1.0 / 3.0));
        assert!(close(a.avg_pos_strength, 2.0 / 3.0));
        assert!(close(a.avg_neg_strength, 1.0 / 3.0));
    }

    #[test]
    fn attributes_of_degenerate_lists() {
        let z = user_attributes(&[0.0, 0.0]).unwrap();
        assert_eq!(z.values.zero_fraction, 1.0);
        assert_eq!(z.edge_count, 2);
        for at in Attribute::ALL {
            if at != Attribute::ZeroFraction {
                assert_eq!(z.values.get(at), 0.0);
            }
        }
        let s = user_attributes(&[5.0]).unwrap().values;
        assert_eq!(
            (s.mean_sentiment, s.pos_fraction, s.avg_pos_strength),
            (5.0, 1.0, 5.0)
        );
        assert!(matches!(user_attributes(&[]), Err(Error::NoOutgoingEdges)));
    }

    fn attrs_from(lists: &[(&str, &[f64])]) -> BTreeMap<UserId, UserSentimentAttributes> {
        lists
            .iter()
            .map(|(u, s)| (UserId::from(*u), user_attributes(s).unwrap()))
            .collect()
    }

    #[test]
    fn group_mean_examples() {
        let attrs = attrs_from(&[
            ("a", &[1.0, 0.0, 0.0, 0.0, 0.0]),
            ("b", &[1.0, 1.0, 0.0, 0.0, 0.0]),
        ]);
        let a: UserId = "a".into();
        assert_eq!(group_means(&attrs, [&a]).unwrap(), attrs[&a].values);
        let both = group_means(&attrs, attrs.keys()).unwrap();
        assert!(close(both.pos_fraction, 0.3));
        assert!(group_means(&attrs, std::iter::empty()).is_err());
        assert!(group_means(&attrs, [&UserId::from("zz")]).is_err());
    }

    #[test]
    fn pvalue_extremes_and_preconditions() {
        let pop: Vec<f64> = (0..200).map(|i| i as f64).collect();
        // smallest achievable mean of 20 values
        let min_mean = (0..20).map(|i| i as f64).sum::<f64>() / 20.0;
        let p = randomization_pvalue(&pop, 20, min_mean, 5000, Side::Lower, 3).unwrap();
        assert!(p <= 1.0 / 5000.0);
        let p_up = randomization_pvalue(&pop, 20, min_mean, 500, Side::Upper, 3).unwrap();
        assert_eq!(p_up, 1.0);
        assert!(randomization_pvalue(&pop, 20, f64::NEG_INFINITY, 10, Side::Lower, 1).is_err());
        assert!(randomization_pvalue(&pop, 201, 1.0, 10, Side::Lower, 1).is_err());
        assert!(randomization_pvalue(&pop, 0, 1.0, 10, Side::Lower, 1).is_err());
        assert!(randomization_pvalue(&pop, 5, 1.0, 0, Side::Lower, 1).is_err());
    }

    #[test]
    fn pvalue_is_seed_reproducible() {
        let pop: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64).collect();
        let a = randomization_pvalue(&pop, 10, 4.5, 1000, Side::Lower, 42).unwrap();
        let b = randomization_pvalue(&pop, 10, 4.5, 1000, Side::Lower, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn full_population_subset_has_a_single_mean() {
        let pop = vec![0.1, 0.7, 0.3];
        let mean = pop.iter().sum::<f64>() / 3.0;
        assert_eq!(
            randomization_pvalue(&pop, 3, mean, 50, Side::Lower, 0).unwrap(),
            1.0
        );
        assert_eq!(
            randomization_pvalue(&pop, 3, mean, 50, Side::Upper, 0).unwrap(),
            1.0
        );
    }

    #[test]
    fn moving_average_examples() {
        assert_eq!(
            moving_average_by_rank(&[1.0, 2.0, 3.0], 1).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(
            moving_average_by_rank(&[1.0, 2.0, 3.0, 4.0], 2).unwrap(),
            vec![1.5, 2.5, 3.5]
        );
        assert_eq!(moving_average_by_rank(&[7.0; 5], 3).unwrap(), vec![7.0; 3]);
        assert!(moving_average_by_rank(&[1.0], 2).is_err());
        assert!(moving_average_by_rank(&[1.0], 0).is_err());
    }

    #[test]
    fn top_group_report_shape() {
        let attrs = attrs_from(&[
            ("a", &[3.0, 2.0]),
            ("b", &[1.0, 0.0]),
            ("c", &[0.0, -1.0]),
            ("d", &[-2.0, -2.0]),
        ]);
        let ranking: Vec<UserId> = ["a", "b", "c", "d", "nobody"]
            .iter()
            .map(|&s| s.into())
            .collect();
        let r = compare_top_groups(&attrs, &ranking, &[1, 2], 200, 9).unwrap();
        assert_eq!(r.population, 4);
        assert_eq!(r.groups.len(), 2);
        assert_eq!(r.groups[0].means, attrs[&UserId::from("a")].values);
        assert_eq!(r.groups[0].p_values.len(), 7);
        assert!(compare_top_groups(&attrs, &ranking, &[5], 10, 0).is_err());
    }
}
