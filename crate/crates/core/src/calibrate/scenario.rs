use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abm::{simulate, summarize, AgentProfile, Model};
use crate::error::{Error, Result};
use crate::model::UserId;
use crate::rng::derive_seed;

/// Which three existing users a new user attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[serde(rename = "most_positive_3")]
    MostPositive3,
    #[serde(rename = "most_negative_3")]
    MostNegative3,
    #[serde(rename = "highest_reply_3")]
    HighestReply3,
    #[serde(rename = "lowest_reply_3")]
    LowestReply3,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::MostPositive3,
        Strategy::MostNegative3,
        Strategy::HighestReply3,
        Strategy::LowestReply3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::MostPositive3 => "most_positive_3",
            Strategy::MostNegative3 => "most_negative_3",
            Strategy::HighestReply3 => "highest_reply_3",
            Strategy::LowestReply3 => "lowest_reply_3",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown strategy '{s}'")))
    }
}

fn pick_three(model: &Model, strategy: Strategy) -> Vec<usize> {
    let mut order: Vec<usize> = (0..model.len()).collect();
    let key = |i: usize| {
        let p = &model.profiles[i];
        match strategy {
            Strategy::MostPositive3 => -p.baseline_sentiment,
            Strategy::MostNegative3 => p.baseline_sentiment,
            Strategy::HighestReply3 => -p.p_reply,
            Strategy::LowestReply3 => p.p_reply,
        }
    };
    order.sort_by(|&a, &b| {
        key(a)
            .total_cmp(&key(b))
            .then_with(|| model.users[a].cmp(&model.users[b]))
    });
    order.truncate(3);
    order
}

/// Adds one agent linked to the three users chosen by `strategy` (ties by
/// user id). Its probabilities are `multiplier` times the community maxima,
/// capped at 1; its baseline and neutral levels are the community's neutral
/// level. Existing agents keep their profiles.
pub fn scenario_new_user(model: &Model, strategy: Strategy, multiplier: f64) -> Result<Model> {
    if model.len() < 3 {
        return Err(Error::InsufficientData(
            "a scenario needs at least 3 users".into(),
        ));
    }
    if !(multiplier >= 0.0 && multiplier.is_finite()) {
        return Err(Error::invalid("multiplier must be >= 0"));
    }
    let chosen = pick_three(model, strategy);
    let max = |f: fn(&AgentProfile) -> f64| model.profiles.iter().map(f).fold(0.0, f64::max);
    let level = model
        .profiles
        .iter()
        .map(|p| p.neutral_sentiment)
        .sum::<f64>()
        / model.len() as f64;
    let profile = AgentProfile {
        p_init: (multiplier * max(|p| p.p_init)).min(1.0),
        p_reply: (multiplier * max(|p| p.p_reply)).min(1.0),
        p_prop: (multiplier * max(|p| p.p_prop)).min(1.0),
        baseline_sentiment: level,
        neutral_sentiment: level,
    };

    let mut id = "new_user".to_string();
    while model.users.iter().any(|u| u.0 == id) {
        id.push('_');
    }
    let new = model.len();
    let mut users = model.users.clone();
    users.push(UserId(id));
    let mut neighbours = model.neighbours.clone();
    for &c in &chosen {
        neighbours[c].push(new);
    }
    let mut sorted = chosen;
    sorted.sort_unstable();
    neighbours.push(sorted);
    let mut profiles = model.profiles.clone();
    profiles.push(profile);

    let mut out = Model::new(users, neighbours, profiles, model.globals, model.scale)?;
    out.sentiment_mode = model.sentiment_mode;
    out.baseline_fallback = model.baseline_fallback.clone();
    out.baseline_fallback.push(false);
    Ok(out)
}

/// Community-level metrics averaged over runs. Activity is the number of
/// messages sent per day by the whole community.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    /// `baseline` or a strategy name.
    pub arm: String,
    pub activity_mean: f64,
    pub activity_std: f64,
    pub sentiment_mean: f64,
    pub sentiment_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub runs: usize,
    pub days: usize,
    pub multiplier: f64,
    pub common_random_numbers: bool,
    /// The unmodified model first, then one row per strategy.
    pub arms: Vec<ArmSummary>,
}

fn run_arm(
    model: &Model,
    arm: String,
    arm_key: u64,
    days: usize,
    runs: usize,
    seed: u64,
    crn: bool,
) -> Result<ArmSummary> {
    let per_run = (0..runs)
        .into_par_iter()
        .map(|r| {
            let s = if crn {
                derive_seed(seed, &[r as u64])
            } else {
                derive_seed(seed, &[arm_key, r as u64])
            };
            let log = simulate(model, days, s)?;
            let m = summarize(&log)?;
            let mut daily = vec![0.0; days];
            for e in &log.entries {
                daily[log.day_of(e.step)] += f64::from(e.burst);
            }
            let (am, asd) = crate::abm::mean_std(&daily);
            Ok([am, asd, m.sentiment_mean, m.sentiment_std])
        })
        .collect::<Result<Vec<[f64; 4]>>>()?;
    let mut acc = [0.0; 4];
    for r in &per_run {
        for k in 0..4 {
            acc[k] += r[k];
        }
    }
    let n = runs as f64;
    Ok(ArmSummary {
        arm,
        activity_mean: acc[0] / n,
        activity_std: acc[1] / n,
        sentiment_mean: acc[2] / n,
        sentiment_std: acc[3] / n,
    })
}

/// Simulates the unmodified model and each strategy's extended model.
///
/// With `common_random_numbers`, run `r` of every arm uses the same seed, so
/// existing agents draw identical random numbers across arms and differences
/// reflect the strategy rather than sampling noise.
pub fn scenario_compare(
    model: &Model,
    strategies: &[Strategy],
    multiplier: f64,
    days: usize,
    runs: usize,
    seed: u64,
    common_random_numbers: bool,
) -> Result<ScenarioReport> {
    if runs == 0 {
        return Err(Error::invalid("runs must be >= 1"));
    }
    let mut arms = vec![run_arm(
        model,
        "baseline".into(),
        0,
        days,
        runs,
        seed,
        common_random_numbers,
    )?];
    for (i, &s) in strategies.iter().enumerate() {
        let m = scenario_new_user(model, s, multiplier)?;
        arms.push(run_arm(
            &m,
            s.name().into(),
            i as u64 + 1,
            days,
            runs,
            seed,
            common_random_numbers,
        )?);
    }
    Ok(ScenarioReport {
        runs,
        days,
        multiplier,
        common_random_numbers,
        arms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abm::GlobalParams;
    use crate::model::ScaleKind;

    fn community(baselines: &[f64], replies: &[f64]) -> Model {
        let n = baselines.len();
        let neighbours = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).collect())
            .collect();
        let profiles = baselines
            .iter()
            .zip(replies)
            .map(|(&b, &r)| AgentProfile {
                p_init: 0.4,
                p_reply: r,
                p_prop: 0.01,
                baseline_sentiment: b,
                neutral_sentiment: 1.0,
            })
            .collect();
        Model::new(
            (0..n).map(|i| UserId(format!("u{i}"))).collect(),
            neighbours,
            profiles,
            GlobalParams {
                iterations_per_day: 4,
                ..Default::default()
            },
            ScaleKind::Mc,
        )
        .unwrap()
    }

    #[test]
    fn picks_by_strategy_with_id_ties() {
        let m = community(&[5.0, 3.0, 1.0, -2.0], &[0.1, 0.3, 0.3, 0.2]);
        assert_eq!(pick_three(&m, Strategy::MostPositive3), vec![0, 1, 2]);
        assert_eq!(pick_three(&m, Strategy::MostNegative3), vec![3, 2, 1]);
        assert_eq!(pick_three(&m, Strategy::HighestReply3), vec![1, 2, 3]);
        assert_eq!(pick_three(&m, Strategy::LowestReply3), vec![0, 3, 1]);
    }

    #[test]
    fn new_user_profile_is_capped_and_others_untouched() {
        let m = community(&[5.0, 3.0, 1.0, -2.0], &[0.1, 0.3, 0.3, 0.2]);
        let out = scenario_new_user(&m, Strategy::MostPositive3, 3.0).unwrap();
        assert_eq!(out.len(), 5);
        let p = out.profiles[4];
        assert_eq!(p.p_init, 1.0);
        assert!((p.p_reply - 0.9).abs() < 1e-12);
        assert_eq!(p.baseline_sentiment, 1.0);
        assert_eq!(out.neighbours[4], vec![0, 1, 2]);
        assert_eq!(&out.profiles[..4], &m.profiles[..]);
        assert!(out.neighbours[0].contains(&4) && !out.neighbours[3].contains(&4));
        assert!(scenario_new_user(
            &community(&[1.0, 2.0], &[0.1, 0.1]),
            Strategy::MostPositive3,
            3.0
        )
        .is_err());
    }

    #[test]
    fn silent_newcomer_sends_nothing() {
        let m = community(&[5.0, 3.0, 1.0, -2.0], &[0.1, 0.3, 0.3, 0.2]);
        let out = scenario_new_user(&m, Strategy::MostNegative3, 0.0).unwrap();
        let log = simulate(&out, 3, 11).unwrap();
        assert!(log.entries.iter().all(|e| e.sender != 4));
        let r = scenario_compare(&m, &Strategy::ALL, 0.0, 3, 4, 11, true).unwrap();
        assert_eq!(r.arms.len(), 5);
        assert_eq!(r.arms[0].arm, "baseline");
    }
}
