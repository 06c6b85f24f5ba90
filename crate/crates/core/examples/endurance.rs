//! Two simulated communities over two periods: one keeps talking, the other
//! loses most of its members. Prints user-loss factors, daily sentiment and
//! the days flagged as anomalous.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use moodnet::abm::synthetic::{history, random_model, CommunitySpec};
use moodnet::abm::GlobalParams;
use moodnet::community::{daily_sentiment_series, flag_sentiment_anomalies, user_loss_factor};
use moodnet::{DateRange, ScaleKind, TweetRecord, UserId};

fn main() -> moodnet::Result<()> {
    let autumn = NaiveDate::from_ymd_opt(2014, 10, 1).unwrap();
    let spring = NaiveDate::from_ymd_opt(2015, 3, 1).unwrap();
    let spec = CommunitySpec {
        agents: 12,
        edge_probability: 0.5,
        ..Default::default()
    };
    let lively = random_model(&spec, GlobalParams::default(), ScaleKind::Mc, 1)?;
    let mut tweets: Vec<TweetRecord> = history(&lively, 30, autumn, 2)?;
    tweets.extend(history(&lively, 30, spring, 3)?);

    // only the first four members of the fading community still talk in spring
    let mut fading = random_model(&spec, GlobalParams::default(), ScaleKind::Mc, 4)?;
    for u in &mut fading.users {
        u.0 = u.0.replace("agent", "fading");
    }
    tweets.extend(history(&fading, 30, autumn, 5)?);
    let stayers: BTreeSet<UserId> = fading.users[..4].iter().cloned().collect();
    tweets.extend(
        history(&fading, 30, spring, 6)?.into_iter().filter(|t| {
            stayers.contains(&t.sender) && t.mentions.iter().all(|m| stayers.contains(m))
        }),
    );

    let period_a = DateRange::starting(autumn, 30)?;
    let period_b = DateRange::starting(spring, 30)?;
    for (name, model) in [("lively", &lively), ("fading", &fading)] {
        let members: BTreeSet<UserId> = model.users.iter().cloned().collect();
        let e = user_loss_factor(&tweets, &members, &period_a, &period_b)?;
        println!(
            "{name}: active {} -> {}, user loss factor {:.2}",
            e.active_a, e.active_b, e.user_loss_factor
        );

        let series = daily_sentiment_series(&tweets, &members, ScaleKind::Mc, &period_a);
        let line: Vec<String> = series
            .iter()
            .map(|d| d.mean.map_or("-".into(), |m| format!("{m:.1}")))
            .collect();
        println!("  daily mean sentiment: {}", line.join(" "));
        println!(
            "  anomalies (z > 2): {:?}",
            flag_sentiment_anomalies(&series, 2.0)?
        );
    }
    Ok(())
}
