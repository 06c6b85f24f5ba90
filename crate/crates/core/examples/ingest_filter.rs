//! Filters a hand-made set of tweets: a chatty bot and a self-mentioner are
//! removed, the reciprocated core is extracted and daily snapshots are built.

use chrono::{Duration, TimeZone, Utc};
use moodnet::ingest::{build_evolving_network, filter_users, reciprocal_core, FilterConfig};
use moodnet::model::Scores;
use moodnet::{DateRange, TweetRecord, UserId};

fn tweet(id: usize, hours: i64, sender: &str, mentions: &[&str], mc: i32) -> TweetRecord {
    TweetRecord {
        tweet_id: format!("t{id}"),
        timestamp: Utc.with_ymd_and_hms(2014, 10, 9, 8, 0, 0).unwrap() + Duration::hours(hours),
        sender: UserId(sender.into()),
        mentions: mentions.iter().map(|m| UserId((*m).into())).collect(),
        scores: Scores {
            mc: Some(mc),
            ..Default::default()
        },
    }
}

fn main() -> moodnet::Result<()> {
    let mut tweets = Vec::new();
    let chats = [
        ("ana", "ben"),
        ("ben", "ana"),
        ("ben", "cy"),
        ("cy", "ben"),
        ("cy", "ana"),
        ("dee", "ana"),
    ];
    for day in 0..5 {
        for (i, (a, b)) in chats.iter().enumerate() {
            tweets.push(tweet(
                tweets.len(),
                day * 24 + i as i64,
                a,
                &[b],
                (i as i32 % 5) - 2,
            ));
        }
    }
    // a bot posting every four minutes
    for i in 0..600 {
        let mut t = tweet(tweets.len(), 0, "bot", &["ana"], 0);
        t.timestamp += Duration::minutes(4 * i);
        tweets.push(t);
    }
    // someone mostly talking to themselves
    for i in 0..6 {
        tweets.push(tweet(tweets.len(), i, "echo", &["echo"], 3));
    }
    tweets.push(tweet(tweets.len(), 7, "echo", &["ben"], 3));

    let cfg = FilterConfig {
        min_tweets_for_frequency: 50,
        ..Default::default()
    };
    let report = filter_users(&tweets, &cfg)?;
    println!(
        "excluded for frequency:     {:?}",
        report.excluded_frequency
    );
    println!(
        "excluded for self-mentions: {:?}",
        report.excluded_self_mention
    );
    println!("retained:                   {:?}", report.retained);

    let window = DateRange::starting(chrono::NaiveDate::from_ymd_opt(2014, 10, 9).unwrap(), 5)?;
    let core = reciprocal_core(&tweets, &report.retained, &window);
    println!("reciprocated core:          {core:?}");

    let net = build_evolving_network(&tweets, &core, &window, true)?;
    for snap in net.snapshots() {
        println!("{}: {} directed edges", snap.date, snap.adjacency.nnz());
    }
    Ok(())
}
