//! Simulates a random 28-user community for a week, then rebuilds a model
//! from the resulting history and compares the estimated probabilities with
//! the ones that generated it.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use moodnet::abm::synthetic::{random_model, CommunitySpec};
use moodnet::abm::{build_model, log_to_tweets, simulate, summarize, GlobalParams};
use moodnet::{DateRange, ScaleKind, UserId};

fn main() -> moodnet::Result<()> {
    let globals = GlobalParams {
        contagion_factor: 0.05,
        reset_probability: 0.2,
        ..Default::default()
    };
    let model = random_model(&CommunitySpec::default(), globals, ScaleKind::Mc, 17)?;
    println!("{} agents, {} edges", model.len(), model.edge_count());

    let log = simulate(&model, 7, 1)?;
    let moments = summarize(&log)?;
    println!(
        "{} bursts, {} messages; daily sentiment {:.2} +- {:.2}",
        log.entries.len(),
        log.message_count(),
        moments.sentiment_mean,
        moments.sentiment_std
    );

    let start = NaiveDate::from_ymd_opt(2015, 3, 1).unwrap();
    let tweets = log_to_tweets(&log, start, ScaleKind::Mc);
    let members: BTreeSet<UserId> = model.users.iter().cloned().collect();
    let rebuilt = build_model(
        &tweets,
        &members,
        globals,
        ScaleKind::Mc,
        &DateRange::starting(start, 7)?,
    )?;
    println!("agent     p_init true/est     p_reply true/est    baseline true/est");
    for (i, u) in model.users.iter().enumerate().take(8) {
        let (t, e) = (
            &model.profiles[i],
            &rebuilt.profiles[rebuilt.index_of(u).unwrap()],
        );
        println!(
            "{u}   {:.4} / {:.4}     {:.4} / {:.4}     {:+5.1} / {:+5.1}",
            t.p_init, e.p_init, t.p_reply, e.p_reply, t.baseline_sentiment, e.baseline_sentiment
        );
    }
    Ok(())
}
