//! Do the strongest broadcasters write differently? A simulated month of
//! mentions is scored, the top broadcasters are compared with the whole
//! population and each attribute gets a randomization p-value.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use moodnet::abm::synthetic::{history, random_model, CommunitySpec};
use moodnet::abm::GlobalParams;
use moodnet::communicability::{broadcast_scores, rank_by_score, CommunicabilityConfig};
use moodnet::ingest::build_evolving_network;
use moodnet::sentiment::{
    attributes_by_user, compare_top_groups, edge_scores_by_sender, Attribute,
};
use moodnet::{DateRange, ScaleKind, UserId};

fn main() -> moodnet::Result<()> {
    let spec = CommunitySpec {
        agents: 80,
        edge_probability: 0.08,
        ..Default::default()
    };
    let model = random_model(&spec, GlobalParams::default(), ScaleKind::Ss, 3)?;
    let start = NaiveDate::from_ymd_opt(2014, 10, 9).unwrap();
    let tweets = history(&model, 30, start, 4)?;
    let window = DateRange::starting(start, 30)?;

    let users: BTreeSet<UserId> = model.users.iter().cloned().collect();
    let net = build_evolving_network(&tweets, &users, &window, true)?;
    let scores = broadcast_scores(&net, &CommunicabilityConfig::new(0.3, 10)?)?;
    let ranking = rank_by_score(
        net.users(),
        &scores,
        &net.first_day_active().into_iter().collect(),
    )?;

    let attrs = attributes_by_user(&edge_scores_by_sender(
        &tweets,
        &users,
        &window,
        ScaleKind::Ss,
    ));
    let report = compare_top_groups(&attrs, &ranking, &[5, 10, 20], 20_000, 5)?;
    println!("{} ranked users", report.population);
    for at in Attribute::ALL {
        print!(
            "{:<20} all {:7.3}",
            at.name(),
            report.population_means.get(at)
        );
        for g in &report.groups {
            print!(
                "  top{:<3} {:7.3} (p {:.3})",
                g.top,
                g.means.get(at),
                g.p_values[&at]
            );
        }
        println!();
    }
    Ok(())
}
