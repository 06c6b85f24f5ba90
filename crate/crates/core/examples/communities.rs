//! Community detection on a planted three-block graph: Louvain, weighted
//! Louvain and k-clique percolation, with per-community statistics.

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use moodnet::community::{community_stats, k_clique_communities, louvain};
use moodnet::ingest::build_interaction_graph;
use moodnet::model::Scores;
use moodnet::{DateRange, ScaleKind, TweetRecord, UserId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> moodnet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let origin = Utc.with_ymd_and_hms(2014, 10, 9, 0, 0, 0).unwrap();
    let mut tweets = Vec::new();
    // 24 users in three blocks; block b leans towards sentiment 2b - 2
    for a in 0..24usize {
        for b in 0..24usize {
            let same = a / 8 == b / 8;
            if a != b && rng.random_bool(if same { 0.6 } else { 0.03 }) {
                for _ in 0..rng.random_range(1..4) {
                    tweets.push(TweetRecord {
                        tweet_id: format!("t{}", tweets.len()),
                        timestamp: origin + Duration::minutes(rng.random_range(0..14 * 24 * 60)),
                        sender: UserId(format!("u{a:02}")),
                        mentions: vec![UserId(format!("u{b:02}"))],
                        scores: Scores {
                            ss: Some(
                                (2 * (a / 8) as i32 - 2 + rng.random_range(-1..=1)).clamp(-4, 4),
                            ),
                            ..Default::default()
                        },
                    });
                }
            }
        }
    }
    let window = DateRange::starting(NaiveDate::from_ymd_opt(2014, 10, 9).unwrap(), 14)?;
    let graph = build_interaction_graph(&tweets, &window, 1)?;
    println!("{} users, {} edges", graph.len(), graph.edge_count());

    for (name, found) in [
        ("louvain", louvain(&graph, false, 1)),
        ("weighted louvain", louvain(&graph, true, 1)),
        ("4-clique", k_clique_communities(&graph, 4)?),
    ] {
        println!("{name}: {} communities", found.len());
        for c in &found {
            let s = community_stats(&graph, &tweets, &c.member_set(), ScaleKind::Ss, &window)?;
            println!(
                "  #{} size {:2} conductance {:.3} weighted {:.3} mean sentiment {:+.2}",
                c.id,
                s.size,
                s.conductance,
                s.weighted_conductance,
                s.mean_internal_sentiment.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
