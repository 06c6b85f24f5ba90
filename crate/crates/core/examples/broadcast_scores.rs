//! Broadcast and receive scores on a three-day toy network, for the whole
//! grid of penalising factors. Time-respecting walks mean that `a`, who
//! talks to `b` before `b` talks to `c`, out-broadcasts `c`.

use chrono::NaiveDate;
use moodnet::communicability::{rank_by_score, scores_for_alphas, ALPHA_GRID};
use moodnet::model::Snapshot;
use moodnet::sparse::SparseMatrix;
use moodnet::{EvolvingMentionNetwork, UserId};

fn main() -> moodnet::Result<()> {
    let users: Vec<UserId> = ["a", "b", "c", "d"]
        .iter()
        .map(|u| UserId((*u).into()))
        .collect();
    let day = |d: u32, edges: &[(usize, usize)]| -> moodnet::Result<Snapshot> {
        Ok(Snapshot {
            date: NaiveDate::from_ymd_opt(2014, 10, d).unwrap(),
            adjacency: SparseMatrix::from_triplets(4, edges.iter().map(|&(i, j)| (i, j, 1.0)))?,
        })
    };
    let net = EvolvingMentionNetwork::new(
        users.clone(),
        vec![
            day(9, &[(0, 1)])?,
            day(10, &[(1, 2), (3, 2)])?,
            day(11, &[(2, 3)])?,
        ],
        true,
    )?;

    for s in scores_for_alphas(&net, &ALPHA_GRID, 10)? {
        let fmt = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:7.3}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        println!(
            "alpha {:.2}  broadcast {}  receive {}",
            s.alpha,
            fmt(&s.broadcast.values),
            fmt(&s.receive.values)
        );
    }

    let all = scores_for_alphas(&net, &[0.75], 10)?.remove(0);
    let ranking = rank_by_score(&users, &all.broadcast, &users.iter().cloned().collect())?;
    println!("ranking at alpha 0.75: {ranking:?}");
    Ok(())
}
