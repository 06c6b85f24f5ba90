mod common;

use std::collections::BTreeSet;

use moodnet::communicability::{broadcast_scores, receive_scores, CommunicabilityConfig};
use moodnet::community::{conductance, k_clique_communities, louvain, modularity};
use moodnet::UserId;
use rand::Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

#[test]
fn communicability_matches_walk_enumeration() {
    let mut r = common::rng(31);
    for case in 0..40 {
        let n = r.random_range(1..=6);
        let t = r.random_range(1..=4);
        let weighted = case % 2 == 0;
        let days = common::random_days(&mut r, n, t, 0.4, weighted);
        let net = common::network_of(&days, n, !weighted);
        for alpha in [0.15, 0.5] {
            let cfg = CommunicabilityConfig::new(alpha, 4).unwrap();
            let b = broadcast_scores(&net, &cfg).unwrap().values;
            let rcv = receive_scores(&net, &cfg).unwrap().values;
            let wb = common::walk_broadcast(&days, n, alpha, 4);
            let wr = common::walk_receive(&days, n, alpha, 4);
            for i in 0..n {
                assert!(
                    close(b[i], wb[i]),
                    "case {case} broadcast {i}: {} vs {}",
                    b[i],
                    wb[i]
                );
                assert!(
                    close(rcv[i], wr[i]),
                    "case {case} receive {i}: {} vs {}",
                    rcv[i],
                    wr[i]
                );
            }
        }
    }
}

#[test]
fn single_edge_scores_by_hand() {
    // one hop u0 -> u1 on one day: broadcast(u0) = 1 + alpha, receive(u1) = 1 + alpha
    let days = vec![vec![vec![(1, 1.0)], vec![]]];
    let net = common::network_of(&days, 2, true);
    let cfg = CommunicabilityConfig::new(0.5, 10).unwrap();
    assert_eq!(broadcast_scores(&net, &cfg).unwrap().values, vec![1.5, 1.0]);
    assert_eq!(receive_scores(&net, &cfg).unwrap().values, vec![1.0, 1.5]);
}

#[test]
fn conductance_matches_edge_counting() {
    let mut r = common::rng(8);
    for _ in 0..30 {
        let n = r.random_range(3..=9);
        let g = common::random_graph(&mut r, n, 0.5, 5);
        for _ in 0..10 {
            let idx: BTreeSet<usize> = (0..n).filter(|_| r.random_bool(0.5)).collect();
            if idx.is_empty() || idx.len() == n {
                continue;
            }
            let s: BTreeSet<UserId> = idx.iter().map(|&i| g.users()[i].clone()).collect();
            for weighted in [false, true] {
                assert_eq!(
                    conductance(&g, &s, weighted).unwrap(),
                    common::brute_conductance(&g, &idx, weighted)
                );
            }
        }
    }
}

#[test]
fn louvain_is_near_the_best_partition() {
    let mut r = common::rng(12);
    for case in 0..20 {
        let n = r.random_range(4..=8);
        let g = common::random_graph(&mut r, n, 0.45, 3);
        let parts = common::all_partitions(n);
        for weighted in [false, true] {
            let best = parts
                .iter()
                .map(|p| common::brute_modularity(&g, p, weighted))
                .fold(f64::NEG_INFINITY, f64::max);
            let comms = louvain(&g, weighted, case);
            let mut labels = vec![usize::MAX; n];
            for c in &comms {
                for u in &c.members {
                    labels[g.index_of(u).unwrap()] = c.id;
                }
            }
            assert!(labels.iter().all(|&l| l != usize::MAX));
            let q = modularity(&g, &labels, weighted);
            assert!(close(q, common::brute_modularity(&g, &labels, weighted)));
            assert!(q >= best - 0.05, "case {case}: louvain {q} vs best {best}");
        }
    }
}

#[test]
fn k_clique_matches_subset_enumeration() {
    let mut r = common::rng(3);
    for _ in 0..40 {
        let n = r.random_range(4..=10);
        let g = common::random_graph(&mut r, n, 0.6, 1);
        for k in 3..=4 {
            let got: BTreeSet<BTreeSet<usize>> = k_clique_communities(&g, k)
                .unwrap()
                .iter()
                .map(|c| c.members.iter().map(|u| g.index_of(u).unwrap()).collect())
                .collect();
            assert_eq!(got, common::brute_kclique(&g, k));
        }
    }
}
