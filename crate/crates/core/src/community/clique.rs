//! k-clique percolation: communities are unions of k-cliques reachable from
//! one another through k-cliques sharing k-1 nodes.
//!
//! Works on maximal cliques: two maximal cliques of size >= k belong to the
//! same community exactly when they share at least k-1 nodes.

use std::collections::{BTreeSet, HashMap};

use super::{Community, SourceAlgorithm};
use crate::error::{Error, Result};
use crate::model::WeightedInteractionGraph;

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// All maximal cliques (Bron-Kerbosch with Tomita pivoting), each sorted.
pub fn maximal_cliques(graph: &WeightedInteractionGraph) -> Vec<Vec<usize>> {
    let adj: Vec<Vec<usize>> = (0..graph.len())
        .map(|i| graph.neighbours(i).iter().map(|&(j, _)| j).collect())
        .collect();
    let mut out = Vec::new();
    let mut r = Vec::new();
    let p: Vec<usize> = (0..graph.len()).collect();
    expand(&adj, &mut r, p, Vec::new(), &mut out);
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort();
    out
}

fn expand(
    adj: &[Vec<usize>],
    r: &mut Vec<usize>,
    mut p: Vec<usize>,
    mut x: Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() {
        if x.is_empty() {
            out.push(r.clone());
        }
        return;
    }
    let pivot = p
        .iter()
        .chain(&x)
        .copied()
        .max_by_key(|&u| intersect(&adj[u], &p).len())
        .expect("p is non-empty");
    let candidates: Vec<usize> = p
        .iter()
        .copied()
        .filter(|v| adj[pivot].binary_search(v).is_err())
        .collect();
    for v in candidates {
        r.push(v);
        expand(adj, r, intersect(&p, &adj[v]), intersect(&x, &adj[v]), out);
        r.pop();
        p.retain(|&u| u != v);
        let pos = x.binary_search(&v).unwrap_or_else(|e| e);
        x.insert(pos, v);
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Overlapping k-clique communities. Nodes in no k-clique belong to none.
pub fn k_clique_communities(graph: &WeightedInteractionGraph, k: usize) -> Result<Vec<Community>> {
    if k < 3 {
        return Err(Error::invalid(format!("k must be >= 3, got {k}")));
    }
    let cliques: Vec<Vec<usize>> = maximal_cliques(graph)
        .into_iter()
        .filter(|c| c.len() >= k)
        .collect();

    let mut by_node: HashMap<usize, Vec<usize>> = HashMap::new();
    for (ci, c) in cliques.iter().enumerate() {
        for &v in c {
            by_node.entry(v).or_default().push(ci);
        }
    }
    let mut parent: Vec<usize> = (0..cliques.len()).collect();
    for (ci, c) in cliques.iter().enumerate() {
        let mut shared: HashMap<usize, usize> = HashMap::new();
        for v in c {
            for &cj in &by_node[v] {
                if cj > ci {
                    *shared.entry(cj).or_default() += 1;
                }
            }
        }
        for (cj, s) in shared {
            if s >= k - 1 {
                let (a, b) = (find(&mut parent, ci), find(&mut parent, cj));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }

    let mut groups: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    for (ci, c) in cliques.iter().enumerate() {
        let root = find(&mut parent, ci);
        groups.entry(root).or_default().extend(c.iter().copied());
    }
    let mut members: Vec<Vec<_>> = groups
        .into_values()
        .map(|nodes| {
            let mut m: Vec<_> = nodes
                .into_iter()
                .map(|i| graph.users()[i].clone())
                .collect();
            m.sort();
            m
        })
        .collect();
    members.sort();
    Ok(members
        .into_iter()
        .enumerate()
        .map(|(id, members)| Community {
            id,
            source_algorithm: SourceAlgorithm::KClique(k),
            members,
        })
        .collect())
}
